// SPDX-License-Identifier: Apache-2.0
//
// mimobf command-line front end. Kept header-only and stream-based so the
// test suite can drive it in process.

#ifndef MIMOBF_TOOLS_COMMANDS_HPP
#define MIMOBF_TOOLS_COMMANDS_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <mimobf/mimobf.hpp>

namespace mimobf::cli {

using nlohmann::ordered_json;

inline constexpr const char *kSchema = "mimobf-output/1";

enum class Format { Json, Csv, Text };

struct Options {
    int n_t = 4;
    int n_r = 4;
    int coherence_T = 1;
    std::string snr_db = "20";
    std::string power_convention = "transmit";
    std::string model = "gaussian";
    double variance = 1.0;
    std::uint64_t samples = 100000;
    std::uint64_t seed = 1;
    std::uint64_t chunk = 4096;
    unsigned threads = 0;
    std::string units = "bits";
    std::string format = "json";
    std::string out;
    bool timing = false;

    // approx / blocklength
    double eps = 1e-3;
    double eta = 0.9;
    std::string vstar = "telatar";
    double n_min = 10;
    double n_max = 1e5;
    int points = 25;

    // vstar / design / haar-check / simulate
    int max_dim = 8;
    int haar_n = 4;
    std::string input = "telatar";
    std::string x;
};

/// Linear SNR from a dB string; "-inf" means zero power.
inline double parse_snr_db(const std::string &s) {
    if (s == "-inf" || s == "-Inf" || s == "-INF")
        return 0.0;
    std::size_t used = 0;
    double db = 0.0;
    try {
        db = std::stod(s, &used);
    } catch (const std::exception &) {
        throw InvalidArgument("--snr-db: cannot parse '" + s + "'");
    }
    require(used == s.size() && std::isfinite(db), "--snr-db: cannot parse '" + s + "'");
    return std::pow(10.0, db / 10.0);
}

/// "a,b;c,d" -> 2×2 matrix (rows separated by ';').
inline Matrix parse_matrix(const std::string &s) {
    std::vector<std::vector<double>> rows;
    std::stringstream rs(s);
    std::string row;
    while (std::getline(rs, row, ';')) {
        std::vector<double> vals;
        std::stringstream cs(row);
        std::string cell;
        while (std::getline(cs, cell, ',')) {
            try {
                std::size_t used = 0;
                vals.push_back(std::stod(cell, &used));
                require(cell.find_first_not_of(" \t", used) == std::string::npos, "--x: bad entry '" + cell + "'");
            } catch (const std::logic_error &) {
                throw InvalidArgument("--x: bad entry '" + cell + "'");
            }
        }
        rows.push_back(std::move(vals));
    }
    require(!rows.empty() && !rows[0].empty(), "--x: empty matrix");
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i].size() == m.cols(), "--x: ragged rows");
        for (std::size_t j = 0; j < m.cols(); ++j)
            m(i, j) = rows[i][j];
    }
    return m;
}

struct Resolved {
    ChannelParams params;
    FadingModel model;
    MonteCarloConfig mc;
    Units units = Units::Bits;
    Format format = Format::Json;
};

inline Resolved resolve(const Options &o) {
    Resolved r;
    r.params.n_t = o.n_t;
    r.params.n_r = o.n_r;
    r.params.coherence_T = o.coherence_T;
    r.params.power = parse_snr_db(o.snr_db);
    r.params.convention = o.power_convention == "received" ? PowerConvention::Received : PowerConvention::Transmit;
    r.params.validate();
    r.model = o.model == "rademacher" ? FadingModel::scalar_rademacher() : FadingModel::iid_gaussian(o.variance);
    r.model.check(r.params);
    r.mc = {o.samples, o.seed, o.chunk, o.threads};
    r.mc.validate();
    r.units = o.units == "nats" ? Units::Nats : Units::Bits;
    r.format = o.format == "csv" ? Format::Csv : o.format == "text" ? Format::Text : Format::Json;
    return r;
}

inline ordered_json estimate_json(const Estimate &e) { return {{"value", e.value}, {"stderr", e.std_error}}; }

/// Output document plus an optional flat table for CSV and a text rendering.
struct Output {
    ordered_json result = ordered_json::object();
    std::vector<std::string> csv_header;
    std::vector<std::vector<std::string>> csv_rows;
    std::string text;
};

inline std::string num(double v) {
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

inline ordered_json num_or_inf(double v) {
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return v;
}

inline ordered_json params_json(const Options &o, const Resolved &r) {
    return {{"nt", o.n_t},
            {"nr", o.n_r},
            {"T", o.coherence_T},
            {"snr_db", o.snr_db},
            {"power_linear", r.params.power},
            {"power_convention", to_string(r.params.convention)},
            {"model", r.model.name()},
            {"variance", r.model.variance}};
}

// ---------------------------------------------------------------- commands

inline void add_report(Output &out, const DispersionReport &rep, bool full) {
    out.result["transmit_power"] = rep.transmit_power;
    out.result["capacity"] = estimate_json(rep.capacity);
    out.csv_header = {"quantity", "value", "stderr"};
    out.csv_rows.push_back({"capacity", num(rep.capacity.value), num(rep.capacity.std_error)});
    if (!full)
        return;
    out.result["dispersion"] = estimate_json(rep.dispersion);
    out.result["terms"] = {{"fading_variance", estimate_json(rep.fading_term)},
                           {"awgn_dispersion", estimate_json(rep.awgn_term)},
                           {"power", estimate_json(rep.power_term)}};
    out.result["eta"] = {{"eta1", estimate_json(rep.eta.eta1)}, {"eta2", estimate_json(rep.eta.eta2)},
                         {"eta3", estimate_json(rep.eta.eta3)}, {"eta4", estimate_json(rep.eta.eta4)},
                         {"eta5", estimate_json(rep.eta.eta5)}};
    const std::pair<const char *, const Estimate *> rows[] = {
        {"dispersion", &rep.dispersion}, {"fading_variance", &rep.fading_term}, {"awgn_dispersion", &rep.awgn_term},
        {"power_term", &rep.power_term}, {"eta1", &rep.eta.eta1},                {"eta2", &rep.eta.eta2},
        {"eta3", &rep.eta.eta3},         {"eta4", &rep.eta.eta4},                {"eta5", &rep.eta.eta5}};
    for (const auto &[name, e] : rows)
        out.csv_rows.push_back({name, num(e->value), num(e->std_error)});
}

/// Normalized input variance selected by --vstar for a rank-1 channel.
inline std::optional<double> select_vstar(const Options &o, const Resolved &r) {
    if (o.vstar == "telatar")
        return std::nullopt;
    require(is_rank1(r.params, r.model), "--vstar other than telatar needs a rank-1 channel (nr = 1 or nt = 1)");
    if (o.vstar == "optimal")
        return double(vstar_entry(r.params.n_t, r.params.coherence_T).lower);
    double v = 0.0;
    try {
        std::size_t used = 0;
        v = std::stod(o.vstar, &used);
        require(used == o.vstar.size(), "");
    } catch (const std::exception &) {
        throw InvalidArgument("--vstar must be telatar, optimal or a number");
    }
    return v;
}

inline DispersionReport channel_report(const Options &o, const Resolved &r) {
    const auto vs = select_vstar(o, r);
    DispersionReport rep = vs ? v_rank1(r.params, r.model, *vs, r.mc) : v_iid(r.params, r.model, r.mc);
    return rep.in_units(r.units);
}

inline Output cmd_capacity(const Options &o, const Resolved &r) {
    Output out;
    const ChannelParams p = to_transmit(r.params, r.model);
    DispersionReport rep;
    rep.transmit_power = p.power;
    rep.capacity = capacity(r.params, r.model, r.mc);
    rep = rep.in_units(r.units);
    (void)o;
    add_report(out, rep, false);
    return out;
}

inline Output cmd_dispersion(const Options &o, const Resolved &r) {
    Output out;
    const auto vs = select_vstar(o, r);
    if (vs)
        out.result["vstar"] = *vs;
    add_report(out, channel_report(o, r), true);
    return out;
}

inline Output cmd_approx(const Options &o, const Resolved &r) {
    require(o.n_min >= 1 && o.n_max >= o.n_min, "approx: need 1 <= --n-min <= --n-max");
    require(o.points >= 1, "approx: --points must be positive");
    qfunc_inv(o.eps); // validates eps
    const DispersionReport rep = channel_report(o, r);
    const int T = r.params.coherence_T;
    std::vector<std::uint64_t> blocks;
    for (int k = 0; k < o.points; ++k) {
        const double f = o.points == 1 ? 0.0 : double(k) / (o.points - 1);
        const double n = o.n_min * std::pow(o.n_max / o.n_min, f);
        const auto b = static_cast<std::uint64_t>(std::max(1.0, std::ceil(n / T - 1e-9)));
        if (blocks.empty() || b > blocks.back())
            blocks.push_back(b);
    }
    Output out;
    out.result["eps"] = o.eps;
    out.result["capacity"] = estimate_json(rep.capacity);
    out.result["dispersion"] = estimate_json(rep.dispersion);
    ordered_json rows = ordered_json::array();
    out.csv_header = {"channel_uses", "rate", "log_m"};
    for (auto b : blocks) {
        const NormalApprox na = normal_approx_logM(b, o.eps, rep.capacity.value, rep.dispersion.value, r.params);
        rows.push_back({{"channel_uses", na.channel_uses}, {"rate", na.rate}, {"log_m", na.log_m}});
        out.csv_rows.push_back({num(na.channel_uses), num(na.rate), num(na.log_m)});
    }
    out.result["curve"] = rows;
    return out;
}

inline Output cmd_blocklength(const Options &o, const Resolved &r) {
    const auto vs = select_vstar(o, r);
    const DispersionReport rep = channel_report(o, r);
    require(rep.capacity.value > 0.0, "blocklength: capacity is zero (no power)");
    const Blocklength bl = min_blocklength(o.eta, o.eps, rep.capacity.value, rep.dispersion.value,
                                           r.params.coherence_T);
    Output out;
    if (vs)
        out.result["vstar"] = *vs;
    out.result["eta"] = o.eta;
    out.result["eps"] = o.eps;
    out.result["capacity"] = estimate_json(rep.capacity);
    out.result["dispersion"] = estimate_json(rep.dispersion);
    out.result["channel_uses"] = num_or_inf(bl.channel_uses);
    out.result["channel_uses_rounded"] = num_or_inf(bl.rounded_channel_uses);
    out.csv_header = {"quantity", "value"};
    out.csv_rows = {{"capacity", num(rep.capacity.value)},
                    {"dispersion", num(rep.dispersion.value)},
                    {"channel_uses", num(bl.channel_uses)},
                    {"channel_uses_rounded", num(bl.rounded_channel_uses)}};
    return out;
}

inline std::string aligned_grid(const std::vector<std::vector<std::string>> &cells) {
    std::size_t w = 1;
    for (const auto &row : cells)
        for (const auto &c : row)
            w = std::max(w, c.size());
    std::ostringstream s;
    for (const auto &row : cells) {
        for (std::size_t j = 0; j < row.size(); ++j)
            s << (j ? " " : "") << std::setw(int(w)) << row[j];
        s << "\n";
    }
    return s.str();
}

inline Output cmd_vstar(const Options &o) {
    require(o.max_dim >= 1 && o.max_dim <= 32, "vstar: --max must lie in [1, 32]");
    const auto table = vstar_table(o.max_dim);
    Output out;
    ordered_json entries = ordered_json::array();
    out.csv_header = {"nt", "T", "lower", "upper", "exact", "method"};
    std::vector<std::vector<std::string>> grid;
    for (int i = 0; i < o.max_dim; ++i) {
        std::vector<std::string> line;
        for (int j = 0; j < o.max_dim; ++j) {
            const VstarEntry &e = table[std::size_t(i) * o.max_dim + j];
            ordered_json je = {{"nt", e.n_t}, {"T", e.T}};
            if (e.exact)
                je["value"] = e.lower;
            je["lower"] = e.lower;
            je["upper"] = e.upper;
            je["exact"] = e.exact;
            je["method"] = e.method;
            entries.push_back(je);
            out.csv_rows.push_back({std::to_string(e.n_t), std::to_string(e.T), std::to_string(e.lower),
                                    std::to_string(e.upper), e.exact ? "true" : "false", e.method});
            line.push_back(e.exact ? std::to_string(e.lower)
                                   : "[" + std::to_string(e.lower) + "," + std::to_string(e.upper) + "]");
        }
        grid.push_back(line);
    }
    out.result["max"] = o.max_dim;
    out.result["entries"] = entries;
    out.text = aligned_grid(grid);
    return out;
}

inline Output cmd_design(const Options &o, const Resolved &r) {
    const int nt = o.n_t, T = o.coherence_T;
    require(nt >= 1 && T >= 1 && nt <= 64 && T <= 64, "design: --nt and --T must lie in [1, 64]");
    OccupancyDesign d;
    std::string method;
    if (vstar_upper(nt, T).exact) {
        d = full_rate_design(nt, T);
        method = "full-rate";
    } else {
        const int small = std::min(nt, T), large = std::max(nt, T);
        const int m = truncation_base_size(small, large);
        const OccupancyDesign base = assemble_design(build_hr_family(m, rho(m)), rho(m));
        d = truncation_search(small, large, base).design;
        if (nt > T)
            d = d.transpose();
        method = "truncation";
    }
    const double P = r.params.power > 0 ? r.params.power : 1.0;
    const CaidCheck chk = check_caid(design_cov(d, P));
    const FrobVariance fv = var_frobsq(d, P);
    Output out;
    out.result["method"] = method;
    ordered_json grid = ordered_json::array();
    std::vector<std::vector<std::string>> cells;
    out.csv_header.clear();
    for (int j = 0; j < d.cols; ++j)
        out.csv_header.push_back("c" + std::to_string(j + 1));
    for (int i = 0; i < d.rows; ++i) {
        std::vector<std::string> row;
        for (int j = 0; j < d.cols; ++j)
            row.push_back(d.token(i, j));
        grid.push_back(row);
        cells.push_back(row);
        out.csv_rows.push_back(row);
    }
    out.result["grid"] = grid;
    out.result["score"] = fv.score;
    out.result["vstar_upper"] = vstar_upper(nt, T).upper;
    out.result["caid_check"] = {{"rows_ok", chk.rows_ok}, {"cols_ok", chk.cols_ok}, {"violations", chk.violations}};
    out.text = aligned_grid(cells);
    return out;
}

inline Output cmd_haar_check(const Options &o, const Resolved &r) {
    const int n = o.haar_n;
    require(n >= 2 && n <= 256, "haar-check: --n must lie in [2, 256]");
    const SampleTable t = fill_samples(r.mc, StreamTag::Haar, 6, [n](RngStream &rng, double *row) {
        const Matrix v = sample_haar_orthogonal(std::size_t(n), rng);
        const double vij = v(0, 0), vik = v(0, 1), vkl = v(1, 1), vlj = v(1, 0);
        row[0] = vij * vij;
        row[1] = vij * vik;
        row[2] = vij * vij * vik * vik;
        row[3] = vij * vij * vkl * vkl;
        row[4] = vij * vij * vij * vij;
        row[5] = vij * vik * vlj * vkl;
    });
    const double N = n;
    const double expect[6] = {1 / N,
                              0.0,
                              1 / (N * (N + 2)),
                              (N + 1) / (N * (N - 1) * (N + 2)),
                              3 / (N * (N + 2)),
                              -1 / (N * (N - 1) * (N + 2))};
    const char *names[6] = {"E[V_ij^2]",         "E[V_ij V_ik]",  "E[V_ij^2 V_ik^2]",
                            "E[V_ij^2 V_kl^2]", "E[V_ij^4]",     "E[V_ij V_ik V_lj V_lk]"};
    JackknifeMoments jk(t);
    Output out;
    ordered_json moments = ordered_json::array();
    bool all = true;
    out.csv_header = {"moment", "estimate", "stderr", "expected", "z", "pass"};
    for (int c = 0; c < 6; ++c) {
        const double mean = jk.full().mean(std::size_t(c));
        const double se = std::sqrt(jk.full().var(std::size_t(c)) / double(t.rows));
        const double z = se > 0 ? (mean - expect[c]) / se : 0.0;
        const bool pass = std::abs(z) <= 4.0;
        all = all && pass;
        moments.push_back({{"moment", names[c]},
                           {"estimate", mean},
                           {"stderr", se},
                           {"expected", expect[c]},
                           {"z", z},
                           {"pass", pass}});
        out.csv_rows.push_back({names[c], num(mean), num(se), num(expect[c]), num(z), pass ? "true" : "false"});
    }
    out.result["n"] = n;
    out.result["moments"] = moments;
    out.result["all_pass"] = all;
    return out;
}

inline Output cmd_simulate(const Options &o, const Resolved &r) {
    const ChannelParams p = to_transmit(r.params, r.model);
    const double kr = rate_scale(r.units), kv = dispersion_scale(r.units);
    auto scaled = [](Estimate e, double k) { return ordered_json{{"value", e.value * k}, {"stderr", e.std_error * k}}; };
    Output out;
    out.csv_header = {"quantity", "value", "stderr"};
    if (o.x.empty() && o.input == "telatar") {
        const DispersionReport rep = v_iid(r.params, r.model, r.mc);
        const TelatarVarianceEstimate tv = telatar_information_variance(r.model, r.params, r.mc);
        out.result["input"] = "telatar";
        out.result["empirical"] = {{"mean", scaled(tv.mean, kr)},
                                   {"conditional_variance", scaled(tv.conditional, kv)},
                                   {"unconditional_variance", scaled(tv.unconditional, kv)}};
        out.result["analytic"] = {{"capacity", scaled(rep.capacity, kr)}, {"dispersion", scaled(rep.dispersion, kv)}};
        out.csv_rows = {{"empirical_mean", num(tv.mean.value * kr), num(tv.mean.std_error * kr)},
                        {"empirical_conditional_variance", num(tv.conditional.value * kv),
                         num(tv.conditional.std_error * kv)},
                        {"empirical_unconditional_variance", num(tv.unconditional.value * kv),
                         num(tv.unconditional.std_error * kv)},
                        {"capacity", num(rep.capacity.value * kr), num(rep.capacity.std_error * kr)},
                        {"dispersion", num(rep.dispersion.value * kv), num(rep.dispersion.std_error * kv)}};
        return out;
    }
    Matrix x;
    if (!o.x.empty())
        x = parse_matrix(o.x);
    else if (o.input == "zero")
        x = Matrix(p.n_t, p.coherence_T);
    else
        throw InvalidArgument("simulate: --input must be telatar or zero, or pass --x");
    require(x.rows() == std::size_t(p.n_t) && x.cols() == std::size_t(p.coherence_T), "simulate: --x must be nt x T");
    const FadingFunctionals f = fading_functionals(p, r.model, r.mc);
    const CondMomentEstimate m = empirical_conditional_moments(x, r.model, p, r.mc);
    // Undefined when the density is constant; that surfaces as exit 3.
    const double be = berry_esseen_ratio({x}, r.model, p, r.mc);
    out.result["input"] = o.x.empty() ? "zero" : "explicit";
    out.result["empirical"] = {{"mean", scaled(m.mean, kr)},
                               {"variance", scaled(m.variance, kv)},
                               {"abs_third_central", estimate_json(m.abs_third_central)}};
    out.result["analytic"] = {{"mean", d1_of_x(x, f) * kr}, {"variance", v1_of_x(x, f) * kv}};
    out.result["berry_esseen_ratio"] = be;
    out.csv_rows = {{"empirical_mean", num(m.mean.value * kr), num(m.mean.std_error * kr)},
                    {"empirical_variance", num(m.variance.value * kv), num(m.variance.std_error * kv)},
                    {"analytic_mean", num(d1_of_x(x, f) * kr), "0"},
                    {"analytic_variance", num(v1_of_x(x, f) * kv), "0"}};
    return out;
}

// ---------------------------------------------------------------- driver

/// Flat key=value file turned into "--key value" arguments. Blank lines and
/// lines starting with '#' are skipped.
inline std::vector<std::string> read_config(const std::string &path) {
    std::ifstream in(path);
    require(bool(in), "cannot read config file '" + path + "'");
    std::vector<std::string> args;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos, path + ":" + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r\"");
            const auto e = s.find_last_not_of(" \t\r\"");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        require(!key.empty(), path + ":" + std::to_string(lineno) + ": empty key");
        if (key == "timing") {
            if (value == "true" || value == "1")
                args.push_back("--timing");
            continue;
        }
        args.push_back("--" + key);
        args.push_back(value);
    }
    return args;
}

inline void write_csv(std::ostream &os, const ordered_json &manifest, const Output &out) {
    for (const auto &[k, v] : manifest.items())
        os << "# " << k << "=" << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
    for (std::size_t j = 0; j < out.csv_header.size(); ++j)
        os << (j ? "," : "") << out.csv_header[j];
    os << "\n";
    for (const auto &row : out.csv_rows) {
        for (std::size_t j = 0; j < row.size(); ++j)
            os << (j ? "," : "") << row[j];
        os << "\n";
    }
}

/// Runs one command. args excludes the program name. Returns the process exit
/// code: 0 success, 2 invalid arguments, 3 numerical failure.
inline int run_cli(std::vector<std::string> args, std::ostream &os, std::ostream &err) {
    Options o;
    CLI::App app{"Finite-blocklength limits of coherent MIMO block-fading channels", "mimobf"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(MIMOBF_VERSION));

    std::string config;
    auto add_common = [&](CLI::App *sub, bool channel, bool mc) {
        sub->add_option("--config", config, "Flat key=value file with defaults; flags override it");
        sub->add_option("--units", o.units, "Output units")->check(CLI::IsMember({"bits", "nats"}));
        sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv", "text"}));
        sub->add_option("--out", o.out, "Write output to this file instead of stdout");
        sub->add_flag("--timing", o.timing, "Record wall-clock time in the manifest");
        if (channel) {
            sub->add_option("--nt", o.n_t, "Transmit antennas");
            sub->add_option("--nr", o.n_r, "Receive antennas");
            sub->add_option("--T", o.coherence_T, "Coherence time in channel uses");
            sub->add_option("--snr-db", o.snr_db, "SNR in dB (-inf for zero power)");
            sub->add_option("--power-convention", o.power_convention, "How --snr-db is read")
                ->check(CLI::IsMember({"transmit", "received"}));
            sub->add_option("--model", o.model, "Fading law")->check(CLI::IsMember({"gaussian", "rademacher"}));
            sub->add_option("--variance", o.variance, "Per-entry variance of Gaussian fading");
        }
        if (mc) {
            sub->add_option("--samples", o.samples, "Monte Carlo samples");
            sub->add_option("--seed", o.seed, "Random seed");
            sub->add_option("--chunk", o.chunk, "Samples per deterministic substream");
            sub->add_option("--threads", o.threads, "Worker threads (0: MIMOBF_THREADS or all cores)");
        }
    };

    auto *capacity_cmd = app.add_subcommand("capacity", "Ergodic capacity per channel use");
    add_common(capacity_cmd, true, true);
    auto *dispersion_cmd = app.add_subcommand("dispersion", "Capacity, dispersion and its breakdown");
    add_common(dispersion_cmd, true, true);
    dispersion_cmd->add_option("--vstar", o.vstar, "telatar, optimal or a number (rank-1 channels)");
    auto *approx_cmd = app.add_subcommand("approx", "Normal-approximation rate versus blocklength");
    add_common(approx_cmd, true, true);
    approx_cmd->add_option("--eps", o.eps, "Block error probability");
    approx_cmd->add_option("--n-min", o.n_min, "Smallest blocklength (channel uses)");
    approx_cmd->add_option("--n-max", o.n_max, "Largest blocklength (channel uses)");
    approx_cmd->add_option("--points", o.points, "Number of log-spaced blocklengths");
    approx_cmd->add_option("--vstar", o.vstar, "telatar, optimal or a number (rank-1 channels)");
    auto *block_cmd = app.add_subcommand("blocklength", "Channel uses needed to reach a fraction of capacity");
    add_common(block_cmd, true, true);
    block_cmd->add_option("--eta", o.eta, "Target fraction of capacity");
    block_cmd->add_option("--eps", o.eps, "Block error probability");
    block_cmd->add_option("--vstar", o.vstar, "telatar, optimal or a number (rank-1 channels)");
    auto *vstar_cmd = app.add_subcommand("vstar", "Table of v*(nt, T) values and bounds");
    add_common(vstar_cmd, false, false);
    vstar_cmd->add_option("--max", o.max_dim, "Largest nt and T");
    auto *design_cmd = app.add_subcommand("design", "Orthogonal-design input for an nt x T block");
    add_common(design_cmd, false, false);
    design_cmd->add_option("--nt", o.n_t, "Rows (transmit antennas)");
    design_cmd->add_option("--T", o.coherence_T, "Columns (coherence time)");
    design_cmd->add_option("--snr-db", o.snr_db, "SNR in dB used for the covariance check");
    auto *haar_cmd = app.add_subcommand("haar-check", "Fourth-order moment check of Haar sampling");
    add_common(haar_cmd, false, true);
    haar_cmd->add_option("--n", o.haar_n, "Matrix size");
    auto *sim_cmd = app.add_subcommand("simulate", "Information-density simulation against the closed forms");
    add_common(sim_cmd, true, true);
    sim_cmd->add_option("--input", o.input, "telatar or zero")->check(CLI::IsMember({"telatar", "zero"}));
    sim_cmd->add_option("--x", o.x, "Explicit block input, rows separated by ';', entries by ','");

    // Config-file values go first so that explicit flags (parsed later) win.
    if (!args.empty()) {
        for (std::size_t i = 1; i < args.size(); ++i) {
            std::string path;
            if (args[i] == "--config" && i + 1 < args.size())
                path = args[i + 1];
            else if (args[i].rfind("--config=", 0) == 0)
                path = args[i].substr(9);
            if (path.empty())
                continue;
            try {
                auto extra = read_config(path);
                args.insert(args.begin() + 1, extra.begin(), extra.end());
            } catch (const InvalidArgument &e) {
                err << "error: " << e.what() << "\n";
                return 2;
            }
            break;
        }
    }

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp &e) {
        os << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp &e) {
        os << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion &e) {
        os << MIMOBF_VERSION << "\n";
        return 0;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    CLI::App *sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    try {
        Resolved r;
        if (name == "vstar" || name == "design" || name == "haar-check") {
            // Channel flags are irrelevant or partial here.
            r.mc = {o.samples, o.seed, o.chunk, o.threads};
            r.mc.validate();
            r.params.power = parse_snr_db(o.snr_db);
            r.units = o.units == "nats" ? Units::Nats : Units::Bits;
            r.format = o.format == "csv" ? Format::Csv : o.format == "text" ? Format::Text : Format::Json;
        } else {
            r = resolve(o);
        }

        Output out;
        if (name == "capacity")
            out = cmd_capacity(o, r);
        else if (name == "dispersion")
            out = cmd_dispersion(o, r);
        else if (name == "approx")
            out = cmd_approx(o, r);
        else if (name == "blocklength")
            out = cmd_blocklength(o, r);
        else if (name == "vstar")
            out = cmd_vstar(o);
        else if (name == "design")
            out = cmd_design(o, r);
        else if (name == "haar-check")
            out = cmd_haar_check(o, r);
        else
            out = cmd_simulate(o, r);

        ordered_json manifest = {{"tool", "mimobf"},
                                 {"version", MIMOBF_VERSION},
                                 {"schema", kSchema},
                                 {"subcommand", name}};
        ordered_json parameters = ordered_json::object();
        if (name != "vstar" && name != "design" && name != "haar-check")
            parameters = params_json(o, r);
        if (name == "design") {
            parameters["nt"] = o.n_t;
            parameters["T"] = o.coherence_T;
            parameters["snr_db"] = o.snr_db;
        }
        if (name == "vstar")
            parameters["max"] = o.max_dim;
        if (name == "haar-check")
            parameters["n"] = o.haar_n;
        if (name == "approx") {
            parameters["eps"] = o.eps;
            parameters["n_min"] = o.n_min;
            parameters["n_max"] = o.n_max;
            parameters["points"] = o.points;
        }
        if (name == "blocklength") {
            parameters["eta"] = o.eta;
            parameters["eps"] = o.eps;
        }
        if (name == "dispersion" || name == "approx" || name == "blocklength")
            parameters["vstar"] = o.vstar;
        if (name == "simulate") {
            parameters["input"] = o.x.empty() ? o.input : "explicit";
            if (!o.x.empty())
                parameters["x"] = o.x;
        }
        manifest["parameters"] = parameters;
        const bool sampled = name != "vstar" && name != "design";
        if (sampled) {
            manifest["seed"] = o.seed;
            manifest["samples"] = o.samples;
            manifest["chunk"] = o.chunk;
            manifest["rng"] = kRngIdentifier;
        }
        manifest["units"] = to_string(r.units);
        if (o.timing)
            manifest["wall_clock_seconds"] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        std::ofstream file;
        std::ostream *dst = &os;
        if (!o.out.empty()) {
            file.open(o.out);
            require(bool(file), "cannot open output file '" + o.out + "'");
            dst = &file;
        }
        if (r.format == Format::Csv) {
            write_csv(*dst, manifest, out);
        } else if (r.format == Format::Text && !out.text.empty()) {
            *dst << out.text;
        } else {
            ordered_json doc = {{"manifest", manifest}, {"result", out.result}};
            *dst << doc.dump(2) << "\n";
        }
        return 0;
    } catch (const InvalidArgument &e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalFailure &e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

} // namespace mimobf::cli

#endif
