// SPDX-License-Identifier: Apache-2.0
//
// mimobf: finite-blocklength limits of coherent MIMO block-fading channels
// ------------------------------------------------------------------------

#ifndef MIMOBF_MATRIX_HPP
#define MIMOBF_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "errors.hpp"

namespace mimobf {

/// Small dense row-major real matrix. Value semantics; no expression templates.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto &row : init) {
            require(row.size() == cols_, "Matrix: ragged initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double *row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const double *row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

    const std::vector<double> &data() const { return data_; }
    std::vector<double> &data() { return data_; }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                t(j, i) = (*this)(i, j);
        return t;
    }

    double frobenius_sq() const {
        double s = 0.0;
        for (double v : data_)
            s += v * v;
        return s;
    }
    double frobenius() const { return std::sqrt(frobenius_sq()); }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v))
                return false;
        return true;
    }

    Matrix &operator+=(const Matrix &o) {
        require(rows_ == o.rows_ && cols_ == o.cols_, "Matrix +=: shape mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] += o.data_[i];
        return *this;
    }
    Matrix &operator-=(const Matrix &o) {
        require(rows_ == o.rows_ && cols_ == o.cols_, "Matrix -=: shape mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] -= o.data_[i];
        return *this;
    }
    Matrix &operator*=(double s) {
        for (double &v : data_)
            v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix &b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix &b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }

    friend Matrix operator*(const Matrix &a, const Matrix &b) {
        require(a.cols_ == b.rows_, "Matrix *: inner dimension mismatch");
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            double *ci = c.row_ptr(i);
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0)
                    continue;
                const double *bk = b.row_ptr(k);
                for (std::size_t j = 0; j < b.cols_; ++j)
                    ci[j] += aik * bk[j];
            }
        }
        return c;
    }

    friend bool operator==(const Matrix &, const Matrix &) = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// A Aᵀ, exploiting symmetry.
inline Matrix gram_rows(const Matrix &a) {
    const std::size_t m = a.rows(), n = a.cols();
    Matrix g(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        const double *ai = a.row_ptr(i);
        for (std::size_t j = 0; j <= i; ++j) {
            const double *aj = a.row_ptr(j);
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                s += ai[k] * aj[k];
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    return g;
}

// Aᵀ A, exploiting symmetry.
inline Matrix gram_cols(const Matrix &a) {
    const std::size_t m = a.rows(), n = a.cols();
    Matrix g(n, n);
    for (std::size_t k = 0; k < m; ++k) {
        const double *ak = a.row_ptr(k);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = ak[i];
            if (v == 0.0)
                continue;
            for (std::size_t j = 0; j <= i; ++j)
                g(i, j) += v * ak[j];
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            g(j, i) = g(i, j);
    return g;
}

} // namespace mimobf

#endif
