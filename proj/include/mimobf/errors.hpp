// SPDX-License-Identifier: Apache-2.0
//
// mimobf: finite-blocklength limits of coherent MIMO block-fading channels
// ------------------------------------------------------------------------

#ifndef MIMOBF_ERRORS_HPP
#define MIMOBF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mimobf {

// Bad caller input: dimensions, ranges, unsupported model/parameter mixes.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// An iterative routine did not converge or hit a degenerate quantity.
class NumericalFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string &what) {
    if (!cond)
        throw InvalidArgument(what);
}

} // namespace mimobf

#endif
