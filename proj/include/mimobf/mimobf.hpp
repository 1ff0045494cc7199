// SPDX-License-Identifier: Apache-2.0
//
// mimobf: finite-blocklength limits of coherent MIMO block-fading channels
// ------------------------------------------------------------------------

#ifndef MIMOBF_MIMOBF_HPP
#define MIMOBF_MIMOBF_HPP

#define MIMOBF_VERSION "1.0.0"

#include "designs.hpp"
#include "dispersion.hpp"
#include "errors.hpp"
#include "fading.hpp"
#include "infodensity.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "montecarlo.hpp"
#include "rng.hpp"

#endif
