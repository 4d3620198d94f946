// Copyright 2026 The segmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "segmark/error.h"
#include "segmark/stats.h"

namespace segmark {

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "normal_quantile requires q in (0, 1)");
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
}

}  // namespace segmark
