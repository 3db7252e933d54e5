// Copyright 2026 The Disa Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef DISA_NUMERICS_GRADCHECK_HPP
#define DISA_NUMERICS_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "disa/numerics/tensor.hpp"

namespace disa::num {

struct GradCheckResult {
  double max_rel_error = 0;
  std::size_t coordinates = 0;
  std::size_t worst_index = 0;
  bool passed = true;
};

/// Compares `analytic` against central differences of `loss` (step 1e-5) on
/// up to `max_coords` coordinates of `params`, sampled with `seed`. The loss
/// closure must read `params` in place; each probed entry is restored.
/// Relative error is |a - n| / max(1e-8, |a| + |n|).
inline GradCheckResult finite_diff_check(const std::function<double()>& loss, std::span<double> params,
                                         std::span<const double> analytic, double tolerance,
                                         std::uint64_t seed = 0, std::size_t max_coords = 100,
                                         double step = 1e-5) {
  if (params.size() != analytic.size()) throw ShapeError("gradient check: gradient length differs from params");
  std::vector<std::size_t> idx(params.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (idx.size() > max_coords) {
    Rng rng(seed);
    shuffle(idx, rng);
    idx.resize(max_coords);
    std::sort(idx.begin(), idx.end());
  }
  GradCheckResult r;
  for (std::size_t i : idx) {
    const double saved = params[i];
    params[i] = saved + step;
    const double up = loss();
    params[i] = saved - step;
    const double down = loss();
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic[i];
    const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
    if (rel > r.max_rel_error) {
      r.max_rel_error = rel;
      r.worst_index = i;
    }
    ++r.coordinates;
  }
  r.passed = r.max_rel_error <= tolerance;
  return r;
}

}  // namespace disa::num

#endif  // DISA_NUMERICS_GRADCHECK_HPP
