/*
* Copyright (C) 2026 sphcast contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef SPHCAST_QUANTILES_HPP
#define SPHCAST_QUANTILES_HPP

#include "sphcast/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace sphcast {

/// The 23 probability levels required for hospitalization submissions.
inline const std::vector<double>& hub_quantile_levels() {
    static const std::vector<double> levels = {
        0.010, 0.025, 0.050, 0.100, 0.150, 0.200, 0.250, 0.300, 0.350, 0.400, 0.450, 0.500,
        0.550, 0.600, 0.650, 0.700, 0.750, 0.800, 0.850, 0.900, 0.950, 0.975, 0.990};
    return levels;
}

/// Validates a symmetric odd-length level set with a 0.5 median: the form
/// every probabilistic output and every interval-based score relies on.
inline void check_level_set(const std::vector<double>& levels) {
    const std::size_t n = levels.size();
    if (n < 3 || n % 2 == 0) throw ValidationError("level set must have odd size >= 3");
    for (std::size_t k = 0; k + 1 < n; ++k)
        if (!(levels[k] < levels[k + 1])) throw ValidationError("levels must be strictly increasing");
    if (!(levels.front() > 0.0) || !(levels.back() < 1.0))
        throw ValidationError("levels must lie in (0,1)");
    if (std::abs(levels[n / 2] - 0.5) > 1e-12) throw ValidationError("middle level must be 0.5");
    for (std::size_t k = 0; k < n / 2; ++k)
        if (std::abs(levels[k] + levels[n - 1 - k] - 1.0) > 1e-12)
            throw ValidationError("levels must be symmetric around 0.5");
}

/// Central-interval alphas implied by a symmetric level set: alpha_k equals
/// twice the k-th lower-tail level. For the 23 hub levels this enumerates the
/// 11 values {0.02, 0.05, 0.10, 0.20, ..., 0.90}.
inline std::vector<double> interval_alphas(const std::vector<double>& levels) {
    check_level_set(levels);
    std::vector<double> alphas(levels.size() / 2);
    for (std::size_t k = 0; k < alphas.size(); ++k) alphas[k] = 2.0 * levels[k];
    return alphas;
}

/// Empirical quantile with linear interpolation between order statistics
/// (the convention numpy and R default to).
inline double empirical_quantile(std::vector<double> sorted_values, double q) {
    if (sorted_values.empty()) throw ValidationError("empirical_quantile: empty sample");
    if (q < 0.0 || q > 1.0) throw ValidationError("empirical_quantile: q outside [0,1]");
    const std::size_t n = sorted_values.size();
    double h = static_cast<double>(n - 1) * q;
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return sorted_values[n - 1];
    double frac = h - static_cast<double>(lo);
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

} // namespace sphcast

#endif
