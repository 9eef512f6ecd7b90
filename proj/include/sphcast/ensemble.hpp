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
#ifndef SPHCAST_ENSEMBLE_HPP
#define SPHCAST_ENSEMBLE_HPP

#include "sphcast/date.hpp"
#include "sphcast/ensemble_plan.hpp"
#include "sphcast/quantiles.hpp"
#include "sphcast/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace sphcast {

/// Final probabilistic forecast for one (forecast date, location): 28 days x
/// quantile levels, in count space. Rows are non-decreasing and non-negative
/// once emitted by the aggregation below.
struct QuantileForecast {
    Date forecast_date;
    std::string location;
    std::vector<double> levels;
    Tensor2 values; // [28 x levels]

    double value(std::size_t day, std::size_t level_idx) const { return values(day - 1, level_idx); }

    std::size_t median_index() const {
        for (std::size_t q = 0; q < levels.size(); ++q)
            if (std::abs(levels[q] - 0.5) < 1e-12) return q;
        throw ValidationError("forecast has no 0.5 level");
    }
};

/// Median of the members covering one forecast step. The plan guarantees an
/// odd count (15 in the standard plan), so this is an exact order statistic.
inline double aggregate_median(std::vector<double> values, std::size_t expected_count) {
    if (values.size() != expected_count)
        throw ValidationError("aggregate_median: expected " + std::to_string(expected_count) +
                              " member predictions, got " + std::to_string(values.size()));
    for (double v : values)
        if (!std::isfinite(v)) throw ValidationError("aggregate_median: non-finite member prediction");
    std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    if (values.size() % 2 == 1) return values[mid];
    double hi = values[mid];
    double lo = *std::max_element(values.begin(), values.begin() + mid);
    return 0.5 * (lo + hi);
}

/// Sorts one quantile row ascending; the multiset of values is preserved.
inline std::vector<double> reorder_quantiles(std::vector<double> row) {
    for (double v : row)
        if (!std::isfinite(v)) throw ValidationError("reorder_quantiles: non-finite value");
    std::sort(row.begin(), row.end());
    return row;
}

/// Per-member raw model output for one location: [horizon x levels] in count
/// space, covering days offset .. offset+horizon-1.
struct MemberPrediction {
    MemberSpec spec;
    Tensor2 counts; // [spec.horizon_len x levels]
};

/// Aggregates member predictions into the final forecast: per (day, level)
/// the median of all covering members, clamped at zero, then each day's row
/// reordered to restore quantile monotonicity.
inline QuantileForecast aggregate_forecast(Date forecast_date, const std::string& location,
                                           const EnsemblePlan& plan,
                                           const std::vector<MemberPrediction>& predictions,
                                           const std::vector<double>& levels,
                                           std::size_t horizon_days = 28) {
    if (predictions.size() != plan.size())
        throw ValidationError("aggregate_forecast: have " + std::to_string(predictions.size()) +
                              " member predictions, plan has " + std::to_string(plan.size()));
    check_level_set(levels);
    QuantileForecast out;
    out.forecast_date = forecast_date;
    out.location = location;
    out.levels = levels;
    out.values = Tensor2(horizon_days, levels.size());
    for (std::size_t day = 1; day <= horizon_days; ++day) {
        auto covering = plan.members_covering(day);
        if (covering.empty())
            throw ValidationError("plan covers no members for day " + std::to_string(day));
        std::vector<double> row(levels.size());
        std::vector<double> member_values;
        member_values.reserve(covering.size());
        for (std::size_t q = 0; q < levels.size(); ++q) {
            member_values.clear();
            for (std::size_t m : covering) {
                const MemberPrediction& p = predictions[m];
                if (p.spec.horizon_len != plan.members[m].horizon_len ||
                    p.spec.target_offset != plan.members[m].target_offset)
                    throw ValidationError("aggregate_forecast: prediction " + std::to_string(m) +
                                          " does not match plan member (" +
                                          std::to_string(plan.members[m].horizon_len) + "," +
                                          std::to_string(plan.members[m].target_offset) + ")");
                member_values.push_back(p.counts(day - p.spec.target_offset, q));
            }
            double med = aggregate_median(member_values, covering.size());
            row[q] = std::max(0.0, med);
        }
        row = reorder_quantiles(row);
        for (std::size_t q = 0; q < levels.size(); ++q) out.values(day - 1, q) = row[q];
    }
    return out;
}

} // namespace sphcast

#endif
