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
#ifndef SPHCAST_ENSEMBLE_PLAN_HPP
#define SPHCAST_ENSEMBLE_PLAN_HPP

#include "sphcast/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sphcast {

/// One staggered direct multi-output member: trained on targets
/// y[t+offset .. t+offset+horizon-1] from inputs ending at t.
struct MemberSpec {
    std::size_t horizon_len = 0;   // 7, 14 or 28 days
    std::size_t target_offset = 0; // first predicted day relative to the forecast date
    std::uint64_t seed = 0;

    bool covers(std::size_t day) const {
        return day >= target_offset && day < target_offset + horizon_len;
    }

    void validate() const {
        static const std::pair<std::size_t, std::size_t> legal[] = {
            {7, 1}, {7, 8}, {7, 15}, {7, 22}, {14, 1}, {14, 15}, {28, 1}};
        for (auto [h, o] : legal)
            if (h == horizon_len && o == target_offset) {
                if (target_offset + horizon_len - 1 > 28)
                    throw ValidationError("member spec exceeds the 28-day horizon");
                return;
            }
        throw ValidationError("illegal member subgroup (" + std::to_string(horizon_len) + "," +
                              std::to_string(target_offset) + ")");
    }
};

/// The multi-horizon training plan. The standard plan has 34 members
/// (7-day: 4 staggered subgroups x 4 seeds, 14-day: 2 x 7, 28-day: 1 x 4) so
/// that every forecast day is predicted by exactly 15 members.
struct EnsemblePlan {
    std::vector<MemberSpec> members;

    static EnsemblePlan build(std::uint64_t seed_base, std::size_t seeds_7, std::size_t seeds_14,
                              std::size_t seeds_28) {
        if (seeds_7 == 0 || seeds_14 == 0 || seeds_28 == 0)
            throw ValidationError("every subgroup needs at least one seed");
        EnsemblePlan plan;
        std::uint64_t idx = 0;
        auto add = [&](std::size_t h, std::size_t o, std::size_t count) {
            for (std::size_t s = 0; s < count; ++s) {
                MemberSpec m{h, o, seed_base + idx++};
                m.validate();
                plan.members.push_back(m);
            }
        };
        for (std::size_t o : {1, 8, 15, 22}) add(7, o, seeds_7);
        for (std::size_t o : {1, 15}) add(14, o, seeds_14);
        add(28, 1, seeds_28);
        return plan;
    }

    /// The standard 34-member plan.
    static EnsemblePlan standard(std::uint64_t seed_base) { return build(seed_base, 4, 7, 4); }

    std::size_t size() const { return members.size(); }

    std::vector<std::size_t> members_covering(std::size_t day) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < members.size(); ++i)
            if (members[i].covers(day)) out.push_back(i);
        return out;
    }
};

} // namespace sphcast

#endif
