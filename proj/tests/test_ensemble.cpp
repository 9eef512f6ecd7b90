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
#include "sphcast/ensemble.hpp"
#include "sphcast/hub_csv.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <set>

using namespace sphcast;
namespace tu = sphcast::testutil;

TEST(Plan, StandardPlanHasThirtyFourMembers) {
    EnsemblePlan plan = EnsemblePlan::standard(100);
    EXPECT_EQ(plan.size(), 34u);
    std::set<std::uint64_t> seeds;
    for (const auto& m : plan.members) seeds.insert(m.seed);
    EXPECT_EQ(seeds.size(), 34u) << "seeds must be distinct";
}

TEST(Plan, EveryDayCoveredByFifteenMembers) {
    EnsemblePlan plan = EnsemblePlan::standard(7);
    for (std::size_t day = 1; day <= 28; ++day) {
        auto covering = plan.members_covering(day);
        EXPECT_EQ(covering.size(), 15u) << "day " << day;
    }
    EXPECT_TRUE(plan.members_covering(29).empty());
    EXPECT_TRUE(plan.members_covering(0).empty());
}

TEST(Plan, DayThirteenSubgroupBreakdown) {
    EnsemblePlan plan = EnsemblePlan::standard(7);
    std::size_t n7 = 0, n14 = 0, n28 = 0;
    for (std::size_t i : plan.members_covering(13)) {
        const MemberSpec& m = plan.members[i];
        if (m.horizon_len == 7) {
            EXPECT_EQ(m.target_offset, 8u);
            ++n7;
        } else if (m.horizon_len == 14) {
            EXPECT_EQ(m.target_offset, 1u);
            ++n14;
        } else {
            EXPECT_EQ(m.target_offset, 1u);
            ++n28;
        }
    }
    EXPECT_EQ(n7, 4u);
    EXPECT_EQ(n14, 7u);
    EXPECT_EQ(n28, 4u);
}

TEST(Plan, DeterministicForSeedBase) {
    EnsemblePlan a = EnsemblePlan::standard(42);
    EnsemblePlan b = EnsemblePlan::standard(42);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a.members[i].seed, b.members[i].seed);
        EXPECT_EQ(a.members[i].horizon_len, b.members[i].horizon_len);
        EXPECT_EQ(a.members[i].target_offset, b.members[i].target_offset);
    }
}

TEST(Plan, ReducedPlanCoversEveryDayWithThree) {
    EnsemblePlan plan = EnsemblePlan::build(5, 1, 1, 1);
    EXPECT_EQ(plan.size(), 7u);
    for (std::size_t day = 1; day <= 28; ++day) EXPECT_EQ(plan.members_covering(day).size(), 3u);
}

TEST(Plan, IllegalSubgroupRejected) {
    MemberSpec bad{7, 3, 1};
    EXPECT_THROW(bad.validate(), ValidationError);
    MemberSpec bad2{28, 15, 1};
    EXPECT_THROW(bad2.validate(), ValidationError);
}

TEST(Median, MiddleOfOddCount) {
    std::vector<double> v(15);
    std::iota(v.begin(), v.end(), 1.0);
    EXPECT_DOUBLE_EQ(aggregate_median(v, 15), 8.0);
}

TEST(Median, RobustToSingleOutlier) {
    std::vector<double> v(15, 5.0);
    v[3] = 1e9;
    EXPECT_DOUBLE_EQ(aggregate_median(v, 15), 5.0);
}

TEST(Median, PermutationInvariant) {
    Rng rng(5);
    std::vector<double> v(15);
    for (double& x : v) x = rng.uniform(-50.0, 50.0);
    double base = aggregate_median(v, 15);
    for (int trial = 0; trial < 10; ++trial) {
        rng.shuffle(v);
        EXPECT_DOUBLE_EQ(aggregate_median(v, 15), base);
    }
}

TEST(Median, WrongCountRejected) {
    EXPECT_THROW(aggregate_median({1.0, 2.0}, 15), ValidationError);
}

TEST(Reorder, SortsAndPreservesMultiset) {
    EXPECT_EQ(reorder_quantiles({1.0, 2.0, 3.0}), (std::vector<double>{1.0, 2.0, 3.0}));
    auto out = reorder_quantiles({3.0, 1.0, 2.0, 1.0});
    EXPECT_EQ(out, (std::vector<double>{1.0, 1.0, 2.0, 3.0}));
}

namespace {

const std::vector<double> kToyLevels = {0.1, 0.25, 0.5, 0.75, 0.9};

/// Member prediction with constant value everywhere it covers.
MemberPrediction constant_member(const MemberSpec& spec, double value) {
    MemberPrediction p;
    p.spec = spec;
    p.counts = Tensor2(spec.horizon_len, kToyLevels.size(), value);
    return p;
}

std::vector<MemberPrediction> constant_members(const EnsemblePlan& plan, double value) {
    std::vector<MemberPrediction> preds;
    for (const auto& m : plan.members) preds.push_back(constant_member(m, value));
    return preds;
}

} // namespace

TEST(Aggregate, IdenticalMembersPassThrough) {
    EnsemblePlan plan = EnsemblePlan::standard(1);
    auto forecast = aggregate_forecast(Date::parse("2021-12-06"), "NY", plan,
                                       constant_members(plan, 123.5), kToyLevels);
    for (std::size_t day = 1; day <= 28; ++day)
        for (std::size_t q = 0; q < kToyLevels.size(); ++q)
            EXPECT_DOUBLE_EQ(forecast.value(day, q), 123.5);
}

TEST(Aggregate, OneDivergedMemberIsIgnored) {
    EnsemblePlan plan = EnsemblePlan::standard(1);
    auto preds = constant_members(plan, 50.0);
    preds[0].counts.fill(1e9); // one 7-day member gone wild
    auto forecast = aggregate_forecast(Date::parse("2021-12-06"), "NY", plan, preds, kToyLevels);
    for (std::size_t day = 1; day <= 28; ++day)
        for (std::size_t q = 0; q < kToyLevels.size(); ++q)
            EXPECT_DOUBLE_EQ(forecast.value(day, q), 50.0);
}

TEST(Aggregate, NegativeMediansClampToZeroAndRowsStayMonotone) {
    EnsemblePlan plan = EnsemblePlan::standard(1);
    auto preds = constant_members(plan, -3.0);
    auto forecast = aggregate_forecast(Date::parse("2021-12-06"), "NY", plan, preds, kToyLevels);
    for (std::size_t day = 1; day <= 28; ++day)
        for (std::size_t q = 0; q < kToyLevels.size(); ++q)
            EXPECT_DOUBLE_EQ(forecast.value(day, q), 0.0);
}

TEST(Aggregate, RowsAreReordered) {
    EnsemblePlan plan = EnsemblePlan::standard(1);
    std::vector<MemberPrediction> preds;
    Rng rng(3);
    for (const auto& m : plan.members) {
        MemberPrediction p;
        p.spec = m;
        p.counts = Tensor2(m.horizon_len, kToyLevels.size());
        for (double& v : p.counts.data()) v = rng.uniform(0.0, 100.0);
        preds.push_back(std::move(p));
    }
    auto forecast = aggregate_forecast(Date::parse("2021-12-06"), "NY", plan, preds, kToyLevels);
    for (std::size_t day = 1; day <= 28; ++day) {
        for (std::size_t q = 0; q + 1 < kToyLevels.size(); ++q)
            EXPECT_LE(forecast.value(day, q), forecast.value(day, q + 1));
        EXPECT_GE(forecast.value(day, 0), 0.0);
    }
}

TEST(Aggregate, OutlierShiftBoundedByOrderStatisticGap) {
    // replacing one of 15 values with +1e9 moves the median by at most the
    // gap between the 8th and 9th order statistics
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(15);
        for (double& x : v) x = rng.uniform(-100.0, 100.0);
        std::vector<double> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        double base = aggregate_median(v, 15);
        double gap = sorted[8] - sorted[7];
        for (std::size_t i = 0; i < 15; ++i) {
            auto poisoned = v;
            poisoned[i] = 1e9;
            double shifted = aggregate_median(poisoned, 15);
            EXPECT_LE(std::abs(shifted - base), gap + 1e-12);
        }
    }
}

TEST(Aggregate, MissingMemberRejected) {
    EnsemblePlan plan = EnsemblePlan::standard(1);
    auto preds = constant_members(plan, 1.0);
    preds.pop_back();
    EXPECT_THROW(aggregate_forecast(Date::parse("2021-12-06"), "NY", plan, preds, kToyLevels),
                 ValidationError);
}

TEST(HubCsv, RoundTripsForecasts) {
    EnsemblePlan plan = EnsemblePlan::build(1, 1, 1, 1);
    Rng rng(29);
    std::vector<QuantileForecast> forecasts;
    for (const std::string& loc : {"AA", "BB"}) {
        std::vector<MemberPrediction> preds;
        for (const auto& m : plan.members) {
            MemberPrediction p;
            p.spec = m;
            p.counts = Tensor2(m.horizon_len, hub_quantile_levels().size());
            for (double& v : p.counts.data()) v = rng.uniform(0.0, 500.0);
            preds.push_back(std::move(p));
        }
        forecasts.push_back(aggregate_forecast(Date::parse("2022-01-03"), loc, plan, preds,
                                               hub_quantile_levels()));
    }
    auto dir = tu::make_temp_dir("hubcsv");
    write_hub_csv(forecasts, dir + "/f.csv");
    auto loaded = read_hub_csv(dir + "/f.csv");
    ASSERT_EQ(loaded.size(), forecasts.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        EXPECT_EQ(loaded[i].location, forecasts[i].location);
        ASSERT_EQ(loaded[i].levels.size(), forecasts[i].levels.size());
        for (std::size_t k = 0; k < 28; ++k)
            for (std::size_t q = 0; q < loaded[i].levels.size(); ++q)
                EXPECT_DOUBLE_EQ(loaded[i].values(k, q), forecasts[i].values(k, q))
                    << "cell (" << k << "," << q << ")";
    }
}

TEST(HubCsv, HeaderAndTargetFormat) {
    QuantileForecast f;
    f.forecast_date = Date::parse("2021-12-06");
    f.location = "NY";
    f.levels = {0.25, 0.5, 0.75};
    f.values = Tensor2(2, 3, 7.0);
    std::ostringstream out;
    write_hub_csv({f}, out);
    std::string text = out.str();
    EXPECT_NE(text.find("forecast_date,target,target_end_date,location,type,quantile,value"),
              std::string::npos);
    EXPECT_NE(text.find("2021-12-06,1 day ahead inc hosp,2021-12-07,NY,point,,7"), std::string::npos);
    EXPECT_NE(text.find("2021-12-06,2 day ahead inc hosp,2021-12-08,NY,quantile,0.25,7"),
              std::string::npos);
}
