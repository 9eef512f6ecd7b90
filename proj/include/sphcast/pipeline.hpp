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
#ifndef SPHCAST_PIPELINE_HPP
#define SPHCAST_PIPELINE_HPP

#include "sphcast/connectivity.hpp"
#include "sphcast/ensemble.hpp"
#include "sphcast/train.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace sphcast {

/// Derived channel names used throughout the pipeline. Smoothing is applied
/// before rate conversion; the two commute for fixed populations, so the
/// order is a convention, not a modeling choice.
namespace channel {
inline constexpr const char* CASES = "cases";
inline constexpr const char* HOSP = "hospitalizations";
inline constexpr const char* CASE_RATE = "case_rate"; // smoothed cases per 10k
inline constexpr const char* HOSP_RATE = "hosp_rate"; // smoothed admissions per 10k
inline constexpr const char* SPH = "sph";
inline constexpr const char* SPC = "spc";
} // namespace channel

/// The three validation states for early stopping: lowest, median and highest
/// smoothed hospitalization rate at the forecast date. Ties break toward the
/// lexicographically smaller id; even location counts use the lower median.
struct ValidationSplit {
    std::vector<std::string> val_locations;   // [min, median, max]
    std::vector<std::string> train_locations; // panel order
};

inline ValidationSplit spatial_validation_split(const TimePanel& panel, Date forecast_date,
                                                const std::string& rate_channel = channel::HOSP_RATE) {
    const std::size_t n = panel.n_locations();
    if (n < 5) throw ValidationError("spatial_validation_split: need at least 5 locations");
    std::size_t t = panel.date_index(forecast_date);
    const Tensor2& rate = panel.channel(rate_channel);
    std::vector<std::pair<double, std::string>> ranked;
    for (std::size_t i = 0; i < n; ++i) ranked.emplace_back(rate(i, t), panel.locations()[i].id);
    std::sort(ranked.begin(), ranked.end());
    ValidationSplit split;
    split.val_locations = {ranked.front().second, ranked[(n - 1) / 2].second, ranked.back().second};
    for (const auto& loc : panel.locations()) {
        bool held_out = std::find(split.val_locations.begin(), split.val_locations.end(), loc.id) !=
                        split.val_locations.end();
        if (!held_out) split.train_locations.push_back(loc.id);
    }
    return split;
}

/// Scaled model inputs for one training window. Channel order is fixed:
/// case_rate, hosp_rate, sph (and spc when enabled); hosp_rate doubles as the
/// target channel. With SPH disabled the channel stays as zeros so the
/// network shape is identical between ablation arms.
struct JobFeatures {
    Date window_start;
    Date forecast_date;
    TimePanel window; // sliced panel with derived channels attached
    std::vector<std::string> channel_names;
    std::vector<Tensor2> scaled; // [L x Tw] per channel
    std::map<std::string, ScalerParams> scalers;
    std::size_t target_channel = 1; // index into scaled

    std::size_t n_dates() const { return window.n_dates(); }
};

inline JobFeatures prepare_features(const TimePanel& panel, const DirectionalWeights* weights,
                                    Date forecast_date, Date window_start, bool sph_on, bool spc_on) {
    JobFeatures f;
    f.window_start = window_start;
    f.forecast_date = forecast_date;
    f.window = panel.slice(window_start, forecast_date);

    TimePanel& w = f.window;
    {
        TimePanel smoothed(w.locations(), w.start_date(), w.n_dates());
        smoothed.set_channel(channel::CASES, smooth_channel(w, channel::CASES));
        smoothed.set_channel(channel::HOSP, smooth_channel(w, channel::HOSP));
        w.set_channel(channel::CASE_RATE, to_rate_per_10k(smoothed, channel::CASES));
        w.set_channel(channel::HOSP_RATE, to_rate_per_10k(smoothed, channel::HOSP));
    }
    if (sph_on || spc_on) {
        if (!weights) throw ValidationError("spatial features requested but no connectivity provided");
        if (sph_on) w.set_channel(channel::SPH, compute_sph(*weights, w.channel(channel::HOSP_RATE)));
        if (spc_on) w.set_channel(channel::SPC, compute_spc(*weights, w.channel(channel::CASE_RATE)));
    }

    f.channel_names = {channel::CASE_RATE, channel::HOSP_RATE, channel::SPH};
    if (spc_on) f.channel_names.push_back(channel::SPC);

    for (const auto& name : f.channel_names) {
        if (name == channel::SPH && !sph_on) {
            // ablation arm: identical arity, informationless channel
            f.scaled.emplace_back(w.n_locations(), w.n_dates());
            continue;
        }
        ScalerParams sp = fit_scaler(w, name, w.start_date(), w.end_date());
        const Tensor2& src = w.channel(name);
        Tensor2 scaled(src.rows(), src.cols());
        for (std::size_t i = 0; i < src.rows(); ++i)
            for (std::size_t t = 0; t < src.cols(); ++t) scaled(i, t) = apply_scaler(src(i, t), sp);
        f.scalers.emplace(name, sp);
        f.scaled.push_back(std::move(scaled));
    }
    return f;
}

/// Where each sample's data ends, for the leakage audit.
struct SampleProvenance {
    std::string location;
    Date last_input;
    Date last_target;
};

struct MemberSamples {
    Samples train, val;
    std::vector<SampleProvenance> provenance; // train then val
};

/// Materializes supervised samples for one member subgroup. Anchors walk the
/// window with the given stride; every sample's inputs end at the anchor and
/// targets cover anchor+offset .. anchor+offset+horizon-1, all inside the
/// window by construction.
inline MemberSamples build_member_samples(const JobFeatures& f, const ValidationSplit& split,
                                          const MemberSpec& spec, std::size_t short_len,
                                          std::size_t long_len, std::size_t stride = 1) {
    if (stride == 0) throw ValidationError("build_member_samples: stride must be >= 1");
    const std::size_t Tw = f.n_dates();
    const std::size_t C = f.channel_names.size();
    const std::size_t span = spec.target_offset + spec.horizon_len - 1;
    MemberSamples out;
    if (Tw < long_len + span) return out; // no admissible anchors

    std::vector<bool> is_val(f.window.n_locations(), false);
    for (const auto& id : split.val_locations) is_val[f.window.location_index(id)] = true;

    std::vector<SampleProvenance> val_prov;
    for (std::size_t s = long_len - 1; s + span < Tw; s += stride) {
        for (std::size_t loc = 0; loc < f.window.n_locations(); ++loc) {
            Sample sample;
            sample.x_short = Tensor2(short_len, C);
            sample.x_long = Tensor2(long_len, C);
            for (std::size_t c = 0; c < C; ++c) {
                for (std::size_t t = 0; t < short_len; ++t)
                    sample.x_short(t, c) = f.scaled[c](loc, s - short_len + 1 + t);
                for (std::size_t t = 0; t < long_len; ++t)
                    sample.x_long(t, c) = f.scaled[c](loc, s - long_len + 1 + t);
            }
            sample.target.resize(spec.horizon_len);
            for (std::size_t k = 0; k < spec.horizon_len; ++k)
                sample.target[k] = f.scaled[f.target_channel](loc, s + spec.target_offset + k);
            SampleProvenance prov{f.window.locations()[loc].id, f.window.date(s),
                                  f.window.date(s + span)};
            if (is_val[loc]) {
                out.val.push_back(std::move(sample));
                val_prov.push_back(prov);
            } else {
                out.train.push_back(std::move(sample));
                out.provenance.push_back(prov);
            }
        }
    }
    out.provenance.insert(out.provenance.end(), val_prov.begin(), val_prov.end());
    return out;
}

struct LeakageAudit {
    std::size_t samples_checked = 0;
    std::size_t violations = 0;
};

inline void audit_samples(const std::vector<SampleProvenance>& provenance, Date forecast_date,
                          LeakageAudit& audit) {
    for (const auto& p : provenance) {
        ++audit.samples_checked;
        if (p.last_input > forecast_date || p.last_target > forecast_date) ++audit.violations;
    }
}

struct WalkForwardConfig {
    EnsemblePlan plan;
    TrainOptions train;
    SlstmConfig net; // horizon is overridden per member
    bool sph_on = true;
    bool spc_on = false;
    std::size_t min_history = 60; // days required before a date is attempted
    std::size_t window_months = 15;
    std::size_t short_len = 7;
    std::size_t long_len = 28;
    std::size_t stride = 1;
    unsigned jobs = 1;
};

/// Everything produced for one forecast date.
struct DateRun {
    Date forecast_date;
    Date window_start;
    ValidationSplit split;
    std::map<std::string, ScalerParams> scalers;
    std::vector<TrainResult> members;
    std::vector<QuantileForecast> forecasts; // one per location, panel order
    std::vector<std::vector<MemberPrediction>> member_predictions; // [location][member]
    LeakageAudit audit;
};

namespace detail {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Exceptions propagate.
template <class Fn>
inline void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex mtx;
    auto worker = [&]() {
        while (true) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(mtx);
                if (next >= n) return;
                i = next++;
            }
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    for (unsigned j = 0; j < std::min<unsigned>(jobs, static_cast<unsigned>(n)); ++j)
        pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace detail

/// Runs inference for one trained member at the end of the feature window and
/// converts the scaled outputs back to admission counts.
inline MemberPrediction member_predict_counts(const SlstmParams& params, const MemberSpec& spec,
                                              const JobFeatures& f, std::size_t loc,
                                              std::size_t short_len, std::size_t long_len) {
    const std::size_t Tw = f.n_dates();
    const std::size_t C = f.channel_names.size();
    if (Tw < long_len) throw ValidationError("window shorter than the long input sequence");
    Tensor2 x_short(short_len, C), x_long(long_len, C);
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t t = 0; t < short_len; ++t) x_short(t, c) = f.scaled[c](loc, Tw - short_len + t);
        for (std::size_t t = 0; t < long_len; ++t) x_long(t, c) = f.scaled[c](loc, Tw - long_len + t);
    }
    Tensor2 scaled = slstm_forward(x_short, x_long, params); // [H x Q]
    const ScalerParams& target_scaler = f.scalers.at(f.channel_names[f.target_channel]);
    const double pop = static_cast<double>(f.window.locations()[loc].population);
    MemberPrediction pred;
    pred.spec = spec;
    pred.counts = Tensor2(scaled.rows(), scaled.cols());
    for (std::size_t k = 0; k < scaled.rows(); ++k)
        for (std::size_t q = 0; q < scaled.cols(); ++q) {
            double rate = invert_scaler(scaled(k, q), target_scaler);
            pred.counts(k, q) = rate * pop / 10000.0;
        }
    return pred;
}

/// Walk-forward orchestration: for every forecast date, fit scalers and
/// features on the training window only, train all plan members, and emit
/// per-location quantile forecasts. Dates with insufficient history are
/// skipped with a warning.
inline std::vector<DateRun> run_walk_forward(const TimePanel& panel, const DirectionalWeights* weights,
                                             const std::vector<Date>& dates,
                                             const WalkForwardConfig& cfg, Warnings* warnings = nullptr) {
    auto warn = [warnings](const std::string& msg) {
        if (warnings) warnings->push_back({msg});
    };
    std::vector<DateRun> runs;
    for (Date t : dates) {
        long history = t - panel.start_date() + 1;
        if (t > panel.end_date() || history < static_cast<long>(cfg.min_history)) {
            warn("skipping " + t.str() + ": needs " + std::to_string(cfg.min_history) +
                 " days of history, has " + std::to_string(std::max(0L, history)));
            continue;
        }
        DateRun run;
        run.forecast_date = t;
        Date nominal_start = t.add_months(-static_cast<int>(cfg.window_months));
        run.window_start = nominal_start;
        if (nominal_start < panel.start_date()) {
            run.window_start = panel.start_date();
            warn("training window for " + t.str() + " truncated to available data (" +
                 run.window_start.str() + ")");
        }

        JobFeatures features =
            prepare_features(panel, weights, t, run.window_start, cfg.sph_on, cfg.spc_on);
        run.scalers = features.scalers;
        run.split = spatial_validation_split(features.window, t);

        // samples are identical within a subgroup; build each subgroup once
        std::map<std::pair<std::size_t, std::size_t>, MemberSamples> subgroup_samples;
        for (const auto& spec : cfg.plan.members) {
            auto key = std::make_pair(spec.horizon_len, spec.target_offset);
            if (!subgroup_samples.count(key)) {
                MemberSamples ms = build_member_samples(features, run.split, spec, cfg.short_len,
                                                        cfg.long_len, cfg.stride);
                if (ms.train.empty() || ms.val.empty())
                    throw ValidationError("no training samples for subgroup (" +
                                          std::to_string(spec.horizon_len) + "," +
                                          std::to_string(spec.target_offset) + ") at " + t.str());
                audit_samples(ms.provenance, t, run.audit);
                subgroup_samples.emplace(key, std::move(ms));
            }
        }

        SlstmConfig net = cfg.net;
        net.input_channels = features.channel_names.size();

        run.members.resize(cfg.plan.size());
        detail::parallel_for(cfg.plan.size(), cfg.jobs, [&](std::size_t i) {
            const MemberSpec& spec = cfg.plan.members[i];
            const MemberSamples& ms =
                subgroup_samples.at(std::make_pair(spec.horizon_len, spec.target_offset));
            run.members[i] = train_member(ms.train, ms.val, spec, cfg.train, net);
        });

        for (std::size_t loc = 0; loc < features.window.n_locations(); ++loc) {
            std::vector<MemberPrediction> preds;
            preds.reserve(cfg.plan.size());
            for (std::size_t i = 0; i < cfg.plan.size(); ++i)
                preds.push_back(member_predict_counts(run.members[i].params, cfg.plan.members[i],
                                                      features, loc, cfg.short_len, cfg.long_len));
            run.forecasts.push_back(aggregate_forecast(t, features.window.locations()[loc].id,
                                                       cfg.plan, preds, cfg.net.quantile_levels));
            run.member_predictions.push_back(std::move(preds));
        }
        runs.push_back(std::move(run));
    }
    return runs;
}

/// Persistence baseline: the point (and median) forecast at every horizon is
/// the last observed smoothed value; the other quantiles add empirical
/// quantiles of the symmetrized historical k-step differences, clamped at
/// zero and reordered. The symmetrization pins the median exactly at zero.
inline QuantileForecast persistence_forecast_one(const std::vector<double>& history, Date forecast_date,
                                                 const std::string& location, std::size_t horizon,
                                                 const std::vector<double>& levels) {
    check_level_set(levels);
    if (history.size() < horizon + 1)
        throw ValidationError("persistence_forecast: need at least " + std::to_string(horizon + 1) +
                              " observations, have " + std::to_string(history.size()));
    const double last = history.back();
    QuantileForecast out;
    out.forecast_date = forecast_date;
    out.location = location;
    out.levels = levels;
    out.values = Tensor2(horizon, levels.size());
    for (std::size_t k = 1; k <= horizon; ++k) {
        std::vector<double> sym;
        sym.reserve(2 * (history.size() - k));
        for (std::size_t i = 0; i + k < history.size(); ++i) {
            double d = history[i + k] - history[i];
            sym.push_back(d);
            sym.push_back(-d);
        }
        std::sort(sym.begin(), sym.end());
        std::vector<double> row(levels.size());
        for (std::size_t q = 0; q < levels.size(); ++q)
            row[q] = std::max(0.0, last + empirical_quantile(sym, levels[q]));
        row = reorder_quantiles(row);
        for (std::size_t q = 0; q < levels.size(); ++q) out.values(k - 1, q) = row[q];
    }
    return out;
}

/// Baseline forecasts for every location of a panel, evaluated on the
/// 7-day-smoothed series by default (the pipeline's evaluation target).
inline std::vector<QuantileForecast> persistence_forecast(const TimePanel& panel, Date forecast_date,
                                                          std::size_t horizon = 28,
                                                          const std::vector<double>& levels =
                                                              hub_quantile_levels(),
                                                          bool smooth = true) {
    Tensor2 series = smooth ? smooth_channel(panel, channel::HOSP) : panel.channel(channel::HOSP);
    std::size_t t = panel.date_index(forecast_date);
    std::vector<QuantileForecast> out;
    for (std::size_t loc = 0; loc < panel.n_locations(); ++loc) {
        std::vector<double> history(t + 1);
        for (std::size_t i = 0; i <= t; ++i) history[i] = series(loc, i);
        out.push_back(persistence_forecast_one(history, forecast_date, panel.locations()[loc].id,
                                               horizon, levels));
    }
    return out;
}

} // namespace sphcast

#endif
