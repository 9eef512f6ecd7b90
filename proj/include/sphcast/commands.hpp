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
#ifndef SPHCAST_COMMANDS_HPP
#define SPHCAST_COMMANDS_HPP

#include "sphcast/checkpoint.hpp"
#include "sphcast/hub_csv.hpp"
#include "sphcast/run_config.hpp"
#include "sphcast/scoring.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace sphcast {

namespace fs = std::filesystem;

namespace detail {

inline void print_warnings(const Warnings& warnings, std::ostream& err) {
    for (const auto& w : warnings) err << "warning: " << w.message << '\n';
}

inline void write_population_csv(const std::vector<Location>& locations, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw RuntimeFailure("cannot write '" + path + "'");
    out << "location,population\n";
    for (const auto& l : locations) out << l.id << ',' << l.population << '\n';
}

/// Loads the truth panel named by the config; validates everything up front.
inline TimePanel load_panel(const RunConfig& cfg, Warnings* warnings = nullptr) {
    if (cfg.cases_csv.empty() || cfg.hosp_csv.empty() || cfg.population_csv.empty())
        throw ValidationError("config must set cases_csv, hosp_csv and population_csv");
    auto locations = parse_population_csv(cfg.population_csv);
    std::vector<TruthFragment> fragments;
    fragments.push_back(parse_truth_csv(cfg.cases_csv, channel::CASES));
    fragments.push_back(parse_truth_csv(cfg.hosp_csv, channel::HOSP));
    return build_panel(fragments, locations, warnings);
}

inline DirectionalWeights load_weights(const RunConfig& cfg, const TimePanel& panel) {
    if (cfg.sci_tsv.empty())
        throw ValidationError("spatial features enabled but config has no sci_tsv path");
    std::vector<std::string> ids;
    for (const auto& l : panel.locations()) ids.push_back(l.id);
    return row_normalize(parse_sci_tsv(cfg.sci_tsv, ids));
}

inline std::string store_dir(const RunConfig& cfg) {
    fs::path p = cfg.model_store;
    if (p.is_absolute()) return p.string();
    return (fs::path(cfg.out_dir) / p).string();
}

inline void write_scaler_manifest(const DateRun& run, const std::string& path) {
    json j;
    j["forecast_date"] = run.forecast_date.str();
    j["window_start"] = run.window_start.str();
    j["val_locations"] = run.split.val_locations;
    json scalers = json::object();
    for (const auto& [name, sp] : run.scalers) scalers[name] = {{"min", sp.min}, {"max", sp.max}};
    j["scalers"] = scalers;
    std::ofstream out(path);
    if (!out) throw RuntimeFailure("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

} // namespace detail

/// `simulate`: run a scenario and write truth-format CSVs plus the SCI file,
/// ready for ingestion by the forecasting pipeline.
inline void cmd_simulate(const std::string& scenario_path, const Overrides& ov,
                         std::ostream& err = std::cerr) {
    SimScenario sc = SimScenario::load(scenario_path);
    if (ov.seed) sc.seed = *ov.seed;
    std::string out_dir = ov.out_dir.value_or("out");
    TimePanel panel = simulate_panel(sc.params, sc.days, sc.seed, sc.start_date, sc.noise_sigma);
    fs::create_directories(out_dir);
    write_truth_csv(panel, channel::CASES, (fs::path(out_dir) / "cases.csv").string());
    write_truth_csv(panel, channel::HOSP, (fs::path(out_dir) / "hospitalizations.csv").string());
    detail::write_population_csv(panel.locations(), (fs::path(out_dir) / "population.csv").string());
    if (sc.sci.n() >= 2) write_sci_tsv(sc.sci, (fs::path(out_dir) / "sci.tsv").string());
    err << "simulated " << sc.days << " days for " << panel.n_locations() << " regions into "
        << out_dir << '\n';
}

/// `ingest`: parse, validate and clean the raw inputs, then write the
/// normalized panel back out with an ingestion summary.
inline void cmd_ingest(const std::string& config_path, const Overrides& ov,
                       std::ostream& err = std::cerr) {
    RunConfig cfg = RunConfig::load(config_path, ov);
    Warnings warnings;
    TimePanel panel = detail::load_panel(cfg, &warnings);
    detail::print_warnings(warnings, err);
    fs::create_directories(cfg.out_dir);
    write_truth_csv(panel, channel::CASES, (fs::path(cfg.out_dir) / "cases.csv").string());
    write_truth_csv(panel, channel::HOSP, (fs::path(cfg.out_dir) / "hospitalizations.csv").string());
    detail::write_population_csv(panel.locations(), (fs::path(cfg.out_dir) / "population.csv").string());
    json summary;
    summary["locations"] = panel.n_locations();
    summary["first_date"] = panel.start_date().str();
    summary["last_date"] = panel.end_date().str();
    summary["warnings"] = json::array();
    for (const auto& w : warnings) summary["warnings"].push_back(w.message);
    std::ofstream out(fs::path(cfg.out_dir) / "summary.json");
    out << summary.dump(2) << '\n';
    err << "ingested " << panel.n_locations() << " locations, " << panel.n_dates() << " days\n";
}

/// `features`: derive the smoothed-rate and social-proximity channels over
/// the whole panel and export them in truth CSV format for inspection.
inline void cmd_features(const std::string& config_path, const Overrides& ov,
                         std::ostream& err = std::cerr) {
    RunConfig cfg = RunConfig::load(config_path, ov);
    TimePanel panel = detail::load_panel(cfg);
    std::optional<DirectionalWeights> weights;
    if (cfg.sph_on || cfg.spc_on) weights = detail::load_weights(cfg, panel);

    TimePanel smoothed(panel.locations(), panel.start_date(), panel.n_dates());
    smoothed.set_channel(channel::CASES, smooth_channel(panel, channel::CASES));
    smoothed.set_channel(channel::HOSP, smooth_channel(panel, channel::HOSP));
    panel.set_channel(channel::CASE_RATE, to_rate_per_10k(smoothed, channel::CASES));
    panel.set_channel(channel::HOSP_RATE, to_rate_per_10k(smoothed, channel::HOSP));
    if (cfg.sph_on) panel.set_channel(channel::SPH, compute_sph(*weights, panel.channel(channel::HOSP_RATE)));
    if (cfg.spc_on) panel.set_channel(channel::SPC, compute_spc(*weights, panel.channel(channel::CASE_RATE)));

    fs::create_directories(cfg.out_dir);
    write_truth_csv(panel, channel::CASE_RATE, (fs::path(cfg.out_dir) / "case_rate.csv").string());
    write_truth_csv(panel, channel::HOSP_RATE, (fs::path(cfg.out_dir) / "hosp_rate.csv").string());
    if (cfg.sph_on) write_truth_csv(panel, channel::SPH, (fs::path(cfg.out_dir) / "sph.csv").string());
    if (cfg.spc_on) write_truth_csv(panel, channel::SPC, (fs::path(cfg.out_dir) / "spc.csv").string());
    err << "features written to " << cfg.out_dir << '\n';
}

/// Shared by `train` and `ablate`: walk-forward training, checkpointing and
/// forecast emission for one feature configuration.
inline std::vector<DateRun> run_training(const RunConfig& cfg, const TimePanel& panel,
                                         const DirectionalWeights* weights, const std::string& out_dir,
                                         std::ostream& err) {
    if (cfg.forecast_dates.empty()) throw ValidationError("config has no forecast_dates");
    WalkForwardConfig wf = cfg.walk_forward_config();
    Warnings warnings;
    std::vector<DateRun> runs = run_walk_forward(panel, weights, cfg.forecast_dates, wf, &warnings);
    detail::print_warnings(warnings, err);
    if (runs.empty()) throw ValidationError("no forecast date had enough history to run");

    std::size_t leaky = 0, checked = 0;
    for (const auto& run : runs) {
        checked += run.audit.samples_checked;
        leaky += run.audit.violations;
    }
    if (leaky > 0)
        throw RuntimeFailure("leakage guard: " + std::to_string(leaky) + " of " +
                             std::to_string(checked) + " samples reference post-forecast-date data");
    err << "leakage guard: " << checked << " samples checked, 0 violations\n";

    fs::create_directories(out_dir);
    std::vector<QuantileForecast> all;
    for (const auto& run : runs) {
        std::string date_dir = (fs::path(detail::store_dir(cfg)) / run.forecast_date.str()).string();
        fs::create_directories(date_dir);
        for (std::size_t i = 0; i < run.members.size(); ++i)
            save_checkpoint(Checkpoint{wf.plan.members[i], run.members[i].params},
                            (fs::path(date_dir) / (std::to_string(i) + ".ckpt")).string());
        detail::write_scaler_manifest(run, (fs::path(date_dir) / "scalers.json").string());
        all.insert(all.end(), run.forecasts.begin(), run.forecasts.end());
        err << run.forecast_date.str() << ": trained " << run.members.size() << " members, window "
            << run.window_start.str() << ".." << run.forecast_date.str() << '\n';
    }
    write_hub_csv(all, (fs::path(out_dir) / "forecasts.csv").string());
    return runs;
}

/// `train`: walk-forward training over the configured forecast dates; writes
/// hub-format forecasts and per-date model checkpoints.
inline void cmd_train(const std::string& config_path, const Overrides& ov,
                      std::ostream& err = std::cerr) {
    RunConfig cfg = RunConfig::load(config_path, ov);
    TimePanel panel = detail::load_panel(cfg);
    std::optional<DirectionalWeights> weights;
    if (cfg.sph_on || cfg.spc_on) weights = detail::load_weights(cfg, panel);
    run_training(cfg, panel, weights ? &*weights : nullptr, cfg.out_dir, err);
    err << "forecasts written to " << (fs::path(cfg.out_dir) / "forecasts.csv").string() << '\n';
}

/// `forecast`: emit forecasts without training, either from the persistence
/// baseline or from a previously trained model store.
inline void cmd_forecast(const std::string& config_path, const Overrides& ov,
                         std::ostream& err = std::cerr) {
    RunConfig cfg = RunConfig::load(config_path, ov);
    if (cfg.forecast_dates.empty()) throw ValidationError("config has no forecast_dates");
    TimePanel panel = detail::load_panel(cfg);

    std::vector<QuantileForecast> all;
    if (cfg.forecast_model == "persistence") {
        for (Date t : cfg.forecast_dates) {
            auto fs_for_date = persistence_forecast(panel, t);
            all.insert(all.end(), fs_for_date.begin(), fs_for_date.end());
        }
    } else {
        std::optional<DirectionalWeights> weights;
        if (cfg.sph_on || cfg.spc_on) weights = detail::load_weights(cfg, panel);
        WalkForwardConfig wf = cfg.walk_forward_config();
        for (Date t : cfg.forecast_dates) {
            Date window_start = t.add_months(-static_cast<int>(cfg.window_months));
            if (window_start < panel.start_date()) window_start = panel.start_date();
            JobFeatures features = prepare_features(panel, weights ? &*weights : nullptr, t,
                                                    window_start, cfg.sph_on, cfg.spc_on);
            std::string date_dir = (fs::path(detail::store_dir(cfg)) / t.str()).string();
            std::vector<SlstmParams> members;
            for (std::size_t i = 0; i < wf.plan.size(); ++i) {
                std::string path = (fs::path(date_dir) / (std::to_string(i) + ".ckpt")).string();
                if (!fs::exists(path)) {
                    const MemberSpec& m = wf.plan.members[i];
                    throw ValidationError("missing member checkpoint for spec (horizon=" +
                                          std::to_string(m.horizon_len) + ", offset=" +
                                          std::to_string(m.target_offset) + ", seed=" +
                                          std::to_string(m.seed) + ") at '" + path + "'");
                }
                Checkpoint c = load_checkpoint(path);
                if (c.spec.horizon_len != wf.plan.members[i].horizon_len ||
                    c.spec.target_offset != wf.plan.members[i].target_offset)
                    throw ValidationError("checkpoint '" + path + "' does not match plan member " +
                                          std::to_string(i));
                members.push_back(std::move(c.params));
            }
            for (std::size_t loc = 0; loc < features.window.n_locations(); ++loc) {
                std::vector<MemberPrediction> preds;
                for (std::size_t i = 0; i < wf.plan.size(); ++i)
                    preds.push_back(member_predict_counts(members[i], wf.plan.members[i], features,
                                                          loc, wf.short_len, wf.long_len));
                all.push_back(aggregate_forecast(t, features.window.locations()[loc].id, wf.plan,
                                                 preds, wf.net.quantile_levels));
            }
        }
    }
    fs::create_directories(cfg.out_dir);
    write_hub_csv(all, (fs::path(cfg.out_dir) / "forecasts.csv").string());
    err << "forecasts written to " << (fs::path(cfg.out_dir) / "forecasts.csv").string() << '\n';
}

/// `score`: evaluate one or more forecast CSVs against the truth panel and
/// write CSV/Markdown (and optionally SVG) reports.
inline void cmd_score(const std::string& config_path, const Overrides& ov,
                      std::ostream& err = std::cerr) {
    RunConfig cfg = RunConfig::load(config_path, ov);
    if (cfg.score_forecast_csvs.empty())
        throw ValidationError("config.scoring.forecast_csvs must list at least one file");
    TimePanel panel = detail::load_panel(cfg);
    ScoreOptions opts;
    opts.smooth_truth = cfg.smooth_truth;
    std::vector<ScoreReport> reports;
    for (std::size_t i = 0; i < cfg.score_forecast_csvs.size(); ++i) {
        const std::string& path = cfg.score_forecast_csvs[i];
        std::string name = i < cfg.score_model_names.size() ? cfg.score_model_names[i]
                                                            : fs::path(path).stem().string();
        auto forecasts = read_hub_csv(path);
        reports.push_back(score_run(forecasts, panel, name, opts));
    }
    fs::create_directories(cfg.out_dir);
    {
        std::ofstream out(fs::path(cfg.out_dir) / "report.csv");
        write_report_csv(reports, out);
    }
    {
        std::ofstream out(fs::path(cfg.out_dir) / "report.md");
        write_report_markdown(reports, out);
    }
    if (cfg.svg) {
        std::ofstream out(fs::path(cfg.out_dir) / "report.svg");
        write_report_svg(reports, out);
    }
    err << "report written to " << cfg.out_dir << '\n';
}

/// Across-member dispersion of point predictions: the variance over covering
/// members' median-level outputs, averaged over locations and horizon days.
inline double across_member_variance(const DateRun& run, const EnsemblePlan& plan,
                                     std::size_t horizon_days = 28) {
    if (run.member_predictions.empty())
        throw ValidationError("across_member_variance: member predictions were not retained");
    double total = 0.0;
    std::size_t cells = 0;
    for (const auto& preds : run.member_predictions) {
        const std::size_t med = preds.front().counts.cols() / 2;
        for (std::size_t day = 1; day <= horizon_days; ++day) {
            auto covering = plan.members_covering(day);
            double mean = 0.0;
            for (std::size_t m : covering) mean += preds[m].counts(day - preds[m].spec.target_offset, med);
            mean /= static_cast<double>(covering.size());
            double var = 0.0;
            for (std::size_t m : covering) {
                double d = preds[m].counts(day - preds[m].spec.target_offset, med) - mean;
                var += d * d;
            }
            total += var / static_cast<double>(covering.size());
            ++cells;
        }
    }
    return total / static_cast<double>(cells);
}

/// `ablate`: run the two feature arms (with and without SPH) on identical
/// configs, score both against the truth, and report errors plus
/// across-member variance side by side.
inline void cmd_ablate(const std::string& config_path, const Overrides& ov,
                       std::ostream& err = std::cerr) {
    RunConfig cfg = RunConfig::load(config_path, ov);
    TimePanel panel = detail::load_panel(cfg);
    DirectionalWeights weights = detail::load_weights(cfg, panel);

    struct Arm {
        std::string name;
        bool sph;
    };
    std::vector<ScoreReport> reports;
    json variance = json::object();
    for (const Arm& arm : {Arm{"slstm_sph", true}, Arm{"slstm_nosph", false}}) {
        RunConfig arm_cfg = cfg;
        arm_cfg.sph_on = arm.sph;
        arm_cfg.out_dir = (fs::path(cfg.out_dir) / arm.name).string();
        arm_cfg.model_store = "models";
        auto runs = run_training(arm_cfg, panel, &weights, arm_cfg.out_dir, err);
        std::vector<QuantileForecast> all;
        json arm_var = json::object();
        WalkForwardConfig wf = arm_cfg.walk_forward_config();
        for (const auto& run : runs) {
            all.insert(all.end(), run.forecasts.begin(), run.forecasts.end());
            arm_var[run.forecast_date.str()] = across_member_variance(run, wf.plan);
        }
        variance[arm.name] = arm_var;
        ScoreOptions opts;
        opts.smooth_truth = cfg.smooth_truth;
        reports.push_back(score_run(all, panel, arm.name, opts));
    }
    {
        std::ofstream out(fs::path(cfg.out_dir) / "report.csv");
        write_report_csv(reports, out);
    }
    {
        std::ofstream out(fs::path(cfg.out_dir) / "report.md");
        write_report_markdown(reports, out);
    }
    {
        std::ofstream out(fs::path(cfg.out_dir) / "variance.json");
        out << variance.dump(2) << '\n';
    }
    err << "ablation report written to " << cfg.out_dir << '\n';
}

} // namespace sphcast

#endif
