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
#ifndef SPHCAST_RUN_CONFIG_HPP
#define SPHCAST_RUN_CONFIG_HPP

#include "sphcast/date.hpp"
#include "sphcast/episim.hpp"
#include "sphcast/pipeline.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace sphcast {

using nlohmann::json;

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

/// Flags that may override config values from the command line.
struct Overrides {
    std::optional<bool> sph, spc;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<unsigned> jobs;
};

/// Scenario file for the simulator.
struct SimScenario {
    EpiParams params;
    std::size_t days = 0;
    std::uint64_t seed = 0;
    double noise_sigma = 0.0;
    Date start_date;
    ConnectivityMatrix sci; // written alongside the panel for the pipeline

    static SimScenario load(const std::string& path) {
        json j = load_json(path);
        SimScenario sc;
        try {
            sc.days = j.at("days").get<std::size_t>();
            sc.seed = j.value("seed", std::uint64_t{0});
            sc.noise_sigma = j.value("noise_sigma", 0.0);
            sc.start_date = Date::parse(j.value("start_date", std::string("2020-07-01")));
            EpiParams& p = sc.params;
            std::string model = j.value("model", std::string("seir"));
            if (model != "seir" && model != "sir")
                throw ValidationError("model must be 'seir' or 'sir'");
            p.seir = model == "seir";
            p.beta = j.at("beta").get<double>();
            p.gamma = j.at("gamma").get<double>();
            p.sigma = j.value("sigma", 0.25);
            p.hosp_frac = j.value("hosp_frac", 0.03);
            p.hosp_lag = j.value("hosp_lag", 5L);
            p.kappa = j.value("kappa", 0.0);
            p.dt = j.value("dt", 0.25);
            for (const auto& r : j.at("regions")) {
                EpiRegion reg;
                reg.id = r.at("id").get<std::string>();
                reg.name = r.value("name", reg.id);
                reg.population = r.at("population").get<double>();
                reg.seed_day = r.value("seed_day", 0L);
                reg.seed_size = r.value("seed_size", 0.0);
                p.regions.push_back(reg);
            }
            std::vector<std::string> ids;
            for (const auto& r : p.regions) ids.push_back(r.id);
            if (j.contains("sci")) {
                const auto& rows = j.at("sci");
                if (rows.size() != ids.size())
                    throw ValidationError("sci matrix must have one row per region");
                Tensor2 sci(ids.size(), ids.size());
                for (std::size_t i = 0; i < ids.size(); ++i) {
                    if (rows[i].size() != ids.size())
                        throw ValidationError("sci matrix must be square");
                    for (std::size_t k = 0; k < ids.size(); ++k) sci(i, k) = rows[i][k].get<double>();
                }
                for (std::size_t i = 0; i < ids.size(); ++i)
                    for (std::size_t k = i + 1; k < ids.size(); ++k) {
                        if (std::abs(sci(i, k) - sci(k, i)) >
                            1e-6 * std::max(std::abs(sci(i, k)), std::abs(sci(k, i))))
                            throw ValidationError("sci matrix must be symmetric");
                        if (sci(i, k) <= 0.0)
                            throw ValidationError("sci entries must be positive off the diagonal");
                    }
                sc.sci = ConnectivityMatrix{ids, std::move(sci)};
            } else if (j.contains("sci_tsv")) {
                sc.sci = parse_sci_tsv(j.at("sci_tsv").get<std::string>(), ids);
            } else if (ids.size() > 1) {
                throw ValidationError("multi-region scenario needs 'sci' or 'sci_tsv'");
            }
            if (ids.size() > 1) p.coupling = row_normalize(sc.sci);
            p.validate();
            if (sc.days < static_cast<std::size_t>(p.hosp_lag) + 1)
                throw ValidationError("days must be at least hosp_lag + 1");
        } catch (const json::exception& e) {
            throw ValidationError(path + ": " + e.what());
        }
        return sc;
    }
};

/// Config for ingest/features/train/forecast/score runs.
struct RunConfig {
    std::string cases_csv, hosp_csv, population_csv, sci_tsv;
    std::string out_dir = "out";
    std::vector<Date> forecast_dates;
    std::uint64_t seed_base = 1;
    bool sph_on = true;
    bool spc_on = false;
    std::vector<std::size_t> widths = {256, 128, 128, 128};
    std::size_t proj_dim = 64;
    std::size_t seeds_7 = 4, seeds_14 = 7, seeds_28 = 4;
    TrainOptions train;
    std::size_t min_history = 60;
    std::size_t window_months = 15;
    std::size_t stride = 1;
    unsigned jobs = 1;
    std::string model_store = "models";
    std::string forecast_model = "slstm"; // or "persistence"
    // scoring
    std::vector<std::string> score_forecast_csvs;
    std::vector<std::string> score_model_names;
    bool smooth_truth = true;
    bool svg = false;

    static RunConfig load(const std::string& path, const Overrides& ov = {}) {
        json j = load_json(path);
        RunConfig c;
        try {
            c.cases_csv = j.value("cases_csv", std::string());
            c.hosp_csv = j.value("hosp_csv", std::string());
            c.population_csv = j.value("population_csv", std::string());
            c.sci_tsv = j.value("sci_tsv", std::string());
            c.out_dir = j.value("out_dir", std::string("out"));
            for (const auto& d : j.value("forecast_dates", json::array()))
                c.forecast_dates.push_back(Date::parse(d.get<std::string>()));
            c.seed_base = j.value("seed_base", std::uint64_t{1});
            c.sph_on = j.value("sph", true);
            c.spc_on = j.value("spc", false);
            if (j.contains("widths")) {
                c.widths.clear();
                for (const auto& w : j.at("widths")) c.widths.push_back(w.get<std::size_t>());
                if (c.widths.empty()) throw ValidationError("widths must be nonempty");
            }
            c.proj_dim = j.value("proj_dim", std::size_t{64});
            if (j.contains("plan")) {
                const auto& p = j.at("plan");
                c.seeds_7 = p.value("seeds_7", std::size_t{4});
                c.seeds_14 = p.value("seeds_14", std::size_t{7});
                c.seeds_28 = p.value("seeds_28", std::size_t{4});
            }
            if (j.contains("train")) {
                const auto& t = j.at("train");
                c.train.batch_size = t.value("batch_size", std::size_t{64});
                c.train.lr = t.value("lr", 0.0008);
                c.train.max_epochs = t.value("max_epochs", std::size_t{200});
                c.train.patience = t.value("patience", std::size_t{10});
            }
            c.min_history = j.value("min_history", std::size_t{60});
            c.window_months = j.value("window_months", std::size_t{15});
            c.stride = j.value("stride", std::size_t{1});
            c.jobs = j.value("jobs", 1u);
            c.model_store = j.value("model_store", std::string("models"));
            c.forecast_model = j.value("forecast_model", std::string("slstm"));
            if (c.forecast_model != "slstm" && c.forecast_model != "persistence")
                throw ValidationError("forecast_model must be 'slstm' or 'persistence'");
            if (j.contains("scoring")) {
                const auto& s = j.at("scoring");
                for (const auto& f : s.value("forecast_csvs", json::array()))
                    c.score_forecast_csvs.push_back(f.get<std::string>());
                for (const auto& m : s.value("model_names", json::array()))
                    c.score_model_names.push_back(m.get<std::string>());
                c.smooth_truth = s.value("smooth_truth", true);
                c.svg = s.value("svg", false);
            }
        } catch (const json::exception& e) {
            throw ValidationError(path + ": " + e.what());
        }
        if (ov.sph) c.sph_on = *ov.sph;
        if (ov.spc) c.spc_on = *ov.spc;
        if (ov.seed) c.seed_base = *ov.seed;
        if (ov.out_dir) c.out_dir = *ov.out_dir;
        if (ov.jobs) c.jobs = *ov.jobs;
        return c;
    }

    WalkForwardConfig walk_forward_config() const {
        WalkForwardConfig cfg;
        cfg.plan = EnsemblePlan::build(seed_base, seeds_7, seeds_14, seeds_28);
        cfg.train = train;
        cfg.net.lstm_widths = widths;
        cfg.net.proj_dim = proj_dim;
        cfg.sph_on = sph_on;
        cfg.spc_on = spc_on;
        cfg.min_history = min_history;
        cfg.window_months = window_months;
        cfg.stride = stride;
        cfg.jobs = jobs;
        return cfg;
    }
};

} // namespace sphcast

#endif
