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
#include "sphcast/commands.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct CliFlags {
    std::string config;
    std::string sph, spc;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> jobs;
};

void add_common(CLI::App* cmd, CliFlags& flags, bool config_required = true) {
    auto* c = cmd->add_option("--config", flags.config, "path to the JSON config file");
    if (config_required) c->required();
    cmd->add_option("--sph", flags.sph, "override the SPH feature toggle (on|off)")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--spc", flags.spc, "override the SPC feature toggle (on|off)")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--seed", flags.seed, "override seed_base");
    cmd->add_option("--out", flags.out, "override the output directory");
    cmd->add_option("--jobs", flags.jobs, "worker threads for member training");
}

sphcast::Overrides to_overrides(const CliFlags& flags) {
    sphcast::Overrides ov;
    if (flags.sph == "on") ov.sph = true;
    if (flags.sph == "off") ov.sph = false;
    if (flags.spc == "on") ov.spc = true;
    if (flags.spc == "off") ov.spc = false;
    ov.seed = flags.seed;
    ov.out_dir = flags.out;
    ov.jobs = flags.jobs;
    return ov;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"social-proximity hospitalization forecasting toolkit"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        void (*run)(const std::string&, const sphcast::Overrides&, std::ostream&);
    };
    static const Sub subs[] = {
        {"simulate", "run a compartmental scenario and write truth CSVs", &sphcast::cmd_simulate},
        {"ingest", "parse, validate and clean raw truth data", &sphcast::cmd_ingest},
        {"features", "derive smoothed-rate and social-proximity channels", &sphcast::cmd_features},
        {"train", "walk-forward training plus forecast emission", &sphcast::cmd_train},
        {"forecast", "emit forecasts from stored models or the baseline", &sphcast::cmd_forecast},
        {"score", "evaluate forecast CSVs against the truth", &sphcast::cmd_score},
        {"ablate", "train both feature arms and compare them", &sphcast::cmd_ablate},
    };

    std::vector<CliFlags> flags(std::size(subs));
    for (std::size_t i = 0; i < std::size(subs); ++i) {
        CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].help);
        add_common(cmd, flags[i]);
        cmd->callback([&flags, i]() { subs[i].run(flags[i].config, to_overrides(flags[i]), std::cerr); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const sphcast::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
