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
#ifndef SPHCAST_TRUTH_CSV_HPP
#define SPHCAST_TRUTH_CSV_HPP

#include "sphcast/csv_util.hpp"
#include "sphcast/panel.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace sphcast {

/// Raw parsed cells for one channel, before panel assembly. Missing
/// (location, date) combinations stay missing here; assembly decides whether
/// that is an error.
struct TruthFragment {
    std::string channel;
    std::map<std::string, std::map<Date, double>> cells; // location -> date -> value
    Warnings warnings;
};

/// Parses a truth CSV with header `date,location,value`. Negative values are
/// clamped to 0 with a warning (reporting-error cleaning rule); duplicate
/// (date, location) rows are a conflict error.
inline TruthFragment parse_truth_csv(const std::string& path, const std::string& channel) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open truth CSV '" + path + "'");
    TruthFragment frag;
    frag.channel = channel;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
    ++lineno;
    if (detail::strip_cr(line) != "date,location,value")
        throw ValidationError(path + ":1: expected header 'date,location,value'");
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        auto ctx = path + ":" + std::to_string(lineno);
        auto fields = detail::split(line, ',');
        if (fields.size() != 3) throw ValidationError(ctx + ": expected 3 fields, got " + std::to_string(fields.size()));
        Date d = Date::parse(fields[0]);
        const std::string& loc = fields[1];
        if (loc.empty()) throw ValidationError(ctx + ": empty location");
        double v = detail::parse_double(fields[2], ctx);
        if (v < 0.0) {
            frag.warnings.push_back({ctx + ": negative value " + fields[2] + " for " + loc + " clamped to 0"});
            v = 0.0;
        }
        auto& per_loc = frag.cells[loc];
        if (!per_loc.emplace(d, v).second)
            throw ValidationError(ctx + ": duplicate cell (" + fields[0] + "," + loc + ")");
    }
    return frag;
}

/// Parses `location,population`.
inline std::vector<Location> parse_population_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open population CSV '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
    ++lineno;
    if (detail::strip_cr(line) != "location,population")
        throw ValidationError(path + ":1: expected header 'location,population'");
    std::vector<Location> out;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        auto ctx = path + ":" + std::to_string(lineno);
        auto fields = detail::split(line, ',');
        if (fields.size() != 2) throw ValidationError(ctx + ": expected 2 fields");
        double pop = detail::parse_double(fields[1], ctx);
        if (pop <= 0 || pop != static_cast<double>(static_cast<long long>(pop)))
            throw ValidationError(ctx + ": population must be a positive integer");
        out.push_back(Location{fields[0], fields[0], static_cast<long long>(pop)});
    }
    return out;
}

/// Assembles fragments into a validated panel. Locations are ordered as in
/// `locations`; every location must cover the full contiguous date span of
/// the union, otherwise the gaps are reported as errors.
inline TimePanel build_panel(const std::vector<TruthFragment>& fragments,
                             const std::vector<Location>& locations,
                             Warnings* warnings = nullptr) {
    if (fragments.empty()) throw ValidationError("build_panel: no fragments");
    Date lo, hi;
    bool first = true;
    for (const auto& f : fragments)
        for (const auto& [loc, series] : f.cells) {
            if (series.empty()) continue;
            Date a = series.begin()->first, b = series.rbegin()->first;
            if (first) { lo = a; hi = b; first = false; }
            else { lo = std::min(lo, a); hi = std::max(hi, b); }
        }
    if (first) throw ValidationError("build_panel: no data cells");
    std::size_t n_dates = static_cast<std::size_t>(hi - lo) + 1;

    TimePanel panel(locations, lo, n_dates);
    for (const auto& f : fragments) {
        Tensor2 m(locations.size(), n_dates);
        std::vector<std::string> gaps;
        for (std::size_t i = 0; i < locations.size(); ++i) {
            auto it = f.cells.find(locations[i].id);
            if (it == f.cells.end()) {
                gaps.push_back(locations[i].id + " (entire series)");
                continue;
            }
            const auto& series = it->second;
            for (std::size_t t = 0; t < n_dates; ++t) {
                Date d = lo + static_cast<long>(t);
                auto cell = series.find(d);
                if (cell == series.end()) {
                    if (gaps.size() < 10) gaps.push_back(locations[i].id + " @ " + d.str());
                    continue;
                }
                m(i, t) = cell->second;
            }
        }
        if (!gaps.empty()) {
            std::string msg = "channel '" + f.channel + "' has missing cells (dates must be contiguous):";
            for (const auto& g : gaps) msg += " " + g;
            throw ValidationError(msg);
        }
        panel.set_channel(f.channel, std::move(m));
        if (warnings)
            warnings->insert(warnings->end(), f.warnings.begin(), f.warnings.end());
    }
    return panel;
}

/// Writes one channel back out in the truth CSV format (inspection/export).
inline void write_truth_csv(const TimePanel& panel, const std::string& channel, std::ostream& out) {
    const Tensor2& m = panel.channel(channel);
    out << "date,location,value\n";
    for (std::size_t t = 0; t < panel.n_dates(); ++t)
        for (std::size_t i = 0; i < panel.n_locations(); ++i)
            out << panel.date(t).str() << ',' << panel.locations()[i].id << ','
                << detail::shortest(m(i, t)) << '\n';
}

inline void write_truth_csv(const TimePanel& panel, const std::string& channel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw RuntimeFailure("cannot write '" + path + "'");
    write_truth_csv(panel, channel, out);
}

} // namespace sphcast

#endif
