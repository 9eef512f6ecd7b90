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
#ifndef SPHCAST_HUB_CSV_HPP
#define SPHCAST_HUB_CSV_HPP

#include "sphcast/ensemble.hpp"
#include "sphcast/truth_csv.hpp"

#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace sphcast {

/// Forecast-hub quantile format:
/// `forecast_date,target,target_end_date,location,type,quantile,value` with
/// targets "N day ahead inc hosp", one point row (quantile empty) plus one
/// row per quantile level for every (location, day). Rows are emitted in a
/// fixed order so identical runs produce identical bytes.
inline void write_hub_csv(const std::vector<QuantileForecast>& forecasts, std::ostream& out) {
    out << "forecast_date,target,target_end_date,location,type,quantile,value\n";
    std::vector<const QuantileForecast*> sorted;
    for (const auto& f : forecasts) sorted.push_back(&f);
    std::sort(sorted.begin(), sorted.end(), [](const QuantileForecast* a, const QuantileForecast* b) {
        if (a->forecast_date != b->forecast_date) return a->forecast_date < b->forecast_date;
        return a->location < b->location;
    });
    for (const QuantileForecast* f : sorted) {
        const std::size_t med = f->median_index();
        for (std::size_t day = 1; day <= f->values.rows(); ++day) {
            const std::string prefix = f->forecast_date.str() + "," + std::to_string(day) +
                                       " day ahead inc hosp," +
                                       (f->forecast_date + static_cast<long>(day)).str() + "," +
                                       f->location + ",";
            out << prefix << "point,," << detail::shortest(f->values(day - 1, med)) << '\n';
            for (std::size_t q = 0; q < f->levels.size(); ++q)
                out << prefix << "quantile," << detail::shortest(f->levels[q]) << ','
                    << detail::shortest(f->values(day - 1, q)) << '\n';
        }
    }
}

inline void write_hub_csv(const std::vector<QuantileForecast>& forecasts, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw RuntimeFailure("cannot write '" + path + "'");
    write_hub_csv(forecasts, out);
}

/// Reads a hub-format CSV back into forecasts. Quantile rows must form a
/// complete symmetric level set for every (forecast_date, location, day);
/// point rows are accepted and ignored in favor of the 0.5 quantile.
inline std::vector<QuantileForecast> read_hub_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open forecast CSV '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
    ++lineno;
    if (detail::strip_cr(line) != "forecast_date,target,target_end_date,location,type,quantile,value")
        throw ValidationError(path + ":1: not a hub-format forecast CSV");

    struct Key {
        Date date;
        std::string loc;
        bool operator<(const Key& o) const {
            if (date != o.date) return date < o.date;
            return loc < o.loc;
        }
    };
    std::map<Key, std::map<std::size_t, std::map<double, double>>> cells; // key -> day -> level -> value
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        auto ctx = path + ":" + std::to_string(lineno);
        auto fields = detail::split(line, ',');
        if (fields.size() != 7) throw ValidationError(ctx + ": expected 7 fields");
        Date fdate = Date::parse(fields[0]);
        const std::string& target = fields[1];
        std::size_t day = 0;
        {
            auto sp = target.find(' ');
            if (sp == std::string::npos) throw ValidationError(ctx + ": bad target '" + target + "'");
            day = static_cast<std::size_t>(std::atoi(target.substr(0, sp).c_str()));
            if (day == 0 || target.substr(sp) != " day ahead inc hosp")
                throw ValidationError(ctx + ": unsupported target '" + target + "'");
        }
        Date end = Date::parse(fields[2]);
        if (end != fdate + static_cast<long>(day))
            throw ValidationError(ctx + ": target_end_date does not match forecast_date + " +
                                  std::to_string(day));
        const std::string& loc = fields[3];
        const std::string& type = fields[4];
        double value = detail::parse_double(fields[6], ctx);
        if (type == "point") continue;
        if (type != "quantile") throw ValidationError(ctx + ": unknown type '" + type + "'");
        double level = detail::parse_double(fields[5], ctx);
        auto& day_map = cells[Key{fdate, loc}][day];
        if (!day_map.emplace(level, value).second)
            throw ValidationError(ctx + ": duplicate quantile row");
    }
    if (cells.empty()) throw ValidationError(path + ": no forecast rows");

    std::vector<QuantileForecast> out;
    for (auto& [key, days] : cells) {
        std::size_t horizon = days.rbegin()->first;
        if (days.size() != horizon)
            throw ValidationError(path + ": forecast " + key.loc + " @ " + key.date.str() +
                                  " is missing horizon days");
        std::vector<double> levels;
        for (const auto& [lvl, v] : days.begin()->second) levels.push_back(lvl);
        check_level_set(levels);
        QuantileForecast f;
        f.forecast_date = key.date;
        f.location = key.loc;
        f.levels = levels;
        f.values = Tensor2(horizon, levels.size());
        for (std::size_t k = 1; k <= horizon; ++k) {
            auto it = days.find(k);
            if (it == days.end())
                throw ValidationError(path + ": forecast " + key.loc + " @ " + key.date.str() +
                                      " lacks day " + std::to_string(k));
            if (it->second.size() != levels.size())
                throw ValidationError(path + ": inconsistent level set for " + key.loc + " day " +
                                      std::to_string(k));
            std::size_t q = 0;
            for (const auto& [lvl, v] : it->second) {
                if (std::abs(lvl - levels[q]) > 1e-12)
                    throw ValidationError(path + ": inconsistent level set for " + key.loc);
                f.values(k - 1, q) = v;
                ++q;
            }
        }
        out.push_back(std::move(f));
    }
    return out;
}

} // namespace sphcast

#endif
