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
#ifndef SPHCAST_PANEL_HPP
#define SPHCAST_PANEL_HPP

#include "sphcast/common.hpp"
#include "sphcast/date.hpp"
#include "sphcast/tensor.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace sphcast {

struct Location {
    std::string id;   // short code, e.g. a 2-char state code
    std::string name;
    long long population = 0; // persons, > 0
};

/// Per-location daily series with population metadata. Channels are dense
/// [location x date] matrices; dates are contiguous by construction.
class TimePanel {
public:
    TimePanel() = default;
    TimePanel(std::vector<Location> locations, Date start, std::size_t n_dates)
        : locations_(std::move(locations)), start_(start), n_dates_(n_dates) {
        for (std::size_t i = 0; i < locations_.size(); ++i) {
            if (locations_[i].population <= 0)
                throw ValidationError("location '" + locations_[i].id + "' has non-positive population");
            if (!index_.emplace(locations_[i].id, i).second)
                throw ValidationError("duplicate location id '" + locations_[i].id + "'");
        }
    }

    const std::vector<Location>& locations() const { return locations_; }
    std::size_t n_locations() const { return locations_.size(); }
    std::size_t n_dates() const { return n_dates_; }
    Date start_date() const { return start_; }
    Date end_date() const { return start_ + static_cast<long>(n_dates_ - 1); }
    Date date(std::size_t t) const { return start_ + static_cast<long>(t); }

    std::size_t location_index(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw ValidationError("unknown location '" + id + "'");
        return it->second;
    }

    /// Index of a calendar date within the panel; errors if outside.
    std::size_t date_index(Date d) const {
        long off = d - start_;
        if (off < 0 || off >= static_cast<long>(n_dates_))
            throw ValidationError("date " + d.str() + " outside panel range " + start_.str() +
                                  ".." + end_date().str());
        return static_cast<std::size_t>(off);
    }

    bool has_channel(const std::string& name) const { return channels_.count(name) > 0; }

    void set_channel(const std::string& name, Tensor2 values) {
        if (values.rows() != n_locations() || values.cols() != n_dates_)
            throw ValidationError("channel '" + name + "' has shape " + std::to_string(values.rows()) +
                                  "x" + std::to_string(values.cols()) + ", panel is " +
                                  std::to_string(n_locations()) + "x" + std::to_string(n_dates_));
        values.check_finite(("channel " + name).c_str());
        channels_[name] = std::move(values);
    }

    const Tensor2& channel(const std::string& name) const {
        auto it = channels_.find(name);
        if (it == channels_.end()) throw ValidationError("panel has no channel '" + name + "'");
        return it->second;
    }

    std::vector<std::string> channel_names() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : channels_) out.push_back(k);
        return out;
    }

    /// Copy of the panel restricted to dates [from, to], all channels kept.
    TimePanel slice(Date from, Date to) const {
        std::size_t a = date_index(from), b = date_index(to);
        if (b < a) throw ValidationError("empty panel slice");
        TimePanel out(locations_, from, b - a + 1);
        for (const auto& [name, m] : channels_) {
            Tensor2 s(n_locations(), b - a + 1);
            for (std::size_t i = 0; i < n_locations(); ++i)
                for (std::size_t t = a; t <= b; ++t) s(i, t - a) = m(i, t);
            out.set_channel(name, std::move(s));
        }
        return out;
    }

private:
    std::vector<Location> locations_;
    Date start_;
    std::size_t n_dates_ = 0;
    std::map<std::string, Tensor2> channels_;
    std::map<std::string, std::size_t> index_;
};

/// Trailing 7-day mean; the window is shorter at the left edge so the output
/// has the same length as the input.
inline std::vector<double> rolling_mean_7(const std::vector<double>& series) {
    std::vector<double> out(series.size());
    double running = 0.0;
    for (std::size_t t = 0; t < series.size(); ++t) {
        running += series[t];
        if (t >= 7) running -= series[t - 7];
        std::size_t width = std::min<std::size_t>(t + 1, 7);
        out[t] = running / static_cast<double>(width);
    }
    return out;
}

/// Applies rolling_mean_7 to every location row of a channel.
inline Tensor2 smooth_channel(const TimePanel& panel, const std::string& channel) {
    const Tensor2& src = panel.channel(channel);
    Tensor2 out(src.rows(), src.cols());
    std::vector<double> row(src.cols());
    for (std::size_t i = 0; i < src.rows(); ++i) {
        for (std::size_t t = 0; t < src.cols(); ++t) row[t] = src(i, t);
        auto sm = rolling_mean_7(row);
        for (std::size_t t = 0; t < src.cols(); ++t) out(i, t) = sm[t];
    }
    return out;
}

/// value * 10000 / population, per location.
inline Tensor2 to_rate_per_10k(const TimePanel& panel, const std::string& channel) {
    const Tensor2& src = panel.channel(channel);
    Tensor2 out(src.rows(), src.cols());
    for (std::size_t i = 0; i < src.rows(); ++i) {
        long long pop = panel.locations()[i].population;
        if (pop <= 0)
            throw ValidationError("missing population for location '" + panel.locations()[i].id + "'");
        double f = 10000.0 / static_cast<double>(pop);
        for (std::size_t t = 0; t < src.cols(); ++t) out(i, t) = src(i, t) * f;
    }
    return out;
}

/// MinMax scaler mapping the fitted [min, max] onto [-1, 1]. One global
/// scaler per channel (all locations, all dates in the fitted window); values
/// outside the fitted range are deliberately not clamped.
struct ScalerParams {
    std::string channel;
    double min = 0.0;
    double max = 0.0;
    Date fitted_from;
    Date fitted_to;
};

inline ScalerParams fit_scaler(const TimePanel& panel, const std::string& channel, Date from, Date to) {
    std::size_t a = panel.date_index(from), b = panel.date_index(to);
    if (b < a) throw ValidationError("fit_scaler: empty window");
    const Tensor2& m = panel.channel(channel);
    double lo = m(0, a), hi = m(0, a);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t t = a; t <= b; ++t) {
            lo = std::min(lo, m(i, t));
            hi = std::max(hi, m(i, t));
        }
    if (!(hi > lo))
        throw ValidationError("degenerate channel '" + channel + "': min == max == " + std::to_string(lo));
    return ScalerParams{channel, lo, hi, from, to};
}

inline double apply_scaler(double x, const ScalerParams& p) {
    return 2.0 * (x - p.min) / (p.max - p.min) - 1.0;
}

inline double invert_scaler(double x, const ScalerParams& p) {
    return (x + 1.0) * 0.5 * (p.max - p.min) + p.min;
}

} // namespace sphcast

#endif
