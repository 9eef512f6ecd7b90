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
#ifndef SPHCAST_SCORING_HPP
#define SPHCAST_SCORING_HPP

#include "sphcast/ensemble.hpp"
#include "sphcast/panel.hpp"
#include "sphcast/quantiles.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace sphcast {

inline double mae(const std::vector<double>& truth, const std::vector<double>& pred) {
    if (truth.size() != pred.size() || truth.empty())
        throw ValidationError("mae: need equal-length nonempty series");
    double s = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) s += std::abs(truth[i] - pred[i]);
    return s / static_cast<double>(truth.size());
}

/// Percent error; fails loudly on non-positive truth instead of returning
/// infinities.
inline double mape(const std::vector<double>& truth, const std::vector<double>& pred) {
    if (truth.size() != pred.size() || truth.empty())
        throw ValidationError("mape: need equal-length nonempty series");
    double s = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!(truth[i] > 0.0))
            throw ValidationError("mape: truth value " + std::to_string(truth[i]) +
                                  " at index " + std::to_string(i) + " is not positive");
        s += std::abs(truth[i] - pred[i]) / truth[i];
    }
    return 100.0 * s / static_cast<double>(truth.size());
}

inline double rmse(const std::vector<double>& truth, const std::vector<double>& pred) {
    if (truth.size() != pred.size() || truth.empty())
        throw ValidationError("rmse: need equal-length nonempty series");
    double s = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        double d = truth[i] - pred[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(truth.size()));
}

/// Interval score of one central (1-alpha) interval: dispersion plus scaled
/// penalties when the truth escapes below or above.
struct IntervalScore {
    double total = 0.0;
    double dispersion = 0.0;
    double under = 0.0;
    double over = 0.0;
};

inline IntervalScore interval_score(double y, double l, double u, double alpha) {
    if (l > u) throw ValidationError("interval_score: lower bound above upper");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("interval_score: alpha outside (0,1)");
    IntervalScore s;
    s.dispersion = u - l;
    if (y < l) s.under = (2.0 / alpha) * (l - y);
    if (y > u) s.over = (2.0 / alpha) * (y - u);
    s.total = s.dispersion + s.under + s.over;
    return s;
}

/// Weighted interval score over a full quantile row. With the 23 hub levels
/// this forms K=11 central intervals; weights are alpha/2 and the median term
/// contributes |y-m|/2, assigned to under- or over-prediction by the sign of
/// y-m. Components sum to the total.
inline IntervalScore wis(double y, const std::vector<double>& levels, const std::vector<double>& values) {
    check_level_set(levels);
    if (values.size() != levels.size()) throw ValidationError("wis: level/value count mismatch");
    for (std::size_t k = 0; k + 1 < values.size(); ++k)
        if (values[k] > values[k + 1] + 1e-12)
            throw ValidationError("wis: quantile row is not monotone at index " + std::to_string(k));
    const std::size_t K = levels.size() / 2;
    const double m = values[K];
    const double norm = static_cast<double>(K) + 0.5;
    IntervalScore total;
    // median term
    if (y > m) total.under = 0.5 * (y - m);
    else total.over = 0.5 * (m - y);
    double weighted_sum = 0.5 * std::abs(y - m);
    for (std::size_t k = 0; k < K; ++k) {
        const double alpha = 2.0 * levels[k];
        const double w = alpha / 2.0;
        IntervalScore is = interval_score(y, values[k], values[levels.size() - 1 - k], alpha);
        weighted_sum += w * is.total;
        total.dispersion += w * is.dispersion;
        total.under += w * is.under;
        total.over += w * is.over;
    }
    total.total = weighted_sum / norm;
    total.dispersion /= norm;
    total.under /= norm;
    total.over /= norm;
    return total;
}

/// Fraction of observations inside [lower, upper].
inline double coverage(const std::vector<double>& truth, const std::vector<double>& lower,
                       const std::vector<double>& upper) {
    if (truth.size() != lower.size() || truth.size() != upper.size() || truth.empty())
        throw ValidationError("coverage: need equal-length nonempty series");
    std::size_t inside = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (lower[i] <= truth[i] && truth[i] <= upper[i]) ++inside;
    return static_cast<double>(inside) / static_cast<double>(truth.size());
}

struct ScoreRow {
    double mae = 0.0, mape = 0.0, rmse = 0.0;
    double wis = 0.0, dispersion = 0.0, under = 0.0, over = 0.0;
    double coverage95 = 0.0;
};

/// Per-horizon-day metrics averaged over locations and forecast dates, plus
/// the 28-day average row.
struct ScoreReport {
    std::string model;
    std::size_t horizon_days = 28;
    std::vector<ScoreRow> by_day; // index k-1 = day k
    ScoreRow average;
};

struct ScoreOptions {
    bool smooth_truth = true; // evaluate against the 7-day-smoothed series
    std::string truth_channel = "hospitalizations";
};

/// Scores a set of forecasts against a truth panel. Every forecast must have
/// truth for all horizon days; gaps are collected and reported together.
inline ScoreReport score_run(const std::vector<QuantileForecast>& forecasts, const TimePanel& truth,
                             const std::string& model_name, const ScoreOptions& opts = {}) {
    if (forecasts.empty()) throw ValidationError("score_run: no forecasts");
    Tensor2 target = opts.smooth_truth ? smooth_channel(truth, opts.truth_channel)
                                       : truth.channel(opts.truth_channel);
    const std::size_t horizon = forecasts.front().values.rows();
    const std::vector<double>& levels = forecasts.front().levels;
    check_level_set(levels);
    std::size_t lo95 = levels.size(), hi95 = levels.size(), med = levels.size() / 2;
    for (std::size_t q = 0; q < levels.size(); ++q) {
        if (std::abs(levels[q] - 0.025) < 1e-12) lo95 = q;
        if (std::abs(levels[q] - 0.975) < 1e-12) hi95 = q;
    }
    if (lo95 == levels.size() || hi95 == levels.size())
        throw ValidationError("score_run: levels lack the 0.025/0.975 pair for 95% coverage");

    std::vector<std::string> gaps;
    for (const auto& f : forecasts) {
        if (f.values.rows() != horizon || f.levels != levels)
            throw ValidationError("score_run: forecasts have inconsistent shape");
        for (std::size_t k = 1; k <= horizon; ++k) {
            Date d = f.forecast_date + static_cast<long>(k);
            if (d < truth.start_date() || d > truth.end_date()) {
                if (gaps.size() < 10) gaps.push_back(f.location + " @ " + d.str());
            }
        }
    }
    if (!gaps.empty()) {
        std::string msg = "score_run: missing truth for:";
        for (const auto& g : gaps) msg += " " + g;
        throw ValidationError(msg);
    }

    ScoreReport report;
    report.model = model_name;
    report.horizon_days = horizon;
    report.by_day.resize(horizon);
    for (std::size_t k = 1; k <= horizon; ++k) {
        std::vector<double> y, point, lo, hi;
        IntervalScore acc;
        for (const auto& f : forecasts) {
            std::size_t loc = truth.location_index(f.location);
            std::size_t t = truth.date_index(f.forecast_date + static_cast<long>(k));
            y.push_back(target(loc, t));
            point.push_back(f.values(k - 1, med));
            lo.push_back(f.values(k - 1, lo95));
            hi.push_back(f.values(k - 1, hi95));
            std::vector<double> row(levels.size());
            for (std::size_t q = 0; q < levels.size(); ++q) row[q] = f.values(k - 1, q);
            IntervalScore w = wis(y.back(), levels, row);
            acc.total += w.total; acc.dispersion += w.dispersion;
            acc.under += w.under; acc.over += w.over;
        }
        const double n = static_cast<double>(y.size());
        ScoreRow& row = report.by_day[k - 1];
        row.mae = mae(y, point);
        row.mape = mape(y, point);
        row.rmse = rmse(y, point);
        row.wis = acc.total / n;
        row.dispersion = acc.dispersion / n;
        row.under = acc.under / n;
        row.over = acc.over / n;
        row.coverage95 = coverage(y, lo, hi);
    }
    ScoreRow& avg = report.average;
    for (const auto& r : report.by_day) {
        avg.mae += r.mae; avg.mape += r.mape; avg.rmse += r.rmse;
        avg.wis += r.wis; avg.dispersion += r.dispersion;
        avg.under += r.under; avg.over += r.over; avg.coverage95 += r.coverage95;
    }
    const double h = static_cast<double>(horizon);
    avg.mae /= h; avg.mape /= h; avg.rmse /= h; avg.wis /= h;
    avg.dispersion /= h; avg.under /= h; avg.over /= h; avg.coverage95 /= h;
    return report;
}

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace detail

/// One row per model x horizon day, then an `avg` row per model.
inline void write_report_csv(const std::vector<ScoreReport>& reports, std::ostream& out) {
    out << "model,day,mae,mape,rmse,wis,dispersion,under,over,coverage95\n";
    auto emit = [&out](const std::string& model, const std::string& day, const ScoreRow& r) {
        out << model << ',' << day << ',' << detail::fmt(r.mae) << ',' << detail::fmt(r.mape) << ','
            << detail::fmt(r.rmse) << ',' << detail::fmt(r.wis) << ',' << detail::fmt(r.dispersion)
            << ',' << detail::fmt(r.under) << ',' << detail::fmt(r.over) << ','
            << detail::fmt(r.coverage95) << '\n';
    };
    for (const auto& rep : reports) {
        for (std::size_t k = 1; k <= rep.by_day.size(); ++k)
            emit(rep.model, std::to_string(k), rep.by_day[k - 1]);
        emit(rep.model, "avg", rep.average);
    }
}

inline void write_report_markdown(const std::vector<ScoreReport>& reports, std::ostream& out) {
    out << "| model | day | MAE | MAPE | RMSE | WIS | disp | under | over | cov95 |\n";
    out << "|---|---|---|---|---|---|---|---|---|---|\n";
    auto emit = [&out](const std::string& model, const std::string& day, const ScoreRow& r) {
        out << "| " << model << " | " << day << " | " << detail::fmt(r.mae) << " | "
            << detail::fmt(r.mape) << " | " << detail::fmt(r.rmse) << " | " << detail::fmt(r.wis)
            << " | " << detail::fmt(r.dispersion) << " | " << detail::fmt(r.under) << " | "
            << detail::fmt(r.over) << " | " << detail::fmt(r.coverage95) << " |\n";
    };
    for (const auto& rep : reports) {
        for (std::size_t k = 1; k <= rep.by_day.size(); ++k)
            emit(rep.model, std::to_string(k), rep.by_day[k - 1]);
        emit(rep.model, "avg", rep.average);
    }
}

/// Simple two-panel polyline chart of MAE and WIS by horizon day.
inline void write_report_svg(const std::vector<ScoreReport>& reports, std::ostream& out) {
    const int W = 840, H = 360, panel_w = 390, panel_h = 280, margin = 40;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"};
    auto panel = [&](int x0, bool use_wis, const char* title) {
        double vmax = 1e-9;
        for (const auto& rep : reports)
            for (const auto& r : rep.by_day) vmax = std::max(vmax, use_wis ? r.wis : r.mae);
        out << "<text x=\"" << x0 + panel_w / 2 << "\" y=\"20\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
        out << "<rect x=\"" << x0 << "\" y=\"" << margin << "\" width=\"" << panel_w << "\" height=\""
            << panel_h << "\" fill=\"none\" stroke=\"#888\"/>\n";
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto& rep = reports[i];
            out << "<polyline fill=\"none\" stroke=\"" << colors[i % 6] << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t k = 0; k < rep.by_day.size(); ++k) {
                double v = use_wis ? rep.by_day[k].wis : rep.by_day[k].mae;
                double px = x0 + (panel_w * (k + 0.5)) / rep.by_day.size();
                double py = margin + panel_h - panel_h * (v / vmax);
                out << px << ',' << py << ' ';
            }
            out << "\"/>\n";
            out << "<text x=\"" << x0 + 8 << "\" y=\"" << margin + 16 + 16 * i << "\" fill=\""
                << colors[i % 6] << "\" font-family=\"sans-serif\" font-size=\"12\">" << rep.model
                << "</text>\n";
        }
        out << "<text x=\"" << x0 + panel_w / 2 << "\" y=\"" << H - 10
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">horizon day</text>\n";
    };
    panel(margin, false, "MAE by horizon day");
    panel(2 * margin + panel_w, true, "WIS by horizon day");
    out << "</svg>\n";
}

} // namespace sphcast

#endif
