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
#ifndef SPHCAST_CONNECTIVITY_HPP
#define SPHCAST_CONNECTIVITY_HPP

#include "sphcast/csv_util.hpp"
#include "sphcast/panel.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace sphcast {

/// Symmetric social-connectedness values for an ordered location list.
/// Off-diagonal entries are strictly positive; the diagonal is unused by the
/// directional weights and kept as parsed (0 when absent).
struct ConnectivityMatrix {
    std::vector<std::string> locations;
    Tensor2 sci; // [i x j], symmetric

    std::size_t n() const { return locations.size(); }
};

/// Row-normalized, zero-diagonal weights: w[i][j] is the share of i's social
/// connections pointing at j. Rows sum to 1.
struct DirectionalWeights {
    std::vector<std::string> locations;
    Tensor2 weights;

    std::size_t n() const { return locations.size(); }
};

/// Parses a TSV with header `user_loc	fr_loc	scaled_sci` and restricts it to
/// `locations`. Every ordered off-diagonal pair must be present; asymmetry
/// beyond 1e-6 relative is an error.
inline ConnectivityMatrix parse_sci_tsv(const std::string& path, const std::vector<std::string>& locations) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open SCI TSV '" + path + "'");
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < locations.size(); ++i) index[locations[i]] = i;

    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
    ++lineno;
    if (detail::strip_cr(line) != "user_loc\tfr_loc\tscaled_sci")
        throw ValidationError(path + ":1: expected header 'user_loc\\tfr_loc\\tscaled_sci'");

    const std::size_t n = locations.size();
    Tensor2 sci(n, n);
    std::vector<std::vector<bool>> seen(n, std::vector<bool>(n, false));
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        auto ctx = path + ":" + std::to_string(lineno);
        auto fields = detail::split(line, '\t');
        if (fields.size() != 3) throw ValidationError(ctx + ": expected 3 tab-separated fields");
        auto it_i = index.find(fields[0]);
        auto it_j = index.find(fields[1]);
        if (it_i == index.end() || it_j == index.end()) continue; // outside requested list
        double v = detail::parse_double(fields[2], ctx);
        std::size_t i = it_i->second, j = it_j->second;
        if (i != j && v <= 0.0) throw ValidationError(ctx + ": SCI must be positive");
        if (seen[i][j]) throw ValidationError(ctx + ": duplicate pair (" + fields[0] + "," + fields[1] + ")");
        seen[i][j] = true;
        sci(i, j) = v;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (!seen[i][j] && !seen[j][i])
                throw ValidationError(path + ": missing SCI pair (" + locations[i] + "," + locations[j] + ")");
            if (seen[i][j] && seen[j][i]) {
                double a = sci(i, j), b = sci(j, i);
                if (std::abs(a - b) > 1e-6 * std::max(std::abs(a), std::abs(b)))
                    throw ValidationError(path + ": asymmetric SCI for (" + locations[i] + "," +
                                          locations[j] + "): " + std::to_string(a) + " vs " + std::to_string(b));
            }
            if (!seen[i][j]) sci(i, j) = sci(j, i); // symmetric completion from the given direction
        }
    return ConnectivityMatrix{locations, std::move(sci)};
}

/// w[i][j] = sci[i][j] / sum_{h != i} sci[i][h], diagonal 0.
inline DirectionalWeights row_normalize(const ConnectivityMatrix& m) {
    const std::size_t n = m.n();
    if (n < 2) throw ValidationError("row_normalize: need at least 2 locations");
    Tensor2 w(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double denom = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) denom += m.sci(i, j);
        if (!(denom > 0.0))
            throw ValidationError("row_normalize: location '" + m.locations[i] + "' has no positive connections");
        for (std::size_t j = 0; j < n; ++j) w(i, j) = (j == i) ? 0.0 : m.sci(i, j) / denom;
    }
    return DirectionalWeights{m.locations, std::move(w)};
}

/// Social proximity feature: SPH[i,t] = sum_j rate[j,t] * w[i][j]. The same
/// weighted sum computes SPC when fed case rates.
inline Tensor2 social_proximity(const DirectionalWeights& w, const Tensor2& rate) {
    if (rate.rows() != w.n())
        throw ValidationError("social_proximity: weights are for " + std::to_string(w.n()) +
                              " locations, channel has " + std::to_string(rate.rows()));
    Tensor2 out(rate.rows(), rate.cols());
    matmul_acc(w.weights, rate, out);
    return out;
}

inline Tensor2 compute_sph(const DirectionalWeights& w, const Tensor2& hosp_rate) {
    return social_proximity(w, hosp_rate);
}

inline Tensor2 compute_spc(const DirectionalWeights& w, const Tensor2& case_rate) {
    return social_proximity(w, case_rate);
}

/// Writes the matrix in the SCI TSV format (all ordered pairs, diagonal included).
inline void write_sci_tsv(const ConnectivityMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw RuntimeFailure("cannot write '" + path + "'");
    out << "user_loc\tfr_loc\tscaled_sci\n";
    for (std::size_t i = 0; i < m.n(); ++i)
        for (std::size_t j = 0; j < m.n(); ++j)
            out << m.locations[i] << '\t' << m.locations[j] << '\t'
                << detail::shortest(m.sci(i, j)) << '\n';
}

} // namespace sphcast

#endif
