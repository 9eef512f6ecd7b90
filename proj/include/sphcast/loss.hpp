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
#ifndef SPHCAST_LOSS_HPP
#define SPHCAST_LOSS_HPP

#include "sphcast/tensor.hpp"

#include <algorithm>
#include <vector>

namespace sphcast {

/// Pinball loss for one point: q*(y - yhat)_+ + (1-q)*(yhat - y)_+.
/// Nonnegative, zero iff exact; its minimizer is the q-th conditional quantile.
inline double quantile_loss(double y, double yhat, double q) {
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("quantile level must be in (0,1)");
    double under = y - yhat;
    if (std::isnan(under)) return under; // poison must propagate, max() would hide it
    return q * std::max(0.0, under) + (1.0 - q) * std::max(0.0, -under);
}

/// d/dyhat of quantile_loss; subgradient 0 at the kink y == yhat.
inline double quantile_loss_grad(double y, double yhat, double q) {
    if (yhat < y) return -q;
    if (yhat > y) return 1.0 - q;
    return 0.0;
}

/// Mean over quantiles and timesteps of the pinball terms, then mean over the
/// batch. `yhat_per_level[q]` is a [batch x horizon] matrix for level q.
inline double total_loss(const Tensor2& targets, const std::vector<Tensor2>& yhat_per_level,
                         const std::vector<double>& levels) {
    const std::size_t batch = targets.rows(), horizon = targets.cols(), nq = levels.size();
    if (yhat_per_level.size() != nq) throw ValidationError("total_loss: level count mismatch");
    for (const auto& m : yhat_per_level)
        if (m.rows() != batch || m.cols() != horizon)
            throw ValidationError("total_loss: prediction shape mismatch");
    double sum = 0.0;
    for (std::size_t q = 0; q < nq; ++q)
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t k = 0; k < horizon; ++k)
                sum += quantile_loss(targets(b, k), yhat_per_level[q](b, k), levels[q]);
    return sum / static_cast<double>(nq * horizon * batch);
}

/// Gradients of total_loss with respect to every prediction.
inline std::vector<Tensor2> total_loss_grad(const Tensor2& targets,
                                            const std::vector<Tensor2>& yhat_per_level,
                                            const std::vector<double>& levels) {
    const std::size_t batch = targets.rows(), horizon = targets.cols(), nq = levels.size();
    const double scale = 1.0 / static_cast<double>(nq * horizon * batch);
    std::vector<Tensor2> grads(nq);
    for (std::size_t q = 0; q < nq; ++q) {
        grads[q] = Tensor2(batch, horizon);
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t k = 0; k < horizon; ++k)
                grads[q](b, k) = scale * quantile_loss_grad(targets(b, k), yhat_per_level[q](b, k), levels[q]);
    }
    return grads;
}

} // namespace sphcast

#endif
