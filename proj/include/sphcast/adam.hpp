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
#ifndef SPHCAST_ADAM_HPP
#define SPHCAST_ADAM_HPP

#include "sphcast/common.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace sphcast {

/// Bias-corrected Adam with the toolkit's default learning rate of 0.0008.
struct AdamState {
    double lr = 0.0008;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t step = 0;
    std::vector<double> m, v;

    explicit AdamState(std::size_t n_params, double lr_ = 0.0008)
        : lr(lr_), m(n_params, 0.0), v(n_params, 0.0) {}
};

/// One update over the flattened parameter/gradient views. A non-finite
/// gradient aborts with the offending index (training reports the epoch).
inline void adam_step(const std::vector<double*>& params, const std::vector<const double*>& grads,
                      AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw ValidationError("adam_step: size mismatch");
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = *grads[i];
        if (!std::isfinite(g))
            throw RuntimeFailure("adam_step: non-finite gradient at parameter " + std::to_string(i) +
                                 " of " + std::to_string(params.size()));
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        *params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
}

} // namespace sphcast

#endif
