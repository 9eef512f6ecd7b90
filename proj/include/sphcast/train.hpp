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
#ifndef SPHCAST_TRAIN_HPP
#define SPHCAST_TRAIN_HPP

#include "sphcast/adam.hpp"
#include "sphcast/ensemble_plan.hpp"
#include "sphcast/loss.hpp"
#include "sphcast/slstm.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace sphcast {

/// One training sample: two input windows in scaled feature space and the
/// member's target slice of the scaled hospitalization-rate series.
struct Sample {
    Tensor2 x_short;            // [Ts x C]
    Tensor2 x_long;             // [Tl x C]
    std::vector<double> target; // [horizon]
};

using Samples = std::vector<Sample>;

struct TrainOptions {
    std::size_t batch_size = 64;
    double lr = 0.0008;
    std::size_t max_epochs = 200;
    std::size_t patience = 10;
};

struct TrainResult {
    SlstmParams params;
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
    double best_val_loss = std::numeric_limits<double>::infinity();
    double final_train_loss = std::numeric_limits<double>::infinity();
};

namespace detail {

/// Gathers samples into per-timestep batch tensors.
inline void gather_batch(const Samples& samples, const std::vector<std::size_t>& idx,
                         std::size_t begin, std::size_t end, std::vector<Tensor2>& xs_short,
                         std::vector<Tensor2>& xs_long, Tensor2& targets) {
    const std::size_t B = end - begin;
    const Sample& first = samples[idx[begin]];
    const std::size_t Ts = first.x_short.rows(), Tl = first.x_long.rows(), C = first.x_short.cols();
    const std::size_t H = first.target.size();
    xs_short.assign(Ts, Tensor2(B, C));
    xs_long.assign(Tl, Tensor2(B, C));
    targets = Tensor2(B, H);
    for (std::size_t b = 0; b < B; ++b) {
        const Sample& s = samples[idx[begin + b]];
        for (std::size_t t = 0; t < Ts; ++t)
            for (std::size_t c = 0; c < C; ++c) xs_short[t](b, c) = s.x_short(t, c);
        for (std::size_t t = 0; t < Tl; ++t)
            for (std::size_t c = 0; c < C; ++c) xs_long[t](b, c) = s.x_long(t, c);
        for (std::size_t k = 0; k < H; ++k) targets(b, k) = s.target[k];
    }
}

inline double evaluate_loss(const SlstmParams& p, const Samples& samples, std::size_t batch_size) {
    if (samples.empty()) throw ValidationError("evaluate_loss: empty sample set");
    std::vector<std::size_t> idx(samples.size());
    std::iota(idx.begin(), idx.end(), 0);
    double weighted = 0.0;
    std::vector<Tensor2> xs_short, xs_long;
    Tensor2 targets;
    SlstmCache cache;
    for (std::size_t begin = 0; begin < idx.size(); begin += batch_size) {
        std::size_t end = std::min(begin + batch_size, idx.size());
        gather_batch(samples, idx, begin, end, xs_short, xs_long, targets);
        auto preds = slstm_forward_batch(xs_short, xs_long, p, cache);
        weighted += total_loss(targets, preds, p.config.quantile_levels) * static_cast<double>(end - begin);
    }
    return weighted / static_cast<double>(samples.size());
}

} // namespace detail

/// Trains one ensemble member: minibatch Adam on the total quantile loss,
/// per-epoch shuffling from the member seed, early stopping on validation
/// loss with best-weights restoration. Deterministic given (seed, data,
/// options, config).
inline TrainResult train_member(const Samples& train, const Samples& val, const MemberSpec& spec,
                                const TrainOptions& opts, const SlstmConfig& base_config) {
    if (train.empty()) throw ValidationError("train_member: empty training set");
    if (val.empty()) throw ValidationError("train_member: empty validation set");
    SlstmConfig cfg = base_config;
    cfg.horizon = spec.horizon_len;
    for (const Samples* set : {&train, &val})
        for (const Sample& s : *set)
            if (s.target.size() != cfg.horizon)
                throw ValidationError("train_member: sample target length does not match member horizon");

    Rng rng(spec.seed);
    TrainResult result;
    result.params = SlstmParams::init(cfg, rng);
    SlstmParams& params = result.params;
    SlstmParams grads = SlstmParams::zeros(cfg);
    auto param_ptrs = parameter_pointers(params);
    auto grad_ptrs_mut = parameter_pointers(grads);
    std::vector<const double*> grad_ptrs(grad_ptrs_mut.begin(), grad_ptrs_mut.end());
    AdamState adam(param_ptrs.size(), opts.lr);

    SlstmParams best = params;
    std::size_t stale = 0;

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<Tensor2> xs_short, xs_long;
    Tensor2 targets;
    SlstmCache cache;

    for (std::size_t epoch = 1; epoch <= opts.max_epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += opts.batch_size) {
            std::size_t end = std::min(begin + opts.batch_size, order.size());
            detail::gather_batch(train, order, begin, end, xs_short, xs_long, targets);
            auto preds = slstm_forward_batch(xs_short, xs_long, params, cache);
            double loss = total_loss(targets, preds, cfg.quantile_levels);
            if (!std::isfinite(loss))
                throw RuntimeFailure("train_member: loss diverged at epoch " + std::to_string(epoch));
            epoch_loss += loss * static_cast<double>(end - begin);
            auto dout = total_loss_grad(targets, preds, cfg.quantile_levels);
            for (double* g : grad_ptrs_mut) *g = 0.0;
            slstm_backward_batch(params, cache, dout, grads);
            adam_step(param_ptrs, grad_ptrs, adam);
        }
        result.final_train_loss = epoch_loss / static_cast<double>(train.size());
        result.epochs_run = epoch;

        double val_loss = detail::evaluate_loss(params, val, std::max<std::size_t>(opts.batch_size, 256));
        if (!std::isfinite(val_loss))
            throw RuntimeFailure("train_member: validation loss diverged at epoch " + std::to_string(epoch));
        if (val_loss < result.best_val_loss) {
            result.best_val_loss = val_loss;
            result.best_epoch = epoch;
            best = params;
            stale = 0;
        } else if (++stale > opts.patience) {
            break;
        }
    }
    result.params = best;
    return result;
}

} // namespace sphcast

#endif
