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
#ifndef SPHCAST_SLSTM_HPP
#define SPHCAST_SLSTM_HPP

#include "sphcast/lstm.hpp"
#include "sphcast/quantiles.hpp"

#include <vector>

namespace sphcast {

/// Shape of the parallel-stream network. Both branches share layer widths;
/// they differ only in the sequence length they consume (7 vs 28 days in
/// production).
struct SlstmConfig {
    std::size_t input_channels = 3;
    std::vector<std::size_t> lstm_widths = {256, 128, 128, 128};
    std::size_t proj_dim = 64;
    std::size_t horizon = 28;
    std::vector<double> quantile_levels = hub_quantile_levels();

    std::size_t fused_dim() const { return 2 * proj_dim; }
};

/// One per-quantile output head, linear (quantile targets in scaled space may
/// exceed [-1,1], so no activation).
struct HeadParams {
    Tensor2 W; // [horizon x fused]
    std::vector<double> b;
};

/// Parallel short/long LSTM branches fused by a learnable scalar weight on
/// the short projection, then 23 linear quantile heads.
struct SlstmParams {
    SlstmConfig config;
    StackParams short_stack;
    StackParams long_stack;
    double fusion_weight = 1.0;
    std::vector<HeadParams> heads;

    static SlstmParams zeros(const SlstmConfig& cfg) {
        SlstmParams p;
        p.config = cfg;
        auto make_stack = [&cfg]() {
            StackParams s;
            std::size_t in = cfg.input_channels;
            for (std::size_t w : cfg.lstm_widths) {
                s.layers.push_back(LstmLayerParams::zeros(in, w));
                in = w;
            }
            s.proj = DenseParams::zeros(in, cfg.proj_dim);
            return s;
        };
        p.short_stack = make_stack();
        p.long_stack = make_stack();
        p.fusion_weight = 0.0;
        p.heads.assign(cfg.quantile_levels.size(),
                       HeadParams{Tensor2(cfg.horizon, cfg.fused_dim()),
                                  std::vector<double>(cfg.horizon, 0.0)});
        return p;
    }

    /// Random initialization; the fusion weight starts at 1.0.
    static SlstmParams init(const SlstmConfig& cfg, Rng& rng) {
        SlstmParams p = zeros(cfg);
        for (auto* stack : {&p.short_stack, &p.long_stack}) {
            for (auto& layer : stack->layers) layer.init(rng);
            stack->proj.init(rng);
        }
        for (auto& head : p.heads) {
            double a = 1.0 / std::sqrt(static_cast<double>(cfg.fused_dim()));
            for (double& v : head.W.data()) v = rng.uniform(-a, a);
        }
        p.fusion_weight = 1.0;
        return p;
    }
};

/// Flat view of every learnable scalar, in a fixed canonical order. The same
/// order is used for gradients, the optimizer state and checkpoints.
inline std::vector<double*> parameter_pointers(SlstmParams& p) {
    std::vector<double*> out;
    auto add_tensor = [&out](Tensor2& t) {
        for (double& v : t.data()) out.push_back(&v);
    };
    auto add_vec = [&out](std::vector<double>& v) {
        for (double& x : v) out.push_back(&x);
    };
    for (auto* stack : {&p.short_stack, &p.long_stack}) {
        for (auto& l : stack->layers) {
            add_tensor(l.W_f); add_tensor(l.W_i); add_tensor(l.W_o); add_tensor(l.W_g);
            add_tensor(l.U_f); add_tensor(l.U_i); add_tensor(l.U_o); add_tensor(l.U_g);
            add_vec(l.b_f); add_vec(l.b_i); add_vec(l.b_o); add_vec(l.b_g);
        }
        add_tensor(stack->proj.W);
        add_vec(stack->proj.b);
    }
    out.push_back(&p.fusion_weight);
    for (auto& h : p.heads) {
        add_tensor(h.W);
        add_vec(h.b);
    }
    return out;
}

struct SlstmCache {
    StackCache short_cache, long_cache;
    Tensor2 fused; // [B x 2*proj]
};

/// Batched forward. xs_* are per-timestep [B x C] tensors; returns one
/// [B x horizon] matrix per quantile level.
inline std::vector<Tensor2> slstm_forward_batch(const std::vector<Tensor2>& xs_short,
                                                const std::vector<Tensor2>& xs_long,
                                                const SlstmParams& p, SlstmCache& cache) {
    stack_forward(xs_short, p.short_stack, cache.short_cache);
    stack_forward(xs_long, p.long_stack, cache.long_cache);
    const Tensor2& ps = cache.short_cache.proj_out;
    const Tensor2& pl = cache.long_cache.proj_out;
    const std::size_t B = ps.rows(), D = ps.cols();
    cache.fused = Tensor2(B, 2 * D);
    for (std::size_t b = 0; b < B; ++b) {
        double* row = cache.fused.row_ptr(b);
        const double* s = ps.row_ptr(b);
        const double* l = pl.row_ptr(b);
        for (std::size_t j = 0; j < D; ++j) row[j] = p.fusion_weight * s[j];
        for (std::size_t j = 0; j < D; ++j) row[D + j] = l[j];
    }
    std::vector<Tensor2> out(p.heads.size());
    for (std::size_t q = 0; q < p.heads.size(); ++q) {
        if (p.heads[q].W.rows() != p.config.horizon)
            throw ValidationError("slstm_forward: head horizon mismatch");
        matmul_bt(cache.fused, p.heads[q].W, out[q]);
        for (std::size_t b = 0; b < B; ++b) {
            double* row = out[q].row_ptr(b);
            for (std::size_t k = 0; k < p.config.horizon; ++k) row[k] += p.heads[q].b[k];
        }
    }
    return out;
}

/// Batched reverse pass; `dout[q]` is the gradient at head q's output.
inline void slstm_backward_batch(const SlstmParams& p, const SlstmCache& cache,
                                 const std::vector<Tensor2>& dout, SlstmParams& grads) {
    const Tensor2& ps = cache.short_cache.proj_out;
    const std::size_t B = ps.rows(), D = ps.cols();
    Tensor2 dfused(B, 2 * D);
    for (std::size_t q = 0; q < p.heads.size(); ++q) {
        matmul_at_acc(dout[q], cache.fused, grads.heads[q].W);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t k = 0; k < p.config.horizon; ++k) grads.heads[q].b[k] += dout[q](b, k);
        matmul_acc(dout[q], p.heads[q].W, dfused);
    }
    Tensor2 dps(B, D), dpl(B, D);
    double dW = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        const double* df = dfused.row_ptr(b);
        const double* s = ps.row_ptr(b);
        for (std::size_t j = 0; j < D; ++j) {
            dW += df[j] * s[j];
            dps(b, j) = df[j] * p.fusion_weight;
            dpl(b, j) = df[D + j];
        }
    }
    grads.fusion_weight += dW;
    stack_backward(p.short_stack, cache.short_cache, dps, grads.short_stack);
    stack_backward(p.long_stack, cache.long_cache, dpl, grads.long_stack);
}

/// Single-sample forward (spec-level operation): x_short is [Ts x C], x_long
/// is [Tl x C]; output is [horizon x n_levels] with column q holding the
/// forecast of quantile level q. No monotonicity is enforced here; the
/// ensemble reorders after aggregation.
inline Tensor2 slstm_forward(const Tensor2& x_short, const Tensor2& x_long, const SlstmParams& p) {
    auto to_steps = [](const Tensor2& m) {
        std::vector<Tensor2> xs(m.rows());
        for (std::size_t t = 0; t < m.rows(); ++t) {
            xs[t] = Tensor2(1, m.cols());
            for (std::size_t c = 0; c < m.cols(); ++c) xs[t](0, c) = m(t, c);
        }
        return xs;
    };
    SlstmCache cache;
    auto per_level = slstm_forward_batch(to_steps(x_short), to_steps(x_long), p, cache);
    Tensor2 out(p.config.horizon, per_level.size());
    for (std::size_t q = 0; q < per_level.size(); ++q)
        for (std::size_t k = 0; k < p.config.horizon; ++k) out(k, q) = per_level[q](0, k);
    return out;
}

} // namespace sphcast

#endif
