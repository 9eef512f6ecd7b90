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
#ifndef SPHCAST_LSTM_HPP
#define SPHCAST_LSTM_HPP

#include "sphcast/rng.hpp"
#include "sphcast/tensor.hpp"

#include <cmath>
#include <vector>

namespace sphcast {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// One LSTM layer: forget/input/output gates with sigmoid activations and a
/// tanh candidate. Weight layout is [hidden x input] / [hidden x hidden] so
/// batched activations compute as X * W^T.
struct LstmLayerParams {
    std::size_t input_dim = 0, hidden_dim = 0;
    Tensor2 W_f, W_i, W_o, W_g; // [hidden x input]
    Tensor2 U_f, U_i, U_o, U_g; // [hidden x hidden]
    std::vector<double> b_f, b_i, b_o, b_g;

    static LstmLayerParams zeros(std::size_t input_dim, std::size_t hidden_dim) {
        LstmLayerParams p;
        p.input_dim = input_dim;
        p.hidden_dim = hidden_dim;
        p.W_f = p.W_i = p.W_o = p.W_g = Tensor2(hidden_dim, input_dim);
        p.U_f = p.U_i = p.U_o = p.U_g = Tensor2(hidden_dim, hidden_dim);
        p.b_f = p.b_i = p.b_o = p.b_g = std::vector<double>(hidden_dim, 0.0);
        return p;
    }

    /// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) per matrix, biases zero.
    void init(Rng& rng) {
        auto fill = [&rng](Tensor2& m, std::size_t fan_in) {
            double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
            for (double& v : m.data()) v = rng.uniform(-a, a);
        };
        fill(W_f, input_dim); fill(W_i, input_dim); fill(W_o, input_dim); fill(W_g, input_dim);
        fill(U_f, hidden_dim); fill(U_i, hidden_dim); fill(U_o, hidden_dim); fill(U_g, hidden_dim);
    }
};

/// Fully connected layer, y = act(W x + b) with W [out x in].
struct DenseParams {
    Tensor2 W;
    std::vector<double> b;

    static DenseParams zeros(std::size_t in, std::size_t out) {
        return DenseParams{Tensor2(out, in), std::vector<double>(out, 0.0)};
    }

    void init(Rng& rng) {
        double a = 1.0 / std::sqrt(static_cast<double>(W.cols()));
        for (double& v : W.data()) v = rng.uniform(-a, a);
    }
};

/// One parallel-stream branch: stacked LSTM layers followed by a tanh dense
/// projection of the last hidden state.
struct StackParams {
    std::vector<LstmLayerParams> layers;
    DenseParams proj;

    std::size_t input_dim() const { return layers.front().input_dim; }
    std::size_t proj_dim() const { return proj.W.rows(); }
};

/// Single-sample LSTM cell step (the reference semantics for the batched
/// kernels; also what inference-time unit tests exercise directly).
inline void lstm_cell_step(const std::vector<double>& x, const std::vector<double>& h_prev,
                           const std::vector<double>& c_prev, const LstmLayerParams& p,
                           std::vector<double>& h_out, std::vector<double>& c_out) {
    if (x.size() != p.input_dim || h_prev.size() != p.hidden_dim || c_prev.size() != p.hidden_dim)
        throw ValidationError("lstm_cell_step: dimension mismatch");
    h_out.assign(p.hidden_dim, 0.0);
    c_out.assign(p.hidden_dim, 0.0);
    for (std::size_t r = 0; r < p.hidden_dim; ++r) {
        double af = p.b_f[r], ai = p.b_i[r], ao = p.b_o[r], ag = p.b_g[r];
        for (std::size_t c = 0; c < p.input_dim; ++c) {
            af += p.W_f(r, c) * x[c];
            ai += p.W_i(r, c) * x[c];
            ao += p.W_o(r, c) * x[c];
            ag += p.W_g(r, c) * x[c];
        }
        for (std::size_t c = 0; c < p.hidden_dim; ++c) {
            af += p.U_f(r, c) * h_prev[c];
            ai += p.U_i(r, c) * h_prev[c];
            ao += p.U_o(r, c) * h_prev[c];
            ag += p.U_g(r, c) * h_prev[c];
        }
        double f = sigmoid(af), i = sigmoid(ai), o = sigmoid(ao), g = std::tanh(ag);
        c_out[r] = f * c_prev[r] + i * g;
        h_out[r] = o * std::tanh(c_out[r]);
    }
}

/// Per-timestep activations cached by the batched forward pass; everything
/// backpropagation-through-time needs.
struct LayerCache {
    std::vector<Tensor2> f, i, o, g, c, tanh_c, h; // T entries, each [B x hidden]
};

struct StackCache {
    std::vector<Tensor2> inputs;    // the input sequence fed to layer 0, T x [B x C]
    std::vector<LayerCache> layers; // one per LSTM layer
    Tensor2 proj_out;               // [B x proj_dim], after tanh
};

namespace detail {

// gates = X * W^T + H_prev * U^T + b, for one gate
inline void gate_preact(const Tensor2& x, const Tensor2& w, const Tensor2* h_prev, const Tensor2& u,
                        const std::vector<double>& b, Tensor2& out) {
    matmul_bt(x, w, out);
    if (h_prev) matmul_bt_acc(*h_prev, u, out);
    for (std::size_t r = 0; r < out.rows(); ++r) {
        double* row = out.row_ptr(r);
        for (std::size_t c = 0; c < out.cols(); ++c) row[c] += b[c];
    }
}

} // namespace detail

/// Runs one LSTM layer over a batched sequence, filling the cache.
inline void lstm_layer_forward(const std::vector<Tensor2>& xs, const LstmLayerParams& p, LayerCache& cache) {
    const std::size_t T = xs.size();
    const std::size_t B = xs.front().rows();
    if (xs.front().cols() != p.input_dim)
        throw ValidationError("lstm_layer_forward: expected " + std::to_string(p.input_dim) +
                              " input channels, got " + std::to_string(xs.front().cols()));
    cache.f.assign(T, Tensor2()); cache.i.assign(T, Tensor2()); cache.o.assign(T, Tensor2());
    cache.g.assign(T, Tensor2()); cache.c.assign(T, Tensor2()); cache.tanh_c.assign(T, Tensor2());
    cache.h.assign(T, Tensor2());
    const Tensor2* h_prev = nullptr;
    const Tensor2* c_prev = nullptr;
    for (std::size_t t = 0; t < T; ++t) {
        Tensor2& f = cache.f[t]; Tensor2& i = cache.i[t]; Tensor2& o = cache.o[t]; Tensor2& g = cache.g[t];
        detail::gate_preact(xs[t], p.W_f, h_prev, p.U_f, p.b_f, f);
        detail::gate_preact(xs[t], p.W_i, h_prev, p.U_i, p.b_i, i);
        detail::gate_preact(xs[t], p.W_o, h_prev, p.U_o, p.b_o, o);
        detail::gate_preact(xs[t], p.W_g, h_prev, p.U_g, p.b_g, g);
        Tensor2& c = cache.c[t]; Tensor2& tc = cache.tanh_c[t]; Tensor2& h = cache.h[t];
        c = Tensor2(B, p.hidden_dim); tc = Tensor2(B, p.hidden_dim); h = Tensor2(B, p.hidden_dim);
        for (std::size_t n = 0; n < f.size(); ++n) {
            double fv = sigmoid(f.data()[n]);
            double iv = sigmoid(i.data()[n]);
            double ov = sigmoid(o.data()[n]);
            double gv = std::tanh(g.data()[n]);
            f.data()[n] = fv; i.data()[n] = iv; o.data()[n] = ov; g.data()[n] = gv;
            double cv = iv * gv + (c_prev ? fv * c_prev->data()[n] : 0.0);
            c.data()[n] = cv;
            double tcv = std::tanh(cv);
            tc.data()[n] = tcv;
            h.data()[n] = ov * tcv;
        }
        h_prev = &cache.h[t];
        c_prev = &cache.c[t];
    }
}

/// Reverse pass of one layer. `dh_ext[t]` is the gradient flowing into h_t
/// from outside (the layer above, or the projection for the top layer); any
/// entry may be empty meaning zero. Parameter gradients accumulate into
/// `grads`; `dx[t]` receives gradients for the layer inputs.
inline void lstm_layer_backward(const std::vector<Tensor2>& xs, const LstmLayerParams& p,
                                const LayerCache& cache, const std::vector<Tensor2>& dh_ext,
                                LstmLayerParams& grads, std::vector<Tensor2>& dx) {
    const std::size_t T = xs.size();
    const std::size_t B = xs.front().rows();
    const std::size_t H = p.hidden_dim;
    dx.assign(T, Tensor2());
    Tensor2 dh_next(B, H), dc_next(B, H);
    Tensor2 da_f(B, H), da_i(B, H), da_o(B, H), da_g(B, H);
    for (std::size_t t = T; t-- > 0;) {
        const Tensor2& f = cache.f[t]; const Tensor2& i = cache.i[t];
        const Tensor2& o = cache.o[t]; const Tensor2& g = cache.g[t];
        const Tensor2& tc = cache.tanh_c[t];
        const Tensor2* c_prev = (t > 0) ? &cache.c[t - 1] : nullptr;
        const bool has_ext = t < dh_ext.size() && dh_ext[t].size() > 0;
        for (std::size_t n = 0; n < B * H; ++n) {
            double dh = dh_next.data()[n] + (has_ext ? dh_ext[t].data()[n] : 0.0);
            double ov = o.data()[n], tcv = tc.data()[n];
            double dov = dh * tcv;
            double dc = dc_next.data()[n] + dh * ov * (1.0 - tcv * tcv);
            double fv = f.data()[n], iv = i.data()[n], gv = g.data()[n];
            double dfv = c_prev ? dc * c_prev->data()[n] : 0.0;
            double div = dc * gv;
            double dgv = dc * iv;
            dc_next.data()[n] = dc * fv;
            da_f.data()[n] = dfv * fv * (1.0 - fv);
            da_i.data()[n] = div * iv * (1.0 - iv);
            da_o.data()[n] = dov * ov * (1.0 - ov);
            da_g.data()[n] = dgv * (1.0 - gv * gv);
        }
        // parameter gradients
        matmul_at_acc(da_f, xs[t], grads.W_f);
        matmul_at_acc(da_i, xs[t], grads.W_i);
        matmul_at_acc(da_o, xs[t], grads.W_o);
        matmul_at_acc(da_g, xs[t], grads.W_g);
        if (t > 0) {
            const Tensor2& hp = cache.h[t - 1];
            matmul_at_acc(da_f, hp, grads.U_f);
            matmul_at_acc(da_i, hp, grads.U_i);
            matmul_at_acc(da_o, hp, grads.U_o);
            matmul_at_acc(da_g, hp, grads.U_g);
        }
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t j = 0; j < H; ++j) {
                grads.b_f[j] += da_f(b, j);
                grads.b_i[j] += da_i(b, j);
                grads.b_o[j] += da_o(b, j);
                grads.b_g[j] += da_g(b, j);
            }
        // input and recurrent gradients
        dx[t] = Tensor2(B, p.input_dim);
        matmul_acc(da_f, p.W_f, dx[t]);
        matmul_acc(da_i, p.W_i, dx[t]);
        matmul_acc(da_o, p.W_o, dx[t]);
        matmul_acc(da_g, p.W_g, dx[t]);
        dh_next.fill(0.0);
        matmul_acc(da_f, p.U_f, dh_next);
        matmul_acc(da_i, p.U_i, dh_next);
        matmul_acc(da_o, p.U_o, dh_next);
        matmul_acc(da_g, p.U_g, dh_next);
    }
}

/// Batched forward through the whole branch: stacked LSTM layers, then the
/// last-timestep hidden state through the tanh projection.
inline void stack_forward(const std::vector<Tensor2>& xs, const StackParams& p, StackCache& cache) {
    cache.inputs = xs;
    cache.layers.assign(p.layers.size(), LayerCache{});
    const std::vector<Tensor2>* cur = &cache.inputs;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        lstm_layer_forward(*cur, p.layers[l], cache.layers[l]);
        cur = &cache.layers[l].h;
    }
    const Tensor2& h_last = cache.layers.back().h.back();
    Tensor2& out = cache.proj_out;
    matmul_bt(h_last, p.proj.W, out);
    for (std::size_t r = 0; r < out.rows(); ++r) {
        double* row = out.row_ptr(r);
        for (std::size_t c = 0; c < out.cols(); ++c) row[c] = std::tanh(row[c] + p.proj.b[c]);
    }
}

/// Reverse pass of the whole branch. `dproj` is the gradient at the
/// projection output.
inline void stack_backward(const StackParams& p, const StackCache& cache, const Tensor2& dproj,
                           StackParams& grads) {
    const Tensor2& P = cache.proj_out;
    const Tensor2& h_last = cache.layers.back().h.back();
    const std::size_t B = P.rows(), D = P.cols();
    Tensor2 da(B, D);
    for (std::size_t n = 0; n < B * D; ++n)
        da.data()[n] = dproj.data()[n] * (1.0 - P.data()[n] * P.data()[n]);
    matmul_at_acc(da, h_last, grads.proj.W);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t j = 0; j < D; ++j) grads.proj.b[j] += da(b, j);

    const std::size_t T = cache.inputs.size();
    std::vector<Tensor2> dh_ext(T);
    dh_ext[T - 1] = Tensor2(B, p.layers.back().hidden_dim);
    matmul_acc(da, p.proj.W, dh_ext[T - 1]);

    std::vector<Tensor2> dx;
    for (std::size_t l = p.layers.size(); l-- > 0;) {
        const std::vector<Tensor2>& xs = (l == 0) ? cache.inputs : cache.layers[l - 1].h;
        lstm_layer_backward(xs, p.layers[l], cache.layers[l], dh_ext, grads.layers[l], dx);
        dh_ext = std::move(dx);
    }
}

/// Single-sample branch forward (spec-level operation): returns the
/// projection vector for one [T x C] sequence.
inline std::vector<double> stacked_forward(const Tensor2& x_seq, const StackParams& p) {
    std::vector<Tensor2> xs(x_seq.rows());
    for (std::size_t t = 0; t < x_seq.rows(); ++t) {
        xs[t] = Tensor2(1, x_seq.cols());
        for (std::size_t c = 0; c < x_seq.cols(); ++c) xs[t](0, c) = x_seq(t, c);
    }
    StackCache cache;
    stack_forward(xs, p, cache);
    std::vector<double> out(cache.proj_out.cols());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = cache.proj_out(0, c);
    return out;
}

} // namespace sphcast

#endif
