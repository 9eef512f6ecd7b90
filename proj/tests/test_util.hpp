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
#ifndef SPHCAST_TESTS_TEST_UTIL_HPP
#define SPHCAST_TESTS_TEST_UTIL_HPP

#include "sphcast/loss.hpp"
#include "sphcast/rng.hpp"
#include "sphcast/slstm.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace sphcast::testutil {

/// Random batch of input sequences and targets for gradient checking.
struct GradCheckData {
    std::vector<Tensor2> xs_short, xs_long; // per-timestep [B x C]
    Tensor2 targets;                        // [B x horizon]
};

inline GradCheckData random_batch(const SlstmConfig& cfg, std::size_t batch, std::size_t short_len,
                                  std::size_t long_len, Rng& rng) {
    GradCheckData d;
    auto fill = [&rng](std::vector<Tensor2>& xs, std::size_t T, std::size_t B, std::size_t C) {
        xs.assign(T, Tensor2(B, C));
        for (auto& x : xs)
            for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
    };
    fill(d.xs_short, short_len, batch, cfg.input_channels);
    fill(d.xs_long, long_len, batch, cfg.input_channels);
    d.targets = Tensor2(batch, cfg.horizon);
    for (double& v : d.targets.data()) v = rng.uniform(-1.0, 1.0);
    return d;
}

inline double loss_of(const SlstmParams& p, const GradCheckData& d) {
    SlstmCache cache;
    auto preds = slstm_forward_batch(d.xs_short, d.xs_long, p, cache);
    return total_loss(d.targets, preds, p.config.quantile_levels);
}

/// Largest relative mismatch between analytic gradients and central finite
/// differences over every parameter of the model.
inline double max_gradcheck_error(SlstmParams& p, const GradCheckData& d, double eps = 1e-5) {
    SlstmParams grads = SlstmParams::zeros(p.config);
    {
        SlstmCache cache;
        auto preds = slstm_forward_batch(d.xs_short, d.xs_long, p, cache);
        auto dout = total_loss_grad(d.targets, preds, p.config.quantile_levels);
        slstm_backward_batch(p, cache, dout, grads);
    }
    auto params = parameter_pointers(p);
    auto grad_ptrs = parameter_pointers(grads);
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        double saved = *params[i];
        *params[i] = saved + eps;
        double up = loss_of(p, d);
        *params[i] = saved - eps;
        double down = loss_of(p, d);
        *params[i] = saved;
        double numeric = (up - down) / (2.0 * eps);
        double analytic = *grad_ptrs[i];
        double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
        worst = std::max(worst, std::abs(numeric - analytic) / denom);
    }
    return worst;
}

/// Straight-line single-sample reimplementation of the branch forward pass,
/// independent of the batched kernels (the oracle for stacked_forward).
inline std::vector<double> naive_stack_forward(const Tensor2& x_seq, const StackParams& p) {
    std::size_t T = x_seq.rows();
    std::vector<std::vector<double>> inputs(T);
    for (std::size_t t = 0; t < T; ++t) {
        inputs[t].resize(x_seq.cols());
        for (std::size_t c = 0; c < x_seq.cols(); ++c) inputs[t][c] = x_seq(t, c);
    }
    for (const auto& layer : p.layers) {
        std::vector<double> h(layer.hidden_dim, 0.0), c(layer.hidden_dim, 0.0);
        std::vector<std::vector<double>> outputs(T);
        for (std::size_t t = 0; t < T; ++t) {
            std::vector<double> h_new(layer.hidden_dim), c_new(layer.hidden_dim);
            for (std::size_t r = 0; r < layer.hidden_dim; ++r) {
                double af = layer.b_f[r], ai = layer.b_i[r], ao = layer.b_o[r], ag = layer.b_g[r];
                for (std::size_t k = 0; k < layer.input_dim; ++k) {
                    af += layer.W_f(r, k) * inputs[t][k];
                    ai += layer.W_i(r, k) * inputs[t][k];
                    ao += layer.W_o(r, k) * inputs[t][k];
                    ag += layer.W_g(r, k) * inputs[t][k];
                }
                for (std::size_t k = 0; k < layer.hidden_dim; ++k) {
                    af += layer.U_f(r, k) * h[k];
                    ai += layer.U_i(r, k) * h[k];
                    ao += layer.U_o(r, k) * h[k];
                    ag += layer.U_g(r, k) * h[k];
                }
                double fg = 1.0 / (1.0 + std::exp(-af));
                double ig = 1.0 / (1.0 + std::exp(-ai));
                double og = 1.0 / (1.0 + std::exp(-ao));
                double gg = std::tanh(ag);
                c_new[r] = fg * c[r] + ig * gg;
                h_new[r] = og * std::tanh(c_new[r]);
            }
            h = h_new;
            c = c_new;
            outputs[t] = h;
        }
        inputs = outputs;
    }
    const std::vector<double>& h_last = inputs[T - 1];
    std::vector<double> out(p.proj.W.rows());
    for (std::size_t r = 0; r < out.size(); ++r) {
        double a = p.proj.b[r];
        for (std::size_t k = 0; k < h_last.size(); ++k) a += p.proj.W(r, k) * h_last[k];
        out[r] = std::tanh(a);
    }
    return out;
}

/// Fresh temp directory for file-based tests.
inline std::string make_temp_dir(const std::string& tag) {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("sphcast_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace sphcast::testutil

#endif
