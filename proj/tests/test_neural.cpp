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
#include "sphcast/adam.hpp"
#include "sphcast/loss.hpp"
#include "sphcast/slstm.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace sphcast;
namespace tu = sphcast::testutil;

TEST(LstmCell, ZeroWeightsAndInputsGiveZeroState) {
    LstmLayerParams p = LstmLayerParams::zeros(3, 4);
    std::vector<double> x(3, 0.0), h0(4, 0.0), c0(4, 0.0), h, c;
    lstm_cell_step(x, h0, c0, p, h, c);
    for (double v : h) EXPECT_DOUBLE_EQ(v, 0.0);
    for (double v : c) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(LstmCell, SaturatedForgetGateCarriesCellState) {
    LstmLayerParams p = LstmLayerParams::zeros(1, 1);
    p.b_f[0] = 20.0; // sigmoid(20) ~ 1 - 2e-9
    std::vector<double> x(1, 0.0), h0(1, 0.0), c0(1, 1.0), h, c;
    lstm_cell_step(x, h0, c0, p, h, c);
    EXPECT_NEAR(c[0], 1.0, 1e-8);
}

TEST(LstmCell, MatchesScalarHandOracle) {
    // 1-dimensional cell stepped by hand with the standard gate equations
    LstmLayerParams p = LstmLayerParams::zeros(1, 1);
    p.W_f(0, 0) = 0.5; p.W_i(0, 0) = 0.3; p.W_o(0, 0) = -0.2; p.W_g(0, 0) = 0.7;
    p.U_f(0, 0) = 0.1; p.U_i(0, 0) = -0.4; p.U_o(0, 0) = 0.6; p.U_g(0, 0) = 0.2;
    p.b_f[0] = 0.05; p.b_i[0] = -0.1; p.b_o[0] = 0.2; p.b_g[0] = 0.0;
    const double x = 0.4, h_prev = 0.2, c_prev = -0.3;

    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    double f = sig(0.5 * x + 0.1 * h_prev + 0.05);
    double i = sig(0.3 * x - 0.4 * h_prev - 0.1);
    double o = sig(-0.2 * x + 0.6 * h_prev + 0.2);
    double g = std::tanh(0.7 * x + 0.2 * h_prev);
    double c_exp = f * c_prev + i * g;
    double h_exp = o * std::tanh(c_exp);

    std::vector<double> h, c;
    lstm_cell_step({x}, {h_prev}, {c_prev}, p, h, c);
    EXPECT_NEAR(c[0], c_exp, 1e-12);
    EXPECT_NEAR(h[0], h_exp, 1e-12);
}

TEST(LstmCell, DimensionMismatchRejected) {
    LstmLayerParams p = LstmLayerParams::zeros(3, 4);
    std::vector<double> x(2, 0.0), h0(4, 0.0), c0(4, 0.0), h, c;
    EXPECT_THROW(lstm_cell_step(x, h0, c0, p, h, c), ValidationError);
}

namespace {

StackParams random_stack(std::size_t channels, std::vector<std::size_t> widths, std::size_t proj,
                         Rng& rng) {
    StackParams s;
    std::size_t in = channels;
    for (std::size_t w : widths) {
        auto layer = LstmLayerParams::zeros(in, w);
        layer.init(rng);
        for (double& b : layer.b_f) b = rng.uniform(-0.2, 0.2);
        s.layers.push_back(std::move(layer));
        in = w;
    }
    s.proj = DenseParams::zeros(in, proj);
    s.proj.init(rng);
    for (double& b : s.proj.b) b = rng.uniform(-0.2, 0.2);
    return s;
}

} // namespace

TEST(Stack, ZeroEverythingGivesZeroProjection) {
    StackParams s;
    std::size_t in = 3;
    for (std::size_t w : {4, 3, 3, 2}) {
        s.layers.push_back(LstmLayerParams::zeros(in, w));
        in = w;
    }
    s.proj = DenseParams::zeros(in, 5);
    Tensor2 x(7, 3);
    auto out = stacked_forward(x, s);
    for (double v : out) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(Stack, OutputBoundedByTanh) {
    Rng rng(3);
    StackParams s = random_stack(3, {4, 4, 4, 4}, 6, rng);
    for (int trial = 0; trial < 10; ++trial) {
        Tensor2 x(28, 3);
        for (double& v : x.data()) v = rng.uniform(-3.0, 3.0);
        for (double v : stacked_forward(x, s)) {
            EXPECT_GT(v, -1.0);
            EXPECT_LT(v, 1.0);
        }
    }
}

TEST(Stack, MatchesStraightLineOracleAtTinyWidths) {
    Rng rng(11);
    StackParams s = random_stack(3, {2, 2, 2, 2}, 2, rng);
    for (int trial = 0; trial < 5; ++trial) {
        Tensor2 x(7, 3);
        for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
        auto got = stacked_forward(x, s);
        auto expected = tu::naive_stack_forward(x, s);
        ASSERT_EQ(got.size(), expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], expected[i], 1e-12);
    }
}

TEST(Stack, WrongChannelCountRejected) {
    Rng rng(5);
    StackParams s = random_stack(3, {2, 2}, 2, rng);
    Tensor2 x(7, 4);
    EXPECT_THROW(stacked_forward(x, s), ValidationError);
}

namespace {

SlstmConfig tiny_config(std::size_t horizon = 3) {
    SlstmConfig cfg;
    cfg.input_channels = 3;
    cfg.lstm_widths = {2, 2, 2, 2};
    cfg.proj_dim = 2;
    cfg.horizon = horizon;
    cfg.quantile_levels = {0.25, 0.5, 0.75};
    return cfg;
}

} // namespace

TEST(Slstm, ZeroParamsGiveZeroForecast) {
    SlstmParams p = SlstmParams::zeros(tiny_config());
    Tensor2 xs(7, 3), xl(28, 3);
    Tensor2 out = slstm_forward(xs, xl, p);
    for (double v : out.data()) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(Slstm, ZeroFusionWeightIgnoresShortBranch) {
    Rng rng(7);
    SlstmParams p = SlstmParams::init(tiny_config(), rng);
    p.fusion_weight = 0.0;
    Tensor2 xs(7, 3), xl(28, 3);
    for (double& v : xs.data()) v = rng.uniform(-1.0, 1.0);
    for (double& v : xl.data()) v = rng.uniform(-1.0, 1.0);
    Tensor2 base = slstm_forward(xs, xl, p);
    for (int trial = 0; trial < 5; ++trial) {
        Tensor2 perturbed = xs;
        for (double& v : perturbed.data()) v = rng.uniform(-1.0, 1.0);
        Tensor2 out = slstm_forward(perturbed, xl, p);
        for (std::size_t n = 0; n < out.size(); ++n)
            EXPECT_DOUBLE_EQ(out.data()[n], base.data()[n]);
    }
}

TEST(Slstm, OutputIsAffineInFusionWeight) {
    // doubling W must change the output exactly as doubling the projected
    // short embedding would: out(2W) + out(0) == 2*out(W) elementwise
    Rng rng(9);
    SlstmParams p = SlstmParams::init(tiny_config(), rng);
    Tensor2 xs(7, 3), xl(28, 3);
    for (double& v : xs.data()) v = rng.uniform(-1.0, 1.0);
    for (double& v : xl.data()) v = rng.uniform(-1.0, 1.0);
    auto eval = [&](double w) {
        SlstmParams q = p;
        q.fusion_weight = w;
        return slstm_forward(xs, xl, q);
    };
    Tensor2 at0 = eval(0.0), at1 = eval(1.0), at2 = eval(2.0);
    for (std::size_t n = 0; n < at0.size(); ++n)
        EXPECT_NEAR(at2.data()[n] + at0.data()[n], 2.0 * at1.data()[n], 1e-12);
}

TEST(Slstm, HorizonMismatchWithHeadsRejected) {
    SlstmParams p = SlstmParams::zeros(tiny_config(3));
    p.config.horizon = 5; // heads still sized for 3
    Tensor2 xs(7, 3), xl(28, 3);
    EXPECT_THROW(slstm_forward(xs, xl, p), ValidationError);
}

TEST(QuantileLoss, TaggedExamples) {
    for (double q : {0.1, 0.5, 0.9}) EXPECT_DOUBLE_EQ(quantile_loss(3.7, 3.7, q), 0.0);
    EXPECT_DOUBLE_EQ(quantile_loss(10.0, 8.0, 0.5), 1.0);
    EXPECT_NEAR(quantile_loss(10.0, 12.0, 0.9), 0.2, 1e-15);
    EXPECT_THROW(quantile_loss(1.0, 1.0, 0.0), ValidationError);
    EXPECT_THROW(quantile_loss(1.0, 1.0, 1.0), ValidationError);
}

TEST(QuantileLoss, MedianLevelIsHalfAbsoluteError) {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        double y = rng.uniform(-50, 50), yhat = rng.uniform(-50, 50);
        EXPECT_DOUBLE_EQ(quantile_loss(y, yhat, 0.5), 0.5 * std::abs(y - yhat));
    }
}

TEST(QuantileLoss, ConvexInPrediction) {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        double y = rng.uniform(-10, 10), q = rng.uniform(0.01, 0.99);
        double a = rng.uniform(-20, 20), b = rng.uniform(-20, 20);
        double mid = quantile_loss(y, 0.5 * (a + b), q);
        double avg = 0.5 * (quantile_loss(y, a, q) + quantile_loss(y, b, q));
        EXPECT_LE(mid, avg + 1e-12);
    }
}

TEST(TotalLoss, PerfectForecastIsZero) {
    Tensor2 targets(2, 3, 1.5);
    std::vector<Tensor2> preds(3, Tensor2(2, 3, 1.5));
    EXPECT_DOUBLE_EQ(total_loss(targets, preds, {0.25, 0.5, 0.75}), 0.0);
}

TEST(TotalLoss, SingleCellReducesToPinball) {
    Tensor2 targets(1, 1);
    targets(0, 0) = 4.0;
    std::vector<Tensor2> preds(1, Tensor2(1, 1));
    preds[0](0, 0) = 1.0;
    EXPECT_DOUBLE_EQ(total_loss(targets, preds, {0.5}), 0.5 * std::abs(4.0 - 1.0));
}

TEST(TotalLoss, UniformOverPredictionFixture) {
    // every prediction one above the truth: mean over levels of (1-q)
    Tensor2 targets(2, 4, 10.0);
    std::vector<Tensor2> preds(3, Tensor2(2, 4, 11.0));
    EXPECT_NEAR(total_loss(targets, preds, {0.25, 0.5, 0.75}), 0.5, 1e-12);
}

TEST(TotalLoss, ShapeMismatchRejected) {
    Tensor2 targets(2, 3);
    std::vector<Tensor2> preds(3, Tensor2(2, 2));
    EXPECT_THROW(total_loss(targets, preds, {0.25, 0.5, 0.75}), ValidationError);
}

TEST(Gradients, MatchFiniteDifferencesAcrossSeeds) {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        Rng rng(seed);
        SlstmParams p = SlstmParams::init(tiny_config(), rng);
        auto data = tu::random_batch(p.config, 2, 7, 28, rng);
        double worst = tu::max_gradcheck_error(p, data);
        EXPECT_LT(worst, 1e-4) << "seed " << seed;
    }
}

TEST(Gradients, FusionWeightGradientZeroWhenShortProjectionZero) {
    Rng rng(19);
    SlstmConfig cfg = tiny_config();
    SlstmParams p = SlstmParams::init(cfg, rng);
    // zero the short branch entirely: its projection output becomes tanh(0)=0
    p.short_stack = SlstmParams::zeros(cfg).short_stack;
    auto data = tu::random_batch(cfg, 2, 7, 28, rng);
    SlstmCache cache;
    auto preds = slstm_forward_batch(data.xs_short, data.xs_long, p, cache);
    auto dout = total_loss_grad(data.targets, preds, cfg.quantile_levels);
    SlstmParams grads = SlstmParams::zeros(cfg);
    slstm_backward_batch(p, cache, dout, grads);
    EXPECT_DOUBLE_EQ(grads.fusion_weight, 0.0);
}

TEST(Gradients, ZeroLossGivesZeroGradients) {
    SlstmConfig cfg = tiny_config();
    SlstmParams p = SlstmParams::zeros(cfg); // all outputs zero
    {
        tu::GradCheckData data;
        data.xs_short.assign(7, Tensor2(2, 3));
        data.xs_long.assign(28, Tensor2(2, 3));
        data.targets = Tensor2(2, cfg.horizon); // zeros: loss is exactly 0
        SlstmCache cache;
        auto preds = slstm_forward_batch(data.xs_short, data.xs_long, p, cache);
        EXPECT_DOUBLE_EQ(total_loss(data.targets, preds, cfg.quantile_levels), 0.0);
        auto dout = total_loss_grad(data.targets, preds, cfg.quantile_levels);
        SlstmParams grads = SlstmParams::zeros(cfg);
        slstm_backward_batch(p, cache, dout, grads);
        for (double* g : parameter_pointers(grads)) EXPECT_DOUBLE_EQ(*g, 0.0);
    }
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
    std::vector<double> params = {1.0, -2.0, 3.0};
    std::vector<double> grads(3, 0.0);
    std::vector<double*> pp = {&params[0], &params[1], &params[2]};
    std::vector<const double*> gp = {&grads[0], &grads[1], &grads[2]};
    AdamState state(3);
    adam_step(pp, gp, state);
    EXPECT_DOUBLE_EQ(params[0], 1.0);
    EXPECT_DOUBLE_EQ(params[1], -2.0);
    EXPECT_DOUBLE_EQ(params[2], 3.0);
}

TEST(Adam, FirstStepMovesByAtMostLearningRate) {
    // first-step closed form: m_hat/sqrt(v_hat) = sign(g)
    for (double g : {0.5, -2.0, 1e-3, 40.0}) {
        double param = 0.0, grad = g;
        std::vector<double*> pp = {&param};
        std::vector<const double*> gp = {&grad};
        AdamState state(1, 0.0008);
        adam_step(pp, gp, state);
        EXPECT_LE(std::abs(param), 0.0008 + 1e-15);
        EXPECT_GT(std::abs(param), 0.0008 * 0.99);
        EXPECT_EQ(param < 0, g > 0);
    }
}

TEST(Adam, ConstantGradientDrivesParameterMonotonically) {
    double param = 5.0, grad = 1.0;
    std::vector<double*> pp = {&param};
    std::vector<const double*> gp = {&grad};
    AdamState state(1, 0.01);
    double prev = param;
    for (int step = 0; step < 100; ++step) {
        adam_step(pp, gp, state);
        EXPECT_LT(param, prev);
        prev = param;
    }
}

TEST(Adam, NanGradientAborts) {
    double param = 0.0, grad = std::nan("");
    std::vector<double*> pp = {&param};
    std::vector<const double*> gp = {&grad};
    AdamState state(1);
    EXPECT_THROW(adam_step(pp, gp, state), RuntimeFailure);
}

TEST(ParameterPointers, CountMatchesArchitecture) {
    SlstmConfig cfg = tiny_config();
    SlstmParams p = SlstmParams::zeros(cfg);
    // per layer: 4 W [h x in] + 4 U [h x h] + 4 b [h]
    std::size_t expected = 0;
    std::size_t in = cfg.input_channels;
    for (std::size_t w : cfg.lstm_widths) {
        expected += 4 * w * in + 4 * w * w + 4 * w;
        in = w;
    }
    expected += cfg.proj_dim * in + cfg.proj_dim; // projection
    expected *= 2;                                // two branches
    expected += 1;                                // fusion weight
    expected += cfg.quantile_levels.size() * (cfg.horizon * cfg.fused_dim() + cfg.horizon);
    EXPECT_EQ(parameter_pointers(p).size(), expected);
}
