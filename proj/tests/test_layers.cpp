// tests/test_layers.cpp
//
// Copyright 2026 The spoofdet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Every layer's backward pass is checked against central finite
// differences in double precision: input gradients and all parameter
// gradients, through the objective L = sum(G * Forward(x)).

#include <doctest.h>

#include "spoofdet/layers.hpp"
#include "spoofdet/network.hpp"
#include "spoofdet/optim.hpp"
#include "test_util.hpp"

using namespace spoofdet;

namespace {

template <typename Fwd>
double WeightedSum(const Tensor<double>& g, Fwd&& fwd) {
  Tensor<double> y = fwd();
  SPOOFDET_CHECK(y.numel() == g.numel(), "objective size");
  double acc = 0.0;
  for (size_t i = 0; i < y.data.size(); ++i) acc += g.data[i] * y.data[i];
  return acc;
}

// Checks dL/dx and dL/dparam for a layer already holding caches from one
// train-mode forward, where `analytic_gx` came from Backward(G).
struct LayerCheck {
  double tol = 2e-5;

  template <typename Layer>
  void Run(Layer& layer, Tensor<double>& x, Rng& rng,
           const std::vector<ParamRef<double>>& params) {
    Tensor<double> y = layer.Forward(x, true);
    Tensor<double> g(y.shape);
    testutil::FillNormal(g, rng);

    for (const auto& p : params) p.grad->Zero();
    Tensor<double> gx = layer.Backward(g);

    auto objective = [&]() { return WeightedSum(g, [&]() { return layer.Forward(x, true); }); };

    std::vector<double> analytic_x(gx.data.begin(), gx.data.end());
    auto rx = testutil::CheckGradient(objective, x.data, analytic_x, 1e-5);
    INFO("input gradient, max rel err ", rx.max_rel_err);
    CHECK(rx.max_rel_err < tol);

    for (const auto& p : params) {
      std::vector<double> analytic_p(p.grad->data.begin(), p.grad->data.end());
      auto rp = testutil::CheckGradient(objective, p.value->data, analytic_p, 1e-5);
      INFO("parameter ", p.name, " max rel err ", rp.max_rel_err);
      CHECK(rp.max_rel_err < tol);
    }
  }
};

// Keep inputs away from the LReLU kink so finite differences stay valid.
void PushAwayFromZero(Tensor<double>& t, double margin = 0.05) {
  for (auto& v : t.data)
    if (std::abs(v) < margin) v = v < 0 ? v - margin : v + margin;
}

}  // namespace

TEST_CASE("linear gradients") {
  Rng rng(101);
  Linear<double> lin;
  lin.Init(5, 4, rng);
  Tensor<double> x({3, 5});
  testutil::FillNormal(x, rng);
  ParamList<double> params;
  lin.Params("lin", params);
  LayerCheck{}.Run(lin, x, rng, params);
}

TEST_CASE("linear without bias") {
  Rng rng(102);
  Linear<double> lin;
  lin.Init(4, 2, rng, /*bias=*/false);
  Tensor<double> x({2, 4});
  testutil::FillNormal(x, rng);
  ParamList<double> params;
  lin.Params("lin", params);
  CHECK(params.size() == 1);
  LayerCheck{}.Run(lin, x, rng, params);
}

TEST_CASE("leaky relu forward and gradient") {
  Rng rng(103);
  LeakyRelu<double> act(0.01);
  Tensor<double> x({2, 3, 2, 4});
  testutil::FillNormal(x, rng);
  PushAwayFromZero(x);
  Tensor<double> y = act.Forward(x, true);
  for (size_t i = 0; i < x.data.size(); ++i) {
    double expect = x.data[i] > 0 ? x.data[i] : 0.01 * x.data[i];
    CHECK(y.data[i] == doctest::Approx(expect));
  }
  LayerCheck{}.Run(act, x, rng, {});
}

TEST_CASE("conv2d stride 1 gradients") {
  Rng rng(104);
  Conv2d<double> conv;
  conv.Init(2, 3, 3, 3, 1, 1, rng);
  Tensor<double> x({2, 2, 5, 6});
  testutil::FillNormal(x, rng);
  ParamList<double> params;
  conv.Params("conv", params);
  LayerCheck{}.Run(conv, x, rng, params);
}

TEST_CASE("conv2d stride (2,4) kernel (3,7) gradients") {
  Rng rng(105);
  Conv2d<double> conv;
  conv.Init(2, 3, 3, 7, 2, 4, rng);
  Tensor<double> x({2, 2, 6, 11});
  testutil::FillNormal(x, rng);
  ParamList<double> params;
  conv.Params("conv", params);
  LayerCheck{}.Run(conv, x, rng, params);
}

TEST_CASE("conv2d 1x1 projection gradients") {
  Rng rng(106);
  Conv2d<double> conv;
  conv.Init(3, 4, 1, 1, 2, 4, rng);
  Tensor<double> x({2, 3, 5, 9});
  testutil::FillNormal(x, rng);
  ParamList<double> params;
  conv.Params("conv", params);
  LayerCheck{}.Run(conv, x, rng, params);
}

TEST_CASE("conv2d same-padding output shapes") {
  Rng rng(107);
  Conv2d<double> conv;
  conv.Init(1, 1, 3, 7, 2, 4, rng);
  Tensor<double> x({1, 1, 120, 1025});
  Tensor<double> y = conv.Forward(x, false);
  CHECK(y.shape == std::vector<int64_t>{1, 1, 60, 257});

  Tensor<double> x2({1, 1, 15, 17});
  Tensor<double> y2 = conv.Forward(x2, false);
  CHECK(y2.shape == std::vector<int64_t>{1, 1, 8, 5});
}

TEST_CASE("batch norm gradients (train mode)") {
  Rng rng(108);
  BatchNorm2d<double> bn;
  bn.Init(3);
  // make gamma/beta non-trivial
  bn.gamma.data = {0.7, 1.3, -0.4};
  bn.beta.data = {0.1, -0.2, 0.5};
  Tensor<double> x({4, 3, 2, 3});
  testutil::FillNormal(x, rng);
  ParamList<double> params;
  bn.Params("bn", params);
  LayerCheck{.tol = 5e-5}.Run(bn, x, rng, params);
}

TEST_CASE("batch norm eval mode uses running statistics") {
  Rng rng(109);
  BatchNorm2d<double> bn;
  bn.Init(2);
  Tensor<double> x({3, 2, 2, 2});
  testutil::FillNormal(x, rng);
  for (int i = 0; i < 10; ++i) bn.Forward(x, true);

  // Per-sample outputs in eval mode must not depend on batch composition.
  Tensor<double> one({1, 2, 2, 2});
  std::copy(x.ptr(), x.ptr() + 8, one.ptr());
  Tensor<double> y_full = bn.Forward(x, false);
  Tensor<double> y_one = bn.Forward(one, false);
  for (int64_t i = 0; i < 8; ++i)
    CHECK(y_one.data[static_cast<size_t>(i)] ==
          doctest::Approx(y_full.data[static_cast<size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("frequency average pool gradients and shape") {
  Rng rng(110);
  FreqAvgPool<double> pool;
  Tensor<double> x({2, 3, 4, 5});
  testutil::FillNormal(x, rng);
  Tensor<double> y = pool.Forward(x, true);
  CHECK(y.shape == std::vector<int64_t>{2, 4, 3});
  LayerCheck{}.Run(pool, x, rng, {});
}

TEST_CASE("gru gradients") {
  Rng rng(111);
  Gru<double> gru;
  gru.Init(4, 5, rng);
  Tensor<double> x({2, 3, 4});
  testutil::FillNormal(x, rng);
  ParamList<double> params;
  gru.Params("gru", params);
  LayerCheck{.tol = 5e-5}.Run(gru, x, rng, params);
}

TEST_CASE("gru last state determinism and shape") {
  Rng rng(112);
  Gru<double> gru;
  gru.Init(3, 7, rng);
  Tensor<double> x({4, 6, 3});
  testutil::FillNormal(x, rng);
  Tensor<double> a = gru.Forward(x, false);
  Tensor<double> b = gru.Forward(x, false);
  CHECK(a.shape == std::vector<int64_t>{4, 7});
  CHECK(a.data == b.data);
}

TEST_CASE("residual block gradients (identity shortcut)") {
  Rng rng(113);
  EncoderConfig cfg;
  cfg.kernel_t = 3;
  cfg.kernel_f = 3;
  ResBlock<double> block;
  block.Init(3, 3, cfg, /*first_of_network=*/false, /*first_of_stage=*/false, rng);
  Tensor<double> x({2, 3, 4, 5});
  testutil::FillNormal(x, rng);
  ParamList<double> params;
  block.Params("blk", params);
  LayerCheck{.tol = 5e-5}.Run(block, x, rng, params);
}

TEST_CASE("residual block gradients (downsampling projection)") {
  Rng rng(114);
  EncoderConfig cfg;
  cfg.kernel_t = 3;
  cfg.kernel_f = 3;
  cfg.stride_t = 2;
  cfg.stride_f = 2;
  ResBlock<double> block;
  block.Init(2, 4, cfg, /*first_of_network=*/false, /*first_of_stage=*/true, rng);
  Tensor<double> x({2, 2, 4, 6});
  testutil::FillNormal(x, rng);
  ParamList<double> params;
  block.Params("blk", params);
  LayerCheck{.tol = 5e-5}.Run(block, x, rng, params);
}

TEST_CASE("first residual block omits the leading preactivation") {
  Rng rng(115);
  EncoderConfig cfg;
  cfg.kernel_t = 3;
  cfg.kernel_f = 3;
  cfg.stride_t = 2;
  cfg.stride_f = 2;
  ResBlock<double> block;
  block.Init(2, 4, cfg, /*first_of_network=*/true, /*first_of_stage=*/true, rng);
  CHECK(!block.has_preact);
  ParamList<double> params;
  block.Params("blk", params);
  // no bn_a in the parameter list
  for (const auto& p : params) CHECK(p.name.find("bn_a") == std::string::npos);

  Tensor<double> x({2, 2, 4, 6});
  testutil::FillNormal(x, rng);
  LayerCheck{.tol = 5e-5}.Run(block, x, rng, params);
}

TEST_CASE("tiny encoder end-to-end gradients") {
  Rng rng(116);
  EncoderConfig cfg;
  cfg.conv1_filters = 2;
  cfg.stage_filters = 3;
  cfg.kernel_t = 3;
  cfg.kernel_f = 3;
  cfg.stride_t = 2;
  cfg.stride_f = 2;
  cfg.gru_units = 4;
  cfg.code_dim = 3;
  Encoder<double> enc;
  enc.Init(cfg, rng);

  Tensor<double> x({2, 1, 8, 12});
  testutil::FillNormal(x, rng);
  Tensor<double> codes = enc.Forward(x, true);
  CHECK(codes.shape == std::vector<int64_t>{2, 3});

  Tensor<double> g(codes.shape);
  testutil::FillNormal(g, rng);
  ParamList<double> params;
  enc.Params("enc", params);
  ZeroGrads(params);
  enc.Backward(g);

  auto objective = [&]() {
    Tensor<double> y = enc.Forward(x, true);
    double acc = 0.0;
    for (size_t i = 0; i < y.data.size(); ++i) acc += g.data[i] * y.data[i];
    return acc;
  };

  // Sampled parameter coordinates (the full set is large); fixed seed keeps
  // the selection stable.
  Rng pick(999);
  for (const auto& p : params) {
    std::vector<double> analytic(p.grad->data.begin(), p.grad->data.end());
    std::vector<int64_t> coords;
    int64_t n = static_cast<int64_t>(p.value->data.size());
    if (n <= 24) {
      for (int64_t i = 0; i < n; ++i) coords.push_back(i);
    } else {
      for (int i = 0; i < 24; ++i)
        coords.push_back(static_cast<int64_t>(pick.UniformInt(static_cast<uint64_t>(n))));
    }
    auto r = testutil::CheckGradient(objective, p.value->data, analytic, 1e-5,
                                     1e-8, &coords);
    INFO("parameter ", p.name, " max rel err ", r.max_rel_err);
    CHECK(r.max_rel_err < 1e-4);
  }
}
