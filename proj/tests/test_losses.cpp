// tests/test_losses.cpp
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

#include <doctest.h>

#include <cmath>

#include "spoofdet/losses.hpp"
#include "test_util.hpp"

using namespace spoofdet;

TEST_CASE("cross-entropy closed forms") {
  // Uniform logits over 3 classes -> ln 3.
  Tensor<double> logits({1, 3});
  CHECK(CceLoss(logits, {1}) == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  // logits (1, 0), label 0 -> -log(e / (e + 1)).
  Tensor<double> two({1, 2});
  two.data = {1.0, 0.0};
  CHECK(CceLoss(two, {0}) == doctest::Approx(0.3132616875182228).epsilon(1e-12));

  // Large margin on the true class -> loss approaches zero.
  two.data = {40.0, 0.0};
  CHECK(CceLoss(two, {0}) < 1e-9);

  // Uniform logits over 4 classes -> ln 4 (the merged-output case).
  Tensor<double> four({1, 4});
  CHECK(CceLoss(four, {2}) == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  CHECK_THROWS_AS(CceLoss(two, {5}), NumericalError);
  CHECK_THROWS_AS(CceLoss(two, {-1}), NumericalError);
}

TEST_CASE("cross-entropy batch mean and gradient") {
  Rng rng(11);
  Tensor<double> logits({6, 4});
  testutil::FillNormal(logits, rng);
  std::vector<int> labels = {0, 3, 1, 2, 2, 0};
  Tensor<double> g;
  double loss = CceLoss(logits, labels, &g);
  CHECK(loss > 0.0);

  std::vector<double> analytic(g.data.begin(), g.data.end());
  auto f = [&]() { return CceLoss(logits, labels); };
  auto r = testutil::CheckGradient(f, logits.data, analytic, 1e-6);
  CHECK(r.max_rel_err < 1e-6);
}

TEST_CASE("ring loss values") {
  // Single code with norm 2, R = 1, lambda = 1, m = 1 -> 0.5.
  Tensor<double> codes({1, 4});
  codes.data = {2.0, 0.0, 0.0, 0.0};
  CHECK(RingLoss(codes, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));

  // All code norms equal to the radius -> 0.
  Tensor<double> ring({3, 2});
  ring.data = {3.0, 4.0, 5.0, 0.0, 0.0, -5.0};
  CHECK(RingLoss(ring, 5.0, 1.0) == doctest::Approx(0.0));

  // lambda = 0 silences the term regardless of the codes.
  CHECK(RingLoss(codes, 0.25, 0.0) == 0.0);
}

TEST_CASE("ring loss scales linearly in lambda and ignores batch order") {
  Rng rng(5);
  Tensor<double> codes({8, 16});
  testutil::FillNormal(codes, rng);
  double l1 = RingLoss(codes, 1.7, 1.0);
  double l2 = RingLoss(codes, 1.7, 3.5);
  CHECK(l2 == doctest::Approx(3.5 * l1).epsilon(1e-12));

  Tensor<double> permuted = codes;
  // swap rows 0 and 5
  for (int64_t d = 0; d < 16; ++d)
    std::swap(permuted.data[static_cast<size_t>(d)], permuted.data[static_cast<size_t>(5 * 16 + d)]);
  CHECK(RingLoss(permuted, 1.7, 1.0) == doctest::Approx(l1).epsilon(1e-12));
}

TEST_CASE("ring loss gradients match central differences") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor<double> codes({8, 64});
    testutil::FillNormal(codes, rng);
    double radius = 0.5 + rng.UniformReal() * 4.0;
    double lambda = 0.25 + rng.UniformReal() * 2.0;

    Tensor<double> gcodes;
    double gr = 0.0;
    RingLoss(codes, radius, lambda, &gcodes, &gr);

    std::vector<double> analytic(gcodes.data.begin(), gcodes.data.end());
    auto f = [&]() { return RingLoss(codes, radius, lambda); };
    auto r = testutil::CheckGradient(f, codes.data, analytic, 1e-5);
    CHECK(r.max_rel_err < 1e-4);

    // radius gradient
    std::vector<double> rv = {radius};
    auto fr = [&]() { return RingLoss(codes, rv[0], lambda); };
    double numeric = testutil::CentralDiff(fr, &rv[0], 1e-5);
    CHECK(std::abs(numeric - gr) / (std::abs(gr) + 1e-8) < 1e-4);
  }
}

TEST_CASE("cosine orthogonality closed forms") {
  // Code orthogonal to every basis row -> 0.
  Tensor<double> codes({1, 3});
  codes.data = {0.0, 0.0, 2.0};
  Tensor<double> basis({2, 3});
  basis.data = {1.0, 0.0, 0.0, 0.0, 3.0, 0.0};
  CHECK(CosineOrthogonalityLoss(codes, basis) == doctest::Approx(0.0));

  // Code parallel to the single basis row -> 1.
  Tensor<double> par({1, 3});
  par.data = {2.0, 0.0, 0.0};
  Tensor<double> one_row({1, 3});
  one_row.data = {-0.5, 0.0, 0.0};
  CHECK(CosineOrthogonalityLoss(par, one_row) == doctest::Approx(1.0).epsilon(1e-12));

  // Code (1,1,0)/sqrt(2) against basis row (1,0,0): cos^2 = 0.5.
  Tensor<double> diag({1, 3});
  diag.data = {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0};
  Tensor<double> ex({1, 3});
  ex.data = {1.0, 0.0, 0.0};
  CHECK(CosineOrthogonalityLoss(diag, ex) == doctest::Approx(0.5).epsilon(1e-12));

  // Zero code contributes 0 by convention; zero basis row is an error.
  Tensor<double> zero({1, 3});
  CHECK(CosineOrthogonalityLoss(zero, ex) == doctest::Approx(0.0));
  Tensor<double> zero_basis({1, 3});
  CHECK_THROWS_AS(CosineOrthogonalityLoss(par, zero_basis), NumericalError);
}

TEST_CASE("cosine orthogonality is scale invariant") {
  Rng rng(23);
  Tensor<double> codes({4, 8});
  Tensor<double> basis({3, 8});
  testutil::FillNormal(codes, rng);
  testutil::FillNormal(basis, rng);
  double base = CosineOrthogonalityLoss(codes, basis);

  Tensor<double> scaled_codes = codes;
  for (int64_t d = 0; d < 8; ++d) scaled_codes.data[static_cast<size_t>(d)] *= 17.0;
  CHECK(CosineOrthogonalityLoss(scaled_codes, basis) == doctest::Approx(base).epsilon(1e-12));

  Tensor<double> scaled_basis = basis;
  for (int64_t d = 0; d < 8; ++d) scaled_basis.data[static_cast<size_t>(8 + d)] *= 0.03;
  CHECK(CosineOrthogonalityLoss(codes, scaled_basis) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("cosine orthogonality gradients match central differences") {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor<double> codes({8, 64});
    Tensor<double> basis({5, 64});
    testutil::FillNormal(codes, rng);
    testutil::FillNormal(basis, rng);

    Tensor<double> gcodes;
    CosineOrthogonalityLoss(codes, basis, &gcodes);
    std::vector<double> analytic(gcodes.data.begin(), gcodes.data.end());
    auto f = [&]() { return CosineOrthogonalityLoss(codes, basis); };
    auto r = testutil::CheckGradient(f, codes.data, analytic, 1e-5);
    CHECK(r.max_rel_err < 1e-4);
  }
}

TEST_CASE("mean absolute cosine diagnostic") {
  Tensor<double> codes({1, 2});
  codes.data = {1.0, 0.0};
  Tensor<double> basis({2, 2});
  basis.data = {0.0, 1.0, 1.0, 0.0};
  CHECK(MeanAbsCosine(codes, basis) == doctest::Approx(0.5));
}
