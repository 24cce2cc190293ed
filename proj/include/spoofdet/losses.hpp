// spoofdet/losses.hpp
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
// Loss primitives.  All losses are batch means; gradients are optional
// output parameters accumulated as fresh values (not summed into).

#ifndef SPOOFDET_LOSSES_HPP_
#define SPOOFDET_LOSSES_HPP_

#include <cmath>
#include <vector>

#include "spoofdet/common.hpp"
#include "spoofdet/tensor.hpp"

namespace spoofdet {

// Categorical cross-entropy with softmax, mean over the batch.
// logits: (B, K); labels: values in [0, K).
template <typename T>
double CceLoss(const Tensor<T>& logits, const std::vector<int>& labels,
               Tensor<T>* glogits = nullptr) {
  int64_t B = logits.dim(0), K = logits.dim(1);
  SPOOFDET_CHECK(static_cast<int64_t>(labels.size()) == B, "label count");
  if (glogits != nullptr) glogits->Resize(logits.shape);
  double total = 0.0;
  for (int64_t b = 0; b < B; ++b) {
    const T* row = logits.ptr() + b * K;
    int label = labels[static_cast<size_t>(b)];
    if (label < 0 || label >= K)
      throw NumericalError("label " + std::to_string(label) +
                           " out of range for " + std::to_string(K) + " classes");
    T mx = row[0];
    for (int64_t k = 1; k < K; ++k) mx = std::max(mx, row[k]);
    double denom = 0.0;
    for (int64_t k = 0; k < K; ++k) denom += std::exp(static_cast<double>(row[k] - mx));
    double log_denom = std::log(denom);
    total += log_denom - static_cast<double>(row[label] - mx);
    if (glogits != nullptr) {
      T* g = glogits->ptr() + b * K;
      for (int64_t k = 0; k < K; ++k) {
        double p = std::exp(static_cast<double>(row[k] - mx)) / denom;
        g[k] = static_cast<T>((p - (k == label ? 1.0 : 0.0)) / static_cast<double>(B));
      }
    }
  }
  return total / static_cast<double>(B);
}

// Log-softmax of one row, for scoring.
template <typename T>
double LogSoftmaxAt(const T* row, int64_t K, int64_t index) {
  T mx = row[0];
  for (int64_t k = 1; k < K; ++k) mx = std::max(mx, row[k]);
  double denom = 0.0;
  for (int64_t k = 0; k < K; ++k) denom += std::exp(static_cast<double>(row[k] - mx));
  return static_cast<double>(row[index] - mx) - std::log(denom);
}

// Ring loss: (lambda / 2m) * sum_i (||code_i|| - R)^2.  Gradient flows to
// both the codes and R.
template <typename T>
double RingLoss(const Tensor<T>& codes, T radius, T lambda,
                Tensor<T>* gcodes = nullptr, T* gradius = nullptr) {
  int64_t B = codes.dim(0), D = codes.dim(1);
  if (gcodes != nullptr) gcodes->Resize(codes.shape);
  if (gradius != nullptr) *gradius = T(0);
  double total = 0.0;
  double g_r = 0.0;
  for (int64_t b = 0; b < B; ++b) {
    const T* c = codes.ptr() + b * D;
    double norm_sq = 0.0;
    for (int64_t d = 0; d < D; ++d)
      norm_sq += static_cast<double>(c[d]) * static_cast<double>(c[d]);
    double norm = std::sqrt(norm_sq);
    double diff = norm - static_cast<double>(radius);
    total += diff * diff;
    if (gcodes != nullptr) {
      T* g = gcodes->ptr() + b * D;
      double scale = norm > 0.0
                         ? static_cast<double>(lambda) * diff /
                               (static_cast<double>(B) * norm)
                         : 0.0;
      for (int64_t d = 0; d < D; ++d)
        g[d] = static_cast<T>(scale * static_cast<double>(c[d]));
    }
    g_r -= diff;
  }
  if (gradius != nullptr)
    *gradius = static_cast<T>(static_cast<double>(lambda) * g_r / static_cast<double>(B));
  return static_cast<double>(lambda) * total / (2.0 * static_cast<double>(B));
}

// Mean over (code, basis row) pairs of the squared cosine between them.
// Zero codes contribute 0; a zero basis row is a degenerate subsidiary
// model and an error.  The gradient is computed for the codes only (the
// basis is frozen where this loss is used).
template <typename T>
double CosineOrthogonalityLoss(const Tensor<T>& codes, const Tensor<T>& basis,
                               Tensor<T>* gcodes = nullptr) {
  int64_t B = codes.dim(0), D = codes.dim(1);
  int64_t J = basis.dim(0);
  SPOOFDET_CHECK(basis.dim(1) == D, "basis dimensionality");
  std::vector<double> basis_norm_sq(static_cast<size_t>(J));
  for (int64_t j = 0; j < J; ++j) {
    const T* w = basis.ptr() + j * D;
    double ns = 0.0;
    for (int64_t d = 0; d < D; ++d) ns += static_cast<double>(w[d]) * static_cast<double>(w[d]);
    if (ns <= 0.0)
      throw NumericalError("zero basis row in cosine orthogonality loss");
    basis_norm_sq[static_cast<size_t>(j)] = ns;
  }
  if (gcodes != nullptr) gcodes->Resize(codes.shape);
  double total = 0.0;
  double denom_pairs = static_cast<double>(B) * static_cast<double>(J);
  for (int64_t b = 0; b < B; ++b) {
    const T* c = codes.ptr() + b * D;
    T* g = gcodes != nullptr ? gcodes->ptr() + b * D : nullptr;
    double c_norm_sq = 0.0;
    for (int64_t d = 0; d < D; ++d)
      c_norm_sq += static_cast<double>(c[d]) * static_cast<double>(c[d]);
    if (c_norm_sq <= 0.0) continue;  // zero code contributes 0
    for (int64_t j = 0; j < J; ++j) {
      const T* w = basis.ptr() + j * D;
      double dot = 0.0;
      for (int64_t d = 0; d < D; ++d)
        dot += static_cast<double>(c[d]) * static_cast<double>(w[d]);
      double ab = c_norm_sq * basis_norm_sq[static_cast<size_t>(j)];
      total += dot * dot / ab;
      if (g != nullptr) {
        // d/dc of s^2/(|c|^2 |w|^2) = (2s/(|c|^2|w|^2)) (w - (s/|c|^2) c)
        double k = 2.0 * dot / (ab * denom_pairs);
        double kc = k * dot / c_norm_sq;
        for (int64_t d = 0; d < D; ++d)
          g[d] += static_cast<T>(k * static_cast<double>(w[d]) -
                                 kc * static_cast<double>(c[d]));
      }
    }
  }
  return total / denom_pairs;
}

// Mean of |cos(code, basis row)| over pairs, reported by the adversarial
// trainer as its orthogonality diagnostic.
template <typename T>
double MeanAbsCosine(const Tensor<T>& codes, const Tensor<T>& basis) {
  int64_t B = codes.dim(0), D = codes.dim(1);
  int64_t J = basis.dim(0);
  double total = 0.0;
  int64_t pairs = 0;
  for (int64_t b = 0; b < B; ++b) {
    const T* c = codes.ptr() + b * D;
    double cn = 0.0;
    for (int64_t d = 0; d < D; ++d) cn += static_cast<double>(c[d]) * static_cast<double>(c[d]);
    for (int64_t j = 0; j < J; ++j) {
      const T* w = basis.ptr() + j * D;
      double wn = 0.0, dot = 0.0;
      for (int64_t d = 0; d < D; ++d) {
        wn += static_cast<double>(w[d]) * static_cast<double>(w[d]);
        dot += static_cast<double>(c[d]) * static_cast<double>(w[d]);
      }
      if (cn > 0.0 && wn > 0.0) total += std::abs(dot) / std::sqrt(cn * wn);
      ++pairs;
    }
  }
  return pairs > 0 ? total / static_cast<double>(pairs) : 0.0;
}

}  // namespace spoofdet

#endif  // SPOOFDET_LOSSES_HPP_
