// spoofdet/tensor.hpp
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

#ifndef SPOOFDET_TENSOR_HPP_
#define SPOOFDET_TENSOR_HPP_

#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "spoofdet/common.hpp"

namespace spoofdet {

// Dense row-major tensor.  Rank is dynamic; the last dimension is the
// fastest-varying one.  This is deliberately minimal: layers work on raw
// pointers and Eigen maps, the tensor only owns storage and shape.
template <typename T>
struct Tensor {
  using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MatMap = Eigen::Map<RowMat>;
  using ConstMatMap = Eigen::Map<const RowMat>;

  std::vector<int64_t> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int64_t> s) : shape(std::move(s)) {
    data.assign(static_cast<size_t>(Numel(shape)), T(0));
  }

  static int64_t Numel(const std::vector<int64_t>& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
  }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int64_t dim(int i) const { return shape[static_cast<size_t>(i)]; }
  int rank() const { return static_cast<int>(shape.size()); }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  void Zero() { std::fill(data.begin(), data.end(), T(0)); }

  void Resize(std::vector<int64_t> s) {
    shape = std::move(s);
    data.assign(static_cast<size_t>(Numel(shape)), T(0));
  }

  // Views the whole tensor as a (rows, cols) row-major matrix.
  MatMap AsMat(int64_t rows, int64_t cols) {
    SPOOFDET_CHECK(rows * cols == numel(), "matrix view size mismatch");
    return MatMap(data.data(), rows, cols);
  }
  ConstMatMap AsMat(int64_t rows, int64_t cols) const {
    SPOOFDET_CHECK(rows * cols == numel(), "matrix view size mismatch");
    return ConstMatMap(data.data(), rows, cols);
  }

  bool SameShape(const Tensor& other) const { return shape == other.shape; }
};

}  // namespace spoofdet

#endif  // SPOOFDET_TENSOR_HPP_
