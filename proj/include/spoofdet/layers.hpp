// spoofdet/layers.hpp
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
// CPU layers with explicit forward/backward, templated on the scalar type
// (float in production, double in gradient-check tests).  Layers cache what
// backward needs when called with train=true; backward accumulates into the
// parameter gradients and returns the input gradient.

#ifndef SPOOFDET_LAYERS_HPP_
#define SPOOFDET_LAYERS_HPP_

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "spoofdet/rng.hpp"
#include "spoofdet/tensor.hpp"

namespace spoofdet {

template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T>* value;
  Tensor<T>* grad;
  bool weight_decay = true;
};

template <typename T>
struct BufferRef {
  std::string name;
  Tensor<T>* value;
};

template <typename T>
using ParamList = std::vector<ParamRef<T>>;
template <typename T>
using BufferList = std::vector<BufferRef<T>>;

namespace detail {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;

inline int64_t CeilDiv(int64_t a, int64_t b) { return (a + b - 1) / b; }

template <typename T>
T Sigmoid(T x) {
  if (x >= T(0)) {
    T e = std::exp(-x);
    return T(1) / (T(1) + e);
  }
  T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Linear: y = x W^T + b
// ---------------------------------------------------------------------------

template <typename T>
struct Linear {
  int64_t in_dim = 0, out_dim = 0;
  bool has_bias = true;
  Tensor<T> w, b, gw, gb;
  Tensor<T> x_cache;

  void Init(int64_t in, int64_t out, Rng& rng, bool bias = true) {
    in_dim = in;
    out_dim = out;
    has_bias = bias;
    w.Resize({out, in});
    gw.Resize({out, in});
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& v : w.data) v = static_cast<T>(rng.UniformReal(-bound, bound));
    if (has_bias) {
      b.Resize({out});
      gb.Resize({out});
      for (auto& v : b.data) v = static_cast<T>(rng.UniformReal(-bound, bound));
    }
  }

  Tensor<T> Forward(const Tensor<T>& x, bool train) {
    int64_t batch = x.numel() / in_dim;
    Tensor<T> y({batch, out_dim});
    auto xm = x.AsMat(batch, in_dim);
    auto wm = w.AsMat(out_dim, in_dim);
    auto ym = y.AsMat(batch, out_dim);
    if (train) {
      ym.noalias() = xm * wm.transpose();
    } else {
      // Row-by-row so each sample's rounding is independent of batch
      // composition (the inference determinism contract).
      for (int64_t b2 = 0; b2 < batch; ++b2)
        ym.row(b2).noalias() = xm.row(b2) * wm.transpose();
    }
    if (has_bias) {
      auto bm = b.AsMat(1, out_dim);
      ym.rowwise() += bm.row(0);
    }
    if (train) x_cache = x;
    return y;
  }

  Tensor<T> Backward(const Tensor<T>& gy) {
    int64_t batch = gy.numel() / out_dim;
    auto gym = gy.AsMat(batch, out_dim);
    auto xm = x_cache.AsMat(batch, in_dim);
    gw.AsMat(out_dim, in_dim).noalias() += gym.transpose() * xm;
    if (has_bias) gb.AsMat(1, out_dim).noalias() += gym.colwise().sum();
    Tensor<T> gx({batch, in_dim});
    gx.AsMat(batch, in_dim).noalias() = gym * w.AsMat(out_dim, in_dim);
    return gx;
  }

  void Params(const std::string& prefix, ParamList<T>& out) {
    out.push_back({prefix + ".w", &w, &gw, true});
    if (has_bias) out.push_back({prefix + ".b", &b, &gb, true});
  }
};

// ---------------------------------------------------------------------------
// LeakyReLU
// ---------------------------------------------------------------------------

template <typename T>
struct LeakyRelu {
  T slope = T(0.01);
  std::vector<uint8_t> mask;  // 1 where input > 0

  explicit LeakyRelu(T s = T(0.01)) : slope(s) {}

  Tensor<T> Forward(const Tensor<T>& x, bool train) {
    Tensor<T> y(x.shape);
    if (train) mask.resize(x.data.size());
    for (size_t i = 0; i < x.data.size(); ++i) {
      bool pos = x.data[i] > T(0);
      y.data[i] = pos ? x.data[i] : slope * x.data[i];
      if (train) mask[i] = pos ? 1 : 0;
    }
    return y;
  }

  Tensor<T> Backward(const Tensor<T>& gy) {
    Tensor<T> gx(gy.shape);
    for (size_t i = 0; i < gy.data.size(); ++i)
      gx.data[i] = mask[i] ? gy.data[i] : slope * gy.data[i];
    return gx;
  }
};

// ---------------------------------------------------------------------------
// Conv2d over (B, C, T, F) with "same" padding: out = ceil(in / stride).
// Weights are (C_out, C_in * kt * kf); no bias (always followed by batch
// norm or a residual add here).
// ---------------------------------------------------------------------------

template <typename T>
struct Conv2d {
  int64_t in_ch = 0, out_ch = 0;
  int64_t kt = 3, kf = 7;
  int64_t st = 1, sf = 1;
  Tensor<T> w, gw;
  Tensor<T> xp_cache;  // padded input
  std::vector<int64_t> in_shape_cache;

  void Init(int64_t in_channels, int64_t out_channels, int64_t kernel_t,
            int64_t kernel_f, int64_t stride_t, int64_t stride_f, Rng& rng) {
    in_ch = in_channels;
    out_ch = out_channels;
    kt = kernel_t;
    kf = kernel_f;
    st = stride_t;
    sf = stride_f;
    int64_t fan_in = in_ch * kt * kf;
    w.Resize({out_ch, fan_in});
    gw.Resize({out_ch, fan_in});
    double std = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (auto& v : w.data) v = static_cast<T>(rng.Normal(0.0, std));
  }

  static void PadAmount(int64_t in, int64_t k, int64_t s, int64_t* out,
                        int64_t* pad_begin, int64_t* pad_total) {
    *out = detail::CeilDiv(in, s);
    *pad_total = std::max<int64_t>((*out - 1) * s + k - in, 0);
    *pad_begin = *pad_total / 2;
  }

  Tensor<T> Forward(const Tensor<T>& x, bool train) {
    SPOOFDET_CHECK(x.rank() == 4 && x.dim(1) == in_ch, "conv input shape");
    int64_t B = x.dim(0), Ti = x.dim(2), Fi = x.dim(3);
    int64_t To, Fo, pt0, ptt, pf0, pft;
    PadAmount(Ti, kt, st, &To, &pt0, &ptt);
    PadAmount(Fi, kf, sf, &Fo, &pf0, &pft);
    int64_t Tp = Ti + ptt, Fp = Fi + pft;

    Tensor<T> xp({B, in_ch, Tp, Fp});
    const T* xs = x.ptr();
    T* xd = xp.ptr();
    for (int64_t b = 0; b < B; ++b)
      for (int64_t c = 0; c < in_ch; ++c)
        for (int64_t t = 0; t < Ti; ++t)
          std::memcpy(xd + (((b * in_ch + c) * Tp + t + pt0) * Fp + pf0),
                      xs + (((b * in_ch + c) * Ti + t) * Fi),
                      static_cast<size_t>(Fi) * sizeof(T));

    Tensor<T> y({B, out_ch, To, Fo});
    int64_t K = in_ch * kt * kf;
    detail::RowMat<T> cols(K, Fo);
    auto wm = w.AsMat(out_ch, K);
    for (int64_t b = 0; b < B; ++b) {
      for (int64_t to = 0; to < To; ++to) {
        GatherCols(xp, b, to, Fo, cols);
        detail::StridedMap<T> ym(y.ptr() + (b * out_ch * To + to) * Fo, out_ch,
                                 Fo, Eigen::OuterStride<>(To * Fo));
        ym.noalias() = wm * cols;
      }
    }
    if (train) {
      xp_cache = std::move(xp);
      in_shape_cache = x.shape;
    }
    return y;
  }

  Tensor<T> Backward(const Tensor<T>& gy) {
    int64_t B = in_shape_cache[0], Ti = in_shape_cache[2], Fi = in_shape_cache[3];
    int64_t To = gy.dim(2), Fo = gy.dim(3);
    int64_t Tp = xp_cache.dim(2), Fp = xp_cache.dim(3);
    int64_t pt0 = (Tp - Ti) / 2, pf0 = (Fp - Fi) / 2;
    int64_t K = in_ch * kt * kf;

    Tensor<T> gxp({B, in_ch, Tp, Fp});
    detail::RowMat<T> cols(K, Fo);
    detail::RowMat<T> gcols(K, Fo);
    auto wm = w.AsMat(out_ch, K);
    auto gwm = gw.AsMat(out_ch, K);
    for (int64_t b = 0; b < B; ++b) {
      for (int64_t to = 0; to < To; ++to) {
        detail::ConstStridedMap<T> gym(gy.ptr() + (b * out_ch * To + to) * Fo,
                                       out_ch, Fo, Eigen::OuterStride<>(To * Fo));
        GatherCols(xp_cache, b, to, Fo, cols);
        gwm.noalias() += gym * cols.transpose();
        gcols.noalias() = wm.transpose() * gym;
        ScatterColsAdd(gcols, b, to, Fo, gxp);
      }
    }
    // Strip padding.
    Tensor<T> gx({B, in_ch, Ti, Fi});
    const T* gs = gxp.ptr();
    T* gd = gx.ptr();
    for (int64_t b = 0; b < B; ++b)
      for (int64_t c = 0; c < in_ch; ++c)
        for (int64_t t = 0; t < Ti; ++t)
          std::memcpy(gd + ((b * in_ch + c) * Ti + t) * Fi,
                      gs + (((b * in_ch + c) * Tp + t + pt0) * Fp + pf0),
                      static_cast<size_t>(Fi) * sizeof(T));
    return gx;
  }

  void Params(const std::string& prefix, ParamList<T>& out) {
    out.push_back({prefix + ".w", &w, &gw, true});
  }

 private:
  // One output row's im2col slice: cols((c, dt, df), fo) = xp(c, to*st+dt, fo*sf+df).
  void GatherCols(const Tensor<T>& xp, int64_t b, int64_t to, int64_t Fo,
                  detail::RowMat<T>& cols) const {
    int64_t Tp = xp.dim(2), Fp = xp.dim(3);
    const T* base = xp.ptr() + b * in_ch * Tp * Fp;
    for (int64_t c = 0; c < in_ch; ++c) {
      for (int64_t dt = 0; dt < kt; ++dt) {
        const T* src = base + (c * Tp + to * st + dt) * Fp;
        for (int64_t df = 0; df < kf; ++df) {
          T* dst = cols.data() + ((c * kt + dt) * kf + df) * Fo;
          const T* s = src + df;
          if (sf == 1) {
            std::memcpy(dst, s, static_cast<size_t>(Fo) * sizeof(T));
          } else {
            for (int64_t fo = 0; fo < Fo; ++fo) dst[fo] = s[fo * sf];
          }
        }
      }
    }
  }

  void ScatterColsAdd(const detail::RowMat<T>& gcols, int64_t b, int64_t to,
                      int64_t Fo, Tensor<T>& gxp) const {
    int64_t Tp = gxp.dim(2), Fp = gxp.dim(3);
    T* base = gxp.ptr() + b * in_ch * Tp * Fp;
    for (int64_t c = 0; c < in_ch; ++c) {
      for (int64_t dt = 0; dt < kt; ++dt) {
        T* dst_row = base + (c * Tp + to * st + dt) * Fp;
        for (int64_t df = 0; df < kf; ++df) {
          const T* src = gcols.data() + ((c * kt + dt) * kf + df) * Fo;
          T* d = dst_row + df;
          for (int64_t fo = 0; fo < Fo; ++fo) d[fo * sf] += src[fo];
        }
      }
    }
  }
};

// ---------------------------------------------------------------------------
// BatchNorm2d over channels of (B, C, T, F).
// ---------------------------------------------------------------------------

template <typename T>
struct BatchNorm2d {
  int64_t channels = 0;
  T eps = T(1e-5);
  T momentum = T(0.1);
  Tensor<T> gamma, beta, ggamma, gbeta;
  Tensor<T> running_mean, running_var;
  // caches (train mode)
  Tensor<T> xhat_cache;
  std::vector<T> inv_std_cache;

  void Init(int64_t ch) {
    channels = ch;
    gamma.Resize({ch});
    beta.Resize({ch});
    ggamma.Resize({ch});
    gbeta.Resize({ch});
    running_mean.Resize({ch});
    running_var.Resize({ch});
    std::fill(gamma.data.begin(), gamma.data.end(), T(1));
    std::fill(running_var.data.begin(), running_var.data.end(), T(1));
  }

  Tensor<T> Forward(const Tensor<T>& x, bool train) {
    SPOOFDET_CHECK(x.rank() == 4 && x.dim(1) == channels, "bn input shape");
    int64_t B = x.dim(0), Ti = x.dim(2), Fi = x.dim(3);
    int64_t plane = Ti * Fi;
    int64_t count = B * plane;
    Tensor<T> y(x.shape);
    if (train) {
      xhat_cache.Resize(x.shape);
      inv_std_cache.assign(static_cast<size_t>(channels), T(0));
    }
    for (int64_t c = 0; c < channels; ++c) {
      T mean, var;
      if (train) {
        // Biased variance, as used for normalization.
        double sum = 0.0, sq = 0.0;
        for (int64_t b = 0; b < B; ++b) {
          const T* p = x.ptr() + (b * channels + c) * plane;
          for (int64_t i = 0; i < plane; ++i) {
            sum += static_cast<double>(p[i]);
            sq += static_cast<double>(p[i]) * static_cast<double>(p[i]);
          }
        }
        mean = static_cast<T>(sum / static_cast<double>(count));
        var = static_cast<T>(
            std::max(0.0, sq / static_cast<double>(count) -
                              static_cast<double>(mean) * static_cast<double>(mean)));
        running_mean.data[static_cast<size_t>(c)] =
            (T(1) - momentum) * running_mean.data[static_cast<size_t>(c)] + momentum * mean;
        running_var.data[static_cast<size_t>(c)] =
            (T(1) - momentum) * running_var.data[static_cast<size_t>(c)] + momentum * var;
      } else {
        mean = running_mean.data[static_cast<size_t>(c)];
        var = running_var.data[static_cast<size_t>(c)];
      }
      T inv_std = T(1) / std::sqrt(var + eps);
      T g = gamma.data[static_cast<size_t>(c)], bt = beta.data[static_cast<size_t>(c)];
      if (train) inv_std_cache[static_cast<size_t>(c)] = inv_std;
      for (int64_t b = 0; b < B; ++b) {
        const T* p = x.ptr() + (b * channels + c) * plane;
        T* q = y.ptr() + (b * channels + c) * plane;
        T* xh = train ? xhat_cache.ptr() + (b * channels + c) * plane : nullptr;
        for (int64_t i = 0; i < plane; ++i) {
          T v = (p[i] - mean) * inv_std;
          if (train) xh[i] = v;
          q[i] = g * v + bt;
        }
      }
    }
    return y;
  }

  Tensor<T> Backward(const Tensor<T>& gy) {
    int64_t B = gy.dim(0), Ti = gy.dim(2), Fi = gy.dim(3);
    int64_t plane = Ti * Fi;
    int64_t count = B * plane;
    Tensor<T> gx(gy.shape);
    for (int64_t c = 0; c < channels; ++c) {
      double sum_gy = 0.0, sum_gy_xh = 0.0;
      for (int64_t b = 0; b < B; ++b) {
        const T* g = gy.ptr() + (b * channels + c) * plane;
        const T* xh = xhat_cache.ptr() + (b * channels + c) * plane;
        for (int64_t i = 0; i < plane; ++i) {
          sum_gy += static_cast<double>(g[i]);
          sum_gy_xh += static_cast<double>(g[i]) * static_cast<double>(xh[i]);
        }
      }
      ggamma.data[static_cast<size_t>(c)] += static_cast<T>(sum_gy_xh);
      gbeta.data[static_cast<size_t>(c)] += static_cast<T>(sum_gy);
      T mean_gy = static_cast<T>(sum_gy / static_cast<double>(count));
      T mean_gy_xh = static_cast<T>(sum_gy_xh / static_cast<double>(count));
      T scale = gamma.data[static_cast<size_t>(c)] * inv_std_cache[static_cast<size_t>(c)];
      for (int64_t b = 0; b < B; ++b) {
        const T* g = gy.ptr() + (b * channels + c) * plane;
        const T* xh = xhat_cache.ptr() + (b * channels + c) * plane;
        T* o = gx.ptr() + (b * channels + c) * plane;
        for (int64_t i = 0; i < plane; ++i)
          o[i] = scale * (g[i] - mean_gy - xh[i] * mean_gy_xh);
      }
    }
    return gx;
  }

  void Params(const std::string& prefix, ParamList<T>& out) {
    out.push_back({prefix + ".gamma", &gamma, &ggamma, true});
    out.push_back({prefix + ".beta", &beta, &gbeta, true});
  }
  void Buffers(const std::string& prefix, BufferList<T>& out) {
    out.push_back({prefix + ".running_mean", &running_mean});
    out.push_back({prefix + ".running_var", &running_var});
  }
};

// ---------------------------------------------------------------------------
// Mean over the frequency axis, transposed for the recurrent layer:
// (B, C, T, F) -> (B, T, C).
// ---------------------------------------------------------------------------

template <typename T>
struct FreqAvgPool {
  int64_t f_cache = 0;
  std::vector<int64_t> in_shape_cache;

  Tensor<T> Forward(const Tensor<T>& x, bool train) {
    int64_t B = x.dim(0), C = x.dim(1), Ti = x.dim(2), Fi = x.dim(3);
    Tensor<T> y({B, Ti, C});
    for (int64_t b = 0; b < B; ++b)
      for (int64_t c = 0; c < C; ++c)
        for (int64_t t = 0; t < Ti; ++t) {
          const T* p = x.ptr() + ((b * C + c) * Ti + t) * Fi;
          double acc = 0.0;
          for (int64_t f = 0; f < Fi; ++f) acc += static_cast<double>(p[f]);
          y.ptr()[(b * Ti + t) * C + c] = static_cast<T>(acc / static_cast<double>(Fi));
        }
    if (train) {
      f_cache = Fi;
      in_shape_cache = x.shape;
    }
    return y;
  }

  Tensor<T> Backward(const Tensor<T>& gy) {
    int64_t B = in_shape_cache[0], C = in_shape_cache[1], Ti = in_shape_cache[2],
            Fi = in_shape_cache[3];
    Tensor<T> gx(in_shape_cache);
    T inv = T(1) / static_cast<T>(Fi);
    for (int64_t b = 0; b < B; ++b)
      for (int64_t c = 0; c < C; ++c)
        for (int64_t t = 0; t < Ti; ++t) {
          T g = gy.ptr()[(b * Ti + t) * C + c] * inv;
          T* p = gx.ptr() + ((b * C + c) * Ti + t) * Fi;
          for (int64_t f = 0; f < Fi; ++f) p[f] = g;
        }
    return gx;
  }
};

// ---------------------------------------------------------------------------
// Single-layer GRU over (B, T, C); returns the last hidden state (B, H).
// Gate layout follows the common [r, z, n] convention with separate input
// and hidden biases.
// ---------------------------------------------------------------------------

template <typename T>
struct Gru {
  int64_t in_dim = 0, hidden = 0;
  Tensor<T> w_ih, w_hh, b_ih, b_hh;      // (3H, C), (3H, H), (3H), (3H)
  Tensor<T> gw_ih, gw_hh, gb_ih, gb_hh;
  // caches
  Tensor<T> x_cache;                      // (B, T, C)
  Tensor<T> h_cache;                      // (B, T+1, H), h_cache[:,0,:] = 0
  Tensor<T> r_cache, z_cache, n_cache, s_cache;  // (B, T, H)

  void Init(int64_t in, int64_t h, Rng& rng) {
    in_dim = in;
    hidden = h;
    w_ih.Resize({3 * h, in});
    w_hh.Resize({3 * h, h});
    b_ih.Resize({3 * h});
    b_hh.Resize({3 * h});
    gw_ih.Resize({3 * h, in});
    gw_hh.Resize({3 * h, h});
    gb_ih.Resize({3 * h});
    gb_hh.Resize({3 * h});
    double bound = 1.0 / std::sqrt(static_cast<double>(h));
    for (auto* t : {&w_ih, &w_hh, &b_ih, &b_hh})
      for (auto& v : t->data) v = static_cast<T>(rng.UniformReal(-bound, bound));
  }

  Tensor<T> Forward(const Tensor<T>& x, bool train) {
    SPOOFDET_CHECK(x.rank() == 3 && x.dim(2) == in_dim, "gru input shape");
    int64_t B = x.dim(0), Ts = x.dim(1);
    int64_t H = hidden;

    detail::RowMat<T> h = detail::RowMat<T>::Zero(B, H);
    detail::RowMat<T> gates_i(B, 3 * H), gates_h(B, 3 * H);
    auto wih = w_ih.AsMat(3 * H, in_dim);
    auto whh = w_hh.AsMat(3 * H, H);

    if (train) {
      x_cache = x;
      h_cache.Resize({B, Ts + 1, H});
      r_cache.Resize({B, Ts, H});
      z_cache.Resize({B, Ts, H});
      n_cache.Resize({B, Ts, H});
      s_cache.Resize({B, Ts, H});
    }

    for (int64_t t = 0; t < Ts; ++t) {
      detail::ConstStridedMap<T> xt(x.ptr() + t * in_dim, B, in_dim,
                                    Eigen::OuterStride<>(Ts * in_dim));
      if (train) {
        gates_i.noalias() = xt * wih.transpose();
        gates_h.noalias() = h * whh.transpose();
      } else {
        // Per-sample products keep inference bit-independent of batch
        // composition.
        for (int64_t bb = 0; bb < B; ++bb) {
          gates_i.row(bb).noalias() = xt.row(bb) * wih.transpose();
          gates_h.row(bb).noalias() = h.row(bb) * whh.transpose();
        }
      }
      gates_i.rowwise() += b_ih.AsMat(1, 3 * H).row(0);
      gates_h.rowwise() += b_hh.AsMat(1, 3 * H).row(0);
      for (int64_t bb = 0; bb < B; ++bb) {
        for (int64_t j = 0; j < H; ++j) {
          T r = detail::Sigmoid(gates_i(bb, j) + gates_h(bb, j));
          T z = detail::Sigmoid(gates_i(bb, H + j) + gates_h(bb, H + j));
          T s = gates_h(bb, 2 * H + j);
          T n = std::tanh(gates_i(bb, 2 * H + j) + r * s);
          T h_prev = h(bb, j);
          T h_new = (T(1) - z) * n + z * h_prev;
          if (train) {
            r_cache.ptr()[(bb * Ts + t) * H + j] = r;
            z_cache.ptr()[(bb * Ts + t) * H + j] = z;
            n_cache.ptr()[(bb * Ts + t) * H + j] = n;
            s_cache.ptr()[(bb * Ts + t) * H + j] = s;
            h_cache.ptr()[(bb * (Ts + 1) + t) * H + j] = h_prev;
          }
          h(bb, j) = h_new;
        }
      }
      if (train)
        for (int64_t bb = 0; bb < B; ++bb)
          for (int64_t j = 0; j < H; ++j)
            h_cache.ptr()[(bb * (Ts + 1) + t + 1) * H + j] = h(bb, j);
    }

    Tensor<T> out({B, H});
    detail::MatMap<T>(out.ptr(), B, H) = h;
    return out;
  }

  // g_last is the gradient on the final hidden state.
  Tensor<T> Backward(const Tensor<T>& g_last) {
    int64_t B = x_cache.dim(0), Ts = x_cache.dim(1);
    int64_t H = hidden;
    Tensor<T> gx({B, Ts, in_dim});

    detail::RowMat<T> dh(B, H);
    dh = detail::ConstMatMap<T>(g_last.ptr(), B, H);
    detail::RowMat<T> dgi(B, 3 * H), dgh(B, 3 * H);
    auto wih = w_ih.AsMat(3 * H, in_dim);
    auto whh = w_hh.AsMat(3 * H, H);

    for (int64_t t = Ts - 1; t >= 0; --t) {
      for (int64_t bb = 0; bb < B; ++bb) {
        for (int64_t j = 0; j < H; ++j) {
          T r = r_cache.ptr()[(bb * Ts + t) * H + j];
          T z = z_cache.ptr()[(bb * Ts + t) * H + j];
          T n = n_cache.ptr()[(bb * Ts + t) * H + j];
          T s = s_cache.ptr()[(bb * Ts + t) * H + j];
          T h_prev = h_cache.ptr()[(bb * (Ts + 1) + t) * H + j];
          T d = dh(bb, j);
          T dz = d * (h_prev - n);
          T dn = d * (T(1) - z);
          T dh_prev = d * z;
          T da_n = dn * (T(1) - n * n);
          T dr = da_n * s;
          T ds = da_n * r;
          T da_r = dr * r * (T(1) - r);
          T da_z = dz * z * (T(1) - z);
          dgi(bb, j) = da_r;
          dgi(bb, H + j) = da_z;
          dgi(bb, 2 * H + j) = da_n;
          dgh(bb, j) = da_r;
          dgh(bb, H + j) = da_z;
          dgh(bb, 2 * H + j) = ds;
          dh(bb, j) = dh_prev;  // recurrent contribution added below
        }
      }
      detail::ConstStridedMap<T> xt(x_cache.ptr() + t * in_dim, B, in_dim,
                                    Eigen::OuterStride<>(Ts * in_dim));
      detail::ConstStridedMap<T> hprev(h_cache.ptr() + t * H, B, H,
                                       Eigen::OuterStride<>((Ts + 1) * H));
      detail::StridedMap<T> gxt(gx.ptr() + t * in_dim, B, in_dim,
                                Eigen::OuterStride<>(Ts * in_dim));
      gxt.noalias() = dgi * wih;
      dh.noalias() += dgh * whh;
      gw_ih.AsMat(3 * H, in_dim).noalias() += dgi.transpose() * xt;
      gw_hh.AsMat(3 * H, H).noalias() += dgh.transpose() * hprev;
      gb_ih.AsMat(1, 3 * H).noalias() += dgi.colwise().sum();
      gb_hh.AsMat(1, 3 * H).noalias() += dgh.colwise().sum();
    }
    return gx;
  }

  void Params(const std::string& prefix, ParamList<T>& out) {
    out.push_back({prefix + ".w_ih", &w_ih, &gw_ih, true});
    out.push_back({prefix + ".w_hh", &w_hh, &gw_hh, true});
    out.push_back({prefix + ".b_ih", &b_ih, &gb_ih, true});
    out.push_back({prefix + ".b_hh", &b_hh, &gb_hh, true});
  }
};

}  // namespace spoofdet

#endif  // SPOOFDET_LAYERS_HPP_
