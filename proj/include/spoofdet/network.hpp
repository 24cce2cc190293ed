// spoofdet/network.hpp
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
// Encoder and classification heads.  The encoder maps a (B, T, 1025)
// spectrogram batch to 64-dimensional codes: an entry convolution, three
// stages of three pre-activation residual blocks (the first block of each
// stage downsamples by (2, 4) with a projected shortcut), frequency average
// pooling, a GRU whose last hidden state summarizes the utterance, and a
// linear code layer with no activation.

#ifndef SPOOFDET_NETWORK_HPP_
#define SPOOFDET_NETWORK_HPP_

#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spoofdet/corpus.hpp"
#include "spoofdet/layers.hpp"

namespace spoofdet {

struct EncoderConfig {
  int64_t conv1_filters = 16;
  int64_t stage_filters = 128;
  int64_t n_stages = 3;
  int64_t blocks_per_stage = 3;
  int64_t kernel_t = 3, kernel_f = 7;
  int64_t stride_t = 2, stride_f = 4;
  int64_t gru_units = 512;
  int64_t code_dim = 64;
  double lrelu_slope = 0.01;

  std::string Fingerprint() const {
    std::ostringstream oss;
    oss << "enc(c1=" << conv1_filters << ",s=" << stage_filters
        << ",stages=" << n_stages << "x" << blocks_per_stage
        << ",k=" << kernel_t << "x" << kernel_f
        << ",stride=" << stride_t << "x" << stride_f
        << ",gru=" << gru_units << ",code=" << code_dim
        << ",slope=" << lrelu_slope << ")";
    return oss.str();
  }
};

// Expected time extent after the downsampling stages.
inline int64_t EncoderOutFrames(int64_t t, const EncoderConfig& cfg) {
  for (int64_t s = 0; s < cfg.n_stages; ++s) t = detail::CeilDiv(t, cfg.stride_t);
  return t;
}

inline int64_t EncoderOutBins(int64_t f, const EncoderConfig& cfg) {
  for (int64_t s = 0; s < cfg.n_stages; ++s) f = detail::CeilDiv(f, cfg.stride_f);
  return f;
}

// Shapes recorded during a forward pass, for shape-chain checks.
struct EncoderTrace {
  std::vector<std::vector<int64_t>> stage_out;  // (B, C, T, F) after each stage
  std::vector<int64_t> pooled;                  // (B, T, C)
  std::vector<int64_t> code;                    // (B, D)
};

// Pre-activation residual block.  The first block of a stage downsamples
// and projects the shortcut with a 1x1 convolution applied to the
// pre-activated signal; the very first block of the network omits its
// leading BN/activation (the entry convolution already ends in one).
template <typename T>
struct ResBlock {
  bool has_preact = true;
  bool downsample = false;
  BatchNorm2d<T> bn_a;
  LeakyRelu<T> act_a;
  Conv2d<T> conv_a;
  BatchNorm2d<T> bn_b;
  LeakyRelu<T> act_b;
  Conv2d<T> conv_b;
  Conv2d<T> proj;  // 1x1, only when downsampling
  std::vector<int64_t> x_shape_cache;

  void Init(int64_t in_ch, int64_t out_ch, const EncoderConfig& cfg,
            bool first_of_network, bool first_of_stage, Rng& rng) {
    has_preact = !first_of_network;
    downsample = first_of_stage;
    int64_t st = downsample ? cfg.stride_t : 1;
    int64_t sf = downsample ? cfg.stride_f : 1;
    act_a = LeakyRelu<T>(static_cast<T>(cfg.lrelu_slope));
    act_b = LeakyRelu<T>(static_cast<T>(cfg.lrelu_slope));
    if (has_preact) bn_a.Init(in_ch);
    conv_a.Init(in_ch, out_ch, cfg.kernel_t, cfg.kernel_f, st, sf, rng);
    bn_b.Init(out_ch);
    conv_b.Init(out_ch, out_ch, cfg.kernel_t, cfg.kernel_f, 1, 1, rng);
    if (downsample) proj.Init(in_ch, out_ch, 1, 1, st, sf, rng);
  }

  Tensor<T> Forward(const Tensor<T>& x, bool train) {
    Tensor<T> pre = has_preact ? act_a.Forward(bn_a.Forward(x, train), train) : x;
    Tensor<T> h = conv_a.Forward(pre, train);
    h = act_b.Forward(bn_b.Forward(h, train), train);
    h = conv_b.Forward(h, train);
    Tensor<T> sc = downsample ? proj.Forward(pre, train) : x;
    SPOOFDET_CHECK(sc.SameShape(h), "residual shapes");
    for (size_t i = 0; i < h.data.size(); ++i) h.data[i] += sc.data[i];
    if (train) x_shape_cache = x.shape;
    return h;
  }

  Tensor<T> Backward(const Tensor<T>& gy) {
    // Main branch.
    Tensor<T> g = conv_b.Backward(gy);
    g = bn_b.Backward(act_b.Backward(g));
    Tensor<T> gpre = conv_a.Backward(g);
    // Shortcut joins either the pre-activated signal or the raw input.
    Tensor<T> gx({0});
    if (downsample) {
      Tensor<T> gsc = proj.Backward(gy);
      for (size_t i = 0; i < gpre.data.size(); ++i) gpre.data[i] += gsc.data[i];
    }
    if (has_preact) {
      gx = bn_a.Backward(act_a.Backward(gpre));
    } else {
      gx = std::move(gpre);
    }
    if (!downsample)
      for (size_t i = 0; i < gx.data.size(); ++i) gx.data[i] += gy.data[i];
    return gx;
  }

  void Params(const std::string& prefix, ParamList<T>& out) {
    if (has_preact) bn_a.Params(prefix + ".bn_a", out);
    conv_a.Params(prefix + ".conv_a", out);
    bn_b.Params(prefix + ".bn_b", out);
    conv_b.Params(prefix + ".conv_b", out);
    if (downsample) proj.Params(prefix + ".proj", out);
  }
  void Buffers(const std::string& prefix, BufferList<T>& out) {
    if (has_preact) bn_a.Buffers(prefix + ".bn_a", out);
    bn_b.Buffers(prefix + ".bn_b", out);
  }
};

template <typename T>
struct Encoder {
  EncoderConfig cfg;
  Conv2d<T> conv1;
  BatchNorm2d<T> bn1;
  LeakyRelu<T> act1;
  std::vector<ResBlock<T>> blocks;
  FreqAvgPool<T> pool;
  Gru<T> gru;
  Linear<T> code;

  void Init(const EncoderConfig& c, Rng& rng) {
    cfg = c;
    act1 = LeakyRelu<T>(static_cast<T>(c.lrelu_slope));
    conv1.Init(1, c.conv1_filters, c.kernel_t, c.kernel_f, 1, 1, rng);
    bn1.Init(c.conv1_filters);
    blocks.clear();
    blocks.resize(static_cast<size_t>(c.n_stages * c.blocks_per_stage));
    for (int64_t s = 0; s < c.n_stages; ++s) {
      for (int64_t i = 0; i < c.blocks_per_stage; ++i) {
        bool first_of_stage = i == 0;
        bool first_of_network = s == 0 && i == 0;
        int64_t in_ch = first_of_stage && s == 0 ? c.conv1_filters : c.stage_filters;
        blocks[static_cast<size_t>(s * c.blocks_per_stage + i)].Init(
            in_ch, c.stage_filters, c, first_of_network, first_of_stage, rng);
      }
    }
    gru.Init(c.stage_filters, c.gru_units, rng);
    code.Init(c.gru_units, c.code_dim, rng, /*bias=*/true);
  }

  // x: (B, 1, T, 1025) with T >= 2^n_stages.  Returns codes (B, code_dim).
  Tensor<T> Forward(const Tensor<T>& x, bool train, EncoderTrace* trace = nullptr) {
    SPOOFDET_CHECK(x.rank() == 4 && x.dim(1) == 1, "encoder input shape");
    int64_t min_t = int64_t(1) << cfg.n_stages;
    if (x.dim(2) < min_t)
      throw DataError("input too short for the encoder: T=" + std::to_string(x.dim(2)));
    Tensor<T> h = act1.Forward(bn1.Forward(conv1.Forward(x, train), train), train);
    for (int64_t s = 0; s < cfg.n_stages; ++s) {
      for (int64_t i = 0; i < cfg.blocks_per_stage; ++i)
        h = blocks[static_cast<size_t>(s * cfg.blocks_per_stage + i)].Forward(h, train);
      if (trace != nullptr) trace->stage_out.push_back(h.shape);
    }
    Tensor<T> pooled = pool.Forward(h, train);
    if (trace != nullptr) trace->pooled = pooled.shape;
    Tensor<T> last = gru.Forward(pooled, train);
    Tensor<T> out = code.Forward(last, train);
    if (trace != nullptr) trace->code = out.shape;
    return out;
  }

  void Backward(const Tensor<T>& gcodes) {
    Tensor<T> g = code.Backward(gcodes);
    g = gru.Backward(g);
    g = pool.Backward(g);
    for (int64_t i = static_cast<int64_t>(blocks.size()) - 1; i >= 0; --i)
      g = blocks[static_cast<size_t>(i)].Backward(g);
    g = conv1.Backward(bn1.Backward(act1.Backward(g)));
  }

  void Params(const std::string& prefix, ParamList<T>& out) {
    conv1.Params(prefix + ".conv1", out);
    bn1.Params(prefix + ".bn1", out);
    for (int64_t s = 0; s < cfg.n_stages; ++s)
      for (int64_t i = 0; i < cfg.blocks_per_stage; ++i)
        blocks[static_cast<size_t>(s * cfg.blocks_per_stage + i)].Params(
            prefix + ".s" + std::to_string(s) + ".b" + std::to_string(i), out);
    gru.Params(prefix + ".gru", out);
    code.Params(prefix + ".code", out);
  }
  void Buffers(const std::string& prefix, BufferList<T>& out) {
    bn1.Buffers(prefix + ".bn1", out);
    for (int64_t s = 0; s < cfg.n_stages; ++s)
      for (int64_t i = 0; i < cfg.blocks_per_stage; ++i)
        blocks[static_cast<size_t>(s * cfg.blocks_per_stage + i)].Buffers(
            prefix + ".s" + std::to_string(s) + ".b" + std::to_string(i), out);
  }
};

// Subsidiary classifier used by the adversarial framework and by probes:
// two hidden layers and a 3-way output.  The rows of the first hidden
// layer's weight matrix act as the basis the codes are made orthogonal to.
template <typename T>
struct CanSubsidiaryHead {
  int64_t hidden = 128;
  Linear<T> fc1, fc2, out;
  LeakyRelu<T> act1, act2;

  void Init(int64_t code_dim, int64_t hidden_dim, int64_t n_classes,
            double slope, Rng& rng) {
    hidden = hidden_dim;
    act1 = LeakyRelu<T>(static_cast<T>(slope));
    act2 = LeakyRelu<T>(static_cast<T>(slope));
    fc1.Init(code_dim, hidden_dim, rng);
    fc2.Init(hidden_dim, hidden_dim, rng);
    out.Init(hidden_dim, n_classes, rng);
  }

  Tensor<T> Forward(const Tensor<T>& codes, bool train) {
    Tensor<T> h = act1.Forward(fc1.Forward(codes, train), train);
    h = act2.Forward(fc2.Forward(h, train), train);
    return out.Forward(h, train);
  }

  Tensor<T> Backward(const Tensor<T>& glogits) {
    Tensor<T> g = out.Backward(glogits);
    g = fc2.Backward(act2.Backward(g));
    return fc1.Backward(act1.Backward(g));
  }

  const Tensor<T>& Basis() const { return fc1.w; }

  void Params(const std::string& prefix, ParamList<T>& out_list) {
    fc1.Params(prefix + ".fc1", out_list);
    fc2.Params(prefix + ".fc2", out_list);
    out.Params(prefix + ".out", out_list);
  }
};

enum class Scheme { kBaseline, kCan, kMtl, kModifiedMtl };

inline const char* SchemeName(Scheme s);
inline std::optional<Scheme> SchemeFromName(const std::string& name);

// Full model: encoder plus whatever heads the scheme requires.  Under the
// merged scheme the single output layer replaces the primary head.
template <typename T>
struct Model {
  EncoderConfig enc_cfg;
  Scheme scheme = Scheme::kBaseline;
  std::optional<Category> category;
  int64_t subsidiary_hidden = 128;

  Encoder<T> encoder;
  Linear<T> primary;                        // 2-way; absent under modified MTL
  bool has_primary = true;
  std::unique_ptr<CanSubsidiaryHead<T>> can_head;
  std::unique_ptr<Linear<T>> sub_linear;    // MTL subsidiary output layer
  std::unique_ptr<Linear<T>> merged;        // modified-MTL merged output layer

  Tensor<T> ring_radius;                    // scalar R, used when ring loss is on
  Tensor<T> g_ring_radius;
  bool ring_initialized = false;

  void Init(const EncoderConfig& cfg, Scheme s, std::optional<Category> cat,
            int64_t sub_hidden, uint64_t seed) {
    enc_cfg = cfg;
    scheme = s;
    category = cat;
    subsidiary_hidden = sub_hidden;
    Rng rng(DeriveSeed(seed, /*stream=*/1));
    encoder.Init(cfg, rng);
    ring_radius.Resize({1});
    g_ring_radius.Resize({1});
    ring_initialized = false;

    if (s != Scheme::kBaseline)
      SPOOFDET_CHECK(cat.has_value(), "subsidiary schemes need a category");
    has_primary = s != Scheme::kModifiedMtl;
    if (has_primary) primary.Init(cfg.code_dim, 2, rng);
    switch (s) {
      case Scheme::kBaseline:
        break;
      case Scheme::kCan:
        can_head = std::make_unique<CanSubsidiaryHead<T>>();
        can_head->Init(cfg.code_dim, sub_hidden,
                       NumSubsidiaryClasses(*cat, LabelScheme::kCan),
                       cfg.lrelu_slope, rng);
        break;
      case Scheme::kMtl:
        sub_linear = std::make_unique<Linear<T>>();
        sub_linear->Init(cfg.code_dim,
                         NumSubsidiaryClasses(*cat, LabelScheme::kMtl), rng);
        break;
      case Scheme::kModifiedMtl:
        if (KindOf(*cat) != CategoryKind::kReplay)
          throw UsageError(
              "the merged output scheme is defined for replay categories only");
        merged = std::make_unique<Linear<T>>();
        merged->Init(cfg.code_dim,
                     NumSubsidiaryClasses(*cat, LabelScheme::kModifiedMtl), rng);
        break;
    }
  }

  std::string Fingerprint() const {
    std::ostringstream oss;
    oss << enc_cfg.Fingerprint() << "|scheme=" << SchemeName(scheme);
    if (category.has_value()) oss << "|cat=" << CategoryName(*category);
    oss << "|subh=" << subsidiary_hidden;
    return oss.str();
  }

  // Named parameters; prefixes identify the freeze groups ("enc.", "pri.",
  // "sub."), plus the ring radius, which is excluded from weight decay.
  ParamList<T> Params() {
    ParamList<T> out;
    encoder.Params("enc", out);
    if (has_primary) primary.Params("pri.out", out);
    if (can_head) can_head->Params("sub", out);
    if (sub_linear) sub_linear->Params("sub.out", out);
    if (merged) merged->Params("mod.out", out);
    out.push_back({"ring.R", &ring_radius, &g_ring_radius, false});
    return out;
  }

  BufferList<T> Buffers() {
    BufferList<T> out;
    encoder.Buffers("enc", out);
    return out;
  }
};

inline const char* SchemeName(Scheme s) {
  switch (s) {
    case Scheme::kBaseline: return "baseline";
    case Scheme::kCan: return "can";
    case Scheme::kMtl: return "mtl";
    case Scheme::kModifiedMtl: return "modified_mtl";
  }
  return "?";
}

inline std::optional<Scheme> SchemeFromName(const std::string& name) {
  for (Scheme s : {Scheme::kBaseline, Scheme::kCan, Scheme::kMtl, Scheme::kModifiedMtl})
    if (name == SchemeName(s)) return s;
  return std::nullopt;
}

}  // namespace spoofdet

#endif  // SPOOFDET_NETWORK_HPP_
