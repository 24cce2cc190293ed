// spoofdet/training.hpp
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
// Training regimes.
//
// baseline      encoder + primary head, cross-entropy (+ optional ring loss)
// can           repeating three-phase cycle: (1) baseline training with the
//               subsidiary model frozen, (2) subsidiary model trained on
//               frozen codes, (3) encoder trained through the frozen primary
//               head plus a cosine-orthogonality penalty against the frozen
//               subsidiary basis
// mtl           joint primary + subsidiary output layer, weighted sum
// modified_mtl  single merged output layer (bona-fide node + one node per
//               subsidiary level); replaces the primary head

#ifndef SPOOFDET_TRAINING_HPP_
#define SPOOFDET_TRAINING_HPP_

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <string>
#include <vector>

#include "spoofdet/checkpoint.hpp"
#include "spoofdet/corpus.hpp"
#include "spoofdet/features.hpp"
#include "spoofdet/losses.hpp"
#include "spoofdet/network.hpp"
#include "spoofdet/optim.hpp"

namespace spoofdet {

// Relative phase durations in epochs; the cycle repeats 1 -> 2 -> 3.
struct PhaseSchedule {
  int phase1 = 3;
  int phase2 = 1;
  int phase3 = 1;

  int Period() const { return phase1 + phase2 + phase3; }
};

inline int PhaseForEpoch(int64_t epoch, const PhaseSchedule& s) {
  SPOOFDET_CHECK(epoch >= 0 && s.phase1 > 0 && s.phase2 > 0 && s.phase3 > 0,
                 "bad phase schedule");
  int64_t m = epoch % s.Period();
  if (m < s.phase1) return 1;
  if (m < s.phase1 + s.phase2) return 2;
  return 3;
}

struct FreezeMask {
  bool encoder_frozen = false;
  bool primary_frozen = false;
  bool subsidiary_frozen = false;
};

inline FreezeMask MaskForPhase(int phase) {
  switch (phase) {
    case 1: return {false, false, true};
    case 2: return {true, true, false};
    case 3: return {false, true, true};
    default: throw UsageError("phase must be 1, 2 or 3");
  }
}

// Frozen-group predicate over parameter names.  The ring radius trains
// whenever the ring loss participates in the objective.
inline bool IsFrozenParam(const std::string& name, const FreezeMask& m,
                          bool ring_active) {
  if (StartsWith(name, "enc.")) return m.encoder_frozen;
  if (StartsWith(name, "pri.") || StartsWith(name, "mod.")) return m.primary_frozen;
  if (StartsWith(name, "sub.")) return m.subsidiary_frozen;
  if (StartsWith(name, "ring.")) return !ring_active || m.encoder_frozen;
  return false;
}

struct LossReport {
  int64_t step = 0;
  int phase = 0;  // 0 outside the adversarial regime
  double primary = 0.0;
  double subsidiary = 0.0;
  double ring = 0.0;
  double orth = 0.0;
  double total = 0.0;
};

struct TrainingConfig {
  Scheme scheme = Scheme::kBaseline;
  std::optional<Category> category;
  bool ring = false;
  double ring_lambda = 1.0;  // ring and cross-entropy weights are equal
  double lambda_pri = 1.0;
  double lambda_sub = 0.5;
  double orth_alpha = 1.0;
  OptimizerConfig optimizer;
  PhaseSchedule phases;
  int64_t epochs = 10;
  uint64_t seed = 1;
  int64_t crop_frames = 120;
  int64_t subsidiary_hidden = 128;
  EncoderConfig encoder;
  bool can_unfrozen_phase2 = false;  // experimental: phase 2 without freezing
  int threads = 0;                   // feature extraction / scoring only
  bool checkpoint_keep_all = true;
};

// In-memory spectrograms for a list of trial entries.
class FeatureCache {
 public:
  FeatureCache() = default;

  static FeatureCache FromAudio(const std::vector<TrialEntry>& entries,
                                int threads) {
    FeatureCache c;
    c.specs_.resize(entries.size());
    ParallelFor(static_cast<int64_t>(entries.size()), threads, [&](int64_t i) {
      c.specs_[static_cast<size_t>(i)] =
          StftMagnitude(ReadAudio(entries[static_cast<size_t>(i)].audio_path));
    });
    return c;
  }

  static FeatureCache FromSpectrograms(std::vector<Spectrogram> specs) {
    FeatureCache c;
    c.specs_ = std::move(specs);
    return c;
  }

  const Spectrogram& Get(int64_t index) const {
    return specs_[static_cast<size_t>(index)];
  }
  int64_t size() const { return static_cast<int64_t>(specs_.size()); }

 private:
  std::vector<Spectrogram> specs_;
};

namespace train_detail {

// (B, 1, T, 1025) network input from spectrogram crops.
template <typename T>
Tensor<T> BatchFromCrops(const std::vector<Spectrogram>& crops) {
  int64_t B = static_cast<int64_t>(crops.size());
  int64_t Tn = crops[0].num_frames;
  Tensor<T> x({B, 1, Tn, kNumBins});
  for (int64_t b = 0; b < B; ++b) {
    SPOOFDET_CHECK(crops[static_cast<size_t>(b)].num_frames == Tn, "ragged crop batch");
    const float* src = crops[static_cast<size_t>(b)].values.data();
    T* dst = x.ptr() + b * Tn * kNumBins;
    for (int64_t i = 0; i < Tn * kNumBins; ++i) dst[i] = static_cast<T>(src[i]);
  }
  return x;
}

inline void CheckFinite(double loss, const char* what) {
  if (!std::isfinite(loss))
    throw NumericalError(std::string("non-finite loss in ") + what +
                         " (diverged or bad input); aborting");
}

}  // namespace train_detail

// Initializes the ring radius from the mean code norm of the first batch it
// sees (the usual convention for this loss).
template <typename T>
void MaybeInitRing(Model<T>& model, const Tensor<T>& codes) {
  if (model.ring_initialized) return;
  int64_t B = codes.dim(0), D = codes.dim(1);
  double acc = 0.0;
  for (int64_t b = 0; b < B; ++b) {
    double ns = 0.0;
    const T* c = codes.ptr() + b * D;
    for (int64_t d = 0; d < D; ++d) ns += static_cast<double>(c[d]) * static_cast<double>(c[d]);
    acc += std::sqrt(ns);
  }
  model.ring_radius.data[0] = static_cast<T>(acc / static_cast<double>(B));
  model.ring_initialized = true;
}

// --------------------------------------------------------------------------
// Single optimization steps.  Each zeroes gradients, runs forward/backward
// for its objective and applies one optimizer update to the unfrozen groups.
// --------------------------------------------------------------------------

template <typename T>
LossReport StepBaseline(Model<T>& model, AmsGrad<T>& opt, const Tensor<T>& x,
                        const std::vector<int>& keys, bool ring_enabled,
                        double ring_lambda) {
  ParamList<T> params = model.Params();
  ZeroGrads(params);
  Tensor<T> codes = model.encoder.Forward(x, /*train=*/true);
  Tensor<T> logits = model.primary.Forward(codes, /*train=*/true);

  LossReport rep;
  Tensor<T> glogits;
  rep.primary = CceLoss(logits, keys, &glogits);
  Tensor<T> gcodes = model.primary.Backward(glogits);
  if (ring_enabled) {
    MaybeInitRing(model, codes);
    Tensor<T> gring;
    T gr = T(0);
    rep.ring = RingLoss(codes, model.ring_radius.data[0],
                        static_cast<T>(ring_lambda), &gring, &gr);
    for (size_t i = 0; i < gcodes.data.size(); ++i) gcodes.data[i] += gring.data[i];
    model.g_ring_radius.data[0] += gr;
  }
  rep.total = rep.primary + rep.ring;
  train_detail::CheckFinite(rep.total, "baseline step");
  model.encoder.Backward(gcodes);

  FreezeMask mask{false, false, true};
  opt.Step(params, [&](const std::string& n) {
    return IsFrozenParam(n, mask, ring_enabled);
  });
  return rep;
}

// Phase 2: the subsidiary model fits the frozen codes; its loss trajectory
// measures how much subsidiary information the encoder retains.
template <typename T>
LossReport StepCanPhase2(Model<T>& model, AmsGrad<T>& opt, const Tensor<T>& x,
                         const std::vector<int>& sub_labels,
                         bool unfrozen_encoder = false) {
  SPOOFDET_CHECK(model.can_head != nullptr, "phase 2 needs the subsidiary head");
  if (sub_labels.empty())
    throw DataError("empty batch after bona-fide exclusion in phase 2");
  ParamList<T> params = model.Params();
  ZeroGrads(params);
  Tensor<T> codes = model.encoder.Forward(x, /*train=*/unfrozen_encoder);
  Tensor<T> logits = model.can_head->Forward(codes, /*train=*/true);

  LossReport rep;
  Tensor<T> glogits;
  rep.subsidiary = CceLoss(logits, sub_labels, &glogits);
  rep.total = rep.subsidiary;
  train_detail::CheckFinite(rep.total, "subsidiary step");
  Tensor<T> gcodes = model.can_head->Backward(glogits);
  if (unfrozen_encoder) model.encoder.Backward(gcodes);

  FreezeMask mask = MaskForPhase(2);
  if (unfrozen_encoder) mask.encoder_frozen = false;
  opt.Step(params, [&](const std::string& n) {
    return IsFrozenParam(n, mask, /*ring_active=*/false);
  });
  return rep;
}

// Phase 3: the encoder is trained through the frozen primary head while the
// codes are pushed orthogonal to the frozen subsidiary basis.
template <typename T>
LossReport StepCanPhase3(Model<T>& model, AmsGrad<T>& opt, const Tensor<T>& x,
                         const std::vector<int>& keys, double orth_alpha) {
  SPOOFDET_CHECK(model.can_head != nullptr, "phase 3 needs the subsidiary head");
  ParamList<T> params = model.Params();
  ZeroGrads(params);
  Tensor<T> codes = model.encoder.Forward(x, /*train=*/true);
  Tensor<T> logits = model.primary.Forward(codes, /*train=*/true);

  LossReport rep;
  Tensor<T> glogits;
  rep.primary = CceLoss(logits, keys, &glogits);
  Tensor<T> gcodes = model.primary.Backward(glogits);
  Tensor<T> gorth;
  rep.orth = CosineOrthogonalityLoss(codes, model.can_head->Basis(), &gorth);
  for (size_t i = 0; i < gcodes.data.size(); ++i)
    gcodes.data[i] += static_cast<T>(orth_alpha) * gorth.data[i];
  rep.total = rep.primary + orth_alpha * rep.orth;
  train_detail::CheckFinite(rep.total, "adversarial step");
  model.encoder.Backward(gcodes);

  FreezeMask mask = MaskForPhase(3);
  opt.Step(params, [&](const std::string& n) {
    return IsFrozenParam(n, mask, /*ring_active=*/false);
  });
  return rep;
}

// Joint multi-task step: weighted sum of the primary and subsidiary
// cross-entropies on the shared codes.
template <typename T>
LossReport StepMtl(Model<T>& model, AmsGrad<T>& opt, const Tensor<T>& x,
                   const std::vector<int>& keys,
                   const std::vector<int>& sub_labels, double lambda_pri,
                   double lambda_sub, bool ring_enabled, double ring_lambda) {
  SPOOFDET_CHECK(model.sub_linear != nullptr, "mtl needs the subsidiary layer");
  ParamList<T> params = model.Params();
  ZeroGrads(params);
  Tensor<T> codes = model.encoder.Forward(x, /*train=*/true);
  Tensor<T> logits_p = model.primary.Forward(codes, /*train=*/true);
  Tensor<T> logits_s = model.sub_linear->Forward(codes, /*train=*/true);

  LossReport rep;
  Tensor<T> glogits_p, glogits_s;
  rep.primary = CceLoss(logits_p, keys, &glogits_p);
  rep.subsidiary = CceLoss(logits_s, sub_labels, &glogits_s);
  for (auto& g : glogits_p.data) g *= static_cast<T>(lambda_pri);
  for (auto& g : glogits_s.data) g *= static_cast<T>(lambda_sub);
  Tensor<T> gcodes = model.primary.Backward(glogits_p);
  Tensor<T> gcodes_s = model.sub_linear->Backward(glogits_s);
  for (size_t i = 0; i < gcodes.data.size(); ++i) gcodes.data[i] += gcodes_s.data[i];
  if (ring_enabled) {
    MaybeInitRing(model, codes);
    Tensor<T> gring;
    T gr = T(0);
    rep.ring = RingLoss(codes, model.ring_radius.data[0],
                        static_cast<T>(ring_lambda), &gring, &gr);
    for (size_t i = 0; i < gcodes.data.size(); ++i) gcodes.data[i] += gring.data[i];
    model.g_ring_radius.data[0] += gr;
  }
  rep.total = lambda_pri * rep.primary + lambda_sub * rep.subsidiary + rep.ring;
  train_detail::CheckFinite(rep.total, "mtl step");
  model.encoder.Backward(gcodes);

  FreezeMask none{};
  opt.Step(params, [&](const std::string& n) {
    return IsFrozenParam(n, none, ring_enabled);
  });
  return rep;
}

// Merged-output step: one cross-entropy over bona-fide + subsidiary levels.
template <typename T>
LossReport StepModifiedMtl(Model<T>& model, AmsGrad<T>& opt, const Tensor<T>& x,
                           const std::vector<int>& merged_labels,
                           bool ring_enabled, double ring_lambda) {
  SPOOFDET_CHECK(model.merged != nullptr, "modified mtl needs the merged layer");
  ParamList<T> params = model.Params();
  ZeroGrads(params);
  Tensor<T> codes = model.encoder.Forward(x, /*train=*/true);
  Tensor<T> logits = model.merged->Forward(codes, /*train=*/true);

  LossReport rep;
  Tensor<T> glogits;
  rep.subsidiary = CceLoss(logits, merged_labels, &glogits);
  Tensor<T> gcodes = model.merged->Backward(glogits);
  if (ring_enabled) {
    MaybeInitRing(model, codes);
    Tensor<T> gring;
    T gr = T(0);
    rep.ring = RingLoss(codes, model.ring_radius.data[0],
                        static_cast<T>(ring_lambda), &gring, &gr);
    for (size_t i = 0; i < gcodes.data.size(); ++i) gcodes.data[i] += gring.data[i];
    model.g_ring_radius.data[0] += gr;
  }
  rep.total = rep.subsidiary + rep.ring;
  train_detail::CheckFinite(rep.total, "merged step");
  model.encoder.Backward(gcodes);

  FreezeMask none{};
  opt.Step(params, [&](const std::string& n) {
    return IsFrozenParam(n, none, ring_enabled);
  });
  return rep;
}

// --------------------------------------------------------------------------
// Full training loop.
// --------------------------------------------------------------------------

template <typename T>
struct TrainObserver {
  virtual ~TrainObserver() = default;
  virtual void OnStep(const LossReport&) {}
  virtual void OnEpochStart(int64_t /*epoch*/, int /*phase*/, Model<T>&) {}
  virtual void OnEpochEnd(int64_t /*epoch*/, int /*phase*/, Model<T>&) {}
};

struct TrainingResult {
  std::string final_checkpoint;
  std::string loss_csv;
  int64_t steps = 0;
  LossReport last;
};

template <typename T>
TrainingResult RunTraining(const std::vector<TrialEntry>& entries,
                           const FeatureCache& features,
                           const TrainingConfig& cfg,
                           const std::string& out_dir, Model<T>* model_out,
                           TrainObserver<T>* observer = nullptr) {
  namespace fs = std::filesystem;
  SPOOFDET_CHECK(features.size() == static_cast<int64_t>(entries.size()),
                 "feature cache does not match entries");
  if (cfg.scheme != Scheme::kBaseline && !cfg.category.has_value())
    throw UsageError("training scheme '" + std::string(SchemeName(cfg.scheme)) +
                     "' requires a subsidiary category");
  if (cfg.scheme == Scheme::kBaseline && cfg.category.has_value())
    throw UsageError("baseline training does not take a category");

  fs::create_directories(out_dir);
  Model<T>& model = *model_out;
  model.Init(cfg.encoder, cfg.scheme, cfg.category, cfg.subsidiary_hidden,
             cfg.seed);
  AmsGrad<T> opt(cfg.optimizer);

  std::string csv_path = (fs::path(out_dir) / "loss_curve.csv").string();
  std::ofstream csv(csv_path);
  if (!csv) throw DataError("cannot write loss curve: " + csv_path);
  csv << "step,phase,loss_primary,loss_subsidiary,loss_ring,loss_orth\n";
  csv << std::setprecision(9);

  LabelScheme label_scheme = cfg.scheme == Scheme::kCan ? LabelScheme::kCan
                             : cfg.scheme == Scheme::kMtl
                                 ? LabelScheme::kMtl
                                 : LabelScheme::kModifiedMtl;

  TrainingResult result;
  result.loss_csv = csv_path;
  int64_t global_step = 0;
  int prev_phase = 0;
  std::string last_ckpt;

  for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    int phase = cfg.scheme == Scheme::kCan ? PhaseForEpoch(epoch, cfg.phases) : 0;
    if (cfg.scheme == Scheme::kCan && phase != prev_phase) {
      // Fresh moment state for groups that just became trainable, so stale
      // statistics from a frozen stretch do not distort the first updates.
      if (phase == 1 && prev_phase != 0) {
        opt.ResetGroup("pri.");
        if (prev_phase == 2) opt.ResetGroup("enc.");
      } else if (phase == 2) {
        opt.ResetGroup("sub.");
      } else if (phase == 3) {
        opt.ResetGroup("enc.");
      }
      prev_phase = phase;
    }
    if (observer != nullptr) observer->OnEpochStart(epoch, phase, model);

    EpochPlan plan =
        BalancedEpochPlan(entries, DeriveSeed(cfg.seed, /*stream=*/2,
                                              static_cast<uint64_t>(epoch)));
    std::vector<int64_t> order = plan.entry_indices;
    // Phase 2 on a replay category sees spoof-only batches (bona-fide has
    // no subsidiary label there).
    if (cfg.scheme == Scheme::kCan && phase == 2 &&
        KindOf(*cfg.category) == CategoryKind::kReplay) {
      std::vector<int64_t> kept;
      for (int64_t idx : order)
        if (entries[static_cast<size_t>(idx)].is_spoof()) kept.push_back(idx);
      order = std::move(kept);
      if (order.empty())
        throw DataError("no spoof entries left for the subsidiary phase");
    }

    Rng crop_rng(DeriveSeed(cfg.seed, /*stream=*/3, static_cast<uint64_t>(epoch)));
    int64_t B = cfg.optimizer.batch_size;
    for (int64_t start = 0; start < static_cast<int64_t>(order.size()); start += B) {
      int64_t end = std::min<int64_t>(start + B, static_cast<int64_t>(order.size()));
      std::vector<Spectrogram> crops;
      std::vector<int> keys, sub_labels;
      crops.reserve(static_cast<size_t>(end - start));
      for (int64_t i = start; i < end; ++i) {
        int64_t idx = order[static_cast<size_t>(i)];
        const TrialEntry& e = entries[static_cast<size_t>(idx)];
        crops.push_back(RandomCrop(features.Get(idx), cfg.crop_frames, crop_rng));
        keys.push_back(e.is_spoof() ? 1 : 0);
        if (cfg.scheme != Scheme::kBaseline) {
          std::optional<int> lab = SubsidiaryLabel(e, *cfg.category, label_scheme);
          // CAN replay phases already excluded unlabeled entries above;
          // environment categories label every entry.
          sub_labels.push_back(lab.value_or(-1));
        }
      }
      Tensor<T> x = train_detail::BatchFromCrops<T>(crops);

      LossReport rep;
      switch (cfg.scheme) {
        case Scheme::kBaseline:
          rep = StepBaseline(model, opt, x, keys, cfg.ring, cfg.ring_lambda);
          break;
        case Scheme::kCan:
          if (phase == 1) {
            rep = StepBaseline(model, opt, x, keys, cfg.ring, cfg.ring_lambda);
          } else if (phase == 2) {
            rep = StepCanPhase2(model, opt, x, sub_labels, cfg.can_unfrozen_phase2);
          } else {
            rep = StepCanPhase3(model, opt, x, keys, cfg.orth_alpha);
          }
          break;
        case Scheme::kMtl:
          rep = StepMtl(model, opt, x, keys, sub_labels, cfg.lambda_pri,
                        cfg.lambda_sub, cfg.ring, cfg.ring_lambda);
          break;
        case Scheme::kModifiedMtl:
          rep = StepModifiedMtl(model, opt, x, sub_labels, cfg.ring,
                                cfg.ring_lambda);
          break;
      }
      rep.step = global_step++;
      rep.phase = phase;
      csv << rep.step << "," << rep.phase << "," << rep.primary << ","
          << rep.subsidiary << "," << rep.ring << "," << rep.orth << "\n";
      if (observer != nullptr) observer->OnStep(rep);
      result.last = rep;
    }

    std::string ckpt =
        (fs::path(out_dir) /
         (cfg.checkpoint_keep_all
              ? "checkpoint_epoch" + std::to_string(epoch) + ".bin"
              : std::string("checkpoint_last.bin")))
            .string();
    SaveCheckpoint(ckpt, model, &opt, epoch, cfg.seed);
    last_ckpt = ckpt;
    if (observer != nullptr) observer->OnEpochEnd(epoch, phase, model);
  }
  csv.close();

  std::string final_path = (fs::path(out_dir) / "checkpoint_final.bin").string();
  SaveCheckpoint(final_path, model, &opt,
                 cfg.epochs > 0 ? cfg.epochs - 1 : 0, cfg.seed);
  result.final_checkpoint = final_path;
  result.steps = global_step;
  return result;
}

// Codes for a list of entries, full frames, inference mode.  Reentrant
// across utterances.
template <typename T>
Tensor<T> ExtractCodes(Model<T>& model, const std::vector<TrialEntry>& entries,
                       const FeatureCache& features, int threads) {
  int64_t n = static_cast<int64_t>(entries.size());
  Tensor<T> codes({n, model.enc_cfg.code_dim});
  ParallelFor(n, threads, [&](int64_t i) {
    const Spectrogram& s = FullFrames(features.Get(i));
    Tensor<T> x({1, 1, s.num_frames, kNumBins});
    for (int64_t k = 0; k < s.num_frames * kNumBins; ++k)
      x.ptr()[k] = static_cast<T>(s.values[static_cast<size_t>(k)]);
    Tensor<T> c = model.encoder.Forward(x, /*train=*/false);
    std::copy(c.data.begin(), c.data.end(),
              codes.data.begin() + static_cast<size_t>(i * model.enc_cfg.code_dim));
  });
  return codes;
}

}  // namespace spoofdet

#endif  // SPOOFDET_TRAINING_HPP_
