// spoofdet/evaluation.hpp
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

#ifndef SPOOFDET_EVALUATION_HPP_
#define SPOOFDET_EVALUATION_HPP_

#include <string>
#include <vector>

#include "spoofdet/corpus.hpp"
#include "spoofdet/losses.hpp"
#include "spoofdet/network.hpp"
#include "spoofdet/optim.hpp"
#include "spoofdet/training.hpp"

namespace spoofdet {

struct TrialScore {
  std::string utt_id;
  double score = 0.0;  // higher = more bona-fide
};

struct EvalResult {
  double eer = 0.0;        // fraction
  double threshold = 0.0;  // operating point of the crossing
  int64_t n_target = 0;     // bona-fide trials
  int64_t n_nontarget = 0;  // spoof trials
};

// EER at the crossing of FAR(t) = fraction of spoof scores >= t and
// FRR(t) = fraction of bona-fide scores < t, evaluated over thresholds at
// midpoints between consecutive distinct scores plus the two infinities,
// with linear interpolation between adjacent operating points.
EvalResult ComputeEer(const std::vector<std::pair<double, Key>>& scored);

// Score file: "<utt_id> <score>\n" with six decimal places.
void WriteScoreFile(const std::string& path, const std::vector<TrialScore>& scores);
std::vector<TrialScore> ReadScoreFile(const std::string& path);

void WriteEerSummary(const std::string& path, const EvalResult& r);

// Renders a loss-curve CSV (step,phase,...) to an SVG line chart with
// phase boundaries marked.
void PlotCurvesSvg(const std::string& csv_path, const std::string& out_path);

struct ProbeResult {
  Category category;
  std::vector<double> loss_curve;  // per-step training loss
  double final_accuracy = 0.0;     // held-out accuracy
  double chance_level = 0.0;       // 1 / n_classes
  int n_classes = 0;
};

struct ProbeConfig {
  int64_t n_steps = 500;
  int64_t hidden = 128;
  uint64_t seed = 7;
  OptimizerConfig optimizer;
};

void WriteProbeReport(const std::string& path, const ProbeResult& r);

// ---------------------------------------------------------------------------
// Scoring (templated over the network scalar).
// ---------------------------------------------------------------------------

// Single-utterance detection score on the full frame sequence.  Under the
// merged scheme the raw bona-fide node value is the score; otherwise the
// log-softmax bona-fide component.
template <typename T>
double ScoreUtterance(Model<T>& model, const Spectrogram& spec) {
  const Spectrogram& s = FullFrames(spec);
  Tensor<T> x({1, 1, s.num_frames, kNumBins});
  for (int64_t k = 0; k < s.num_frames * kNumBins; ++k)
    x.ptr()[k] = static_cast<T>(s.values[static_cast<size_t>(k)]);
  Tensor<T> codes = model.encoder.Forward(x, /*train=*/false);
  if (model.scheme == Scheme::kModifiedMtl) {
    Tensor<T> logits = model.merged->Forward(codes, /*train=*/false);
    return static_cast<double>(logits.data[0]);
  }
  Tensor<T> logits = model.primary.Forward(codes, /*train=*/false);
  return LogSoftmaxAt(logits.ptr(), logits.dim(1), 0);
}

template <typename T>
std::vector<TrialScore> ScoreEntries(Model<T>& model,
                                     const std::vector<TrialEntry>& entries,
                                     const FeatureCache& features, int threads) {
  std::vector<TrialScore> out(entries.size());
  ParallelFor(static_cast<int64_t>(entries.size()), threads, [&](int64_t i) {
    out[static_cast<size_t>(i)].utt_id = entries[static_cast<size_t>(i)].utt_id;
    out[static_cast<size_t>(i)].score = ScoreUtterance(model, features.Get(i));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Frozen-encoder subsidiary probe: trains a fresh subsidiary classifier on
// precomputed codes and reports the loss trajectory plus held-out accuracy.
// The checkpointed model is never mutated.
// ---------------------------------------------------------------------------

template <typename T>
ProbeResult ProbeSubsidiaryOnCodes(const Tensor<T>& train_codes,
                                   const std::vector<int>& train_labels,
                                   const Tensor<T>& heldout_codes,
                                   const std::vector<int>& heldout_labels,
                                   Category category, int n_classes,
                                   const ProbeConfig& cfg) {
  SPOOFDET_CHECK(train_codes.dim(0) ==
                     static_cast<int64_t>(train_labels.size()),
                 "probe label count");
  if (train_labels.empty()) throw DataError("no labeled samples for the probe");
  int64_t n = train_codes.dim(0), dim = train_codes.dim(1);

  ProbeResult result;
  result.category = category;
  result.n_classes = n_classes;
  result.chance_level = 1.0 / static_cast<double>(n_classes);

  CanSubsidiaryHead<T> head;
  Rng init_rng(DeriveSeed(cfg.seed, /*stream=*/11));
  head.Init(dim, cfg.hidden, n_classes, 0.01, init_rng);
  ParamList<T> params;
  head.Params("sub", params);
  AmsGrad<T> opt(cfg.optimizer);

  Rng batch_rng(DeriveSeed(cfg.seed, /*stream=*/12));
  std::vector<int64_t> order(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  int64_t cursor = n;  // force a reshuffle on the first step

  int64_t B = std::min<int64_t>(cfg.optimizer.batch_size, n);
  for (int64_t step = 0; step < cfg.n_steps; ++step) {
    if (cursor + B > n) {
      batch_rng.Shuffle(order);
      cursor = 0;
    }
    Tensor<T> xb({B, dim});
    std::vector<int> yb(static_cast<size_t>(B));
    for (int64_t b = 0; b < B; ++b) {
      int64_t src = order[static_cast<size_t>(cursor + b)];
      std::copy(train_codes.ptr() + src * dim, train_codes.ptr() + (src + 1) * dim,
                xb.ptr() + b * dim);
      yb[static_cast<size_t>(b)] = train_labels[static_cast<size_t>(src)];
    }
    cursor += B;
    ZeroGrads(params);
    Tensor<T> logits = head.Forward(xb, /*train=*/true);
    Tensor<T> glogits;
    double loss = CceLoss(logits, yb, &glogits);
    head.Backward(glogits);
    opt.Step(params);
    result.loss_curve.push_back(loss);
  }

  // Held-out accuracy.
  int64_t correct = 0, total = heldout_codes.dim(0);
  if (total > 0) {
    Tensor<T> logits = head.Forward(const_cast<Tensor<T>&>(heldout_codes), false);
    for (int64_t i = 0; i < total; ++i) {
      const T* row = logits.ptr() + i * n_classes;
      int best = 0;
      for (int k = 1; k < n_classes; ++k)
        if (row[k] > row[best]) best = k;
      if (best == heldout_labels[static_cast<size_t>(i)]) ++correct;
    }
    result.final_accuracy = static_cast<double>(correct) / static_cast<double>(total);
  }
  return result;
}

// Convenience wrapper: extracts codes from entries with the frozen encoder,
// assembles probe labels for `category` (3-way levels; spoof-only when the
// category is replay-kind) and runs the probe.
template <typename T>
ProbeResult ProbeSubsidiary(Model<T>& model,
                            const std::vector<TrialEntry>& train_entries,
                            const FeatureCache& train_features,
                            const std::vector<TrialEntry>& heldout_entries,
                            const FeatureCache& heldout_features,
                            Category category, const ProbeConfig& cfg,
                            int threads) {
  Tensor<T> all_train = ExtractCodes(model, train_entries, train_features, threads);
  Tensor<T> all_held = ExtractCodes(model, heldout_entries, heldout_features, threads);
  int64_t dim = model.enc_cfg.code_dim;

  auto filter = [&](const std::vector<TrialEntry>& entries, const Tensor<T>& codes,
                    Tensor<T>* kept_codes, std::vector<int>* kept_labels) {
    std::vector<std::pair<int64_t, int>> kept;
    for (int64_t i = 0; i < static_cast<int64_t>(entries.size()); ++i) {
      std::optional<int> lab =
          SubsidiaryLabel(entries[static_cast<size_t>(i)], category, LabelScheme::kCan);
      if (lab.has_value()) kept.push_back({i, *lab});
    }
    kept_codes->Resize({static_cast<int64_t>(kept.size()), dim});
    kept_labels->clear();
    for (int64_t k = 0; k < static_cast<int64_t>(kept.size()); ++k) {
      std::copy(codes.ptr() + kept[static_cast<size_t>(k)].first * dim,
                codes.ptr() + (kept[static_cast<size_t>(k)].first + 1) * dim,
                kept_codes->ptr() + k * dim);
      kept_labels->push_back(kept[static_cast<size_t>(k)].second);
    }
  };
  Tensor<T> train_codes, held_codes;
  std::vector<int> train_labels, held_labels;
  filter(train_entries, all_train, &train_codes, &train_labels);
  filter(heldout_entries, all_held, &held_codes, &held_labels);
  if (train_labels.empty())
    throw DataError("no labeled samples for probing category " +
                    std::string(CategoryName(category)));
  return ProbeSubsidiaryOnCodes(train_codes, train_labels, held_codes,
                                held_labels, category,
                                NumSubsidiaryClasses(category, LabelScheme::kCan),
                                cfg);
}

}  // namespace spoofdet

#endif  // SPOOFDET_EVALUATION_HPP_
