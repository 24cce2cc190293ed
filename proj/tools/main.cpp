// spoofdet CLI: corpus preparation, synthesis, training, scoring, probing
// and plotting, driven by a config file with flag overrides.
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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spoofdet/checkpoint.hpp"
#include "spoofdet/config.hpp"
#include "spoofdet/evaluation.hpp"
#include "spoofdet/synth.hpp"

namespace fs = std::filesystem;
using namespace spoofdet;

namespace {

std::array<double, 3> ParseTriple(const std::string& csv, const std::string& flag) {
  std::array<double, 3> out{};
  std::istringstream iss(csv);
  std::string tok;
  int i = 0;
  while (std::getline(iss, tok, ',')) {
    if (i >= 3) throw UsageError(flag + " needs exactly three comma-separated values");
    out[static_cast<size_t>(i++)] = std::stod(Trim(tok));
  }
  if (i != 3) throw UsageError(flag + " needs exactly three comma-separated values");
  return out;
}

Category RequireCategory(const std::string& name) {
  auto c = CategoryFromName(name);
  if (!c.has_value())
    throw UsageError("unknown category '" + name +
                     "' (room_size, reverberation, talker_to_asv, "
                     "attacker_to_talker, replay_quality)");
  return *c;
}

std::vector<std::pair<double, Key>> JoinScoresWithKeys(
    const std::vector<TrialScore>& scores, const std::vector<TrialEntry>& entries) {
  std::map<std::string, Key> keys;
  for (const auto& e : entries) keys[e.utt_id] = e.key;
  std::vector<std::pair<double, Key>> joined;
  joined.reserve(scores.size());
  for (const auto& s : scores) {
    auto it = keys.find(s.utt_id);
    if (it == keys.end())
      throw DataError("utterance " + s.utt_id + " not present in the protocol");
    joined.push_back({s.score, it->second});
  }
  return joined;
}

int Run(int argc, char** argv) {
  CLI::App app{"replay-attack spoofing detection experiments"};
  app.require_subcommand(1);

  // -------------------------------------------------------------- synth
  auto* synth = app.add_subcommand("synth", "generate the synthetic toy corpus");
  std::string synth_out;
  int n_train = 4, n_dev = 2, n_eval = 1;
  double duration = 1.2;
  uint64_t synth_seed = 1;
  int synth_threads = 0;
  AttributeStrengths strengths;
  std::string f0_csv, reverb_csv, amp_csv, noise_csv, lp_csv, artifact_csv;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--n-train", n_train, "utterances per cell, training subset");
  synth->add_option("--n-dev", n_dev, "utterances per cell, development subset");
  synth->add_option("--n-eval", n_eval, "utterances per cell, evaluation subset");
  synth->add_option("--duration", duration, "utterance duration in seconds");
  synth->add_option("--seed", synth_seed, "master seed");
  synth->add_option("--threads", synth_threads, "worker threads (0 = auto)");
  synth->add_option("--f0", f0_csv, "room-size F0 levels, Hz (a,b,c)");
  synth->add_option("--f0-jitter", strengths.f0_jitter, "relative F0 band width");
  synth->add_option("--reverb-tails", reverb_csv, "reverberation tails, s (a,b,c)");
  synth->add_option("--amplitudes", amp_csv, "talker-to-ASV levels (a,b,c)");
  synth->add_option("--noise-levels", noise_csv, "attacker-to-talker noise (A,B,C)");
  synth->add_option("--lowpass", lp_csv, "replay-quality cutoffs, Hz (A,B,C)");
  synth->add_option("--artifact-hz", artifact_csv, "replay artifact components, Hz");
  synth->add_option("--artifact-level", strengths.artifact_level,
                    "replay artifact level");

  // ------------------------------------------------------------ prepare
  auto* prepare = app.add_subcommand("prepare", "validate a corpus and write its index");
  std::string prep_protocol, prep_audio, prep_out;
  bool prep_features = false;
  int prep_threads = 0;
  prepare->add_option("--protocol", prep_protocol, "protocol file")->required();
  prepare->add_option("--audio-root", prep_audio, "audio root directory")->required();
  prepare->add_option("--out", prep_out, "output directory")->required();
  prepare->add_flag("--write-features", prep_features, "also cache spectrograms");
  prepare->add_option("--threads", prep_threads, "worker threads (0 = auto)");

  // -------------------------------------------------------------- train
  auto* train = app.add_subcommand("train", "train a detector");
  std::string train_config;
  std::vector<std::string> overrides;
  std::string ov_mode, ov_category, ov_ring, ov_out;
  int64_t ov_epochs = -1;
  int64_t ov_seed = -1;
  train->add_option("-c,--config", train_config, "config file");
  train->add_option("--set", overrides, "override: section.key=value")->take_all();
  train->add_option("--mode", ov_mode, "baseline/can/mtl/modified_mtl");
  train->add_option("--category", ov_category, "subsidiary category");
  train->add_option("--ring", ov_ring, "on/off");
  train->add_option("--epochs", ov_epochs, "training epochs");
  train->add_option("--seed", ov_seed, "master seed");
  train->add_option("--out", ov_out, "run output directory");

  // -------------------------------------------------------------- score
  auto* score = app.add_subcommand("score", "score a protocol with a checkpoint");
  std::string score_ckpt, score_protocol, score_audio, score_out;
  int score_threads = 0;
  score->add_option("--checkpoint", score_ckpt, "checkpoint file")->required();
  score->add_option("--protocol", score_protocol, "protocol file")->required();
  score->add_option("--audio-root", score_audio, "audio root directory")->required();
  score->add_option("--out", score_out, "score file to write")->required();
  score->add_option("--threads", score_threads, "worker threads (0 = auto)");

  // ---------------------------------------------------------------- eer
  auto* eer = app.add_subcommand("eer", "equal error rate from a score file");
  std::string eer_scores, eer_protocol, eer_out;
  eer->add_option("--scores", eer_scores, "score file")->required();
  eer->add_option("--protocol", eer_protocol, "protocol file with keys")->required();
  eer->add_option("--out", eer_out, "summary file to write");

  // -------------------------------------------------------------- probe
  auto* probe = app.add_subcommand(
      "probe", "train a fresh subsidiary classifier on frozen codes");
  std::string probe_ckpt, probe_protocol, probe_audio, probe_cat_name, probe_out;
  std::string probe_heldout_protocol, probe_heldout_audio;
  ProbeConfig probe_cfg;
  int probe_threads = 0;
  probe->add_option("--checkpoint", probe_ckpt, "checkpoint file")->required();
  probe->add_option("--protocol", probe_protocol, "probe training protocol")->required();
  probe->add_option("--audio-root", probe_audio, "audio root directory")->required();
  probe->add_option("--category", probe_cat_name, "subsidiary category")->required();
  probe->add_option("--out", probe_out, "probe report CSV")->required();
  probe->add_option("--heldout-protocol", probe_heldout_protocol,
                    "held-out protocol (default: 20% split)");
  probe->add_option("--heldout-audio", probe_heldout_audio, "held-out audio root");
  probe->add_option("--steps", probe_cfg.n_steps, "probe training steps");
  probe->add_option("--probe-hidden", probe_cfg.hidden, "probe hidden width");
  probe->add_option("--probe-seed", probe_cfg.seed, "probe seed");
  probe->add_option("--probe-lr", probe_cfg.optimizer.learning_rate,
                    "probe learning rate");
  probe->add_option("--threads", probe_threads, "worker threads (0 = auto)");

  // --------------------------------------------------------------- plot
  auto* plot = app.add_subcommand("plot", "render a loss-curve CSV to SVG");
  std::string plot_csv, plot_out;
  plot->add_option("--csv", plot_csv, "loss curve CSV")->required();
  plot->add_option("--out", plot_out, "SVG file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (synth->parsed()) {
    SynthSpec spec;
    spec.duration_s = duration;
    spec.seed = synth_seed;
    if (!f0_csv.empty()) strengths.f0_hz = ParseTriple(f0_csv, "--f0");
    if (!reverb_csv.empty()) strengths.reverb_tail_s = ParseTriple(reverb_csv, "--reverb-tails");
    if (!amp_csv.empty()) strengths.amplitude = ParseTriple(amp_csv, "--amplitudes");
    if (!noise_csv.empty()) strengths.noise_level = ParseTriple(noise_csv, "--noise-levels");
    if (!lp_csv.empty()) strengths.lowpass_hz = ParseTriple(lp_csv, "--lowpass");
    if (!artifact_csv.empty()) strengths.artifact_hz = ParseTriple(artifact_csv, "--artifact-hz");
    spec.strengths = strengths;
    struct SubsetPlan { const char* name; int n; };
    for (const SubsetPlan& sub : {SubsetPlan{"train", n_train}, SubsetPlan{"dev", n_dev},
                                  SubsetPlan{"eval", n_eval}}) {
      if (sub.n <= 0) continue;
      spec.n_per_cell = sub.n;
      SynthResult r = SynthCorpus(spec, synth_out, sub.name, synth_threads);
      std::cout << sub.name << ": " << r.n_bona_fide << " bona-fide + "
                << r.n_spoof << " spoof -> " << r.protocol_path << "\n";
    }
    return kExitOk;
  }

  if (prepare->parsed()) {
    std::vector<TrialEntry> entries = LoadCorpus(prep_protocol, prep_audio);
    CorpusCounts counts = CountKeys(entries);
    fs::create_directories(prep_out);
    nlohmann::json index;
    index["protocol"] = prep_protocol;
    index["audio_root"] = prep_audio;
    index["n_bona_fide"] = counts.bona_fide;
    index["n_spoof"] = counts.spoof;
    nlohmann::json hist = nlohmann::json::object();
    for (Category c : kAllCategories) {
      std::array<int64_t, 4> buckets{};
      for (const auto& e : entries) {
        auto lab = SubsidiaryLabel(e, c, LabelScheme::kMtl);
        buckets[static_cast<size_t>(*lab)]++;
      }
      hist[CategoryName(c)] = buckets;
    }
    index["level_histograms"] = hist;
    std::ofstream f(fs::path(prep_out) / "corpus_index.json");
    f << index.dump(2) << "\n";
    if (prep_features) {
      fs::create_directories(fs::path(prep_out) / "features");
      ParallelFor(static_cast<int64_t>(entries.size()), prep_threads, [&](int64_t i) {
        const TrialEntry& e = entries[static_cast<size_t>(i)];
        Spectrogram s = StftMagnitude(ReadAudio(e.audio_path));
        WriteFeatureFile(
            (fs::path(prep_out) / "features" / (e.utt_id + ".spec")).string(),
            e.utt_id, s);
      });
    }
    std::cout << "indexed " << counts.bona_fide << " bona-fide + " << counts.spoof
              << " spoof entries\n";
    return kExitOk;
  }

  if (train->parsed()) {
    ConfigMap map;
    if (!train_config.empty()) map = LoadConfigFile(train_config);
    for (const auto& ov : overrides) ApplyOverride(map, ov);
    if (!ov_mode.empty()) map["training.mode"] = ov_mode;
    if (!ov_category.empty()) map["training.category"] = ov_category;
    if (!ov_ring.empty()) map["training.ring"] = ov_ring;
    if (ov_epochs >= 0) map["training.epochs"] = std::to_string(ov_epochs);
    if (ov_seed >= 0) map["training.seed"] = std::to_string(ov_seed);
    if (!ov_out.empty()) map["output.dir"] = ov_out;
    ExperimentConfig cfg = BuildExperimentConfig(map);
    TrainingResult r = RunExperiment(cfg);
    std::cout << "trained " << r.steps << " steps; final checkpoint at "
              << r.final_checkpoint << "\n";
    return kExitOk;
  }

  if (score->parsed()) {
    Model<float> model;
    LoadModelFromCheckpoint(score_ckpt, &model);
    std::vector<TrialEntry> entries = LoadCorpus(score_protocol, score_audio);
    FeatureCache cache = FeatureCache::FromAudio(entries, score_threads);
    std::vector<TrialScore> scores = ScoreEntries(model, entries, cache, score_threads);
    WriteScoreFile(score_out, scores);
    std::cout << "scored " << scores.size() << " trials -> " << score_out << "\n";
    return kExitOk;
  }

  if (eer->parsed()) {
    std::vector<TrialScore> scores = ReadScoreFile(eer_scores);
    std::vector<TrialEntry> entries = LoadCorpus(eer_protocol, "");
    EvalResult r = ComputeEer(JoinScoresWithKeys(scores, entries));
    std::cout << "EER " << r.eer * 100.0 << "% at threshold " << r.threshold
              << " (" << r.n_target << " bona-fide, " << r.n_nontarget
              << " spoof)\n";
    if (!eer_out.empty()) WriteEerSummary(eer_out, r);
    return kExitOk;
  }

  if (probe->parsed()) {
    Category category = RequireCategory(probe_cat_name);
    Model<float> model;
    LoadModelFromCheckpoint(probe_ckpt, &model);
    std::vector<TrialEntry> entries = LoadCorpus(probe_protocol, probe_audio);

    std::vector<TrialEntry> train_entries, heldout_entries;
    if (!probe_heldout_protocol.empty()) {
      train_entries = entries;
      heldout_entries = LoadCorpus(
          probe_heldout_protocol,
          probe_heldout_audio.empty() ? probe_audio : probe_heldout_audio);
    } else {
      // Deterministic 80/20 split.
      Rng rng(DeriveSeed(probe_cfg.seed, /*stream=*/13));
      std::vector<int64_t> order(entries.size());
      for (size_t i = 0; i < entries.size(); ++i) order[i] = static_cast<int64_t>(i);
      rng.Shuffle(order);
      size_t n_held = entries.size() / 5;
      for (size_t i = 0; i < order.size(); ++i)
        (i < n_held ? heldout_entries : train_entries)
            .push_back(entries[static_cast<size_t>(order[i])]);
    }
    FeatureCache train_cache = FeatureCache::FromAudio(train_entries, probe_threads);
    FeatureCache held_cache = FeatureCache::FromAudio(heldout_entries, probe_threads);
    ProbeResult r = ProbeSubsidiary(model, train_entries, train_cache,
                                    heldout_entries, held_cache, category,
                                    probe_cfg, probe_threads);
    WriteProbeReport(probe_out, r);
    std::cout << "probe " << CategoryName(category) << ": final loss "
              << (r.loss_curve.empty() ? 0.0 : r.loss_curve.back())
              << ", held-out accuracy " << r.final_accuracy << " (chance "
              << r.chance_level << ") -> " << probe_out << "\n";
    return kExitOk;
  }

  if (plot->parsed()) {
    PlotCurvesSvg(plot_csv, plot_out);
    std::cout << "wrote " << plot_out << "\n";
    return kExitOk;
  }

  throw UsageError("no subcommand given");
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
