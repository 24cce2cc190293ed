// spoofdet/training.cpp
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

#include "spoofdet/config.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace spoofdet {

TrainingResult RunExperiment(const ExperimentConfig& cfg) {
  if (cfg.train_protocol.empty())
    throw UsageError("corpus.train_protocol is required for training");
  if (cfg.train_audio.empty())
    throw UsageError("corpus.train_audio is required for training");

  std::vector<TrialEntry> entries = LoadCorpus(cfg.train_protocol, cfg.train_audio);
  CorpusCounts counts = CountKeys(entries);
  std::cerr << "corpus: " << counts.bona_fide << " bona-fide, " << counts.spoof
            << " spoof\n";
  FeatureCache cache = FeatureCache::FromAudio(entries, cfg.training.threads);

  fs::create_directories(cfg.out_dir);
  std::string resolved = cfg.ResolvedText();
  {
    std::ofstream f(fs::path(cfg.out_dir) / "config.resolved.ini");
    f << resolved;
  }

  Model<float> model;
  TrainingResult result =
      RunTraining<float>(entries, cache, cfg.training, cfg.out_dir, &model);

  nlohmann::json manifest;
  manifest["config_hash"] = cfg.ConfigHash();
  manifest["seed"] = cfg.training.seed;
  manifest["fingerprint"] = model.Fingerprint();
  manifest["threads"] = cfg.training.threads;
  manifest["n_entries"] = entries.size();
  manifest["steps"] = result.steps;
  manifest["final_checkpoint"] = result.final_checkpoint;
  manifest["loss_csv"] = result.loss_csv;
  {
    std::ofstream f(fs::path(cfg.out_dir) / "manifest.json");
    f << manifest.dump(2) << "\n";
  }
  return result;
}

}  // namespace spoofdet
