// spoofdet/config.hpp
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
// Experiment configuration: flat `key = value` text with one [section]
// per module.  Command-line flags override file values.  Defaults follow
// the reference experimental settings (AMSGrad, lr 0.0005, weight decay
// 0.0001, batch 32, lambda_sub 0.5, phase proportions 3:1:1, ring weight
// equal to the cross-entropy weight).

#ifndef SPOOFDET_CONFIG_HPP_
#define SPOOFDET_CONFIG_HPP_

#include <map>
#include <string>

#include "spoofdet/training.hpp"

namespace spoofdet {

using ConfigMap = std::map<std::string, std::string>;  // "section.key" -> value

ConfigMap ParseConfigText(const std::string& text);
ConfigMap LoadConfigFile(const std::string& path);

// Applies one "section.key=value" override.
void ApplyOverride(ConfigMap& cfg, const std::string& assignment);

struct ExperimentConfig {
  // [corpus]
  std::string train_protocol;
  std::string train_audio;
  std::string dev_protocol;
  std::string dev_audio;
  // [features]
  int64_t crop_frames = 120;
  // [network] + [training]
  TrainingConfig training;
  // [output]
  std::string out_dir = "run";

  std::string ResolvedText() const;
  uint64_t ConfigHash() const { return Fnv1a64(ResolvedText()); }
};

// Builds and validates a typed config.  Unknown keys are usage errors, as
// are contradictory settings (a category with baseline mode, an
// environment category with the merged scheme, ...).  Relative corpus
// paths are resolved against $SPOOFDET_DATA_ROOT when it is set.
ExperimentConfig BuildExperimentConfig(const ConfigMap& map);

// Runs the training command end to end: loads the corpus, extracts
// features, trains, writes loss curve + checkpoints + manifest.json +
// config.resolved.ini under out_dir.
TrainingResult RunExperiment(const ExperimentConfig& cfg);

}  // namespace spoofdet

#endif  // SPOOFDET_CONFIG_HPP_
