// spoofdet/config.cpp
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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace spoofdet {

ConfigMap ParseConfigText(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line, section;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::string s = Trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw UsageError("config line " + std::to_string(line_number) +
                         ": malformed section header: " + s);
      section = Trim(s.substr(1, s.size() - 2));
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(line_number) +
                       ": expected key = value: " + s);
    std::string key = Trim(s.substr(0, eq));
    std::string value = Trim(s.substr(eq + 1));
    if (key.empty())
      throw UsageError("config line " + std::to_string(line_number) +
                       ": empty key");
    out[section.empty() ? key : section + "." + key] = value;
  }
  return out;
}

ConfigMap LoadConfigFile(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ParseConfigText(ss.str());
}

void ApplyOverride(ConfigMap& cfg, const std::string& assignment) {
  size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw UsageError("override must be section.key=value: " + assignment);
  std::string key = Trim(assignment.substr(0, eq));
  if (key.find('.') == std::string::npos)
    throw UsageError("override key must be section.key: " + assignment);
  cfg[key] = Trim(assignment.substr(eq + 1));
}

namespace {

class ConfigReader {
 public:
  explicit ConfigReader(const ConfigMap& map) : map_(map) {}

  std::string GetString(const std::string& key, const std::string& dflt) {
    seen_.insert(key);
    auto it = map_.find(key);
    return it == map_.end() ? dflt : it->second;
  }

  int64_t GetInt(const std::string& key, int64_t dflt) {
    std::string v = GetString(key, "");
    if (v.empty()) return dflt;
    try {
      size_t pos = 0;
      int64_t x = std::stoll(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw UsageError("config key " + key + " must be an integer, got: " + v);
    }
  }

  double GetDouble(const std::string& key, double dflt) {
    std::string v = GetString(key, "");
    if (v.empty()) return dflt;
    try {
      size_t pos = 0;
      double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw UsageError("config key " + key + " must be a number, got: " + v);
    }
  }

  bool GetOnOff(const std::string& key, bool dflt) {
    std::string v = GetString(key, "");
    if (v.empty()) return dflt;
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw UsageError("config key " + key + " must be on/off, got: " + v);
  }

  void CheckNoUnknownKeys() const {
    for (const auto& [key, value] : map_) {
      if (seen_.count(key) == 0)
        throw UsageError("unknown config key: " + key);
    }
  }

 private:
  const ConfigMap& map_;
  std::set<std::string> seen_;
};

std::string ResolveDataPath(const std::string& path) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return path;
  const char* root = std::getenv("SPOOFDET_DATA_ROOT");
  if (root != nullptr && *root != '\0' && !fs::exists(p))
    return (fs::path(root) / p).string();
  return path;
}

PhaseSchedule ParsePhases(const std::string& text) {
  PhaseSchedule s;
  int a = 0, b = 0, c = 0;
  char c1 = 0, c2 = 0;
  std::istringstream iss(text);
  if (!(iss >> a >> c1 >> b >> c2 >> c) || c1 != ':' || c2 != ':' || a <= 0 ||
      b <= 0 || c <= 0 || !iss.eof())
    throw UsageError("phase_proportions must look like 3:1:1, got: " + text);
  s.phase1 = a;
  s.phase2 = b;
  s.phase3 = c;
  return s;
}

}  // namespace

ExperimentConfig BuildExperimentConfig(const ConfigMap& map) {
  ConfigReader r(map);
  ExperimentConfig cfg;

  cfg.train_protocol = ResolveDataPath(r.GetString("corpus.train_protocol", ""));
  cfg.train_audio = ResolveDataPath(r.GetString("corpus.train_audio", ""));
  cfg.dev_protocol = ResolveDataPath(r.GetString("corpus.dev_protocol", ""));
  cfg.dev_audio = ResolveDataPath(r.GetString("corpus.dev_audio", ""));

  cfg.crop_frames = r.GetInt("features.crop_frames", 120);

  EncoderConfig& enc = cfg.training.encoder;
  enc.conv1_filters = r.GetInt("network.conv1_filters", 16);
  enc.stage_filters = r.GetInt("network.stage_filters", 128);
  enc.gru_units = r.GetInt("network.gru_units", 512);
  enc.code_dim = r.GetInt("network.code_dim", 64);
  enc.lrelu_slope = r.GetDouble("network.lrelu_slope", 0.01);
  cfg.training.subsidiary_hidden = r.GetInt("network.subsidiary_hidden", 128);

  std::string mode = r.GetString("training.mode", "baseline");
  auto scheme = SchemeFromName(mode);
  if (!scheme.has_value())
    throw UsageError("training.mode must be baseline/can/mtl/modified_mtl, got: " + mode);
  cfg.training.scheme = *scheme;

  std::string cat = r.GetString("training.category", "");
  if (!cat.empty()) {
    auto c = CategoryFromName(cat);
    if (!c.has_value()) throw UsageError("unknown training.category: " + cat);
    cfg.training.category = *c;
  }
  if (cfg.training.scheme == Scheme::kBaseline && cfg.training.category.has_value())
    throw UsageError("baseline mode does not take a category");
  if (cfg.training.scheme != Scheme::kBaseline && !cfg.training.category.has_value())
    throw UsageError("mode '" + mode + "' requires training.category");
  if (cfg.training.scheme == Scheme::kModifiedMtl &&
      KindOf(*cfg.training.category) != CategoryKind::kReplay)
    throw UsageError("modified_mtl is defined for replay categories only");

  cfg.training.ring = r.GetOnOff("training.ring", false);
  cfg.training.ring_lambda = r.GetDouble("training.ring_lambda", 1.0);
  cfg.training.lambda_pri = r.GetDouble("training.lambda_pri", 1.0);
  cfg.training.lambda_sub = r.GetDouble("training.lambda_sub", 0.5);
  cfg.training.orth_alpha = r.GetDouble("training.orth_alpha", 1.0);
  cfg.training.optimizer.learning_rate = r.GetDouble("training.learning_rate", 0.0005);
  cfg.training.optimizer.weight_decay = r.GetDouble("training.weight_decay", 0.0001);
  cfg.training.optimizer.batch_size =
      static_cast<int>(r.GetInt("training.batch_size", 32));
  cfg.training.epochs = r.GetInt("training.epochs", 10);
  cfg.training.seed = static_cast<uint64_t>(r.GetInt("training.seed", 1));
  cfg.training.phases = ParsePhases(r.GetString("training.phase_proportions", "3:1:1"));
  cfg.training.can_unfrozen_phase2 = r.GetOnOff("training.can_unfrozen_phase2", false);
  cfg.training.threads = static_cast<int>(r.GetInt("training.threads", 0));
  cfg.training.checkpoint_keep_all =
      r.GetString("training.checkpoint_keep", "all") != "last";
  cfg.training.crop_frames = cfg.crop_frames;

  cfg.out_dir = r.GetString("output.dir", "run");

  r.CheckNoUnknownKeys();

  if (cfg.training.optimizer.learning_rate <= 0.0)
    throw UsageError("learning_rate must be positive");
  if (cfg.training.optimizer.batch_size <= 0)
    throw UsageError("batch_size must be positive");
  if (cfg.training.epochs <= 0) throw UsageError("epochs must be positive");
  if (cfg.crop_frames < (int64_t(1) << cfg.training.encoder.n_stages))
    throw UsageError("crop_frames too small for the encoder's downsampling");
  return cfg;
}

std::string ExperimentConfig::ResolvedText() const {
  std::ostringstream o;
  o << "[corpus]\n";
  o << "train_protocol = " << train_protocol << "\n";
  o << "train_audio = " << train_audio << "\n";
  o << "dev_protocol = " << dev_protocol << "\n";
  o << "dev_audio = " << dev_audio << "\n";
  o << "\n[features]\n";
  o << "crop_frames = " << crop_frames << "\n";
  const EncoderConfig& enc = training.encoder;
  o << "\n[network]\n";
  o << "conv1_filters = " << enc.conv1_filters << "\n";
  o << "stage_filters = " << enc.stage_filters << "\n";
  o << "gru_units = " << enc.gru_units << "\n";
  o << "code_dim = " << enc.code_dim << "\n";
  o << "lrelu_slope = " << enc.lrelu_slope << "\n";
  o << "subsidiary_hidden = " << training.subsidiary_hidden << "\n";
  o << "\n[training]\n";
  o << "mode = " << SchemeName(training.scheme) << "\n";
  if (training.category.has_value())
    o << "category = " << CategoryName(*training.category) << "\n";
  o << "ring = " << (training.ring ? "on" : "off") << "\n";
  o << "ring_lambda = " << training.ring_lambda << "\n";
  o << "lambda_pri = " << training.lambda_pri << "\n";
  o << "lambda_sub = " << training.lambda_sub << "\n";
  o << "orth_alpha = " << training.orth_alpha << "\n";
  o << "learning_rate = " << training.optimizer.learning_rate << "\n";
  o << "weight_decay = " << training.optimizer.weight_decay << "\n";
  o << "batch_size = " << training.optimizer.batch_size << "\n";
  o << "epochs = " << training.epochs << "\n";
  o << "seed = " << training.seed << "\n";
  o << "phase_proportions = " << training.phases.phase1 << ":"
    << training.phases.phase2 << ":" << training.phases.phase3 << "\n";
  o << "can_unfrozen_phase2 = " << (training.can_unfrozen_phase2 ? "on" : "off") << "\n";
  o << "threads = " << training.threads << "\n";
  o << "checkpoint_keep = " << (training.checkpoint_keep_all ? "all" : "last") << "\n";
  o << "\n[output]\n";
  o << "dir = " << out_dir << "\n";
  return o.str();
}

}  // namespace spoofdet
