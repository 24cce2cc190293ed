// spoofdet/corpus.cpp
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

#include "spoofdet/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "spoofdet/rng.hpp"

namespace fs = std::filesystem;

namespace spoofdet {

CategoryKind KindOf(Category c) {
  switch (c) {
    case Category::kAttackerToTalker:
    case Category::kReplayQuality:
      return CategoryKind::kReplay;
    default:
      return CategoryKind::kEnvironment;
  }
}

const char* CategoryName(Category c) {
  switch (c) {
    case Category::kRoomSize: return "room_size";
    case Category::kReverberation: return "reverberation";
    case Category::kTalkerToAsv: return "talker_to_asv";
    case Category::kAttackerToTalker: return "attacker_to_talker";
    case Category::kReplayQuality: return "replay_quality";
  }
  return "?";
}

std::optional<Category> CategoryFromName(const std::string& name) {
  for (Category c : kAllCategories)
    if (name == CategoryName(c)) return c;
  return std::nullopt;
}

int NumSubsidiaryClasses(Category c, LabelScheme scheme) {
  switch (scheme) {
    case LabelScheme::kCan:
      return kNumLevels;
    case LabelScheme::kMtl:
      return KindOf(c) == CategoryKind::kReplay ? kNumLevels + 1 : kNumLevels;
    case LabelScheme::kModifiedMtl:
      return kNumLevels + 1;
  }
  return kNumLevels;
}

std::optional<int> SubsidiaryLabel(const TrialEntry& entry, Category category,
                                   LabelScheme scheme) {
  if (KindOf(category) == CategoryKind::kEnvironment) {
    switch (category) {
      case Category::kRoomSize: return entry.env.room_size;
      case Category::kReverberation: return entry.env.reverberation;
      default: return entry.env.talker_to_asv;
    }
  }
  // Replay categories.
  std::optional<int> level;
  if (entry.attack.has_value()) {
    level = category == Category::kAttackerToTalker
                ? entry.attack->attacker_to_talker
                : entry.attack->replay_quality;
  }
  switch (scheme) {
    case LabelScheme::kCan:
      return level;  // bona-fide stays unlabeled
    case LabelScheme::kMtl:
      // The extra output node for bona-fide input sits after the levels.
      return level.has_value() ? *level : kNumLevels;
    case LabelScheme::kModifiedMtl:
      // Merged output layer: node 0 is bona-fide, nodes 1..3 the levels.
      return level.has_value() ? *level + 1 : 0;
  }
  return std::nullopt;
}

namespace {

int DecodeEnvLevel(char c, int line_number, const std::string& line) {
  if (c < 'a' || c > 'c') {
    throw DataError("protocol line " + std::to_string(line_number) +
                    ": unknown environment level '" + std::string(1, c) +
                    "' in: " + line);
  }
  return c - 'a';
}

int DecodeAttackLevel(char c, int line_number, const std::string& line) {
  if (c < 'A' || c > 'C') {
    throw DataError("protocol line " + std::to_string(line_number) +
                    ": unknown replay level '" + std::string(1, c) +
                    "' in: " + line);
  }
  return c - 'A';
}

}  // namespace

TrialEntry ParseProtocolLine(const std::string& line, int line_number) {
  std::vector<std::string> fields = SplitWhitespace(line);
  if (fields.size() != 5) {
    throw DataError("protocol line " + std::to_string(line_number) +
                    ": expected 5 fields, got " +
                    std::to_string(fields.size()) + ": " + line);
  }
  TrialEntry e;
  e.speaker_id = fields[0];
  e.utt_id = fields[1];

  const std::string& env = fields[2];
  if (env.size() != 3) {
    throw DataError("protocol line " + std::to_string(line_number) +
                    ": environment field must have 3 characters: " + line);
  }
  e.env.room_size = DecodeEnvLevel(env[0], line_number, line);
  e.env.reverberation = DecodeEnvLevel(env[1], line_number, line);
  e.env.talker_to_asv = DecodeEnvLevel(env[2], line_number, line);

  const std::string& attack = fields[3];
  if (attack != "-") {
    if (attack.size() != 2) {
      throw DataError("protocol line " + std::to_string(line_number) +
                      ": replay field must be 2 characters or '-': " + line);
    }
    AttackConfig a;
    a.attacker_to_talker = DecodeAttackLevel(attack[0], line_number, line);
    a.replay_quality = DecodeAttackLevel(attack[1], line_number, line);
    e.attack = a;
  }

  const std::string& key = fields[4];
  if (key == "bonafide") {
    e.key = Key::kBonaFide;
  } else if (key == "spoof") {
    e.key = Key::kSpoof;
  } else {
    throw DataError("protocol line " + std::to_string(line_number) +
                    ": key must be 'bonafide' or 'spoof': " + line);
  }

  if (e.key == Key::kSpoof && !e.attack.has_value()) {
    throw DataError("protocol line " + std::to_string(line_number) +
                    ": spoof trial without replay configuration: " + line);
  }
  if (e.key == Key::kBonaFide && e.attack.has_value()) {
    throw DataError("protocol line " + std::to_string(line_number) +
                    ": bona-fide trial with replay configuration: " + line);
  }
  return e;
}

std::string FormatProtocolLine(const TrialEntry& entry) {
  std::string env;
  env += static_cast<char>('a' + entry.env.room_size);
  env += static_cast<char>('a' + entry.env.reverberation);
  env += static_cast<char>('a' + entry.env.talker_to_asv);
  std::string attack = "-";
  if (entry.attack.has_value()) {
    attack.clear();
    attack += static_cast<char>('A' + entry.attack->attacker_to_talker);
    attack += static_cast<char>('A' + entry.attack->replay_quality);
  }
  return entry.speaker_id + " " + entry.utt_id + " " + env + " " + attack +
         " " + (entry.key == Key::kBonaFide ? "bonafide" : "spoof");
}

namespace {

// Audio files may live directly under the root or in a wav/ or flac/
// subdirectory, as in the distributed dataset layout.
std::string ResolveAudioPath(const std::string& audio_root,
                             const std::string& utt_id) {
  static const char* kPatterns[] = {"%s.wav", "wav/%s.wav", "%s.flac",
                                    "flac/%s.flac"};
  for (const char* pat : kPatterns) {
    std::string rel(pat);
    size_t pos = rel.find("%s");
    rel.replace(pos, 2, utt_id);
    fs::path p = fs::path(audio_root) / rel;
    if (fs::exists(p)) return p.string();
  }
  return (fs::path(audio_root) / (utt_id + ".wav")).string();
}

}  // namespace

std::vector<TrialEntry> LoadCorpus(const std::string& protocol_path,
                                   const std::string& audio_root) {
  std::ifstream in(protocol_path);
  if (!in) throw DataError("cannot open protocol file: " + protocol_path);
  std::vector<TrialEntry> entries;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    TrialEntry e = ParseProtocolLine(line, line_number);
    e.audio_path = ResolveAudioPath(audio_root, e.utt_id);
    entries.push_back(std::move(e));
  }
  if (entries.empty())
    throw DataError("protocol file has no entries: " + protocol_path);
  return entries;
}

CorpusCounts CountKeys(const std::vector<TrialEntry>& entries) {
  CorpusCounts c;
  for (const auto& e : entries)
    (e.key == Key::kBonaFide ? c.bona_fide : c.spoof)++;
  return c;
}

EpochPlan BalancedEpochPlan(const std::vector<TrialEntry>& entries,
                            uint64_t seed) {
  std::vector<int64_t> bona, spoof;
  for (int64_t i = 0; i < static_cast<int64_t>(entries.size()); ++i) {
    (entries[static_cast<size_t>(i)].key == Key::kBonaFide ? bona : spoof)
        .push_back(i);
  }
  if (bona.empty() || spoof.empty())
    throw DataError("balanced epoch plan needs both bona-fide and spoof entries");

  EpochPlan plan;
  plan.seed = seed;
  Rng rng(DeriveSeed(seed, /*stream=*/17));

  plan.entry_indices = bona;
  int64_t need = static_cast<int64_t>(bona.size());
  if (need <= static_cast<int64_t>(spoof.size())) {
    std::vector<int64_t> pick = rng.SampleWithoutReplacement(
        static_cast<int64_t>(spoof.size()), need);
    for (int64_t p : pick) plan.entry_indices.push_back(spoof[static_cast<size_t>(p)]);
  } else {
    plan.with_replacement = true;
    std::cerr << "warning: fewer spoof (" << spoof.size() << ") than bona-fide ("
              << bona.size() << ") entries; sampling spoof with replacement\n";
    for (int64_t i = 0; i < need; ++i) {
      plan.entry_indices.push_back(
          spoof[static_cast<size_t>(rng.UniformInt(spoof.size()))]);
    }
  }
  rng.Shuffle(plan.entry_indices);
  return plan;
}

}  // namespace spoofdet
