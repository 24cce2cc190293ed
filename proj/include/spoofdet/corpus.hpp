// spoofdet/corpus.hpp
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
// Trial protocol parsing, balanced epoch planning and subsidiary labels.
//
// Protocol wire format: one trial per line,
//   SPEAKER UTT ENV ATTACK KEY
// where ENV is a 3-character environment level string over {a,b,c}
// (room size, reverberation, talker-to-ASV distance), ATTACK is a
// 2-character replay level string over {A,B,C} (attacker-to-talker
// distance, replay device quality) or "-" for bona-fide trials, and KEY
// is "bonafide" or "spoof".

#ifndef SPOOFDET_CORPUS_HPP_
#define SPOOFDET_CORPUS_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spoofdet/common.hpp"

namespace spoofdet {

enum class Key { kBonaFide, kSpoof };

// Environment configuration shared by bona-fide and replayed trials.
// Each field is a level index in {0,1,2} standing for {a,b,c}.
struct EnvConfig {
  int room_size = 0;
  int reverberation = 0;
  int talker_to_asv = 0;

  bool operator==(const EnvConfig&) const = default;
};

// Replay configuration, present only on spoofed trials.
// Levels in {0,1,2} standing for {A,B,C}.
struct AttackConfig {
  int attacker_to_talker = 0;
  int replay_quality = 0;

  bool operator==(const AttackConfig&) const = default;
};

struct TrialEntry {
  std::string speaker_id;
  std::string utt_id;
  EnvConfig env;
  std::optional<AttackConfig> attack;
  Key key = Key::kBonaFide;
  std::string audio_path;

  bool is_spoof() const { return key == Key::kSpoof; }
};

// The five meta-data categories.  The first three describe the acoustic
// environment and apply to every trial; the last two describe the replay
// chain and exist only on spoofed trials.
enum class Category {
  kRoomSize,
  kReverberation,
  kTalkerToAsv,
  kAttackerToTalker,
  kReplayQuality,
};

enum class CategoryKind { kEnvironment, kReplay };

constexpr int kNumLevels = 3;

constexpr std::array<Category, 5> kAllCategories = {
    Category::kRoomSize, Category::kReverberation, Category::kTalkerToAsv,
    Category::kAttackerToTalker, Category::kReplayQuality};

CategoryKind KindOf(Category c);
const char* CategoryName(Category c);
std::optional<Category> CategoryFromName(const std::string& name);

// Label scheme for the subsidiary task.
//  - kCan:        3-way levels; replay categories leave bona-fide unlabeled
//                 (those samples are excluded from the adversarial phases).
//  - kMtl:        3-way for environment; replay categories gain a fourth
//                 node for bona-fide input (label 3).
//  - kModifiedMtl: merged single output layer; label 0 is bona-fide and
//                 1..3 are the spoof levels.
enum class LabelScheme { kCan, kMtl, kModifiedMtl };

// Number of classes a subsidiary head needs under a scheme.
int NumSubsidiaryClasses(Category c, LabelScheme scheme);

// Class index for one trial, or nullopt for (CAN, replay category,
// bona-fide), which is excluded rather than an error.
std::optional<int> SubsidiaryLabel(const TrialEntry& entry, Category category,
                                   LabelScheme scheme);

// Parses one protocol line.  line_number is used in error messages only.
TrialEntry ParseProtocolLine(const std::string& line, int line_number = 0);

// Inverse of ParseProtocolLine, producing the normalized wire form.
std::string FormatProtocolLine(const TrialEntry& entry);

// Loads a protocol file and resolves audio paths against audio_root.
// Throws DataError on missing file, malformed lines or zero entries.
std::vector<TrialEntry> LoadCorpus(const std::string& protocol_path,
                                   const std::string& audio_root);

struct CorpusCounts {
  int64_t bona_fide = 0;
  int64_t spoof = 0;
};

CorpusCounts CountKeys(const std::vector<TrialEntry>& entries);

// One epoch of class-balanced training data: all bona-fide entries plus an
// equally sized spoof subset sampled without replacement (fresh per seed),
// shuffled.  If there are fewer spoof than bona-fide entries the spoof
// subset is drawn with replacement instead and `with_replacement` is set.
struct EpochPlan {
  std::vector<int64_t> entry_indices;  // indices into the source entry list
  uint64_t seed = 0;
  bool with_replacement = false;
};

EpochPlan BalancedEpochPlan(const std::vector<TrialEntry>& entries,
                            uint64_t seed);

}  // namespace spoofdet

#endif  // SPOOFDET_CORPUS_HPP_
