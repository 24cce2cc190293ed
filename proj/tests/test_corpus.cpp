// tests/test_corpus.cpp
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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "spoofdet/corpus.hpp"
#include "spoofdet/rng.hpp"
#include "test_util.hpp"

using namespace spoofdet;
namespace fs = std::filesystem;

TEST_CASE("protocol line parsing") {
  TrialEntry e = ParseProtocolLine("PA_0001 PA_T_0000001 aab - bonafide", 1);
  CHECK(e.speaker_id == "PA_0001");
  CHECK(e.utt_id == "PA_T_0000001");
  CHECK(e.env.room_size == 0);
  CHECK(e.env.reverberation == 0);
  CHECK(e.env.talker_to_asv == 1);
  CHECK(!e.attack.has_value());
  CHECK(e.key == Key::kBonaFide);

  e = ParseProtocolLine("PA_0001 PA_T_0000002 aaa CB spoof", 2);
  CHECK(e.attack.has_value());
  CHECK(e.attack->attacker_to_talker == 2);
  CHECK(e.attack->replay_quality == 1);
  CHECK(e.key == Key::kSpoof);
}

TEST_CASE("protocol line errors name the line number") {
  // bona-fide with a replay configuration violates the key/attack invariant
  CHECK_THROWS_WITH_AS(ParseProtocolLine("PA_0001 PA_T_0000003 aaa CB bonafide", 7),
                       doctest::Contains("line 7"), DataError);
  CHECK_THROWS_AS(ParseProtocolLine("PA_0001 PA_T_0000004 aaa - spoof", 1), DataError);
  CHECK_THROWS_AS(ParseProtocolLine("PA_0001 PA_T_0000005 aaa CB", 1), DataError);
  CHECK_THROWS_AS(ParseProtocolLine("PA_0001 PA_T_0000006 aad - bonafide", 1), DataError);
  CHECK_THROWS_AS(ParseProtocolLine("PA_0001 PA_T_0000007 aaa Cx spoof", 1), DataError);
  CHECK_THROWS_AS(ParseProtocolLine("PA_0001 PA_T_0000008 aaa CB ham", 1), DataError);
  CHECK_THROWS_AS(ParseProtocolLine("", 1), DataError);
}

TEST_CASE("format/parse round trip over all configurations") {
  Rng rng(42);
  for (int rs = 0; rs < 3; ++rs)
    for (int rv = 0; rv < 3; ++rv)
      for (int ta = 0; ta < 3; ++ta) {
        EnvConfig env{rs, rv, ta};
        TrialEntry bona = testutil::MakeEntry("PA_T_0000001", Key::kBonaFide, env, {});
        std::string line = FormatProtocolLine(bona);
        TrialEntry back = ParseProtocolLine(line, 1);
        CHECK(FormatProtocolLine(back) == line);
        CHECK(back.env == env);
        for (int at = 0; at < 3; ++at)
          for (int rq = 0; rq < 3; ++rq) {
            TrialEntry spoof = testutil::MakeEntry("PA_T_0000002", Key::kSpoof, env,
                                                   AttackConfig{at, rq});
            std::string sline = FormatProtocolLine(spoof);
            TrialEntry sback = ParseProtocolLine(sline, 1);
            CHECK(FormatProtocolLine(sback) == sline);
            CHECK(sback.attack == spoof.attack);
          }
      }
}

TEST_CASE("round trip normalizes extra whitespace") {
  std::string messy = "PA_0001  PA_T_0000002   aaa\tCB  spoof";
  TrialEntry e = ParseProtocolLine(messy, 1);
  CHECK(FormatProtocolLine(e) == "PA_0001 PA_T_0000002 aaa CB spoof");
}

namespace {

// Fabricated protocol with the official per-subset counts.
void WriteFabricatedProtocol(const std::string& path, int64_t n_bona, int64_t n_spoof) {
  std::ofstream f(path);
  Rng rng(7);
  int64_t id = 0;
  for (int64_t i = 0; i < n_bona; ++i) {
    EnvConfig env{static_cast<int>(rng.UniformInt(3)), static_cast<int>(rng.UniformInt(3)),
                  static_cast<int>(rng.UniformInt(3))};
    char buf[64];
    std::snprintf(buf, sizeof(buf), "PA_T_%07lld", static_cast<long long>(++id));
    f << FormatProtocolLine(testutil::MakeEntry(buf, Key::kBonaFide, env, {})) << "\n";
  }
  for (int64_t i = 0; i < n_spoof; ++i) {
    EnvConfig env{static_cast<int>(rng.UniformInt(3)), static_cast<int>(rng.UniformInt(3)),
                  static_cast<int>(rng.UniformInt(3))};
    AttackConfig atk{static_cast<int>(rng.UniformInt(3)), static_cast<int>(rng.UniformInt(3))};
    char buf[64];
    std::snprintf(buf, sizeof(buf), "PA_T_%07lld", static_cast<long long>(++id));
    f << FormatProtocolLine(testutil::MakeEntry(buf, Key::kSpoof, env, atk)) << "\n";
  }
}

}  // namespace

TEST_CASE("load_corpus reproduces the official subset counts") {
  // The reference corpus has 5,400 bona-fide + 48,600 spoof training
  // utterances and 5,400 + 24,300 development utterances; the loader must
  // report exactly what the protocol holds.
  fs::path dir = fs::temp_directory_path() / "spoofdet_corpus_counts";
  fs::create_directories(dir);
  WriteFabricatedProtocol((dir / "train.txt").string(), 5400, 48600);
  auto train = LoadCorpus((dir / "train.txt").string(), dir.string());
  CorpusCounts tc = CountKeys(train);
  CHECK(tc.bona_fide == 5400);
  CHECK(tc.spoof == 48600);

  WriteFabricatedProtocol((dir / "dev.txt").string(), 5400, 24300);
  auto dev = LoadCorpus((dir / "dev.txt").string(), dir.string());
  CorpusCounts dc = CountKeys(dev);
  CHECK(dc.bona_fide == 5400);
  CHECK(dc.spoof == 24300);

  // No spoof entry may lack a replay configuration.
  for (const auto& e : train)
    if (e.is_spoof()) CHECK(e.attack.has_value());
}

TEST_CASE("load_corpus error paths") {
  fs::path dir = fs::temp_directory_path() / "spoofdet_corpus_err";
  fs::create_directories(dir);
  CHECK_THROWS_AS(LoadCorpus((dir / "missing.txt").string(), dir.string()), DataError);
  {
    std::ofstream f(dir / "empty.txt");
  }
  CHECK_THROWS_AS(LoadCorpus((dir / "empty.txt").string(), dir.string()), DataError);
}

TEST_CASE("subsidiary labels per scheme") {
  EnvConfig env{0, 1, 2};
  TrialEntry spoof = testutil::MakeEntry("u1", Key::kSpoof, env, AttackConfig{2, 1});
  TrialEntry bona = testutil::MakeEntry("u2", Key::kBonaFide, env, {});

  // Environment categories label every entry identically across schemes.
  for (LabelScheme s : {LabelScheme::kCan, LabelScheme::kMtl, LabelScheme::kModifiedMtl}) {
    CHECK(SubsidiaryLabel(spoof, Category::kRoomSize, s) == 0);
    CHECK(SubsidiaryLabel(bona, Category::kReverberation, s) == 1);
    CHECK(SubsidiaryLabel(bona, Category::kTalkerToAsv, s) == 2);
  }

  // Replay categories: spoof level B of {A,B,C} -> index 1.
  CHECK(SubsidiaryLabel(spoof, Category::kReplayQuality, LabelScheme::kMtl) == 1);
  // The extra node for bona-fide input sits at index 3.
  CHECK(SubsidiaryLabel(bona, Category::kReplayQuality, LabelScheme::kMtl) == 3);
  // Merged output layer: bona-fide is node 0, levels shift to 1..3.
  CHECK(SubsidiaryLabel(bona, Category::kAttackerToTalker, LabelScheme::kModifiedMtl) == 0);
  CHECK(SubsidiaryLabel(spoof, Category::kAttackerToTalker, LabelScheme::kModifiedMtl) == 3);
  // The adversarial scheme leaves bona-fide unlabeled on replay categories.
  CHECK(!SubsidiaryLabel(bona, Category::kReplayQuality, LabelScheme::kCan).has_value());
  CHECK(SubsidiaryLabel(spoof, Category::kReplayQuality, LabelScheme::kCan) == 1);
}

TEST_CASE("subsidiary label totality") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    EnvConfig env{static_cast<int>(rng.UniformInt(3)), static_cast<int>(rng.UniformInt(3)),
                  static_cast<int>(rng.UniformInt(3))};
    bool spoof = rng.UniformInt(2) == 1;
    TrialEntry e = spoof
                       ? testutil::MakeEntry("u", Key::kSpoof, env,
                                             AttackConfig{static_cast<int>(rng.UniformInt(3)),
                                                          static_cast<int>(rng.UniformInt(3))})
                       : testutil::MakeEntry("u", Key::kBonaFide, env, {});
    for (Category c : kAllCategories) {
      for (LabelScheme s : {LabelScheme::kMtl, LabelScheme::kModifiedMtl}) {
        auto lab = SubsidiaryLabel(e, c, s);
        REQUIRE(lab.has_value());
        CHECK(*lab >= 0);
        CHECK(*lab < NumSubsidiaryClasses(c, s));
      }
      auto lab = SubsidiaryLabel(e, c, LabelScheme::kCan);
      bool partial = KindOf(c) == CategoryKind::kReplay && !spoof;
      CHECK(lab.has_value() == !partial);
    }
  }
}

TEST_CASE("balanced epoch plan") {
  std::vector<TrialEntry> entries;
  EnvConfig env{0, 0, 0};
  for (int i = 0; i < 10; ++i)
    entries.push_back(testutil::MakeEntry("b" + std::to_string(i), Key::kBonaFide, env, {}));
  for (int i = 0; i < 50; ++i)
    entries.push_back(testutil::MakeEntry("s" + std::to_string(i), Key::kSpoof, env,
                                          AttackConfig{0, 0}));

  EpochPlan plan = BalancedEpochPlan(entries, 123);
  CHECK(plan.entry_indices.size() == 20);
  CHECK(!plan.with_replacement);

  std::set<int64_t> seen(plan.entry_indices.begin(), plan.entry_indices.end());
  CHECK(seen.size() == 20);  // no duplicates
  int bona = 0, spoof = 0;
  for (int64_t i : plan.entry_indices)
    (entries[static_cast<size_t>(i)].key == Key::kBonaFide ? bona : spoof)++;
  CHECK(bona == 10);
  CHECK(spoof == 10);
  for (int64_t i = 0; i < 10; ++i) CHECK(seen.count(i) == 1);  // all bona-fide present

  // Determinism and seed sensitivity.
  EpochPlan again = BalancedEpochPlan(entries, 123);
  CHECK(again.entry_indices == plan.entry_indices);
  EpochPlan other = BalancedEpochPlan(entries, 124);
  CHECK(other.entry_indices != plan.entry_indices);
}

TEST_CASE("balanced epoch plan is permutation-stable in the entries") {
  // The plan must be a function of (entries, seed), not of incidental
  // iteration state: rebuilding from the same list yields the same plan.
  std::vector<TrialEntry> entries;
  EnvConfig env{1, 1, 1};
  for (int i = 0; i < 7; ++i)
    entries.push_back(testutil::MakeEntry("b" + std::to_string(i), Key::kBonaFide, env, {}));
  for (int i = 0; i < 23; ++i)
    entries.push_back(testutil::MakeEntry("s" + std::to_string(i), Key::kSpoof, env,
                                          AttackConfig{1, 2}));
  for (uint64_t seed : {1ull, 2ull, 99ull}) {
    EpochPlan a = BalancedEpochPlan(entries, seed);
    EpochPlan b = BalancedEpochPlan(entries, seed);
    CHECK(a.entry_indices == b.entry_indices);
    CHECK(a.entry_indices.size() == 14);
  }
}

TEST_CASE("spoof deficit falls back to sampling with replacement") {
  std::vector<TrialEntry> entries;
  EnvConfig env{0, 0, 0};
  for (int i = 0; i < 8; ++i)
    entries.push_back(testutil::MakeEntry("b" + std::to_string(i), Key::kBonaFide, env, {}));
  for (int i = 0; i < 3; ++i)
    entries.push_back(testutil::MakeEntry("s" + std::to_string(i), Key::kSpoof, env,
                                          AttackConfig{0, 1}));
  EpochPlan plan = BalancedEpochPlan(entries, 5);
  CHECK(plan.with_replacement);
  CHECK(plan.entry_indices.size() == 16);
  int bona = 0;
  for (int64_t i : plan.entry_indices)
    if (entries[static_cast<size_t>(i)].key == Key::kBonaFide) ++bona;
  CHECK(bona == 8);

  std::vector<TrialEntry> no_spoof(entries.begin(), entries.begin() + 8);
  CHECK_THROWS_AS(BalancedEpochPlan(no_spoof, 1), DataError);
}
