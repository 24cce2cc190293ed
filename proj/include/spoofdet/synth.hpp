// spoofdet/synth.hpp
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
// Deterministic desk-scale corpus.  Every (environment, replay) cell is
// populated, and each meta-data attribute imprints its own learnable
// acoustic signature:
//   room size         -> fundamental-frequency band
//   reverberation     -> exponential-decay tail length (feedback echo)
//   talker-to-ASV     -> amplitude scale
//   attacker-to-talker-> additive noise level          (spoof only)
//   replay quality    -> low-pass cutoff               (spoof only)
// Spoofed utterances additionally carry a fixed narrowband replay artifact
// below every low-pass cutoff, so the primary task is learnable and the
// artifact stays statistically independent of all five attributes.

#ifndef SPOOFDET_SYNTH_HPP_
#define SPOOFDET_SYNTH_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spoofdet/audio.hpp"
#include "spoofdet/corpus.hpp"

namespace spoofdet {

struct AttributeStrengths {
  std::array<double, 3> f0_hz = {150.0, 220.0, 320.0};        // room size
  double f0_jitter = 0.03;                                    // relative band width
  std::array<double, 3> reverb_tail_s = {0.02, 0.12, 0.35};   // reverberation
  std::array<double, 3> amplitude = {0.8, 0.4, 0.2};          // talker-to-ASV
  std::array<double, 3> noise_level = {0.003, 0.03, 0.12};    // attacker-to-talker
  std::array<double, 3> lowpass_hz = {7000.0, 4000.0, 2200.0};  // replay quality
  std::array<double, 3> artifact_hz = {1130.0, 1220.0, 1310.0};
  double artifact_level = 0.35;  // relative to unit-RMS signal
};

struct SynthSpec {
  int n_per_cell = 2;          // utterances per (env, attack) cell
  int sample_rate = 16000;
  double duration_s = 1.2;
  AttributeStrengths strengths;
  uint64_t seed = 1;
};

// Synthesizes one utterance for the given trial configuration.
Waveform SynthUtterance(const TrialEntry& entry, const SynthSpec& spec,
                        uint64_t utt_seed);

struct SynthResult {
  std::string protocol_path;
  int64_t n_bona_fide = 0;
  int64_t n_spoof = 0;
};

// Writes `protocol_<subset>.txt` and wav/<utt>.wav under out_dir.  All 27
// environment cells get n_per_cell bona-fide utterances; all 243
// environment x replay cells get n_per_cell spoofed ones.  Fully
// deterministic in (spec.seed, subset).
SynthResult SynthCorpus(const SynthSpec& spec, const std::string& out_dir,
                        const std::string& subset, int threads = 0);

}  // namespace spoofdet

#endif  // SPOOFDET_SYNTH_HPP_
