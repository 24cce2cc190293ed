// spoofdet/synth.cpp
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

#include "spoofdet/synth.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "spoofdet/common.hpp"
#include "spoofdet/rng.hpp"

namespace fs = std::filesystem;

namespace spoofdet {

namespace {

double Rms(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

void NormalizeRms(std::vector<double>& x) {
  double r = Rms(x);
  if (r > 0.0)
    for (double& v : x) v /= r;
}

// Harmonic voice with a syllabic amplitude envelope and a faint noise floor.
std::vector<double> VoiceSource(int n, int fs, double f0, Rng& rng) {
  std::vector<double> x(static_cast<size_t>(n), 0.0);
  int n_partials = std::min(40, static_cast<int>(0.45 * fs / f0));
  for (int k = 1; k <= n_partials; ++k) {
    double amp = 1.0 / static_cast<double>(k);
    double phase = rng.UniformReal(0.0, 2.0 * M_PI);
    double w = 2.0 * M_PI * f0 * k / fs;
    for (int i = 0; i < n; ++i)
      x[static_cast<size_t>(i)] += amp * std::sin(w * i + phase);
  }
  double am_rate = rng.UniformReal(2.0, 4.0);
  double am_phase = rng.UniformReal(0.0, 2.0 * M_PI);
  double wa = 2.0 * M_PI * am_rate / fs;
  for (int i = 0; i < n; ++i)
    x[static_cast<size_t>(i)] *= 0.55 + 0.45 * std::sin(wa * i + am_phase);
  double floor_rms = 0.01 * Rms(x);
  for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] += floor_rms * rng.Normal();
  return x;
}

// Feedback echo: y[n] = x[n] + g * y[n - D]; g set from the tail time
// constant so longer tails decay slower.
void ApplyReverb(std::vector<double>& x, int fs, double tail_s) {
  int delay = fs * 8 / 1000;  // 8 ms
  double g = std::exp(-static_cast<double>(delay) / (fs * tail_s));
  for (size_t i = static_cast<size_t>(delay); i < x.size(); ++i)
    x[i] += g * x[i - static_cast<size_t>(delay)];
}

// Two cascaded one-pole sections (~12 dB/oct).
void ApplyLowpass(std::vector<double>& x, int fs, double cutoff_hz) {
  double alpha = 1.0 - std::exp(-2.0 * M_PI * cutoff_hz / fs);
  for (int pass = 0; pass < 2; ++pass) {
    double y = 0.0;
    for (double& v : x) {
      y += alpha * (v - y);
      v = y;
    }
  }
}

}  // namespace

Waveform SynthUtterance(const TrialEntry& entry, const SynthSpec& spec,
                        uint64_t utt_seed) {
  const AttributeStrengths& st = spec.strengths;
  Rng rng(utt_seed);
  int fs = spec.sample_rate;
  int n = static_cast<int>(std::lround(spec.duration_s * fs));

  double f0_base = st.f0_hz[static_cast<size_t>(entry.env.room_size)];
  double f0 = f0_base * (1.0 + st.f0_jitter * rng.UniformReal(-1.0, 1.0));
  std::vector<double> x = VoiceSource(n, fs, f0, rng);
  NormalizeRms(x);

  ApplyReverb(x, fs, st.reverb_tail_s[static_cast<size_t>(entry.env.reverberation)]);
  NormalizeRms(x);

  if (entry.attack.has_value()) {
    // Replay chain: fixed narrowband artifact, channel noise, then the
    // device's low-pass response.  Sine amplitude set so the summed
    // artifact RMS equals artifact_level.
    double amp = st.artifact_level *
                 std::sqrt(2.0 / static_cast<double>(st.artifact_hz.size()));
    for (double hz : st.artifact_hz) {
      double phase = rng.UniformReal(0.0, 2.0 * M_PI);
      double w = 2.0 * M_PI * hz / fs;
      for (int i = 0; i < n; ++i)
        x[static_cast<size_t>(i)] += amp * std::sin(w * i + phase);
    }
    double noise =
        st.noise_level[static_cast<size_t>(entry.attack->attacker_to_talker)];
    for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] += noise * rng.Normal();
    ApplyLowpass(x, fs, st.lowpass_hz[static_cast<size_t>(entry.attack->replay_quality)]);
  }

  // Peak-normalize, then the talker-to-ASV distance sets the level.
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  double scale = peak > 0.0
                     ? st.amplitude[static_cast<size_t>(entry.env.talker_to_asv)] / peak
                     : 0.0;
  Waveform w;
  w.sample_rate = fs;
  w.samples.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    w.samples[static_cast<size_t>(i)] = static_cast<float>(x[static_cast<size_t>(i)] * scale);
  return w;
}

SynthResult SynthCorpus(const SynthSpec& spec, const std::string& out_dir,
                        const std::string& subset, int threads) {
  if (spec.n_per_cell <= 0) throw UsageError("n_per_cell must be positive");
  fs::create_directories(fs::path(out_dir) / "wav");

  char subset_tag = static_cast<char>(std::toupper(subset.empty() ? 'X' : subset[0]));
  uint64_t subset_seed = DeriveSeed(spec.seed, /*stream=*/100,
                                    static_cast<uint64_t>(subset_tag));

  std::vector<TrialEntry> entries;
  int utt_counter = 0;
  auto add_entry = [&](const EnvConfig& env, std::optional<AttackConfig> attack) {
    TrialEntry e;
    e.env = env;
    e.attack = attack;
    e.key = attack.has_value() ? Key::kSpoof : Key::kBonaFide;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "SY_%c_%07d", subset_tag, ++utt_counter);
    e.utt_id = buf;
    entries.push_back(std::move(e));
  };

  for (int rs = 0; rs < kNumLevels; ++rs)
    for (int rv = 0; rv < kNumLevels; ++rv)
      for (int ta = 0; ta < kNumLevels; ++ta) {
        EnvConfig env{rs, rv, ta};
        for (int i = 0; i < spec.n_per_cell; ++i) add_entry(env, std::nullopt);
        for (int at = 0; at < kNumLevels; ++at)
          for (int rq = 0; rq < kNumLevels; ++rq)
            for (int i = 0; i < spec.n_per_cell; ++i)
              add_entry(env, AttackConfig{at, rq});
      }

  // Deterministic speaker assignment over a small closed speaker set.
  Rng spk_rng(DeriveSeed(subset_seed, /*stream=*/101));
  for (auto& e : entries) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "SY_%04d",
                  static_cast<int>(spk_rng.UniformInt(20)) + 1);
    e.speaker_id = buf;
  }

  SynthResult result;
  std::string protocol_path =
      (fs::path(out_dir) / ("protocol_" + subset + ".txt")).string();
  std::ofstream proto(protocol_path);
  if (!proto) throw DataError("cannot write protocol: " + protocol_path);
  for (auto& e : entries) {
    e.audio_path = (fs::path(out_dir) / "wav" / (e.utt_id + ".wav")).string();
    proto << FormatProtocolLine(e) << "\n";
    (e.key == Key::kBonaFide ? result.n_bona_fide : result.n_spoof)++;
  }
  proto.close();
  if (!proto) throw DataError("short write on protocol: " + protocol_path);

  ParallelFor(static_cast<int64_t>(entries.size()), threads, [&](int64_t i) {
    const TrialEntry& e = entries[static_cast<size_t>(i)];
    Waveform w = SynthUtterance(
        e, spec, DeriveSeed(subset_seed, /*stream=*/102, static_cast<uint64_t>(i)));
    WriteWav(e.audio_path, w);
  });

  result.protocol_path = protocol_path;
  return result;
}

}  // namespace spoofdet
