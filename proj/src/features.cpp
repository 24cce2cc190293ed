// spoofdet/features.cpp
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

#include "spoofdet/features.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>

#include <fftw3.h>

#include "spoofdet/common.hpp"

namespace spoofdet {

namespace {

// One shared r2c plan; created with FFTW_UNALIGNED so it can execute on any
// caller-owned buffers (the new-array execute interface).
fftw_plan SharedPlan() {
  static std::once_flag once;
  static fftw_plan plan = nullptr;
  std::call_once(once, []() {
    std::vector<double> in(kFftSize, 0.0);
    std::vector<fftw_complex> out(kNumBins);
    plan = fftw_plan_dft_r2c_1d(kFftSize, in.data(), out.data(),
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    SPOOFDET_CHECK(plan != nullptr, "fftw plan creation failed");
  });
  return plan;
}

const std::vector<double>& HannWindow() {
  static const std::vector<double> win = []() {
    std::vector<double> w(kWindowSamples);
    for (int n = 0; n < kWindowSamples; ++n)
      w[n] = 0.5 * (1.0 - std::cos(2.0 * M_PI * n / kWindowSamples));
    return w;
  }();
  return win;
}

}  // namespace

int64_t NumStftFrames(int64_t num_samples) {
  if (num_samples < kWindowSamples) return 0;
  return (num_samples - kWindowSamples) / kHopSamples + 1;
}

Spectrogram StftMagnitude(const Waveform& w) {
  if (w.sample_rate != kSampleRate) {
    throw DataError("expected " + std::to_string(kSampleRate) +
                    " Hz audio, got " + std::to_string(w.sample_rate) + " Hz");
  }
  int64_t n = static_cast<int64_t>(w.samples.size());
  int64_t frames = NumStftFrames(n);
  if (frames <= 0) {
    throw DataError("waveform too short for one 50 ms window (" +
                    std::to_string(n) + " samples)");
  }
  const std::vector<double>& win = HannWindow();
  fftw_plan plan = SharedPlan();

  Spectrogram s;
  s.num_frames = frames;
  s.values.resize(static_cast<size_t>(frames) * kNumBins);

  std::vector<double> in(kFftSize, 0.0);
  std::vector<fftw_complex> out(kNumBins);
  for (int64_t t = 0; t < frames; ++t) {
    const float* src = w.samples.data() + t * kHopSamples;
    for (int i = 0; i < kWindowSamples; ++i)
      in[static_cast<size_t>(i)] = static_cast<double>(src[i]) * win[static_cast<size_t>(i)];
    // Window is zero-padded to the 2048-point transform size.
    fftw_execute_dft_r2c(plan, in.data(), out.data());
    float* dst = s.frame(t);
    for (int k = 0; k < kNumBins; ++k)
      dst[k] = static_cast<float>(std::hypot(out[static_cast<size_t>(k)][0],
                                             out[static_cast<size_t>(k)][1]));
  }
  return s;
}

Spectrogram RandomCrop(const Spectrogram& s, int64_t length, Rng& rng) {
  SPOOFDET_CHECK(s.num_frames > 0, "empty spectrogram");
  SPOOFDET_CHECK(length > 0, "crop length must be positive");
  Spectrogram out;
  out.num_frames = length;
  out.values.resize(static_cast<size_t>(length) * kNumBins);
  if (s.num_frames >= length) {
    int64_t start = static_cast<int64_t>(
        rng.UniformInt(static_cast<uint64_t>(s.num_frames - length + 1)));
    std::memcpy(out.values.data(), s.frame(start),
                static_cast<size_t>(length) * kNumBins * sizeof(float));
  } else {
    // Cyclic repeat-padding.
    for (int64_t t = 0; t < length; ++t)
      std::memcpy(out.frame(t), s.frame(t % s.num_frames),
                  kNumBins * sizeof(float));
  }
  return out;
}

namespace {
constexpr char kFeatureMagic[8] = {'S', 'P', 'E', 'C', 'F', '0', '0', '1'};
}

void WriteFeatureFile(const std::string& path, const std::string& utt_id,
                      const Spectrogram& s) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write feature file: " + path);
  f.write(kFeatureMagic, 8);
  uint32_t id_len = static_cast<uint32_t>(utt_id.size());
  uint64_t frames = static_cast<uint64_t>(s.num_frames);
  uint64_t bins = kNumBins;
  f.write(reinterpret_cast<const char*>(&id_len), 4);
  f.write(utt_id.data(), id_len);
  f.write(reinterpret_cast<const char*>(&frames), 8);
  f.write(reinterpret_cast<const char*>(&bins), 8);
  f.write(reinterpret_cast<const char*>(s.values.data()),
          static_cast<std::streamsize>(s.values.size() * sizeof(float)));
  if (!f) throw DataError("short write on feature file: " + path);
}

Spectrogram ReadFeatureFile(const std::string& path, std::string* utt_id) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open feature file: " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kFeatureMagic, 8) != 0)
    throw DataError("not a feature file: " + path);
  uint32_t id_len = 0;
  f.read(reinterpret_cast<char*>(&id_len), 4);
  std::string id(id_len, '\0');
  f.read(id.data(), id_len);
  uint64_t frames = 0, bins = 0;
  f.read(reinterpret_cast<char*>(&frames), 8);
  f.read(reinterpret_cast<char*>(&bins), 8);
  if (!f || bins != static_cast<uint64_t>(kNumBins))
    throw DataError("malformed feature file header: " + path);
  Spectrogram s;
  s.num_frames = static_cast<int64_t>(frames);
  s.values.resize(static_cast<size_t>(frames * bins));
  f.read(reinterpret_cast<char*>(s.values.data()),
         static_cast<std::streamsize>(s.values.size() * sizeof(float)));
  if (!f) throw DataError("truncated feature file: " + path);
  if (utt_id != nullptr) *utt_id = id;
  return s;
}

}  // namespace spoofdet
