// spoofdet/features.hpp
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
// Magnitude spectrograms: 2048-point transform over 50 ms Hann windows with
// a 30 ms shift, no mean or variance normalization.  Training consumes
// fixed-length random crops; inference consumes all frames.

#ifndef SPOOFDET_FEATURES_HPP_
#define SPOOFDET_FEATURES_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "spoofdet/audio.hpp"
#include "spoofdet/rng.hpp"

namespace spoofdet {

inline constexpr int kWindowSamples = 800;  // 50 ms at 16 kHz
inline constexpr int kHopSamples = 480;     // 30 ms at 16 kHz
inline constexpr int kFftSize = 2048;
inline constexpr int kNumBins = kFftSize / 2 + 1;  // 1025
inline constexpr int kSampleRate = 16000;

// T x 1025 non-negative magnitude matrix, row-major.
struct Spectrogram {
  int64_t num_frames = 0;
  std::vector<float> values;  // num_frames * kNumBins

  float* frame(int64_t t) { return values.data() + t * kNumBins; }
  const float* frame(int64_t t) const { return values.data() + t * kNumBins; }
};

// Frame count for a waveform of n samples: floor((n - 800) / 480) + 1.
int64_t NumStftFrames(int64_t num_samples);

// Magnitude STFT.  Requires sample_rate == 16000 and at least one full
// window of samples; throws DataError otherwise.
Spectrogram StftMagnitude(const Waveform& w);

// Contiguous `length`-frame crop with a uniformly random start.  Inputs
// shorter than `length` are repeat-padded cyclically instead.
Spectrogram RandomCrop(const Spectrogram& s, int64_t length, Rng& rng);

// Identity pass-through: at inference the entire (variable-length) frame
// sequence is used.
inline const Spectrogram& FullFrames(const Spectrogram& s) { return s; }

// Cached-feature file: magic, utt_id, T, 1025, then row-major 32-bit
// little-endian floats.
void WriteFeatureFile(const std::string& path, const std::string& utt_id,
                      const Spectrogram& s);
Spectrogram ReadFeatureFile(const std::string& path, std::string* utt_id = nullptr);

}  // namespace spoofdet

#endif  // SPOOFDET_FEATURES_HPP_
