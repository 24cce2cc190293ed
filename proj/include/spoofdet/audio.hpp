// spoofdet/audio.hpp
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

#ifndef SPOOFDET_AUDIO_HPP_
#define SPOOFDET_AUDIO_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace spoofdet {

struct Waveform {
  std::vector<float> samples;  // in [-1, 1)
  int sample_rate = 16000;
};

// Reads a mono 16-bit audio file; the container (WAV or FLAC) is detected
// from the file magic.  Throws DataError on unsupported or malformed input.
Waveform ReadAudio(const std::string& path);

Waveform ReadWav(const std::string& path);

// Writes mono 16-bit PCM WAV; samples are clipped to [-1, 1).
void WriteWav(const std::string& path, const Waveform& w);

// Decodes a mono 16-bit FLAC stream (constant, verbatim, fixed and LPC
// subframes).  Declared here, implemented in flac.cpp.
Waveform ReadFlac(const std::string& path);
Waveform DecodeFlac(const std::vector<uint8_t>& bytes, const std::string& name);

}  // namespace spoofdet

#endif  // SPOOFDET_AUDIO_HPP_
