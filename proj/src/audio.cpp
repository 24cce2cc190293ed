// spoofdet/audio.cpp
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

#include "spoofdet/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "spoofdet/common.hpp"

namespace spoofdet {

namespace {

uint32_t ReadLE32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t ReadLE16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void PutLE32(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back(static_cast<uint8_t>(x & 0xff));
  v.push_back(static_cast<uint8_t>((x >> 8) & 0xff));
  v.push_back(static_cast<uint8_t>((x >> 16) & 0xff));
  v.push_back(static_cast<uint8_t>((x >> 24) & 0xff));
}

void PutLE16(std::vector<uint8_t>& v, uint16_t x) {
  v.push_back(static_cast<uint8_t>(x & 0xff));
  v.push_back(static_cast<uint8_t>((x >> 8) & 0xff));
}

std::vector<uint8_t> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open audio file: " + path);
  in.seekg(0, std::ios::end);
  std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<uint8_t> bytes(static_cast<size_t>(size));
  if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw DataError("short read on audio file: " + path);
  return bytes;
}

Waveform DecodeWav(const std::vector<uint8_t>& b, const std::string& path) {
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 ||
      std::memcmp(b.data() + 8, "WAVE", 4) != 0) {
    throw DataError("not a RIFF/WAVE file: " + path);
  }
  size_t pos = 12;
  int channels = 0, bits = 0, rate = 0, format = 0;
  const uint8_t* data = nullptr;
  size_t data_size = 0;
  while (pos + 8 <= b.size()) {
    const uint8_t* hdr = b.data() + pos;
    uint32_t chunk_size = ReadLE32(hdr + 4);
    const uint8_t* payload = hdr + 8;
    if (pos + 8 + chunk_size > b.size()) {
      // Tolerate a truncated final chunk size field as written by some tools.
      chunk_size = static_cast<uint32_t>(b.size() - pos - 8);
    }
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw DataError("malformed fmt chunk: " + path);
      format = ReadLE16(payload);
      channels = ReadLE16(payload + 2);
      rate = static_cast<int>(ReadLE32(payload + 4));
      bits = ReadLE16(payload + 14);
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = payload;
      data_size = chunk_size;
    }
    pos += 8 + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }
  if (format != 1) throw DataError("only PCM WAV supported: " + path);
  if (channels != 1) throw DataError("only mono audio supported: " + path);
  if (bits != 16) throw DataError("only 16-bit audio supported: " + path);
  if (data == nullptr) throw DataError("WAV file has no data chunk: " + path);

  Waveform w;
  w.sample_rate = rate;
  size_t n = data_size / 2;
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    int16_t s = static_cast<int16_t>(ReadLE16(data + 2 * i));
    w.samples[i] = static_cast<float>(s) / 32768.0f;
  }
  return w;
}

}  // namespace

Waveform ReadWav(const std::string& path) {
  return DecodeWav(ReadFileBytes(path), path);
}

Waveform ReadFlac(const std::string& path) {
  return DecodeFlac(ReadFileBytes(path), path);
}

Waveform ReadAudio(const std::string& path) {
  std::vector<uint8_t> bytes = ReadFileBytes(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "fLaC", 4) == 0)
    return DecodeFlac(bytes, path);
  return DecodeWav(bytes, path);
}

void WriteWav(const std::string& path, const Waveform& w) {
  std::vector<uint8_t> out;
  size_t n = w.samples.size();
  uint32_t data_size = static_cast<uint32_t>(n * 2);
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  PutLE32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  PutLE32(out, 16);
  PutLE16(out, 1);  // PCM
  PutLE16(out, 1);  // mono
  PutLE32(out, static_cast<uint32_t>(w.sample_rate));
  PutLE32(out, static_cast<uint32_t>(w.sample_rate * 2));  // byte rate
  PutLE16(out, 2);   // block align
  PutLE16(out, 16);  // bits
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  PutLE32(out, data_size);
  for (float x : w.samples) {
    float c = std::clamp(x, -1.0f, 32767.0f / 32768.0f);
    int16_t s = static_cast<int16_t>(std::lrintf(c * 32768.0f));
    PutLE16(out, static_cast<uint16_t>(s));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write audio file: " + path);
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("short write on audio file: " + path);
}

}  // namespace spoofdet
