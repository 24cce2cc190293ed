// tests/test_audio.cpp
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
// The FLAC decoder is tested against a minimal test-side encoder that
// emits constant, verbatim, fixed-predictor and LPC frames.

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "spoofdet/audio.hpp"
#include "spoofdet/common.hpp"
#include "spoofdet/rng.hpp"

using namespace spoofdet;
namespace fs = std::filesystem;

namespace {

fs::path TempDir() {
  fs::path dir = fs::temp_directory_path() / "spoofdet_audio";
  fs::create_directories(dir);
  return dir;
}

// ------------------------------------------------------------------ WAV --

TEST_CASE("wav round trip is exact after quantization") {
  Rng rng(1);
  Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(2000);
  for (auto& v : w.samples) v = static_cast<float>(rng.UniformReal(-0.9, 0.9));

  std::string path = (TempDir() / "rt.wav").string();
  WriteWav(path, w);
  Waveform r1 = ReadWav(path);
  CHECK(r1.sample_rate == 16000);
  REQUIRE(r1.samples.size() == w.samples.size());

  // Second round trip reproduces the first exactly.
  std::string path2 = (TempDir() / "rt2.wav").string();
  WriteWav(path2, r1);
  Waveform r2 = ReadWav(path2);
  CHECK(r1.samples == r2.samples);

  // Quantization error bounded by one LSB.
  for (size_t i = 0; i < w.samples.size(); ++i)
    CHECK(std::abs(r1.samples[i] - w.samples[i]) <= 1.0f / 32768.0f);
}

TEST_CASE("wav writer clips out-of-range samples") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples = {2.0f, -2.0f, 0.5f};
  std::string path = (TempDir() / "clip.wav").string();
  WriteWav(path, w);
  Waveform r = ReadWav(path);
  CHECK(r.samples[0] == doctest::Approx(32767.0 / 32768.0));
  CHECK(r.samples[1] == doctest::Approx(-1.0));
}

TEST_CASE("wav reader skips unknown chunks") {
  // RIFF with a LIST chunk before fmt/data.
  std::vector<uint8_t> b;
  auto le32 = [&](uint32_t x) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<uint8_t>((x >> (8 * i)) & 0xff));
  };
  auto le16 = [&](uint16_t x) {
    b.push_back(static_cast<uint8_t>(x & 0xff));
    b.push_back(static_cast<uint8_t>(x >> 8));
  };
  auto tag = [&](const char* t) { b.insert(b.end(), t, t + 4); };
  tag("RIFF");
  le32(0);  // patched below
  tag("WAVE");
  tag("LIST");
  le32(4);
  tag("INFO");
  tag("fmt ");
  le32(16);
  le16(1);
  le16(1);
  le32(16000);
  le32(32000);
  le16(2);
  le16(16);
  tag("data");
  le32(4);
  le16(100);
  le16(static_cast<uint16_t>(-200));
  uint32_t riff_size = static_cast<uint32_t>(b.size() - 8);
  std::memcpy(b.data() + 4, &riff_size, 4);

  std::string path = (TempDir() / "chunks.wav").string();
  {
    std::ofstream f(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  }
  Waveform r = ReadWav(path);
  REQUIRE(r.samples.size() == 2);
  CHECK(r.samples[0] == doctest::Approx(100.0 / 32768.0));
  CHECK(r.samples[1] == doctest::Approx(-200.0 / 32768.0));
}

TEST_CASE("wav reader error paths") {
  CHECK_THROWS_AS(ReadWav((TempDir() / "missing.wav").string()), DataError);
  std::string bad = (TempDir() / "bad.wav").string();
  {
    std::ofstream f(bad, std::ios::binary);
    f << "NOTAWAV";
  }
  CHECK_THROWS_AS(ReadWav(bad), DataError);
}

// ----------------------------------------------------------------- FLAC --

class BitWriter {
 public:
  void Put(uint64_t value, int bits) {
    for (int i = bits - 1; i >= 0; --i) {
      cur_ = static_cast<uint8_t>((cur_ << 1) | ((value >> i) & 1));
      if (++nbits_ == 8) {
        bytes_.push_back(cur_);
        cur_ = 0;
        nbits_ = 0;
      }
    }
  }
  void PutSigned(int64_t value, int bits) {
    Put(static_cast<uint64_t>(value) & ((1ull << bits) - 1), bits);
  }
  void Align() {
    while (nbits_ != 0) Put(0, 1);
  }
  std::vector<uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<uint8_t> bytes_;
  uint8_t cur_ = 0;
  int nbits_ = 0;
};

uint8_t TestCrc8(const uint8_t* d, size_t n) {
  uint8_t crc = 0;
  for (size_t i = 0; i < n; ++i) {
    crc ^= d[i];
    for (int k = 0; k < 8; ++k)
      crc = (crc & 0x80) ? static_cast<uint8_t>((crc << 1) ^ 0x07)
                         : static_cast<uint8_t>(crc << 1);
  }
  return crc;
}

void PutRice(BitWriter& bw, int64_t v, int param) {
  uint64_t u = v < 0 ? static_cast<uint64_t>(-2 * v - 1) : static_cast<uint64_t>(2 * v);
  uint64_t q = u >> param;
  for (uint64_t i = 0; i < q; ++i) bw.Put(0, 1);
  bw.Put(1, 1);
  if (param > 0) bw.Put(u & ((1ull << param) - 1), param);
}

enum class SubframeKind { kConstant, kVerbatim, kFixed1, kFixed2, kLpc1 };

// Emits one mono 16-bit FLAC stream whose frames use the given subframe
// kinds over consecutive equal-size blocks of x.
std::vector<uint8_t> EncodeFlac(const std::vector<int16_t>& x, int block_size,
                                const std::vector<SubframeKind>& kinds) {
  std::vector<uint8_t> out;
  out.insert(out.end(), {'f', 'L', 'a', 'C'});
  BitWriter info;
  info.Put(1, 1);    // last metadata block
  info.Put(0, 7);    // STREAMINFO
  info.Put(34, 24);  // length
  info.Put(static_cast<uint64_t>(block_size), 16);
  info.Put(static_cast<uint64_t>(block_size), 16);
  info.Put(0, 24);
  info.Put(0, 24);
  info.Put(16000, 20);
  info.Put(0, 3);   // channels - 1
  info.Put(15, 5);  // bits per sample - 1
  info.Put(x.size(), 36);
  for (int i = 0; i < 16; ++i) info.Put(0, 8);  // md5
  out.insert(out.end(), info.bytes().begin(), info.bytes().end());

  int n_frames = static_cast<int>(x.size()) / block_size;
  for (int fr = 0; fr < n_frames; ++fr) {
    BitWriter bw;
    bw.Put(0x3ffe, 14);
    bw.Put(0, 1);  // reserved
    bw.Put(0, 1);  // fixed blocking
    bw.Put(7, 4);  // 16-bit block size follows
    bw.Put(0, 4);  // sample rate from STREAMINFO
    bw.Put(0, 4);  // mono
    bw.Put(4, 3);  // 16 bits per sample
    bw.Put(0, 1);  // reserved
    bw.Put(static_cast<uint64_t>(fr), 8);  // frame number (UTF-8, < 128)
    bw.Put(static_cast<uint64_t>(block_size - 1), 16);
    bw.Align();
    std::vector<uint8_t>& hdr = bw.bytes();
    hdr.push_back(TestCrc8(hdr.data(), hdr.size()));

    BitWriter body;
    const int16_t* blk = x.data() + fr * block_size;
    SubframeKind kind = kinds[static_cast<size_t>(fr) % kinds.size()];
    body.Put(0, 1);  // padding
    switch (kind) {
      case SubframeKind::kConstant:
        body.Put(0, 6);
        body.Put(0, 1);
        body.PutSigned(blk[0], 16);
        break;
      case SubframeKind::kVerbatim:
        body.Put(1, 6);
        body.Put(0, 1);
        for (int i = 0; i < block_size; ++i) body.PutSigned(blk[i], 16);
        break;
      case SubframeKind::kFixed1:
      case SubframeKind::kFixed2: {
        int order = kind == SubframeKind::kFixed1 ? 1 : 2;
        body.Put(8 + static_cast<uint64_t>(order), 6);
        body.Put(0, 1);
        for (int i = 0; i < order; ++i) body.PutSigned(blk[i], 16);
        body.Put(0, 2);  // rice method, 4-bit params
        body.Put(0, 4);  // partition order 0
        body.Put(6, 4);  // rice parameter
        for (int i = order; i < block_size; ++i) {
          int64_t pred = order == 1 ? blk[i - 1] : 2 * blk[i - 1] - blk[i - 2];
          PutRice(body, blk[i] - pred, 6);
        }
        break;
      }
      case SubframeKind::kLpc1: {
        // order-1 LPC: coefficient 2, shift 1 -> prediction (2*prev)>>1.
        body.Put(32 + 0, 6);
        body.Put(0, 1);
        body.PutSigned(blk[0], 16);
        body.Put(4, 4);           // precision - 1 -> 5 bits
        body.PutSigned(1, 5);     // shift
        body.PutSigned(2, 5);     // coefficient
        body.Put(0, 2);
        body.Put(0, 4);
        body.Put(6, 4);
        for (int i = 1; i < block_size; ++i) {
          int64_t pred = (2 * static_cast<int64_t>(blk[i - 1])) >> 1;
          PutRice(body, blk[i] - pred, 6);
        }
        break;
      }
    }
    body.Align();
    body.Put(0, 16);  // frame CRC-16 (not validated by the decoder)

    out.insert(out.end(), hdr.begin(), hdr.end());
    out.insert(out.end(), body.bytes().begin(), body.bytes().end());
  }
  return out;
}

std::vector<int16_t> SmoothSignal(int n, Rng& rng) {
  std::vector<int16_t> x(static_cast<size_t>(n));
  double state = 0.0;
  for (int i = 0; i < n; ++i) {
    state = 0.95 * state + 40.0 * rng.Normal();
    x[static_cast<size_t>(i)] =
        static_cast<int16_t>(std::lround(3000.0 * std::sin(0.05 * i) + state));
  }
  return x;
}

TEST_CASE("flac decode: constant and verbatim subframes") {
  std::vector<int16_t> x(512, 777);
  Rng rng(2);
  for (size_t i = 256; i < 512; ++i)
    x[i] = static_cast<int16_t>(rng.UniformInt(65536) - 32768);
  std::vector<uint8_t> flac =
      EncodeFlac(x, 256, {SubframeKind::kConstant, SubframeKind::kVerbatim});
  Waveform w = DecodeFlac(flac, "test");
  CHECK(w.sample_rate == 16000);
  REQUIRE(w.samples.size() == 512);
  for (size_t i = 0; i < 512; ++i)
    CHECK(w.samples[i] == doctest::Approx(x[i] / 32768.0).epsilon(1e-9));
}

TEST_CASE("flac decode: fixed predictors with rice residuals") {
  Rng rng(3);
  std::vector<int16_t> x = SmoothSignal(768, rng);
  std::vector<uint8_t> flac =
      EncodeFlac(x, 256, {SubframeKind::kFixed1, SubframeKind::kFixed2});
  Waveform w = DecodeFlac(flac, "test");
  REQUIRE(w.samples.size() == 768);
  for (size_t i = 0; i < x.size(); ++i)
    CHECK(w.samples[i] == doctest::Approx(x[i] / 32768.0).epsilon(1e-9));
}

TEST_CASE("flac decode: LPC subframe") {
  Rng rng(4);
  std::vector<int16_t> x = SmoothSignal(256, rng);
  std::vector<uint8_t> flac = EncodeFlac(x, 256, {SubframeKind::kLpc1});
  Waveform w = DecodeFlac(flac, "test");
  REQUIRE(w.samples.size() == 256);
  for (size_t i = 0; i < x.size(); ++i)
    CHECK(w.samples[i] == doctest::Approx(x[i] / 32768.0).epsilon(1e-9));
}

TEST_CASE("flac decode via file and container sniffing") {
  Rng rng(5);
  std::vector<int16_t> x = SmoothSignal(512, rng);
  std::vector<uint8_t> flac = EncodeFlac(x, 256, {SubframeKind::kFixed2});
  std::string path = (TempDir() / "sig.flac").string();
  {
    std::ofstream f(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(flac.data()),
            static_cast<std::streamsize>(flac.size()));
  }
  Waveform w = ReadAudio(path);  // magic-based dispatch
  REQUIRE(w.samples.size() == 512);
  CHECK(w.samples[100] == doctest::Approx(x[100] / 32768.0).epsilon(1e-9));
}

TEST_CASE("flac decoder rejects stereo and garbage") {
  std::vector<uint8_t> garbage = {'f', 'L', 'a', 'C', 0x00};
  CHECK_THROWS_AS(DecodeFlac(garbage, "garbage"), DataError);

  std::vector<int16_t> x(256, 5);
  std::vector<uint8_t> flac = EncodeFlac(x, 256, {SubframeKind::kConstant});
  // Patch STREAMINFO channels field (byte 12 of the 34-byte block holds
  // sample-rate low bits + channels + bps top bit).
  flac[4 + 4 + 12] |= 0x02;  // channels-1 = 1
  CHECK_THROWS_AS(DecodeFlac(flac, "stereo"), DataError);

  std::vector<uint8_t> not_flac = {'R', 'I', 'F', 'F'};
  CHECK_THROWS_AS(DecodeFlac(not_flac, "riff"), DataError);
}

}  // namespace
