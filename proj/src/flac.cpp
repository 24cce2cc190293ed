// spoofdet/flac.cpp
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
// Minimal FLAC decoder for mono fixed-point streams: constant, verbatim,
// fixed-predictor and LPC subframes with Rice-coded residuals.  Covers the
// profile used by speech corpora distributed as 16-bit mono FLAC.

#include <cstdint>
#include <string>
#include <vector>

#include "spoofdet/audio.hpp"
#include "spoofdet/common.hpp"

namespace spoofdet {

namespace {

class BitReader {
 public:
  BitReader(const uint8_t* data, size_t size) : data_(data), size_(size) {}

  bool AtEnd() const { return byte_ == size_ && bit_ == 0; }
  size_t BytePos() const { return byte_; }

  bool HasBits(uint64_t n) const {
    uint64_t avail = (size_ - byte_) * 8 - bit_;
    return n <= avail;
  }

  uint64_t ReadBits(int n) {
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      if (byte_ >= size_) throw DataError("FLAC: unexpected end of stream");
      int b = (data_[byte_] >> (7 - bit_)) & 1;
      v = (v << 1) | static_cast<uint64_t>(b);
      if (++bit_ == 8) {
        bit_ = 0;
        ++byte_;
      }
    }
    return v;
  }

  int64_t ReadSigned(int n) {
    uint64_t v = ReadBits(n);
    if (n > 0 && (v & (1ull << (n - 1)))) {
      v |= ~((1ull << n) - 1);  // sign extend
    }
    return static_cast<int64_t>(v);
  }

  // Count of zero bits before the next one bit.
  uint32_t ReadUnary() {
    uint32_t q = 0;
    while (ReadBits(1) == 0) {
      ++q;
      if (q > 1u << 24) throw DataError("FLAC: runaway unary code");
    }
    return q;
  }

  void AlignToByte() {
    if (bit_ != 0) {
      bit_ = 0;
      ++byte_;
    }
  }

  void SkipBytes(size_t n) {
    SPOOFDET_CHECK(bit_ == 0, "byte skip while not aligned");
    if (byte_ + n > size_) throw DataError("FLAC: unexpected end of stream");
    byte_ += n;
  }

 private:
  const uint8_t* data_;
  size_t size_;
  size_t byte_ = 0;
  int bit_ = 0;
};

uint8_t Crc8(const uint8_t* data, size_t n) {
  uint8_t crc = 0;
  for (size_t i = 0; i < n; ++i) {
    crc ^= data[i];
    for (int k = 0; k < 8; ++k)
      crc = (crc & 0x80) ? static_cast<uint8_t>((crc << 1) ^ 0x07)
                         : static_cast<uint8_t>(crc << 1);
  }
  return crc;
}

struct StreamInfo {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  uint64_t total_samples = 0;
};

void ReadCodedNumber(BitReader& br) {
  // UTF-8 style frame/sample number; the value itself is not needed for
  // sequential decoding, but the bytes must be consumed.
  uint64_t first = br.ReadBits(8);
  int extra = 0;
  if ((first & 0x80) == 0) {
    extra = 0;
  } else {
    uint8_t mask = 0x40;
    while (first & mask) {
      ++extra;
      mask >>= 1;
    }
    if (extra < 1 || extra > 6) throw DataError("FLAC: bad coded number");
  }
  for (int i = 0; i < extra; ++i) {
    uint64_t b = br.ReadBits(8);
    if ((b & 0xc0) != 0x80) throw DataError("FLAC: bad coded number byte");
  }
}

void DecodeResidual(BitReader& br, int block_size, int predictor_order,
                    std::vector<int64_t>& out) {
  int method = static_cast<int>(br.ReadBits(2));
  if (method > 1) throw DataError("FLAC: reserved residual coding method");
  int param_bits = method == 0 ? 4 : 5;
  int escape = method == 0 ? 15 : 31;
  int partition_order = static_cast<int>(br.ReadBits(4));
  int partitions = 1 << partition_order;
  if (block_size % partitions != 0)
    throw DataError("FLAC: partition order does not divide block size");
  for (int p = 0; p < partitions; ++p) {
    int count = block_size >> partition_order;
    if (p == 0) count -= predictor_order;
    if (count < 0) throw DataError("FLAC: negative partition sample count");
    int param = static_cast<int>(br.ReadBits(param_bits));
    if (param == escape) {
      int raw_bits = static_cast<int>(br.ReadBits(5));
      for (int i = 0; i < count; ++i)
        out.push_back(raw_bits == 0 ? 0 : br.ReadSigned(raw_bits));
    } else {
      for (int i = 0; i < count; ++i) {
        uint64_t q = br.ReadUnary();
        uint64_t r = param == 0 ? 0 : br.ReadBits(param);
        uint64_t v = (q << param) | r;
        out.push_back(static_cast<int64_t>(v >> 1) ^ -static_cast<int64_t>(v & 1));
      }
    }
  }
}

void RestoreFixed(int order, std::vector<int64_t>& x) {
  // In-place reconstruction from warmup samples + residuals.
  for (size_t i = static_cast<size_t>(order); i < x.size(); ++i) {
    switch (order) {
      case 0: break;
      case 1: x[i] += x[i - 1]; break;
      case 2: x[i] += 2 * x[i - 1] - x[i - 2]; break;
      case 3: x[i] += 3 * x[i - 1] - 3 * x[i - 2] + x[i - 3]; break;
      case 4: x[i] += 4 * x[i - 1] - 6 * x[i - 2] + 4 * x[i - 3] - x[i - 4]; break;
      default: throw DataError("FLAC: bad fixed predictor order");
    }
  }
}

std::vector<int64_t> DecodeSubframe(BitReader& br, int block_size, int bps) {
  if (br.ReadBits(1) != 0) throw DataError("FLAC: bad subframe padding bit");
  int type = static_cast<int>(br.ReadBits(6));
  int wasted = 0;
  if (br.ReadBits(1) == 1) wasted = static_cast<int>(br.ReadUnary()) + 1;
  int eff_bps = bps - wasted;
  if (eff_bps <= 0) throw DataError("FLAC: wasted bits exceed sample size");

  std::vector<int64_t> x;
  x.reserve(static_cast<size_t>(block_size));
  if (type == 0) {  // CONSTANT
    int64_t v = br.ReadSigned(eff_bps);
    x.assign(static_cast<size_t>(block_size), v);
  } else if (type == 1) {  // VERBATIM
    for (int i = 0; i < block_size; ++i) x.push_back(br.ReadSigned(eff_bps));
  } else if (type >= 8 && type <= 12) {  // FIXED, order = type - 8
    int order = type - 8;
    for (int i = 0; i < order; ++i) x.push_back(br.ReadSigned(eff_bps));
    DecodeResidual(br, block_size, order, x);
    RestoreFixed(order, x);
  } else if (type >= 32) {  // LPC, order = (type & 31) + 1
    int order = (type & 31) + 1;
    for (int i = 0; i < order; ++i) x.push_back(br.ReadSigned(eff_bps));
    int precision = static_cast<int>(br.ReadBits(4)) + 1;
    if (precision == 16) throw DataError("FLAC: invalid LPC precision");
    int shift = static_cast<int>(br.ReadSigned(5));
    if (shift < 0) throw DataError("FLAC: negative LPC shift");
    std::vector<int64_t> coef(static_cast<size_t>(order));
    for (int i = 0; i < order; ++i) coef[static_cast<size_t>(i)] = br.ReadSigned(precision);
    DecodeResidual(br, block_size, order, x);
    for (size_t i = static_cast<size_t>(order); i < x.size(); ++i) {
      int64_t pred = 0;
      for (int j = 0; j < order; ++j) pred += coef[static_cast<size_t>(j)] * x[i - 1 - static_cast<size_t>(j)];
      x[i] += pred >> shift;
    }
  } else {
    throw DataError("FLAC: reserved subframe type " + std::to_string(type));
  }
  if (wasted > 0)
    for (auto& v : x) v <<= wasted;
  return x;
}

}  // namespace

Waveform DecodeFlac(const std::vector<uint8_t>& bytes, const std::string& name) {
  if (bytes.size() < 8 || bytes[0] != 'f' || bytes[1] != 'L' || bytes[2] != 'a' ||
      bytes[3] != 'C') {
    throw DataError("not a FLAC stream: " + name);
  }
  BitReader br(bytes.data(), bytes.size());
  br.SkipBytes(4);

  StreamInfo info;
  bool have_streaminfo = false;
  bool last = false;
  while (!last) {
    last = br.ReadBits(1) == 1;
    int type = static_cast<int>(br.ReadBits(7));
    size_t length = static_cast<size_t>(br.ReadBits(24));
    if (type == 0) {
      if (length != 34) throw DataError("FLAC: bad STREAMINFO length: " + name);
      br.ReadBits(16);  // min block size
      br.ReadBits(16);  // max block size
      br.ReadBits(24);  // min frame size
      br.ReadBits(24);  // max frame size
      info.sample_rate = static_cast<int>(br.ReadBits(20));
      info.channels = static_cast<int>(br.ReadBits(3)) + 1;
      info.bits_per_sample = static_cast<int>(br.ReadBits(5)) + 1;
      info.total_samples = br.ReadBits(36);
      br.SkipBytes(16);  // md5
      have_streaminfo = true;
    } else {
      br.SkipBytes(length);
    }
  }
  if (!have_streaminfo) throw DataError("FLAC: missing STREAMINFO: " + name);
  if (info.channels != 1)
    throw DataError("only mono FLAC supported (" + std::to_string(info.channels) +
                    " channels): " + name);

  Waveform w;
  w.sample_rate = info.sample_rate;
  double scale = 1.0 / static_cast<double>(1ll << (info.bits_per_sample - 1));

  while (br.HasBits(16)) {
    size_t frame_start = br.BytePos();
    uint64_t sync = br.ReadBits(14);
    if (sync != 0x3ffe) throw DataError("FLAC: lost frame sync: " + name);
    br.ReadBits(1);  // reserved
    br.ReadBits(1);  // blocking strategy
    int bs_code = static_cast<int>(br.ReadBits(4));
    int sr_code = static_cast<int>(br.ReadBits(4));
    int chan_assign = static_cast<int>(br.ReadBits(4));
    int ss_code = static_cast<int>(br.ReadBits(3));
    br.ReadBits(1);  // reserved
    ReadCodedNumber(br);

    int block_size = 0;
    switch (bs_code) {
      case 1: block_size = 192; break;
      case 2: case 3: case 4: case 5: block_size = 576 << (bs_code - 2); break;
      case 6: block_size = static_cast<int>(br.ReadBits(8)) + 1; break;
      case 7: block_size = static_cast<int>(br.ReadBits(16)) + 1; break;
      default:
        if (bs_code >= 8) block_size = 256 << (bs_code - 8);
        else throw DataError("FLAC: reserved block size code: " + name);
    }
    if (sr_code == 12) br.ReadBits(8);
    else if (sr_code == 13 || sr_code == 14) br.ReadBits(16);

    int bps = info.bits_per_sample;
    switch (ss_code) {
      case 0: break;  // from STREAMINFO
      case 1: bps = 8; break;
      case 2: bps = 12; break;
      case 4: bps = 16; break;
      case 5: bps = 20; break;
      case 6: bps = 24; break;
      default: throw DataError("FLAC: reserved sample size code: " + name);
    }
    // Header CRC-8 covers everything up to this point in the frame.
    uint8_t expect = static_cast<uint8_t>(br.ReadBits(8));
    uint8_t actual = Crc8(bytes.data() + frame_start, br.BytePos() - 1 - frame_start);
    if (expect != actual) throw DataError("FLAC: frame header CRC mismatch: " + name);

    if (chan_assign != 0)
      throw DataError("FLAC: non-mono channel assignment: " + name);

    std::vector<int64_t> samples = DecodeSubframe(br, block_size, bps);
    br.AlignToByte();
    br.SkipBytes(2);  // frame CRC-16

    for (int64_t v : samples)
      w.samples.push_back(static_cast<float>(static_cast<double>(v) * scale));
    if (info.total_samples > 0 && w.samples.size() >= info.total_samples) break;
  }

  if (info.total_samples > 0 && w.samples.size() > info.total_samples)
    w.samples.resize(static_cast<size_t>(info.total_samples));
  return w;
}

}  // namespace spoofdet
