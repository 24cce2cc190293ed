// spoofdet/checkpoint.hpp
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
// Checkpoint files: a JSON manifest (architecture, fingerprint, epoch,
// seed) followed by raw parameter/buffer blobs and optional optimizer
// state.  Loading refuses a fingerprint mismatch.

#ifndef SPOOFDET_CHECKPOINT_HPP_
#define SPOOFDET_CHECKPOINT_HPP_

#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "spoofdet/network.hpp"
#include "spoofdet/optim.hpp"

namespace spoofdet {

nlohmann::json ArchToJson(const EncoderConfig& cfg, Scheme scheme,
                          const std::optional<Category>& category,
                          int64_t subsidiary_hidden);
void ArchFromJson(const nlohmann::json& j, EncoderConfig* cfg, Scheme* scheme,
                  std::optional<Category>* category, int64_t* subsidiary_hidden);

namespace ckpt_detail {

inline constexpr char kMagic[8] = {'S', 'P', 'F', 'D', 'C', 'K', 'P', '1'};

template <typename T>
const char* DtypeName() {
  if constexpr (sizeof(T) == 4) return "f32";
  else return "f64";
}

template <typename T>
void WriteBlob(std::ofstream& f, const std::vector<T>& v) {
  f.write(reinterpret_cast<const char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
void ReadBlob(std::ifstream& f, std::vector<T>& v) {
  f.read(reinterpret_cast<char*>(v.data()),
         static_cast<std::streamsize>(v.size() * sizeof(T)));
}

}  // namespace ckpt_detail

template <typename T>
void SaveCheckpoint(const std::string& path, Model<T>& model,
                    const AmsGrad<T>* opt, int64_t epoch, uint64_t seed) {
  using nlohmann::json;
  ParamList<T> params = model.Params();
  BufferList<T> buffers = model.Buffers();

  json header;
  header["version"] = 1;
  header["dtype"] = ckpt_detail::DtypeName<T>();
  header["fingerprint"] = model.Fingerprint();
  header["epoch"] = epoch;
  header["seed"] = seed;
  header["ring_initialized"] = model.ring_initialized;
  header["arch"] = ArchToJson(model.enc_cfg, model.scheme, model.category,
                              model.subsidiary_hidden);
  json jp = json::array();
  for (const auto& p : params) jp.push_back({{"name", p.name}, {"numel", p.value->numel()}});
  header["params"] = jp;
  json jb = json::array();
  for (const auto& b : buffers) jb.push_back({{"name", b.name}, {"numel", b.value->numel()}});
  header["buffers"] = jb;
  json jo = json::array();
  if (opt != nullptr) {
    for (const auto& [name, st] : opt->states())
      jo.push_back({{"name", name}, {"numel", st.m.size()}, {"t", st.t}});
  }
  header["optimizer"] = jo;

  std::string htext = header.dump();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write checkpoint: " + path);
  f.write(ckpt_detail::kMagic, 8);
  uint64_t hlen = htext.size();
  f.write(reinterpret_cast<const char*>(&hlen), 8);
  f.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (const auto& p : params) ckpt_detail::WriteBlob(f, p.value->data);
  for (const auto& b : buffers) ckpt_detail::WriteBlob(f, b.value->data);
  if (opt != nullptr) {
    for (const auto& [name, st] : opt->states()) {
      ckpt_detail::WriteBlob(f, st.m);
      ckpt_detail::WriteBlob(f, st.v);
      ckpt_detail::WriteBlob(f, st.vmax);
    }
  }
  if (!f) throw DataError("short write on checkpoint: " + path);
}

template <typename T>
nlohmann::json ReadCheckpointHeader(std::ifstream& f, const std::string& path) {
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, ckpt_detail::kMagic, 8) != 0)
    throw DataError("not a checkpoint file: " + path);
  uint64_t hlen = 0;
  f.read(reinterpret_cast<char*>(&hlen), 8);
  std::string htext(hlen, '\0');
  f.read(htext.data(), static_cast<std::streamsize>(hlen));
  if (!f) throw DataError("truncated checkpoint header: " + path);
  nlohmann::json header = nlohmann::json::parse(htext, nullptr, false);
  if (header.is_discarded())
    throw DataError("malformed checkpoint header: " + path);
  if (header.at("dtype").get<std::string>() != ckpt_detail::DtypeName<T>())
    throw DataError("checkpoint dtype mismatch: " + path);
  return header;
}

// Loads parameters (and optimizer state if `opt` is non-null and the file
// has it) into an already-constructed model with the same architecture.
template <typename T>
nlohmann::json LoadCheckpointInto(const std::string& path, Model<T>& model,
                                  AmsGrad<T>* opt = nullptr) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint: " + path);
  nlohmann::json header = ReadCheckpointHeader<T>(f, path);

  std::string fp = header.at("fingerprint").get<std::string>();
  if (fp != model.Fingerprint())
    throw DataError("checkpoint fingerprint mismatch: file has '" + fp +
                    "', model is '" + model.Fingerprint() + "'");

  ParamList<T> params = model.Params();
  BufferList<T> buffers = model.Buffers();
  size_t i = 0;
  for (const auto& jp : header.at("params")) {
    SPOOFDET_CHECK(i < params.size(), "parameter count mismatch");
    const auto& p = params[i++];
    if (jp.at("name").get<std::string>() != p.name ||
        jp.at("numel").get<int64_t>() != p.value->numel())
      throw DataError("checkpoint parameter layout mismatch at " + p.name);
    ckpt_detail::ReadBlob(f, p.value->data);
  }
  size_t bi = 0;
  for (const auto& jb : header.at("buffers")) {
    SPOOFDET_CHECK(bi < buffers.size(), "buffer count mismatch");
    const auto& b = buffers[bi++];
    if (jb.at("name").get<std::string>() != b.name ||
        jb.at("numel").get<int64_t>() != b.value->numel())
      throw DataError("checkpoint buffer layout mismatch at " + b.name);
    ckpt_detail::ReadBlob(f, b.value->data);
  }
  if (opt != nullptr) {
    opt->mutable_states().clear();
    for (const auto& jo : header.at("optimizer")) {
      auto& st = opt->mutable_states()[jo.at("name").get<std::string>()];
      size_t n = jo.at("numel").get<size_t>();
      st.t = jo.at("t").get<int64_t>();
      st.m.resize(n);
      st.v.resize(n);
      st.vmax.resize(n);
      ckpt_detail::ReadBlob(f, st.m);
      ckpt_detail::ReadBlob(f, st.v);
      ckpt_detail::ReadBlob(f, st.vmax);
    }
  }
  if (!f) throw DataError("truncated checkpoint: " + path);
  model.ring_initialized = header.at("ring_initialized").get<bool>();
  return header;
}

// Constructs a model from the architecture stored in the checkpoint and
// loads its parameters.
template <typename T>
nlohmann::json LoadModelFromCheckpoint(const std::string& path, Model<T>* model) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint: " + path);
  nlohmann::json header = ReadCheckpointHeader<T>(f, path);
  f.close();

  EncoderConfig cfg;
  Scheme scheme;
  std::optional<Category> category;
  int64_t sub_hidden = 128;
  ArchFromJson(header.at("arch"), &cfg, &scheme, &category, &sub_hidden);
  model->Init(cfg, scheme, category, sub_hidden,
              header.at("seed").get<uint64_t>());
  return LoadCheckpointInto(path, *model);
}

}  // namespace spoofdet

#endif  // SPOOFDET_CHECKPOINT_HPP_
