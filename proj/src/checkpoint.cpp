// spoofdet/checkpoint.cpp
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

#include "spoofdet/checkpoint.hpp"

namespace spoofdet {

nlohmann::json ArchToJson(const EncoderConfig& cfg, Scheme scheme,
                          const std::optional<Category>& category,
                          int64_t subsidiary_hidden) {
  nlohmann::json j;
  j["conv1_filters"] = cfg.conv1_filters;
  j["stage_filters"] = cfg.stage_filters;
  j["n_stages"] = cfg.n_stages;
  j["blocks_per_stage"] = cfg.blocks_per_stage;
  j["kernel_t"] = cfg.kernel_t;
  j["kernel_f"] = cfg.kernel_f;
  j["stride_t"] = cfg.stride_t;
  j["stride_f"] = cfg.stride_f;
  j["gru_units"] = cfg.gru_units;
  j["code_dim"] = cfg.code_dim;
  j["lrelu_slope"] = cfg.lrelu_slope;
  j["scheme"] = SchemeName(scheme);
  j["category"] = category.has_value() ? nlohmann::json(CategoryName(*category))
                                       : nlohmann::json(nullptr);
  j["subsidiary_hidden"] = subsidiary_hidden;
  return j;
}

void ArchFromJson(const nlohmann::json& j, EncoderConfig* cfg, Scheme* scheme,
                  std::optional<Category>* category, int64_t* subsidiary_hidden) {
  cfg->conv1_filters = j.at("conv1_filters").get<int64_t>();
  cfg->stage_filters = j.at("stage_filters").get<int64_t>();
  cfg->n_stages = j.at("n_stages").get<int64_t>();
  cfg->blocks_per_stage = j.at("blocks_per_stage").get<int64_t>();
  cfg->kernel_t = j.at("kernel_t").get<int64_t>();
  cfg->kernel_f = j.at("kernel_f").get<int64_t>();
  cfg->stride_t = j.at("stride_t").get<int64_t>();
  cfg->stride_f = j.at("stride_f").get<int64_t>();
  cfg->gru_units = j.at("gru_units").get<int64_t>();
  cfg->code_dim = j.at("code_dim").get<int64_t>();
  cfg->lrelu_slope = j.at("lrelu_slope").get<double>();
  auto s = SchemeFromName(j.at("scheme").get<std::string>());
  if (!s.has_value()) throw DataError("unknown scheme in checkpoint");
  *scheme = *s;
  if (j.at("category").is_null()) {
    category->reset();
  } else {
    auto c = CategoryFromName(j.at("category").get<std::string>());
    if (!c.has_value()) throw DataError("unknown category in checkpoint");
    *category = *c;
  }
  *subsidiary_hidden = j.at("subsidiary_hidden").get<int64_t>();
}

}  // namespace spoofdet
