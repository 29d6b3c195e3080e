// Copyright 2026 The rrlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Run configuration: one INI file with [run], [corpus], [model], [tokenizer],
// [reward], [syntactic], [semantic], [eval] and [acceptance] sections, plus
// the run manifest written next to every output.

#ifndef RRLAB_CONFIG_HPP_
#define RRLAB_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "rrlab/eval.hpp"
#include "rrlab/model.hpp"
#include "rrlab/training.hpp"

namespace rrlab {

struct CorpusSizes {
  size_t syntactic = 2000;
  size_t semantic = 100;
  size_t test = 100;
  friend bool operator==(const CorpusSizes&, const CorpusSizes&) = default;
};

// Thresholds checked by the end-to-end acceptance run.
struct AcceptanceThresholds {
  double min_top10_gain_pp = 5.0;
};

struct RunConfig {
  uint64_t seed = 7;
  CorpusSizes corpus;
  model::ModelConfig model;  // vocab_size is overwritten by the trained vocabulary
  size_t vocab_size = 512;
  training::SyntacticTrainConfig syntactic;
  training::SemanticTrainConfig semantic;
  eval::EvalConfig eval;
  AcceptanceThresholds acceptance;

  // Sub-seeds for model init, syntactic and semantic training, derived from `seed`.
  void ResolveSeeds();

  // Throws kConfig on the first invalid field.
  void Validate() const;

  // Sets one "section.key" from its text form; throws kConfig.
  void Set(std::string_view key, std::string_view value);

  // Text form of one "section.key" as written by ToIni; throws kConfig.
  std::string Get(std::string_view key) const;

  // Round-trips through Parse.
  std::string ToIni() const;

  // Keys absent from `text` keep their defaults; unknown sections or keys and
  // malformed values throw kConfig. Seeds are resolved, not validated.
  static RunConfig Parse(std::string_view text, std::string_view origin = "config");
  static RunConfig Load(const std::filesystem::path& path);
};

struct RunManifest {
  std::string command;
  uint64_t seed = 0;
  std::string config_ini;
  std::map<std::string, std::string> hashes;  // name -> hex digest
  std::map<std::string, std::string> inputs;  // name -> path
  bool include_timestamp = true;
};

// Writes run-manifest.json; the only non-reproducible field is "timestamp".
void WriteRunManifest(const std::filesystem::path& path, const RunManifest& manifest);

std::string HexDigest(uint64_t h);

}  // namespace rrlab

#endif  // RRLAB_CONFIG_HPP_
