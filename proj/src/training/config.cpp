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

#include "rrlab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"
#include "rrlab/error.hpp"
#include "rrlab/rng.hpp"

namespace rrlab {

namespace {

constexpr uint64_t kModelSalt = 0x4d4f44454cULL;
constexpr uint64_t kSyntacticSalt = 0x53594eULL;
constexpr uint64_t kSemanticSalt = 0x53454dULL;

[[noreturn]] void Bad(const std::string& key, const std::string& value, const char* want) {
  throw Error(ErrorCode::kConfig, key + ": expected " + want + ", got '" + value + "'");
}

int64_t ToInt(const std::string& key, const std::string& v) {
  int64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) Bad(key, v, "an integer");
  return out;
}

uint64_t ToUnsigned(const std::string& key, const std::string& v) {
  uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    Bad(key, v, "a non-negative integer");
  return out;
}

int ToInt32(const std::string& key, const std::string& v) {
  const int64_t x = ToInt(key, v);
  if (x < INT32_MIN || x > INT32_MAX) Bad(key, v, "a 32-bit integer");
  return static_cast<int>(x);
}

double ToDouble(const std::string& key, const std::string& v) {
  // strtod accepts hex floats and "nan"; both are rejected by the finiteness
  // checks in Validate, so only syntax is checked here.
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) Bad(key, v, "a number");
  return x;
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  Bad(key, v, "true or false");
}

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

model::OptimizerMode ToOptimizer(const std::string& key, const std::string& v) {
  if (v == "adam") return model::OptimizerMode::kAdam;
  if (v == "sgd") return model::OptimizerMode::kSgd;
  Bad(key, v, "adam or sgd");
}

std::string_view OptimizerName(model::OptimizerMode m) {
  return m == model::OptimizerMode::kAdam ? "adam" : "sgd";
}

std::vector<int> ToIntList(const std::string& key, const std::string& v) {
  std::vector<int> out;
  size_t pos = 0;
  while (pos <= v.size()) {
    const size_t comma = std::min(v.find(',', pos), v.size());
    std::string item = v.substr(pos, comma - pos);
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    item = b == std::string::npos ? "" : item.substr(b, e - b + 1);
    out.push_back(ToInt32(key, item));
    pos = comma + 1;
  }
  return out;
}

std::pair<int, int> ToRatio(const std::string& key, const std::string& v) {
  const size_t colon = v.find(':');
  if (colon == std::string::npos) Bad(key, v, "a ratio S:T");
  return {ToInt32(key, v.substr(0, colon)), ToInt32(key, v.substr(colon + 1))};
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& Setters() {
  static const std::map<std::string, Setter> table = {
      {"run.seed", [](RunConfig& c, auto& k, auto& v) { c.seed = ToUnsigned(k, v); }},
      {"corpus.syntactic", [](RunConfig& c, auto& k, auto& v) { c.corpus.syntactic = ToUnsigned(k, v); }},
      {"corpus.semantic", [](RunConfig& c, auto& k, auto& v) { c.corpus.semantic = ToUnsigned(k, v); }},
      {"corpus.test", [](RunConfig& c, auto& k, auto& v) { c.corpus.test = ToUnsigned(k, v); }},
      {"model.d_model", [](RunConfig& c, auto& k, auto& v) { c.model.d_model = ToInt32(k, v); }},
      {"model.n_heads", [](RunConfig& c, auto& k, auto& v) { c.model.n_heads = ToInt32(k, v); }},
      {"model.n_layers_enc", [](RunConfig& c, auto& k, auto& v) { c.model.n_layers_enc = ToInt32(k, v); }},
      {"model.n_layers_dec", [](RunConfig& c, auto& k, auto& v) { c.model.n_layers_dec = ToInt32(k, v); }},
      {"model.d_ff", [](RunConfig& c, auto& k, auto& v) { c.model.d_ff = ToInt32(k, v); }},
      {"model.max_input", [](RunConfig& c, auto& k, auto& v) { c.model.max_input = ToInt32(k, v); }},
      {"model.max_target", [](RunConfig& c, auto& k, auto& v) { c.model.max_target = ToInt32(k, v); }},
      {"model.dropout", [](RunConfig& c, auto& k, auto& v) { c.model.dropout_rate = ToDouble(k, v); }},
      {"tokenizer.vocab_size", [](RunConfig& c, auto& k, auto& v) { c.vocab_size = ToUnsigned(k, v); }},
      {"reward.s0", [](RunConfig& c, auto& k, auto& v) { c.semantic.reward.s0 = ToDouble(k, v); }},
      {"reward.s1", [](RunConfig& c, auto& k, auto& v) { c.semantic.reward.s1 = ToDouble(k, v); }},
      {"reward.s2", [](RunConfig& c, auto& k, auto& v) { c.semantic.reward.s2 = ToDouble(k, v); }},
      {"reward.s3", [](RunConfig& c, auto& k, auto& v) { c.semantic.reward.s3 = ToDouble(k, v); }},
      {"reward.s4", [](RunConfig& c, auto& k, auto& v) { c.semantic.reward.s4 = ToDouble(k, v); }},
      {"syntactic.epochs", [](RunConfig& c, auto& k, auto& v) { c.syntactic.epochs = ToInt32(k, v); }},
      {"syntactic.batch_size", [](RunConfig& c, auto& k, auto& v) { c.syntactic.batch_size = ToInt32(k, v); }},
      {"syntactic.lr", [](RunConfig& c, auto& k, auto& v) { c.syntactic.learning_rate = ToDouble(k, v); }},
      {"syntactic.optimizer", [](RunConfig& c, auto& k, auto& v) { c.syntactic.optimizer = ToOptimizer(k, v); }},
      {"syntactic.shuffle", [](RunConfig& c, auto& k, auto& v) { c.syntactic.shuffle = ToBool(k, v); }},
      {"semantic.epochs", [](RunConfig& c, auto& k, auto& v) { c.semantic.epochs = ToInt32(k, v); }},
      {"semantic.lr", [](RunConfig& c, auto& k, auto& v) { c.semantic.learning_rate = ToDouble(k, v); }},
      {"semantic.alternation",
       [](RunConfig& c, auto& k, auto& v) {
         std::tie(c.semantic.alternation_semantic, c.semantic.alternation_syntactic) = ToRatio(k, v);
       }},
      {"semantic.candidate_policy",
       [](RunConfig& c, auto&, auto& v) { c.semantic.candidate_policy = training::ParsePolicy(v); }},
      {"semantic.top_n", [](RunConfig& c, auto& k, auto& v) { c.semantic.top_n = ToInt32(k, v); }},
      {"semantic.budget", [](RunConfig& c, auto& k, auto& v) { c.semantic.budget = ToInt(k, v); }},
      {"semantic.augment_beam", [](RunConfig& c, auto& k, auto& v) { c.semantic.augment_beam = ToInt32(k, v); }},
      {"eval.beam", [](RunConfig& c, auto& k, auto& v) { c.eval.beam = ToInt32(k, v); }},
      {"eval.ks", [](RunConfig& c, auto& k, auto& v) { c.eval.ks = ToIntList(k, v); }},
      {"eval.budget", [](RunConfig& c, auto& k, auto& v) { c.eval.budget = ToInt(k, v); }},
      {"acceptance.min_top10_gain_pp",
       [](RunConfig& c, auto& k, auto& v) { c.acceptance.min_top10_gain_pp = ToDouble(k, v); }},
  };
  return table;
}

}  // namespace

std::string HexDigest(uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunConfig::ResolveSeeds() {
  model.seed = DeriveSeed(seed, kModelSalt);
  syntactic.seed = DeriveSeed(seed, kSyntacticSalt);
  semantic.seed = DeriveSeed(seed, kSemanticSalt);
}

void RunConfig::Validate() const {
  if (corpus.syntactic == 0) throw Error(ErrorCode::kConfig, "corpus.syntactic must be positive");
  if (vocab_size < 6) throw Error(ErrorCode::kConfig, "tokenizer.vocab_size must be at least 6");
  model::ModelConfig m = model;
  m.vocab_size = static_cast<int>(vocab_size);
  m.Validate();
  syntactic.Validate();
  semantic.Validate();
  eval.Validate();
  if (!std::isfinite(acceptance.min_top10_gain_pp))
    throw Error(ErrorCode::kConfig, "acceptance.min_top10_gain_pp must be finite");
}

void RunConfig::Set(std::string_view key, std::string_view value) {
  const auto it = Setters().find(std::string(key));
  if (it == Setters().end())
    throw Error(ErrorCode::kConfig, "unknown config key '" + std::string(key) + "'");
  it->second(*this, std::string(key), std::string(value));
  ResolveSeeds();
}

std::string RunConfig::Get(std::string_view key) const {
  if (Setters().count(std::string(key)) == 0)
    throw Error(ErrorCode::kConfig, "unknown config key '" + std::string(key) + "'");
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(ToIni());
  pt::read_ini(in, tree);
  return tree.get<std::string>(pt::ptree::path_type(std::string(key), '.'));
}

std::string RunConfig::ToIni() const {
  std::ostringstream os;
  std::string ks;
  for (size_t i = 0; i < eval.ks.size(); ++i) ks += (i ? "," : "") + std::to_string(eval.ks[i]);
  os << "[run]\nseed = " << seed << "\n\n"
     << "[corpus]\nsyntactic = " << corpus.syntactic << "\nsemantic = " << corpus.semantic
     << "\ntest = " << corpus.test << "\n\n"
     << "[model]\nd_model = " << model.d_model << "\nn_heads = " << model.n_heads
     << "\nn_layers_enc = " << model.n_layers_enc << "\nn_layers_dec = " << model.n_layers_dec
     << "\nd_ff = " << model.d_ff << "\nmax_input = " << model.max_input
     << "\nmax_target = " << model.max_target << "\ndropout = " << Num(model.dropout_rate)
     << "\n\n"
     << "[tokenizer]\nvocab_size = " << vocab_size << "\n\n"
     << "[reward]\ns0 = " << Num(semantic.reward.s0) << "\ns1 = " << Num(semantic.reward.s1)
     << "\ns2 = " << Num(semantic.reward.s2) << "\ns3 = " << Num(semantic.reward.s3)
     << "\ns4 = " << Num(semantic.reward.s4) << "\n\n"
     << "[syntactic]\nepochs = " << syntactic.epochs << "\nbatch_size = " << syntactic.batch_size
     << "\nlr = " << Num(syntactic.learning_rate)
     << "\noptimizer = " << OptimizerName(syntactic.optimizer)
     << "\nshuffle = " << (syntactic.shuffle ? "true" : "false") << "\n\n"
     << "[semantic]\nepochs = " << semantic.epochs << "\nlr = " << Num(semantic.learning_rate)
     << "\nalternation = " << semantic.alternation_semantic << ':'
     << semantic.alternation_syntactic
     << "\ncandidate_policy = " << training::PolicyName(semantic.candidate_policy)
     << "\ntop_n = " << semantic.top_n << "\nbudget = " << semantic.budget
     << "\naugment_beam = " << semantic.augment_beam << "\n\n"
     << "[eval]\nbeam = " << eval.beam << "\nks = " << ks << "\nbudget = " << eval.budget
     << "\n\n"
     << "[acceptance]\nmin_top10_gain_pp = " << Num(acceptance.min_top10_gain_pp) << '\n';
  return os.str();
}

RunConfig RunConfig::Parse(std::string_view text, std::string_view origin) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kConfig, std::string(origin) + ":" + std::to_string(e.line()) + ": " +
                                        e.message());
  }
  RunConfig cfg;
  const auto& setters = Setters();
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw Error(ErrorCode::kConfig,
                  std::string(origin) + ": key '" + section + "' outside any section");
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = setters.find(full);
      if (it == setters.end())
        throw Error(ErrorCode::kConfig, std::string(origin) + ": unknown key '" + full + "'");
      it->second(cfg, full, value.get_value<std::string>());
    }
  }
  cfg.ResolveSeeds();
  return cfg;
}

RunConfig RunConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str(), path.string());
}

void WriteRunManifest(const std::filesystem::path& path, const RunManifest& manifest) {
  nlohmann::ordered_json j;
  j["command"] = manifest.command;
  j["seed"] = manifest.seed;
  j["config"] = manifest.config_ini;
  j["hashes"] = manifest.hashes;
  j["inputs"] = manifest.inputs;
  if (manifest.include_timestamp) {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    j["timestamp"] = buf;
  }
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace rrlab
