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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "rrlab/config.hpp"
#include "rrlab/error.hpp"

namespace rrlab {
namespace {

ErrorCode ParseCode(const std::string& text) {
  try {
    RunConfig::Parse(text).Validate();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

TEST(RunConfig, DefaultsAreValid) {
  RunConfig c;
  c.ResolveSeeds();
  EXPECT_NO_THROW(c.Validate());
  EXPECT_EQ(c.syntactic.epochs, 15);
  EXPECT_EQ(c.semantic.epochs, 4);
  EXPECT_EQ(c.eval.beam, 10);
  EXPECT_EQ(c.eval.ks, (std::vector<int>{1, 5, 10}));
}

TEST(RunConfig, IniRoundTrip) {
  RunConfig c;
  c.seed = 42;
  c.corpus.syntactic = 300;
  c.model.d_model = 32;
  c.model.dropout_rate = 0.1;
  c.vocab_size = 300;
  c.semantic.reward = {-0.5, -0.25, 0.1, 0.3, 0.9};
  c.syntactic.optimizer = model::OptimizerMode::kSgd;
  c.syntactic.learning_rate = 3e-4;
  c.syntactic.shuffle = false;
  c.semantic.alternation_semantic = 2;
  c.semantic.alternation_syntactic = 3;
  c.semantic.candidate_policy = training::CandidatePolicy::kBeamTopN;
  c.semantic.top_n = 4;
  c.semantic.augment_beam = 5;
  c.eval.beam = 20;
  c.eval.ks = {1, 20};
  c.acceptance.min_top10_gain_pp = 2.5;
  c.ResolveSeeds();
  const auto back = RunConfig::Parse(c.ToIni());
  EXPECT_EQ(back.ToIni(), c.ToIni());
  EXPECT_EQ(back.seed, 42u);
  EXPECT_TRUE(back.semantic.reward == c.semantic.reward);
  EXPECT_EQ(back.syntactic.learning_rate, 3e-4);
  EXPECT_EQ(back.semantic.alternation_syntactic, 3);
  EXPECT_EQ(back.model.seed, c.model.seed);
  EXPECT_EQ(back.eval.ks, c.eval.ks);
}

TEST(RunConfig, PartialFileKeepsDefaultsAndDerivesSeeds) {
  const auto c = RunConfig::Parse("; comment\n[run]\nseed = 9\n\n[reward]\ns4 = 0.7\n");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.semantic.reward.s4, 0.7);
  EXPECT_EQ(c.semantic.reward.s0, -0.4);
  const auto d = RunConfig::Parse("[run]\nseed = 10\n");
  EXPECT_NE(c.model.seed, d.model.seed);
  EXPECT_NE(c.syntactic.seed, c.semantic.seed);
}

TEST(RunConfig, Errors) {
  EXPECT_EQ(ParseCode("[model]\nd_modle = 3\n"), ErrorCode::kConfig);
  EXPECT_EQ(ParseCode("[nosuch]\nx = 1\n"), ErrorCode::kConfig);
  EXPECT_EQ(ParseCode("seed = 1\n"), ErrorCode::kConfig);
  EXPECT_EQ(ParseCode("[model]\nd_model = 12x\n"), ErrorCode::kConfig);
  EXPECT_EQ(ParseCode("[model]\nd_model = 65\n"), ErrorCode::kConfig);
  EXPECT_EQ(ParseCode("[reward]\ns0 = 0.1\n"), ErrorCode::kConfig);
  EXPECT_EQ(ParseCode("[reward]\ns4 = nan\n"), ErrorCode::kConfig);
  EXPECT_EQ(ParseCode("[semantic]\nalternation = 2\n"), ErrorCode::kConfig);
  EXPECT_EQ(ParseCode("[semantic]\ncandidate_policy = sample\n"), ErrorCode::kConfig);
  EXPECT_EQ(ParseCode("[syntactic]\noptimizer = rmsprop\n"), ErrorCode::kConfig);
  EXPECT_EQ(ParseCode("[eval]\nks = 5,1\n"), ErrorCode::kConfig);
  EXPECT_EQ(ParseCode("[eval]\nks = 1,,5\n"), ErrorCode::kConfig);
  EXPECT_EQ(ParseCode("[run\nseed = 1\n"), ErrorCode::kConfig);
  EXPECT_EQ(ParseCode("[run]\nseed = -1\n"), ErrorCode::kConfig);
  try {
    RunConfig::Parse("[model]\nd_modle = 3\n");
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("model.d_modle"), std::string::npos);
  }
  try {
    RunConfig::Load("/nonexistent/rrlab.cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(RunManifest, WritesConfigAndHashes) {
  const auto path = std::filesystem::temp_directory_path() / "rrlab_manifest_test.json";
  RunManifest m;
  m.command = "train-syntactic";
  m.seed = 7;
  m.config_ini = RunConfig{}.ToIni();
  m.hashes["vocab"] = HexDigest(0xabcULL);
  WriteRunManifest(path, m);
  std::ifstream in(path);
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j.at("command"), "train-syntactic");
  EXPECT_EQ(j.at("seed"), 7);
  EXPECT_EQ(j.at("hashes").at("vocab"), "0000000000000abc");
  EXPECT_TRUE(j.contains("timestamp"));
  EXPECT_EQ(j.at("config"), m.config_ini);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace rrlab
