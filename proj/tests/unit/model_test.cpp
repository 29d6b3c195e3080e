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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "rrlab/error.hpp"
#include "rrlab/model.hpp"
#include "rrlab/rng.hpp"
#include "rrlab/tokenizer.hpp"

namespace rrlab::model {
namespace {

using tokenizer::kEos;
using tokenizer::kPad;

ModelConfig TinyConfig(uint64_t seed = 3) {
  ModelConfig c;
  c.d_model = 8;
  c.n_heads = 2;
  c.n_layers_enc = 1;
  c.n_layers_dec = 1;
  c.d_ff = 16;
  c.max_input = 16;
  c.max_target = 8;
  c.vocab_size = 12;
  c.seed = seed;
  return c;
}

std::vector<GradCheckExample> RandomExamples(const ModelConfig& c, size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<GradCheckExample> out;
  for (size_t i = 0; i < n; ++i) {
    GradCheckExample ex;
    const size_t in_len = 3 + rng.Index(5);
    const size_t out_len = 2 + rng.Index(3);
    for (size_t j = 0; j < in_len; ++j) ex.input_ids.push_back(static_cast<int>(rng.Uniform(3, c.vocab_size - 1)));
    for (size_t j = 0; j < out_len; ++j) ex.target_ids.push_back(static_cast<int>(rng.Uniform(5, c.vocab_size - 1)));
    ex.target_ids.push_back(kEos);
    out.push_back(std::move(ex));
  }
  return out;
}

template <typename F>
ErrorCode CodeOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

TEST(ModelConfig, RejectsIndivisibleHeads) {
  ModelConfig c;
  c.d_model = 65;
  c.n_heads = 4;
  EXPECT_EQ(CodeOf([&] { Init(c); }), ErrorCode::kConfig);
}

TEST(ModelConfig, RejectsNonPositiveDims) {
  for (int field = 0; field < 5; ++field) {
    ModelConfig c;
    int* dims[] = {&c.d_model, &c.n_layers_enc, &c.n_layers_dec, &c.d_ff, &c.max_target};
    *dims[field] = 0;
    EXPECT_EQ(CodeOf([&] { c.Validate(); }), ErrorCode::kConfig) << field;
  }
}

// 233728 comes from summing torch's parameter counts for the same pre-norm
// stack (nn.TransformerEncoderLayer / DecoderLayer, embedding, output head).
TEST(Init, ParameterCountMatchesClosedForm) {
  ModelConfig c;
  EXPECT_EQ(ParameterCount(c), 233728u);
  EXPECT_EQ(Init(c).Count(), 233728u);
  EXPECT_EQ(Init(TinyConfig()).Count(), ParameterCount(TinyConfig()));
}

TEST(Init, DeterministicInSeed) {
  const Parameters a = Init(TinyConfig(5));
  const Parameters b = Init(TinyConfig(5));
  const Parameters c = Init(TinyConfig(6));
  ASSERT_EQ(a.arrays.size(), b.arrays.size());
  bool differs = false;
  for (size_t i = 0; i < a.arrays.size(); ++i) {
    EXPECT_EQ(a.arrays[i], b.arrays[i]) << a.names[i];
    differs = differs || a.arrays[i] != c.arrays[i];
  }
  EXPECT_TRUE(differs);
}

TEST(Forward, ZeroOutputProjectionGivesUniform) {
  Parameters p = Init(TinyConfig());
  p.arrays[p.Index("out.w")].setZero();
  p.arrays[p.Index("out.b")].setZero();
  p.Touch();
  const std::vector<int> in = {5, 6, 7};
  const std::vector<int> tgt = {8, 9, kEos};
  const ForwardResult r = ForwardTeacherForced(p, in, tgt);
  EXPECT_NEAR(r.loss, std::log(12.0), 1e-6);
}

TEST(Forward, DistributionsSumToOne) {
  const Parameters p = Init(TinyConfig());
  for (const auto& ex : RandomExamples(p.config, 5, 11)) {
    const ForwardResult r = ForwardTeacherForced(p, ex.input_ids, ex.target_ids);
    EXPECT_GE(r.loss, 0.0);
    for (Eigen::Index t = 0; t < r.log_probs.rows(); ++t) {
      EXPECT_NEAR(r.log_probs.row(t).array().exp().sum(), 1.0, 1e-6);
    }
  }
}

TEST(Forward, PadPositionsAreExcluded) {
  const Parameters p = Init(TinyConfig());
  const std::vector<int> in = {5, 6, 7, 8};
  const std::vector<int> tgt = {9, 10, kEos};
  const double base = ForwardTeacherForced(p, in, tgt).loss;
  const std::vector<int> tgt_pad = {9, 10, kEos, kPad, kPad};
  EXPECT_NEAR(ForwardTeacherForced(p, in, tgt_pad).loss, base, 1e-12);
  const std::vector<int> in_pad = {5, 6, 7, 8, kPad, kPad};
  EXPECT_NEAR(ForwardTeacherForced(p, in_pad, tgt).loss, base, 1e-12);
}

TEST(Forward, BitIdenticalAcrossRuns) {
  const Parameters p = Init(TinyConfig());
  const auto ex = RandomExamples(p.config, 1, 4).front();
  EXPECT_EQ(ForwardTeacherForced(p, ex.input_ids, ex.target_ids).loss,
            ForwardTeacherForced(p, ex.input_ids, ex.target_ids).loss);
}

TEST(Forward, RejectsBadShapes) {
  const Parameters p = Init(TinyConfig());
  const std::vector<int> ok = {5, 6};
  const std::vector<int> empty;
  const std::vector<int> bad_id = {5, 99};
  const std::vector<int> too_long(20, 5);
  EXPECT_EQ(CodeOf([&] { ForwardTeacherForced(p, empty, ok); }), ErrorCode::kShapeMismatch);
  EXPECT_EQ(CodeOf([&] { ForwardTeacherForced(p, ok, bad_id); }), ErrorCode::kShapeMismatch);
  EXPECT_EQ(CodeOf([&] { ForwardTeacherForced(p, too_long, ok); }), ErrorCode::kShapeMismatch);
  EXPECT_EQ(CodeOf([&] { ForwardTeacherForced(p, ok, too_long); }), ErrorCode::kShapeMismatch);
}

TEST(Backward, MatchesFiniteDifferences) {
  const Parameters p = Init(TinyConfig());
  const auto examples = RandomExamples(p.config, 5, 21);
  const GradCheckReport r = CheckGradients(p, examples);
  EXPECT_EQ(r.coordinates, p.Count());
  EXPECT_LT(r.max_relative_error, 1e-3) << r.worst_parameter << "[" << r.worst_index << "]";
}

TEST(Backward, MatchesFiniteDifferencesTwoLayers) {
  ModelConfig c = TinyConfig(8);
  c.n_layers_enc = 2;
  c.n_layers_dec = 2;
  const Parameters p = Init(c);
  const GradCheckReport r = CheckGradients(p, RandomExamples(c, 3, 22));
  EXPECT_LT(r.max_relative_error, 1e-3) << r.worst_parameter << "[" << r.worst_index << "]";
}

TEST(Backward, LinearInLossScale) {
  const Parameters p = Init(TinyConfig());
  const auto ex = RandomExamples(p.config, 1, 5).front();
  ActivationCache cache;
  ForwardTeacherForced(p, ex.input_ids, ex.target_ids, &cache);
  const Gradients g1 = Backward(p, cache, 1.0);
  const Gradients g12 = Backward(p, cache, 1.2);
  const Gradients g0 = Backward(p, cache, 0.0);
  for (size_t i = 0; i < g1.arrays.size(); ++i) {
    EXPECT_LE((g12.arrays[i] - 1.2 * g1.arrays[i]).cwiseAbs().maxCoeff(), 1e-10) << p.names[i];
    EXPECT_EQ(g0.arrays[i].cwiseAbs().maxCoeff(), 0.0) << p.names[i];
  }
}

TEST(Backward, StaleCacheIsRejected) {
  Parameters p = Init(TinyConfig());
  const auto ex = RandomExamples(p.config, 1, 5).front();
  ActivationCache empty;
  EXPECT_EQ(CodeOf([&] { Backward(p, empty, 1.0); }), ErrorCode::kStaleCache);
  ActivationCache cache;
  ForwardTeacherForced(p, ex.input_ids, ex.target_ids, &cache);
  Optimizer opt;
  ApplyUpdate(p, Backward(p, cache, 1.0), opt);
  EXPECT_EQ(CodeOf([&] { Backward(p, cache, 1.0); }), ErrorCode::kStaleCache);
}

TEST(ApplyUpdate, PlainGradientStep) {
  Parameters p = Init(TinyConfig());
  Gradients g = p.ZerosLike();
  const size_t b = p.Index("out.b");
  p.arrays[b](0, 0) = 1.0;
  g.arrays[b](0, 0) = 0.5;
  const Parameters before = p;
  Optimizer opt;
  opt.lr = 0.1;
  ApplyUpdate(p, g, opt);
  EXPECT_DOUBLE_EQ(p.arrays[b](0, 0), 0.95);
  for (size_t i = 0; i < p.arrays.size(); ++i) {
    if (i == b) continue;
    EXPECT_EQ(p.arrays[i], before.arrays[i]) << p.names[i];
  }
  EXPECT_NE(p.generation, before.generation);
}

TEST(ApplyUpdate, NonFiniteGradientIsRefused) {
  Parameters p = Init(TinyConfig());
  Gradients g = p.ZerosLike();
  g.arrays[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
  const Parameters before = p;
  for (auto mode : {OptimizerMode::kSgd, OptimizerMode::kAdam}) {
    Optimizer opt;
    opt.mode = mode;
    EXPECT_EQ(CodeOf([&] { ApplyUpdate(p, g, opt); }), ErrorCode::kNonFinite);
    EXPECT_EQ(opt.step, 0);
    EXPECT_TRUE(opt.m.empty());
    for (size_t i = 0; i < p.arrays.size(); ++i) EXPECT_EQ(p.arrays[i], before.arrays[i]);
  }
}

TEST(ApplyUpdate, AdamFirstStepMovesByLearningRate) {
  Parameters p = Init(TinyConfig());
  Gradients g = p.ZerosLike();
  const size_t b = p.Index("out.b");
  g.arrays[b](0, 0) = 0.3;
  g.arrays[b](0, 1) = -2.0;
  const Parameters before = p;
  Optimizer opt;
  opt.mode = OptimizerMode::kAdam;
  opt.lr = 1e-2;
  ApplyUpdate(p, g, opt);
  EXPECT_NEAR(p.arrays[b](0, 0) - before.arrays[b](0, 0), -1e-2, 1e-8);
  EXPECT_NEAR(p.arrays[b](0, 1) - before.arrays[b](0, 1), 1e-2, 1e-8);
  EXPECT_EQ(p.arrays[b](0, 2), before.arrays[b](0, 2));
  EXPECT_EQ(opt.step, 1);
}

TEST(ApplyUpdate, RejectsShapeMismatch) {
  Parameters p = Init(TinyConfig());
  Gradients g = Init(TinyConfig()).ZerosLike();
  g.arrays.pop_back();
  Optimizer opt;
  EXPECT_EQ(CodeOf([&] { ApplyUpdate(p, g, opt); }), ErrorCode::kShapeMismatch);
}

TEST(Training, OverfitsOneExample) {
  ModelConfig c = TinyConfig(9);
  c.d_model = 32;
  c.n_heads = 4;
  c.d_ff = 64;
  c.vocab_size = 20;
  Parameters p = Init(c);
  const std::vector<int> in = {7, 8, 9, 10, 11};
  const std::vector<int> tgt = {12, 13, 7, 14, kEos};
  Optimizer opt;
  opt.lr = 0.5;
  double loss = 0.0;
  for (int step = 0; step < 500; ++step) {
    ActivationCache cache;
    loss = ForwardTeacherForced(p, in, tgt, &cache).loss;
    ApplyUpdate(p, Backward(p, cache, 1.0), opt);
  }
  loss = ForwardTeacherForced(p, in, tgt).loss;
  EXPECT_LT(loss, 0.01);
  EXPECT_EQ(GreedyDecode(p, in, c.max_target), tgt);
  EXPECT_EQ(BeamDecode(p, in, 3, c.max_target).sequences.front().ids, tgt);
}

TEST(Decode, GreedyEqualsBeamOfOne) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const Parameters p = Init(TinyConfig(seed));
    for (const auto& ex : RandomExamples(p.config, 3, seed + 100)) {
      const auto greedy = GreedyDecode(p, ex.input_ids, p.config.max_target);
      const auto beam = BeamDecode(p, ex.input_ids, 1, p.config.max_target);
      ASSERT_EQ(beam.sequences.size(), 1u);
      EXPECT_EQ(beam.sequences[0].ids, greedy);
      EXPECT_EQ(GreedyDecode(p, ex.input_ids, p.config.max_target), greedy);
    }
  }
}

// Incremental decoding and the teacher-forced pass are separate code paths.
TEST(Decode, IncrementalScoresMatchTeacherForcing) {
  const Parameters p = Init(TinyConfig(4));
  for (const auto& ex : RandomExamples(p.config, 3, 40)) {
    for (const auto& h : BeamDecode(p, ex.input_ids, 4, p.config.max_target).sequences) {
      EXPECT_NEAR(h.log_score, SequenceLogProb(p, ex.input_ids, h.ids), 1e-9);
    }
  }
}

TEST(Decode, BeamScoresNonIncreasing) {
  const Parameters p = Init(TinyConfig(2));
  for (const auto& ex : RandomExamples(p.config, 4, 50)) {
    const auto r = BeamDecode(p, ex.input_ids, 6, p.config.max_target);
    ASSERT_FALSE(r.sequences.empty());
    EXPECT_LE(r.sequences.size(), 6u);
    for (size_t i = 1; i < r.sequences.size(); ++i) {
      EXPECT_GE(r.sequences[i - 1].log_score, r.sequences[i].log_score);
    }
    for (const auto& h : r.sequences) {
      EXPECT_TRUE(h.ids.back() == kEos || static_cast<int>(h.ids.size()) == p.config.max_target);
    }
  }
}

// Exhaustive enumeration of every length-3 sequence over a 6-token vocabulary,
// truncated at the first EOS and scored through teacher forcing.
TEST(Decode, ExhaustiveBeamMatchesBruteForce) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    ModelConfig c = TinyConfig(seed);
    c.vocab_size = 6;
    c.max_target = 3;
    const Parameters p = Init(c);
    const std::vector<int> in = {5, 3, 5};
    std::map<std::vector<int>, double> scores;
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) {
        for (int d = 0; d < 6; ++d) {
          std::vector<int> seq;
          for (int tok : {a, b, d}) {
            seq.push_back(tok);
            if (tok == kEos) break;
          }
          scores.emplace(seq, SequenceLogProb(p, in, seq));
        }
      }
    }
    ASSERT_EQ(scores.size(), 156u);
    auto best = scores.begin();
    for (auto it = scores.begin(); it != scores.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    const auto r = BeamDecode(p, in, 216, 3);
    EXPECT_EQ(r.sequences.size(), 156u);
    EXPECT_EQ(r.sequences.front().ids, best->first) << "seed " << seed;
    EXPECT_NEAR(r.sequences.front().log_score, best->second, 1e-9);
  }
}

TEST(Decode, RejectsZeroBeam) {
  const Parameters p = Init(TinyConfig());
  const std::vector<int> in = {5, 6};
  EXPECT_EQ(CodeOf([&] { BeamDecode(p, in, 0, 4); }), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace rrlab::model
