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
#include <iterator>
#include <sstream>

#include "common/samples.hpp"
#include "rrlab/error.hpp"
#include "rrlab/eval.hpp"
#include "rrlab/log.hpp"
#include "rrlab/parallel.hpp"

namespace rrlab::eval {
namespace {

namespace fs = std::filesystem;
using minilang::DiagnosticCategory;
using discriminator::Stage;

std::vector<RankedPatch> Texts(std::initializer_list<std::string> texts) {
  std::vector<RankedPatch> out;
  double score = 0.0;
  for (const auto& t : texts) out.push_back({{}, t, score -= 1.0});
  return out;
}

struct Small {
  corpus::Corpus corpus;
  tokenizer::Vocab vocab;
};

const Small& TheSmall() {
  static const Small s = [] {
    SetLogSink({});
    Small s;
    s.corpus = corpus::BuildCorpus(7, 60, 4, 12);
    auto texts = tokenizer::VocabTexts(s.corpus.syntactic);
    const auto d = testing::DoublingSample();
    for (auto t : {d.base.buggy_text, d.base.fix_text, d.base.context_text}) texts.push_back(t);
    s.vocab = tokenizer::Vocab::Train(texts, 256);
    return s;
  }();
  return s;
}

model::ModelConfig TinyModel(const tokenizer::Vocab& vocab) {
  model::ModelConfig c;
  c.d_model = 8;
  c.n_heads = 2;
  c.n_layers_enc = 1;
  c.n_layers_dec = 1;
  c.d_ff = 16;
  c.max_input = 400;
  c.max_target = 12;
  c.vocab_size = static_cast<int>(vocab.size());
  c.seed = 5;
  return c;
}

BugRecord Record(std::initializer_list<bool> compilable) {
  BugRecord b;
  for (bool c : compilable) {
    PatchRecord p;
    p.compilable = c;
    if (!c) p.first_error = DiagnosticCategory::kSyntaxError;
    b.patches.push_back(p);
  }
  return b;
}

TEST(EvalConfig, Validation) {
  EXPECT_NO_THROW(EvalConfig{}.Validate());
  EvalConfig c;
  c.ks = {1, 5, 11};
  EXPECT_NO_THROW(c.Validate());
  c.ks = {0, 5};
  EXPECT_THROW(c.Validate(), Error);
  c.ks = {5, 1};
  EXPECT_THROW(c.Validate(), Error);
  c.ks = {};
  EXPECT_THROW(c.Validate(), Error);
  c = {};
  c.beam = 0;
  EXPECT_THROW(c.Validate(), Error);
}

TEST(CompilableRate, PerBugMeanOverAvailablePatches) {
  const std::vector<BugRecord> bugs = {Record({true, false, true}), Record({false})};
  const std::vector<int> ks = {1, 2, 3, 10};
  const auto r = CompilableRate(bugs, ks);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_DOUBLE_EQ(r[0], 0.5);
  EXPECT_DOUBLE_EQ(r[1], 0.25);
  EXPECT_DOUBLE_EQ(r[2], (2.0 / 3.0) / 2.0);
  EXPECT_DOUBLE_EQ(r[3], r[2]);
  EXPECT_EQ(CompilableRate({}, ks), std::vector<double>(4, 0.0));
}

TEST(CompilableRate, LexicallyInvalidStubScoresZero) {
  const auto& s = TheSmall();
  std::vector<BugRecord> bugs;
  for (const auto& t : s.corpus.test) {
    bugs.push_back(ScorePatches(t, Texts({"@", "let # = 1;", "$$"}), s.vocab, 10000));
  }
  const std::vector<int> ks = {1, 2, 3};
  for (double r : CompilableRate(bugs, ks)) EXPECT_EQ(r, 0.0);
  const auto hist = CategorizeErrors(bugs, 3);
  ASSERT_EQ(hist.size(), 1u);
  EXPECT_EQ(hist[0].first, DiagnosticCategory::kSyntaxError);
  EXPECT_EQ(hist[0].second, static_cast<int64_t>(3 * bugs.size()));
}

TEST(RepairRate, GroundTruthStubRepairsEverything) {
  const auto& s = TheSmall();
  std::vector<BugRecord> bugs;
  for (const auto& t : s.corpus.test) {
    bugs.push_back(ScorePatches(t, Texts({t.base.buggy_text, t.base.fix_text}), s.vocab, 10000));
  }
  const auto c = RepairRate(bugs);
  const auto n = static_cast<int64_t>(s.corpus.test.size());
  EXPECT_EQ(c.bugs, n);
  EXPECT_EQ(c.plausible, n);
  EXPECT_EQ(c.rgt_correct, n);
  EXPECT_EQ(c.exact_match, n);
  EXPECT_EQ(NoChangeTop1(bugs), 1.0);
  for (const auto& b : bugs) {
    EXPECT_TRUE(b.patches[0].no_change);
    EXPECT_EQ(b.patches[1].stage, Stage::kLikelyCorrect);
  }
}

TEST(RepairRate, StagesCountOncePerBug) {
  const auto d = testing::DoublingSample();
  const auto& v = TheSmall().vocab;
  const std::vector<BugRecord> bugs = {
      ScorePatches(d, Texts({"let x: int = a + a;", "let x: int = a * 2;"}), v, 10000),
      ScorePatches(d, Texts({testing::DevOnlyPatch(d), "let x: int = a * 5;"}), v, 10000),
      ScorePatches(d, Texts({"let x: int = a * ;"}), v, 10000)};
  EXPECT_EQ(bugs[0].patches[0].stage, Stage::kLikelyCorrect);
  EXPECT_FALSE(bugs[0].patches[0].exact_match);
  EXPECT_TRUE(bugs[0].patches[1].exact_match);
  EXPECT_EQ(bugs[1].patches[0].stage, Stage::kPlausible);
  const auto c = RepairRate(bugs);
  EXPECT_EQ(c.plausible, 2);
  EXPECT_EQ(c.rgt_correct, 1);
  EXPECT_EQ(c.exact_match, 1);
  EXPECT_EQ(NoChangeTop1(bugs), 0.0);
}

// Each patch has several diagnostics; only the first one counts.
struct MultiError {
  std::string patch;
  size_t min_diagnostics;
  DiagnosticCategory first;
};

const std::vector<MultiError>& MultiErrors() {
  static const std::vector<MultiError> cases = {
      {"let x: int = b + true;", 2, DiagnosticCategory::kUndefinedIdentifier},
      {"let x: bool = y;\nlet x: int = 1;", 3, DiagnosticCategory::kUndefinedIdentifier},
      {"let y: int = z;\ny = true;", 3, DiagnosticCategory::kUndefinedIdentifier},
      {"let x: int = a * 2;\nlet x: bool = c;", 2, DiagnosticCategory::kDuplicateDefinition},
      {"let x: bool = a;", 2, DiagnosticCategory::kTypeMismatch},
      {"let x: int = (a;", 1, DiagnosticCategory::kSyntaxError},
  };
  return cases;
}

TEST(CategorizeErrors, CountsOnlyTheFirstDiagnostic) {
  const auto d = testing::DoublingSample();
  std::vector<RankedPatch> patches;
  size_t all_diagnostics = 0;
  for (const auto& c : MultiErrors()) {
    const auto diags =
        minilang::Compile(discriminator::ApplyPatch(d.base, c.patch).patched_program);
    ASSERT_GE(diags.size(), c.min_diagnostics) << c.patch;
    all_diagnostics += diags.size();
    patches.push_back({{}, c.patch, 0.0});
  }
  patches.push_back({{}, "let x: int = a + a;", 0.0});  // compiles, not counted
  const std::vector<BugRecord> bugs = {ScorePatches(d, patches, TheSmall().vocab, 10000)};
  for (size_t i = 0; i < MultiErrors().size(); ++i) {
    EXPECT_EQ(bugs[0].patches[i].first_error, MultiErrors()[i].first) << MultiErrors()[i].patch;
  }

  const auto hist = CategorizeErrors(bugs, 100);
  const ErrorHistogram want = {{DiagnosticCategory::kUndefinedIdentifier, 3},
                               {DiagnosticCategory::kSyntaxError, 1},
                               {DiagnosticCategory::kTypeMismatch, 1},
                               {DiagnosticCategory::kDuplicateDefinition, 1}};
  EXPECT_EQ(hist, want);
  int64_t total = 0;
  for (const auto& [cat, n] : hist) total += n;
  EXPECT_EQ(total, 6);
  EXPECT_GT(all_diagnostics, 6u);

  // Only the first k patches are looked at.
  const auto top2 = CategorizeErrors(bugs, 2);
  ASSERT_EQ(top2.size(), 1u);
  EXPECT_EQ(top2[0].second, 2);
}

TEST(Infer, VocabularyMismatch) {
  const auto& s = TheSmall();
  auto cfg = TinyModel(s.vocab);
  cfg.vocab_size += 1;
  const auto params = model::Init(cfg);
  try {
    Infer(params, s.vocab, s.corpus.test[0].base, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kVersionMismatch);
  }
}

TEST(Infer, ReturnsBeamInScoreOrder) {
  const auto& s = TheSmall();
  const auto params = model::Init(TinyModel(s.vocab));
  const auto patches = Infer(params, s.vocab, s.corpus.test[0].base, 4);
  ASSERT_EQ(patches.size(), 4u);
  for (size_t i = 1; i < patches.size(); ++i)
    EXPECT_LE(patches[i].log_score, patches[i - 1].log_score);
  for (const auto& p : patches) EXPECT_EQ(p.text, s.vocab.Decode(p.ids));
}

TEST(Evaluate, DeterministicAcrossThreadCounts) {
  const auto& s = TheSmall();
  const auto params = model::Init(TinyModel(s.vocab));
  EvalConfig cfg;
  cfg.beam = 3;
  cfg.ks = {1, 3};
  SetThreads(1);
  const auto a = Evaluate(params, s.vocab, s.corpus.test, cfg);
  SetThreads(4);
  const auto b = Evaluate(params, s.vocab, s.corpus.test, cfg);
  SetThreads(0);
  EXPECT_EQ(a.compilable_rates, b.compilable_rates);
  EXPECT_EQ(a.errors, b.errors);
  ASSERT_EQ(a.bugs.size(), b.bugs.size());
  for (size_t i = 0; i < a.bugs.size(); ++i) {
    ASSERT_EQ(a.bugs[i].patches.size(), b.bugs[i].patches.size());
    EXPECT_EQ(a.bugs[i].id, s.corpus.test[i].base.id);
    for (size_t j = 0; j < a.bugs[i].patches.size(); ++j)
      EXPECT_EQ(a.bugs[i].patches[j].text, b.bugs[i].patches[j].text);
  }
}

TEST(Ablate, RequiresMatchingConfigs) {
  const auto& s = TheSmall();
  auto cfg = TinyModel(s.vocab);
  const auto a = model::Init(cfg);
  cfg.d_ff = 8;
  const auto b = model::Init(cfg);
  try {
    Ablate(a, b, s.vocab, s.corpus.test, EvalConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
}

TEST(Ablate, SameModelHasZeroDeltas) {
  const auto& s = TheSmall();
  const auto a = model::Init(TinyModel(s.vocab));
  EvalConfig cfg;
  cfg.beam = 2;
  cfg.ks = {1, 2};
  const auto r = Ablate(a, a, s.vocab, std::span(s.corpus.test).first(4), cfg);
  ASSERT_EQ(r.rows.size(), 6u);
  EXPECT_EQ(r.rows[0].metric, "compilable@1");
  EXPECT_EQ(r.rows.back().metric, "no_change_top1");
  for (const auto& row : r.rows) EXPECT_EQ(row.delta, 0.0);
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Csv, ExactContents) {
  EvalReport r;
  r.ks = {1, 5};
  r.compilable_rates = {0.25, 0.5};
  r.counts = {100, 7, 3, 2};
  r.no_change_top1 = 0.125;
  r.errors = {{DiagnosticCategory::kTypeMismatch, 9}, {DiagnosticCategory::kSyntaxError, 4}};
  const auto dir = fs::temp_directory_path() / "rrlab_csv_test";
  fs::remove_all(dir);
  WriteCompilableRateCsv(dir / "compilable_rate.csv", r);
  WriteRepairCountsCsv(dir / "repair_counts.csv", r);
  WriteErrorHistogramCsv(dir / "error_histogram.csv", r);
  EXPECT_EQ(Slurp(dir / "compilable_rate.csv"), "k,compilable_rate\n1,0.250000\n5,0.500000\n");
  EXPECT_EQ(Slurp(dir / "repair_counts.csv"),
            "bugs,plausible,rgt_correct,exact_match,no_change_top1\n100,7,3,2,0.125000\n");
  EXPECT_EQ(Slurp(dir / "error_histogram.csv"),
            "category,count\nTypeMismatch,9\nSyntaxError,4\n");

  AblationReport a;
  a.rows = CompareReports(r, r);
  a.rows[0].full = 0.35;
  a.rows[0].delta = 0.1;
  WriteAblationCsv(dir / "ablation.csv", a);
  EXPECT_EQ(Slurp(dir / "ablation.csv"),
            "metric,baseline,full,delta\n"
            "compilable@1,0.250000,0.350000,+0.100000\n"
            "compilable@5,0.500000,0.500000,+0.000000\n"
            "plausible,7.000000,7.000000,+0.000000\n"
            "rgt_correct,3.000000,3.000000,+0.000000\n"
            "exact_match,2.000000,2.000000,+0.000000\n"
            "no_change_top1,0.125000,0.125000,+0.000000\n");
  fs::remove_all(dir);

  std::ostringstream os;
  PrintReport(os, r);
  EXPECT_NE(os.str().find("compilable@5    50.000000 %"), std::string::npos) << os.str();
}

}  // namespace
}  // namespace rrlab::eval
