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

#include "rrlab/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gtest/gtest.h"
#include "rrlab/error.hpp"

namespace rrlab::corpus {
namespace {

using minilang::Program;

Program MustParse(std::string_view src) {
  auto r = minilang::ParseSource(src);
  EXPECT_TRUE(r.ok());
  return *r.program;
}

std::filesystem::path TempDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("rrlab_corpus_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string ReadAll(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

TEST(GenerateTest, DistinctWellFormedPrograms) {
  const auto programs = GeneratePrograms(1, 3);
  ASSERT_EQ(programs.size(), 3u);
  std::set<std::string> texts;
  for (const auto& p : programs) {
    EXPECT_TRUE(minilang::Check(p).empty());
    texts.insert(minilang::Render(p));
  }
  EXPECT_EQ(texts.size(), 3u);
}

TEST(GenerateTest, DeterministicInSeed) {
  const auto a = GeneratePrograms(5, 20);
  const auto b = GeneratePrograms(5, 20);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(minilang::Render(a[i]), minilang::Render(b[i]));
  EXPECT_TRUE(GeneratePrograms(5, 0).empty());
}

// Round-trip through text and check soundness of the checker w.r.t. the
// interpreter on every generated program.
TEST(GenerateTest, RenderParseRoundTripAndSoundness) {
  const CorpusConfig cfg;
  for (const auto& p : GeneratePrograms(11, 300)) {
    const std::string text = minilang::Render(p);
    const Program reparsed = MustParse(text);
    ASSERT_TRUE(minilang::StructurallyEqual(p, reparsed)) << text;
    EXPECT_EQ(minilang::Render(reparsed), text);
    for (const auto& in : ProbeInputs(p.params.size(), cfg, 3, 32)) {
      EXPECT_NO_THROW(minilang::Interpret(reparsed, in, cfg.step_budget)) << text;
    }
  }
}

TEST(ProbeTest, ExhaustiveForTwoParams) {
  const CorpusConfig cfg;
  EXPECT_EQ(ProbeInputs(0, cfg, 0).size(), 1u);
  EXPECT_EQ(ProbeInputs(1, cfg, 0).size(), 17u);
  const auto two = ProbeInputs(2, cfg, 0);
  EXPECT_EQ(two.size(), 289u);
  EXPECT_EQ(std::set<std::vector<int64_t>>(two.begin(), two.end()).size(), 289u);
  const auto three = ProbeInputs(3, cfg, 9, 100);
  EXPECT_EQ(three.size(), 100u);
  for (const auto& in : three) {
    for (int64_t v : in) {
      EXPECT_GE(v, -8);
      EXPECT_LE(v, 8);
    }
  }
}

TEST(MutateTest, ArithOpSwapOnReturn) {
  const Program fixed = MustParse("fn main(a: int) -> int {\n    return a * 2;\n}\n");
  MutateOptions only_arith;
  only_arith.allowed = {MutationKind::kArithOpSwap};
  bool saw_div = false;
  for (uint64_t seed = 0; seed < 40; ++seed) {
    const BugSample s = Mutate(fixed, seed, only_arith);
    EXPECT_EQ(s.mutation, MutationKind::kArithOpSwap);
    EXPECT_EQ(s.hunk, (Hunk{2, 2}));
    EXPECT_EQ(s.fix_text, "    return a * 2;");
    saw_div |= s.buggy_text == "    return a / 2;";
  }
  EXPECT_TRUE(saw_div);
}

TEST(MutateTest, CmpOpSwapDiffersAtEquality) {
  const Program fixed = MustParse(
      "fn main(a: int, b: int) -> int {\n    if a < b {\n        return 1;\n    }\n    return 0;\n}\n");
  MutateOptions only_cmp;
  only_cmp.allowed = {MutationKind::kCmpOpSwap};
  bool saw_le = false;
  for (uint64_t seed = 0; seed < 40 && !saw_le; ++seed) {
    const BugSample s = Mutate(fixed, seed, only_cmp);
    EXPECT_EQ(s.hunk, (Hunk{2, 2}));
    saw_le = s.buggy_text == "    if a <= b {";
  }
  EXPECT_TRUE(saw_le);
}

TEST(MutateTest, NoViableMutation) {
  const Program fixed = MustParse("fn main(a: int) -> int {\n    return 0;\n}\n");
  MutateOptions options;
  options.allowed = {MutationKind::kArithOpSwap, MutationKind::kCmpOpSwap,
                     MutationKind::kDeleteStatement, MutationKind::kNegateCondition};
  try {
    Mutate(fixed, 1, options);
    FAIL() << "expected no-viable-mutation";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGeneration);
  }
}

TEST(MutateTest, DeletionAnchorsHunkOnPreviousLine) {
  const Program fixed = MustParse(
      "fn main(a: int) -> int {\n    let x: int = a;\n    x = x + 3;\n    return x;\n}\n");
  MutateOptions options;
  options.allowed = {MutationKind::kDeleteStatement};
  const BugSample s = Mutate(fixed, 0, options);
  EXPECT_EQ(s.hunk.start_line, s.hunk.end_line);
  EXPECT_EQ(Splice(s.buggy_program, s.hunk, s.fix_text), s.fixed_program);
  EXPECT_NE(s.buggy_text, s.fix_text);
}

// Independent oracle: the bug `a < b` -> `a <= b` in `if a < b {return 1;}
// return 0;` is exposed exactly when a == b.
TEST(DevTestsTest, ExposingTestMatchesBruteForceOracle) {
  BugSample s;
  s.id = "oracle";
  s.fixed_program =
      "fn main(a: int, b: int) -> int {\n    if a < b {\n        return 1;\n    }\n    return 0;\n}\n";
  s.buggy_program =
      "fn main(a: int, b: int) -> int {\n    if a <= b {\n        return 1;\n    }\n    return 0;\n}\n";
  s.hunk = {2, 2};
  s.buggy_text = "    if a <= b {";
  s.fix_text = "    if a < b {";
  std::set<std::pair<int64_t, int64_t>> exposing;
  for (int64_t a = -8; a <= 8; ++a) {
    for (int64_t b = -8; b <= 8; ++b) {
      if ((a < b ? 1 : 0) != (a <= b ? 1 : 0)) exposing.insert({a, b});
    }
  }
  ASSERT_EQ(exposing.size(), 17u);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto tests = MakeDevTests(s, seed, 3);
    ASSERT_EQ(tests.size(), 3u);
    int exposed = 0;
    for (const auto& t : tests) {
      const int64_t a = t.inputs[0], b = t.inputs[1];
      EXPECT_EQ(t.expected, a < b ? 1 : 0);
      exposed += exposing.count({a, b});
    }
    EXPECT_GE(exposed, 1);
  }
  const auto single = MakeDevTests(s, 4, 1);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].inputs[0], single[0].inputs[1]);
}

TEST(DevTestsTest, UnexposableBug) {
  BugSample s;
  s.fixed_program = "fn main(a: int) -> int {\n    return a;\n}\n";
  s.buggy_program = "fn main(a: int) -> int {\n    return a + 0;\n}\n";
  s.hunk = {2, 2};
  EXPECT_THROW(MakeDevTests(s, 1, 2), Error);
}

TEST(PassesTest, ArityMismatchFails) {
  const Program two = MustParse("fn main(a: int, b: int) -> int {\n    return a;\n}\n");
  EXPECT_TRUE(Passes(two, TestCase{{4, 9}, 4}, 100));
  EXPECT_FALSE(Passes(two, TestCase{{4}, 4}, 100));
  EXPECT_FALSE(Passes(two, TestCase{{4, 9, 1}, 4}, 100));
}

TEST(RgtTestsTest, ExpectationsComeFromFixedProgram) {
  const Program fixed = MustParse("fn main(a: int, b: int) -> int {\n    return a + b;\n}\n");
  EXPECT_EQ(MakeTestCase(fixed, {1, 2}, 100)->expected, 3);
  EXPECT_EQ(MakeTestCase(fixed, {0, 0}, 100)->expected, 0);
  EXPECT_TRUE(MakeRgtTests(fixed, 3, 0).empty());
  const auto a = MakeRgtTests(fixed, 3, 16);
  EXPECT_EQ(a, MakeRgtTests(fixed, 3, 16));
  for (const auto& t : a) EXPECT_EQ(t.expected, t.inputs[0] + t.inputs[1]);
}

TEST(RgtTestsTest, SkipsInputsWhereFixedFaults) {
  const Program fixed = MustParse("fn main(a: int) -> int {\n    return 10 / a;\n}\n");
  for (const auto& t : MakeRgtTests(fixed, 8, 32)) EXPECT_NE(t.inputs[0], 0);
}

class BuiltCorpusTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { corpus_ = new Corpus(BuildCorpus(7, 200, 20, 20)); }
  static void TearDownTestSuite() { delete corpus_; }
  static Corpus* corpus_;
};
Corpus* BuiltCorpusTest::corpus_ = nullptr;

TEST_F(BuiltCorpusTest, SplitSizes) {
  EXPECT_EQ(corpus_->syntactic.size(), 200u);
  EXPECT_EQ(corpus_->semantic.size(), 20u);
  EXPECT_EQ(corpus_->test.size(), 20u);
}

TEST_F(BuiltCorpusTest, SplitsAreDisjointByFixedProgram) {
  std::set<std::string> seen;
  size_t total = 0;
  for (const auto& s : corpus_->syntactic) seen.insert(s.fixed_program), ++total;
  for (const auto& s : corpus_->semantic) seen.insert(s.base.fixed_program), ++total;
  for (const auto& s : corpus_->test) seen.insert(s.base.fixed_program), ++total;
  EXPECT_EQ(seen.size(), total);
}

TEST_F(BuiltCorpusTest, SampleInvariants) {
  const int64_t budget = corpus_->manifest.config.step_budget;
  auto check_bug = [](const BugSample& b) {
    EXPECT_NE(b.buggy_text, b.fix_text) << b.id;
    EXPECT_TRUE(minilang::Compile(b.fixed_program).empty()) << b.id;
    EXPECT_TRUE(minilang::ParseSource(b.buggy_program).ok()) << b.id;
    EXPECT_EQ(Splice(b.buggy_program, b.hunk, b.fix_text), b.fixed_program) << b.id;
    EXPECT_EQ(Splice(b.buggy_program, b.hunk, std::string(minilang::kHoleMarker)).size() > 0, true);
  };
  for (const auto& b : corpus_->syntactic) check_bug(b);
  for (const auto* split : {&corpus_->semantic, &corpus_->test}) {
    for (const auto& s : *split) {
      check_bug(s.base);
      const Program fixed = MustParse(s.base.fixed_program);
      const Program buggy = MustParse(s.base.buggy_program);
      ASSERT_TRUE(minilang::Check(buggy).empty()) << s.base.id;
      EXPECT_EQ(s.dev_tests.size(), 4u);
      EXPECT_EQ(s.rgt_tests.size(), 16u);
      bool exposed = false;
      for (const auto& t : s.dev_tests) {
        EXPECT_TRUE(Passes(fixed, t, budget));
        exposed |= !Passes(buggy, t, budget);
      }
      EXPECT_TRUE(exposed) << s.base.id;
      for (const auto& t : s.rgt_tests) EXPECT_TRUE(Passes(fixed, t, budget));
    }
  }
}

TEST_F(BuiltCorpusTest, WriteReadRoundTripIsByteStable) {
  const auto dir = TempDir("roundtrip");
  WriteCorpus(dir, *corpus_);
  const Corpus back = ReadCorpus(dir);
  EXPECT_EQ(back.syntactic, corpus_->syntactic);
  EXPECT_EQ(back.semantic, corpus_->semantic);
  EXPECT_EQ(back.test, corpus_->test);
  EXPECT_EQ(back.manifest.seed, 7u);

  const auto dir2 = TempDir("roundtrip2");
  WriteCorpus(dir2, BuildCorpus(7, 200, 20, 20));
  for (const char* f : {"syntactic.jsonl", "semantic.jsonl", "test.jsonl", "manifest.json"}) {
    EXPECT_EQ(ReadAll(dir / f), ReadAll(dir2 / f)) << f;
  }
}

TEST(CorpusIoTest, TruncatedLineReportsLineNumber) {
  const auto dir = TempDir("truncated");
  const Corpus c = BuildCorpus(3, 5, 1, 1);
  WriteCorpus(dir, c);
  std::string text = ReadAll(dir / "syntactic.jsonl");
  // Cut the third line (second record) in half.
  size_t pos = 0;
  for (int i = 0; i < 2; ++i) pos = text.find('\n', pos) + 1;
  const size_t end = text.find('\n', pos);
  text = text.substr(0, pos + (end - pos) / 2) + "\n";
  std::ofstream(dir / "bad.jsonl", std::ios::binary) << text;
  try {
    ReadSplit(dir / "bad.jsonl");
    FAIL() << "expected schema violation";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
}

TEST(CorpusIoTest, EmptyFileIsEmptyCorpus) {
  const auto dir = TempDir("empty");
  std::ofstream(dir / "empty.jsonl").close();
  const SplitFile f = ReadSplit(dir / "empty.jsonl");
  EXPECT_FALSE(f.manifest.has_value());
  EXPECT_TRUE(f.samples.empty());
  EXPECT_THROW(ReadSplit(dir / "missing.jsonl"), Error);
}

}  // namespace
}  // namespace rrlab::corpus

namespace rrlab::corpus {
namespace {

TEST(SampleFromHunkTest, MatchesGeneratedSamples) {
  const Corpus c = BuildCorpus(7, 200, 0, 0);
  for (const auto& s : c.syntactic) {
    const BugSample r = SampleFromHunk(s.buggy_program, s.hunk, s.id);
    EXPECT_EQ(r.buggy_text, s.buggy_text) << s.id;
    EXPECT_EQ(r.context_text, s.context_text) << s.id;
    EXPECT_TRUE(r.fix_text.empty());
  }
}

TEST(SampleFromHunkTest, RejectsOutOfRangeHunk) {
  const std::string p = "fn main(a: int) -> int {\n    return a;\n}\n";
  EXPECT_THROW(SampleFromHunk(p, Hunk{0, 1}), Error);
  EXPECT_THROW(SampleFromHunk(p, Hunk{2, 1}), Error);
  EXPECT_THROW(SampleFromHunk(p, Hunk{3, 4}), Error);
  EXPECT_NO_THROW(SampleFromHunk(p, Hunk{2, 2}));
}

}  // namespace
}  // namespace rrlab::corpus
