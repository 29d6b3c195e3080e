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

// Synthetic bug corpora: random MiniLang programs, single-hunk mutations,
// developer tests (t_h) and regression-generated tests (t_m), and the JSONL
// split files.

#ifndef RRLAB_CORPUS_HPP_
#define RRLAB_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rrlab/minilang.hpp"

namespace rrlab::corpus {

// 1-based inclusive line range into the buggy program.
struct Hunk {
  int start_line = 1;
  int end_line = 1;
  friend bool operator==(const Hunk&, const Hunk&) = default;
};

enum class MutationKind {
  kArithOpSwap,
  kCmpOpSwap,
  kConstPerturb,
  kIdentifierMisuse,
  kNegateCondition,
  kDeleteStatement,
  kOffByOne,
};
inline constexpr int kMutationKindCount = 7;

std::string_view MutationName(MutationKind kind);
std::optional<MutationKind> ParseMutationName(std::string_view name);

struct BugSample {
  std::string id;
  std::string fixed_program;
  std::string buggy_program;
  Hunk hunk;
  std::string buggy_text;    // hunk lines of buggy_program, '\n'-joined
  std::string fix_text;      // replacement lines, '\n'-joined
  std::string context_text;  // buggy_program with the hunk replaced by <HOLE>
  MutationKind mutation = MutationKind::kArithOpSwap;

  friend bool operator==(const BugSample&, const BugSample&) = default;
};

struct TestCase {
  std::vector<int64_t> inputs;
  int64_t expected = 0;
  friend bool operator==(const TestCase&, const TestCase&) = default;
};

struct SemanticSample {
  BugSample base;
  std::vector<TestCase> dev_tests;  // t_h
  std::vector<TestCase> rgt_tests;  // t_m
  friend bool operator==(const SemanticSample&, const SemanticSample&) = default;
};

struct SizeConfig {
  int min_params = 1;
  int max_params = 3;
  int min_statements = 2;
  int max_statements = 4;
  int max_depth = 2;
  int max_expr_depth = 2;
  int max_constant = 9;
};

struct CorpusConfig {
  SizeConfig size;
  int dev_tests = 4;
  int rgt_tests = 16;
  int64_t step_budget = minilang::kDefaultStepBudget;
  int64_t probe_min = -8;
  int64_t probe_max = 8;
};

struct CorpusManifest {
  uint64_t seed = 0;
  size_t n_syntactic = 0;
  size_t n_semantic = 0;
  size_t n_test = 0;
  CorpusConfig config;
};

struct Corpus {
  CorpusManifest manifest;
  std::vector<BugSample> syntactic;
  std::vector<SemanticSample> semantic;
  std::vector<SemanticSample> test;
};

// ---------------------------------------------------------------------------
// Probing

// The input domain used for behavioral comparison: exhaustive over
// [probe_min, probe_max]^n for n <= 2, otherwise `samples` uniform draws.
std::vector<std::vector<int64_t>> ProbeInputs(size_t param_count, const CorpusConfig& cfg,
                                              uint64_t seed, size_t samples = 512);

// Replaces lines [hunk.start_line, hunk.end_line] of `program` with the lines
// of `replacement` (an empty replacement deletes the hunk).
std::string Splice(std::string_view program, Hunk hunk, std::string_view replacement);

// Builds a test case whose expectation is computed by running `fixed`.
// Returns nullopt when `fixed` does not return on these inputs.
// Bug sample for inference on an arbitrary program: hunk lines, context with
// the hole marker at the hunk's indentation, no fix. Throws kInvalidArgument
// when the hunk is outside the program.
BugSample SampleFromHunk(std::string_view buggy_program, Hunk hunk, std::string id = "input");

std::optional<TestCase> MakeTestCase(const minilang::Program& fixed,
                                     std::vector<int64_t> inputs, int64_t budget);

// True iff `program` returns test.expected on test.inputs. A program whose
// arity differs from the test's fails it.
bool Passes(const minilang::Program& program, const TestCase& test, int64_t budget);

// ---------------------------------------------------------------------------
// Generation

// Throws Error(kGeneration) after 1000 consecutive rejected candidates.
std::vector<minilang::Program> GeneratePrograms(uint64_t seed, size_t count,
                                                const SizeConfig& size = {},
                                                const CorpusConfig& cfg = {});

struct MutateOptions {
  // Require the buggy program to compile (semantic and test splits).
  bool require_compilable = false;
  // Empty means every operator is allowed.
  std::vector<MutationKind> allowed;
};

// Throws Error(kGeneration) "no viable mutation" when no operator/site
// produces an observable behavior difference.
BugSample Mutate(const minilang::Program& fixed, uint64_t seed,
                 const MutateOptions& options = {}, const CorpusConfig& cfg = {});

// Exactly k tests passing on the fixed program, at least one failing on the
// buggy one. Throws Error(kGeneration) "cannot expose bug" otherwise.
std::vector<TestCase> MakeDevTests(const BugSample& sample, uint64_t seed, size_t k,
                                   const CorpusConfig& cfg = {});

std::vector<TestCase> MakeRgtTests(const minilang::Program& fixed, uint64_t seed, size_t k,
                                   const CorpusConfig& cfg = {});

Corpus BuildCorpus(uint64_t seed, size_t n_syntactic, size_t n_semantic, size_t n_test,
                   const CorpusConfig& cfg = {});

// ---------------------------------------------------------------------------
// Persistence (JSONL, first line is a corpus-manifest header)

enum class Split { kSyntactic, kSemantic, kTest };
std::string_view SplitName(Split split);

// A single split file. Syntactic records carry no tests.
struct SplitFile {
  std::optional<CorpusManifest> manifest;
  std::vector<SemanticSample> samples;
};

void WriteSplit(const std::filesystem::path& path, const CorpusManifest& manifest, Split split,
                const std::vector<SemanticSample>& samples);
// Throws Error(kIo) or Error(kSchema) with the 1-based line number.
SplitFile ReadSplit(const std::filesystem::path& path);

// Writes syntactic.jsonl, semantic.jsonl, test.jsonl and manifest.json.
void WriteCorpus(const std::filesystem::path& dir, const Corpus& corpus);
Corpus ReadCorpus(const std::filesystem::path& dir);

// Content hash of the three split files (manifest timestamps excluded).
uint64_t CorpusHash(const Corpus& corpus);

}  // namespace rrlab::corpus

#endif  // RRLAB_CORPUS_HPP_
