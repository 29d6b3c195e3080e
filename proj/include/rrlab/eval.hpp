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

// Beam inference over known hunks and the measurement apparatus: top-k
// compilable rate, repair counts, first-error histogram and ablation.

#ifndef RRLAB_EVAL_HPP_
#define RRLAB_EVAL_HPP_

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rrlab/corpus.hpp"
#include "rrlab/discriminator.hpp"
#include "rrlab/minilang.hpp"
#include "rrlab/model.hpp"
#include "rrlab/tokenizer.hpp"

namespace rrlab::eval {

struct EvalConfig {
  int beam = 10;
  std::vector<int> ks = {1, 5, 10};
  int64_t budget = minilang::kDefaultStepBudget;

  // ks non-empty, strictly ascending and positive. A k above the beam width
  // averages over the patches available.
  void Validate() const;
};

struct RankedPatch {
  std::vector<int> ids;
  std::string text;
  double log_score = 0.0;
};

// Beam decode of one bug, best first. Throws kVersionMismatch when the
// vocabulary does not match the model's output layer.
std::vector<RankedPatch> Infer(const model::Parameters& params, const tokenizer::Vocab& vocab,
                               const corpus::BugSample& sample, int beam);

struct PatchRecord {
  std::string text;
  double log_score = 0.0;
  bool no_change = false;
  bool compilable = false;
  std::optional<minilang::DiagnosticCategory> first_error;
  discriminator::Stage stage = discriminator::Stage::kNoChange;
  bool exact_match = false;
};

struct BugRecord {
  std::string id;
  std::vector<PatchRecord> patches;  // rank order
};

// Runs every patch through the discriminator (with the sample's tests) and
// the compiler. Patches are scored independently of their rank.
BugRecord ScorePatches(const corpus::SemanticSample& sample, std::span<const RankedPatch> patches,
                       const tokenizer::Vocab& vocab, int64_t budget);

// One beam pass per bug; bugs are processed concurrently.
std::vector<BugRecord> GeneratePatches(const model::Parameters& params,
                                       const tokenizer::Vocab& vocab,
                                       std::span<const corpus::SemanticSample> bugs,
                                       const EvalConfig& cfg);

// Mean over bugs of the compilable fraction among the first min(k, n) patches.
std::vector<double> CompilableRate(std::span<const BugRecord> bugs, std::span<const int> ks);

struct RepairCounts {
  int64_t bugs = 0;
  int64_t plausible = 0;
  int64_t rgt_correct = 0;
  int64_t exact_match = 0;
};

RepairCounts RepairRate(std::span<const BugRecord> bugs);

// Category of the first diagnostic of each uncompilable patch among the top
// k, sorted by count (descending) then category.
using ErrorHistogram = std::vector<std::pair<minilang::DiagnosticCategory, int64_t>>;
ErrorHistogram CategorizeErrors(std::span<const BugRecord> bugs, int k);

// Fraction of bugs whose rank-1 patch is token-identical to the buggy hunk.
double NoChangeTop1(std::span<const BugRecord> bugs);

struct EvalReport {
  std::vector<int> ks;
  std::vector<double> compilable_rates;
  RepairCounts counts;
  ErrorHistogram errors;  // over the top max(ks) patches
  double no_change_top1 = 0.0;
  std::vector<BugRecord> bugs;
};

EvalReport Summarize(std::vector<BugRecord> bugs, const EvalConfig& cfg);

EvalReport Evaluate(const model::Parameters& params, const tokenizer::Vocab& vocab,
                    std::span<const corpus::SemanticSample> test, const EvalConfig& cfg);

struct AblationRow {
  std::string metric;
  double baseline = 0.0;
  double full = 0.0;
  double delta = 0.0;
};

struct AblationReport {
  EvalReport baseline;
  EvalReport full;
  std::vector<AblationRow> rows;
};

// Throws kConfig when the two models differ in configuration.
AblationReport Ablate(const model::Parameters& baseline, const model::Parameters& full,
                      const tokenizer::Vocab& vocab,
                      std::span<const corpus::SemanticSample> test, const EvalConfig& cfg);

std::vector<AblationRow> CompareReports(const EvalReport& baseline, const EvalReport& full);

// CSV outputs (headers documented in docs/formats.md).
void WriteCompilableRateCsv(const std::filesystem::path& path, const EvalReport& report);
void WriteRepairCountsCsv(const std::filesystem::path& path, const EvalReport& report);
void WriteErrorHistogramCsv(const std::filesystem::path& path, const EvalReport& report);
// One JSON object per bug with every ranked patch and its verdicts.
void WritePatchRecords(const std::filesystem::path& path, std::span<const BugRecord> bugs);
std::string PatchRecordsJson(std::span<const BugRecord> bugs);
void WriteAblationCsv(const std::filesystem::path& path, const AblationReport& report);

void PrintReport(std::ostream& os, const EvalReport& report);
void PrintAblation(std::ostream& os, const AblationReport& report);

}  // namespace rrlab::eval

#endif  // RRLAB_EVAL_HPP_
