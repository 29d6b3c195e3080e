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

// Serial patch discriminator: difference, compilability, developer tests,
// then RGT tests. The reward is the scaling value of the furthest stage
// reached.

#ifndef RRLAB_DISCRIMINATOR_HPP_
#define RRLAB_DISCRIMINATOR_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rrlab/corpus.hpp"
#include "rrlab/minilang.hpp"
#include "rrlab/tokenizer.hpp"

namespace rrlab::discriminator {

enum class Stage { kNoChange, kNonCompilable, kCompilable, kPlausible, kLikelyCorrect };

inline constexpr int kNumStages = 5;

std::string_view StageName(Stage stage);

struct RewardConfig {
  double s0 = -0.4;
  double s1 = -0.2;
  double s2 = 0.2;
  double s3 = 0.4;
  double s4 = 0.6;

  double For(Stage stage) const;
  friend bool operator==(const RewardConfig&, const RewardConfig&) = default;
};

// Throws kConfig naming the first violated constraint of
// s0 < 0, s0 < s1 < 0, 0 <= s2 < s3 < s4 < 1.
void ValidateConfig(const RewardConfig& cfg);

struct Counters {
  int compiles_run = 0;
  int tests_run = 0;
  friend bool operator==(const Counters&, const Counters&) = default;
};

struct RewardOutcome {
  double reward = 0.0;
  Stage stage = Stage::kNoChange;
  std::vector<minilang::Diagnostic> diagnostics;
  std::optional<size_t> failed_test_index;
  Counters counters;
};

struct PatchCandidate {
  std::string patch_text;       // canonical
  std::string patched_program;  // buggy program with the hunk replaced
};

// Canonicalizes `patch_text`, re-indents it to the hunk's nesting depth and
// splices it over the hunk lines.
PatchCandidate ApplyPatch(const corpus::BugSample& sample, std::string_view patch_text);

// False iff both texts encode to the same id sequence.
bool IsDifferent(std::string_view buggy_text, std::string_view patch_text,
                 const tokenizer::Vocab& vocab);

struct CompileVerdict {
  bool ok = false;
  std::vector<minilang::Diagnostic> diagnostics;
};

CompileVerdict CheckCompilable(const PatchCandidate& candidate);

struct TestVerdict {
  bool passed = false;
  std::optional<size_t> failed_index;
  int tests_run = 0;
};

// Fail-fast over `tests`; a runtime error or budget exhaustion is a failure.
// The candidate must compile (throws kInvalidArgument otherwise).
TestVerdict CheckPlausible(const PatchCandidate& candidate,
                           std::span<const corpus::TestCase> dev_tests,
                           int64_t budget = minilang::kDefaultStepBudget);
TestVerdict CheckRegression(const PatchCandidate& candidate,
                            std::span<const corpus::TestCase> rgt_tests,
                            int64_t budget = minilang::kDefaultStepBudget);

RewardOutcome Discriminate(const corpus::SemanticSample& sample, std::string_view patch_text,
                           const RewardConfig& cfg, const tokenizer::Vocab& vocab,
                           int64_t budget = minilang::kDefaultStepBudget);

}  // namespace rrlab::discriminator

#endif  // RRLAB_DISCRIMINATOR_HPP_
