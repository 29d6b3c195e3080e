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

#include <algorithm>
#include <cmath>

#include "rrlab/discriminator.hpp"
#include "rrlab/error.hpp"

namespace rrlab::discriminator {
namespace {

int LeadingSpaces(std::string_view line) {
  int n = 0;
  while (n < static_cast<int>(line.size()) && line[n] == ' ') ++n;
  return n;
}

bool StartsWithClose(std::string_view line) {
  const size_t at = line.find_first_not_of(' ');
  return at != std::string_view::npos && line[at] == '}';
}

bool EndsWithOpen(std::string_view line) { return !line.empty() && line.back() == '{'; }

TestVerdict RunTests(const minilang::Program& program, std::span<const corpus::TestCase> tests,
                     int64_t budget) {
  TestVerdict v;
  for (size_t i = 0; i < tests.size(); ++i) {
    ++v.tests_run;
    if (!corpus::Passes(program, tests[i], budget)) {
      v.failed_index = i;
      return v;
    }
  }
  v.passed = true;
  return v;
}

minilang::Program CompiledProgram(const PatchCandidate& candidate) {
  auto parsed = minilang::ParseSource(candidate.patched_program);
  if (!parsed.ok() || !minilang::Check(*parsed.program).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "candidate does not compile");
  }
  return std::move(*parsed.program);
}

}  // namespace

std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kNoChange: return "NoChange";
    case Stage::kNonCompilable: return "NonCompilable";
    case Stage::kCompilable: return "Compilable";
    case Stage::kPlausible: return "Plausible";
    case Stage::kLikelyCorrect: return "LikelyCorrect";
  }
  return "?";
}

double RewardConfig::For(Stage stage) const {
  switch (stage) {
    case Stage::kNoChange: return s0;
    case Stage::kNonCompilable: return s1;
    case Stage::kCompilable: return s2;
    case Stage::kPlausible: return s3;
    case Stage::kLikelyCorrect: return s4;
  }
  return s0;
}

void ValidateConfig(const RewardConfig& c) {
  struct Rule {
    bool holds;
    const char* message;
  };
  const Rule rules[] = {
      {std::isfinite(c.s0) && std::isfinite(c.s1) && std::isfinite(c.s2) &&
           std::isfinite(c.s3) && std::isfinite(c.s4),
       "scaling values must be finite"},
      {c.s0 < 0.0, "s0 must be negative"},
      {c.s0 < c.s1, "s1 must exceed s0"},
      {c.s1 < 0.0, "s1 must be negative"},
      {c.s2 >= 0.0, "s2 must be non-negative"},
      {c.s2 < c.s3, "s3 must exceed s2"},
      {c.s3 < c.s4, "s4 must exceed s3"},
      {c.s4 < 1.0, "s4 must be below 1"},
  };
  for (const Rule& r : rules) {
    if (!r.holds) throw Error(ErrorCode::kConfig, std::string("reward config: ") + r.message);
  }
}

PatchCandidate ApplyPatch(const corpus::BugSample& sample, std::string_view patch_text) {
  PatchCandidate c;
  c.patch_text = minilang::CanonicalizeFragment(patch_text);
  const auto program_lines = minilang::SplitLines(sample.buggy_program);
  int depth = 0;
  const auto first = static_cast<size_t>(std::max(sample.hunk.start_line, 1) - 1);
  if (first < program_lines.size()) {
    const std::string& anchor = program_lines[first];
    depth = LeadingSpaces(anchor) / 4 + (StartsWithClose(anchor) ? 1 : 0);
  }
  std::string body;
  for (const auto& line : minilang::SplitLines(c.patch_text)) {
    if (StartsWithClose(line)) depth = std::max(depth - 1, 0);
    if (!body.empty()) body += '\n';
    body.append(static_cast<size_t>(depth) * 4, ' ');
    body += line;
    if (EndsWithOpen(line)) ++depth;
  }
  c.patched_program = corpus::Splice(sample.buggy_program, sample.hunk, body);
  return c;
}

bool IsDifferent(std::string_view buggy_text, std::string_view patch_text,
                 const tokenizer::Vocab& vocab) {
  return vocab.Encode(buggy_text) != vocab.Encode(patch_text);
}

CompileVerdict CheckCompilable(const PatchCandidate& candidate) {
  CompileVerdict v;
  v.diagnostics = minilang::Compile(candidate.patched_program);
  v.ok = v.diagnostics.empty();
  return v;
}

TestVerdict CheckPlausible(const PatchCandidate& candidate,
                           std::span<const corpus::TestCase> dev_tests, int64_t budget) {
  return RunTests(CompiledProgram(candidate), dev_tests, budget);
}

TestVerdict CheckRegression(const PatchCandidate& candidate,
                            std::span<const corpus::TestCase> rgt_tests, int64_t budget) {
  return RunTests(CompiledProgram(candidate), rgt_tests, budget);
}

RewardOutcome Discriminate(const corpus::SemanticSample& sample, std::string_view patch_text,
                           const RewardConfig& cfg, const tokenizer::Vocab& vocab,
                           int64_t budget) {
  ValidateConfig(cfg);
  RewardOutcome out;
  auto finish = [&](Stage stage) {
    out.stage = stage;
    out.reward = cfg.For(stage);
    return out;
  };
  if (!IsDifferent(sample.base.buggy_text, patch_text, vocab)) return finish(Stage::kNoChange);

  const PatchCandidate candidate = ApplyPatch(sample.base, patch_text);
  ++out.counters.compiles_run;
  auto parsed = minilang::ParseSource(candidate.patched_program);
  if (!parsed.ok()) {
    out.diagnostics.push_back(*parsed.error);
    return finish(Stage::kNonCompilable);
  }
  out.diagnostics = minilang::Check(*parsed.program);
  if (!out.diagnostics.empty()) return finish(Stage::kNonCompilable);

  const TestVerdict dev = RunTests(*parsed.program, sample.dev_tests, budget);
  out.counters.tests_run += dev.tests_run;
  if (!dev.passed) {
    out.failed_test_index = dev.failed_index;
    return finish(Stage::kCompilable);
  }
  const TestVerdict rgt = RunTests(*parsed.program, sample.rgt_tests, budget);
  out.counters.tests_run += rgt.tests_run;
  if (!rgt.passed) {
    out.failed_test_index = rgt.failed_index;
    return finish(Stage::kPlausible);
  }
  return finish(Stage::kLikelyCorrect);
}

}  // namespace rrlab::discriminator
