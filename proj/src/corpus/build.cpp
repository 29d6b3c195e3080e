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
#include <string>
#include <vector>

#include "corpus/internal.hpp"
#include "rrlab/error.hpp"
#include "rrlab/rng.hpp"

namespace rrlab::corpus {

using minilang::Program;

namespace {

constexpr size_t kMaxProbes = 10000;

Program ParseOrThrow(const std::string& text, std::string_view what) {
  auto parsed = minilang::ParseSource(text);
  if (!parsed.ok()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " does not parse: " +
                                                 parsed.error->message);
  }
  return std::move(*parsed.program);
}

}  // namespace

std::vector<TestCase> MakeDevTests(const BugSample& sample, uint64_t seed, size_t k,
                                   const CorpusConfig& cfg) {
  const Program fixed = ParseOrThrow(sample.fixed_program, "fixed program");
  const auto buggy_parse = minilang::ParseSource(sample.buggy_program);
  const bool buggy_runs =
      buggy_parse.ok() && minilang::Check(*buggy_parse.program).empty();

  Rng rng(seed);
  const auto probes = ProbeInputs(fixed.params.size(), cfg, rng.Next(), kMaxProbes);
  std::vector<TestCase> exposing;
  std::vector<TestCase> valid;
  for (const auto& in : probes) {
    auto test = MakeTestCase(fixed, in, cfg.step_budget);
    if (!test) continue;
    if (!buggy_runs || !Passes(*buggy_parse.program, *test, cfg.step_budget)) {
      exposing.push_back(*test);
    }
    valid.push_back(std::move(*test));
    // Sampled domains are already in random order, so stopping early is unbiased.
    if (fixed.params.size() > 2 && !exposing.empty() && valid.size() >= 4 * k + 16) break;
  }
  if (exposing.empty()) {
    throw Error(ErrorCode::kGeneration,
                "cannot expose bug " + sample.id + " within " + std::to_string(kMaxProbes) +
                    " probes");
  }
  if (k == 0) return {};

  std::vector<TestCase> tests;
  tests.push_back(exposing[rng.Index(exposing.size())]);
  std::vector<TestCase> rest;
  for (auto& t : valid) {
    if (t != tests.front()) rest.push_back(std::move(t));
  }
  rng.Shuffle(std::span<TestCase>(rest));
  for (size_t i = 0; tests.size() < k; ++i) {
    if (i < rest.size()) {
      tests.push_back(rest[i]);
    } else {
      tests.push_back(valid.empty() ? tests.front() : tests[rng.Index(tests.size())]);
    }
  }
  rng.Shuffle(std::span<TestCase>(tests));
  return tests;
}

std::vector<TestCase> MakeRgtTests(const Program& fixed, uint64_t seed, size_t k,
                                   const CorpusConfig& cfg) {
  Rng rng(seed);
  std::vector<TestCase> tests;
  size_t attempts = 0;
  while (tests.size() < k) {
    if (++attempts > kMaxProbes) {
      throw Error(ErrorCode::kGeneration, "fixed program never returns on the probe domain");
    }
    std::vector<int64_t> in(fixed.params.size());
    for (auto& v : in) v = rng.Uniform(cfg.probe_min, cfg.probe_max);
    if (auto test = MakeTestCase(fixed, std::move(in), cfg.step_budget)) {
      tests.push_back(std::move(*test));
    }
  }
  return tests;
}

namespace {

std::string SampleId(std::string_view prefix, size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 5) digits.insert(0, 5 - digits.size(), '0');
  return std::string(prefix) + "-" + digits;
}

}  // namespace

Corpus BuildCorpus(uint64_t seed, size_t n_syntactic, size_t n_semantic, size_t n_test,
                   const CorpusConfig& cfg) {
  Corpus corpus;
  corpus.manifest = CorpusManifest{seed, n_syntactic, n_semantic, n_test, cfg};
  ProgramSource source(DeriveSeed(seed, 0x5052), cfg.size, cfg);
  uint64_t draw = 0;

  auto fill_semantic = [&](std::vector<SemanticSample>& out, size_t n, std::string_view prefix) {
    MutateOptions options;
    options.require_compilable = true;
    size_t failures = 0;
    while (out.size() < n) {
      const Program fixed = source.Next();
      const uint64_t sample_seed = DeriveSeed(seed, ++draw);
      try {
        SemanticSample s;
        s.base = Mutate(fixed, sample_seed, options, cfg);
        s.base.id = SampleId(prefix, out.size());
        s.dev_tests = MakeDevTests(s.base, DeriveSeed(sample_seed, 1),
                                   static_cast<size_t>(cfg.dev_tests), cfg);
        s.rgt_tests = MakeRgtTests(fixed, DeriveSeed(sample_seed, 2),
                                   static_cast<size_t>(cfg.rgt_tests), cfg);
        out.push_back(std::move(s));
        failures = 0;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kGeneration || ++failures >= 1000) throw;
      }
    }
  };

  fill_semantic(corpus.test, n_test, "test");
  fill_semantic(corpus.semantic, n_semantic, "sem");

  size_t failures = 0;
  while (corpus.syntactic.size() < n_syntactic) {
    const Program fixed = source.Next();
    try {
      BugSample s = Mutate(fixed, DeriveSeed(seed, ++draw), {}, cfg);
      s.id = SampleId("syn", corpus.syntactic.size());
      corpus.syntactic.push_back(std::move(s));
      failures = 0;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kGeneration || ++failures >= 1000) throw;
    }
  }
  return corpus;
}

}  // namespace rrlab::corpus
