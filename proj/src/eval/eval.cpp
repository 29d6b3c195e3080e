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

#include "rrlab/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "json.hpp"
#include "rrlab/error.hpp"
#include "rrlab/parallel.hpp"

namespace rrlab::eval {

namespace {

std::string Fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string Signed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%+.6f", v);
  return buf;
}

std::ofstream OpenCsv(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

void Close(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace

void EvalConfig::Validate() const {
  if (beam < 1) throw Error(ErrorCode::kConfig, "eval: beam must be positive");
  if (budget < 1) throw Error(ErrorCode::kConfig, "eval: budget must be positive");
  if (ks.empty()) throw Error(ErrorCode::kConfig, "eval: ks must not be empty");
  for (size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 1) throw Error(ErrorCode::kConfig, "eval: every k must be positive");
    if (i > 0 && ks[i] <= ks[i - 1])
      throw Error(ErrorCode::kConfig, "eval: ks must be strictly ascending");
  }
}

std::vector<RankedPatch> Infer(const model::Parameters& params, const tokenizer::Vocab& vocab,
                               const corpus::BugSample& sample, int beam) {
  const auto& mc = params.config;
  if (static_cast<int>(vocab.size()) != mc.vocab_size) {
    throw Error(ErrorCode::kVersionMismatch,
                "vocabulary has " + std::to_string(vocab.size()) + " pieces, model expects " +
                    std::to_string(mc.vocab_size));
  }
  const auto enc = tokenizer::EncodeExample(sample, vocab, static_cast<size_t>(mc.max_input),
                                            static_cast<size_t>(mc.max_target));
  const auto result = model::BeamDecode(params, enc.input_ids, beam, mc.max_target);
  std::vector<RankedPatch> out;
  out.reserve(result.sequences.size());
  for (const auto& h : result.sequences) {
    out.push_back({h.ids, vocab.Decode(h.ids), h.log_score});
  }
  return out;
}

BugRecord ScorePatches(const corpus::SemanticSample& sample, std::span<const RankedPatch> patches,
                       const tokenizer::Vocab& vocab, int64_t budget) {
  BugRecord rec;
  rec.id = sample.base.id;
  const std::string fix = minilang::CanonicalizeFragment(sample.base.fix_text);
  for (const auto& p : patches) {
    PatchRecord r;
    r.text = p.text;
    r.log_score = p.log_score;
    const auto outcome =
        discriminator::Discriminate(sample, p.text, discriminator::RewardConfig{}, vocab, budget);
    r.stage = outcome.stage;
    r.no_change = outcome.stage == discriminator::Stage::kNoChange;
    const auto verdict = discriminator::CheckCompilable(discriminator::ApplyPatch(sample.base, p.text));
    r.compilable = verdict.ok;
    if (!verdict.diagnostics.empty()) r.first_error = verdict.diagnostics.front().category;
    r.exact_match = minilang::CanonicalizeFragment(p.text) == fix;
    rec.patches.push_back(std::move(r));
  }
  return rec;
}

std::vector<BugRecord> GeneratePatches(const model::Parameters& params,
                                       const tokenizer::Vocab& vocab,
                                       std::span<const corpus::SemanticSample> bugs,
                                       const EvalConfig& cfg) {
  cfg.Validate();
  std::vector<BugRecord> out(bugs.size());
  ParallelFor(bugs.size(), [&](size_t i) {
    const auto patches = Infer(params, vocab, bugs[i].base, cfg.beam);
    out[i] = ScorePatches(bugs[i], patches, vocab, cfg.budget);
  });
  return out;
}

std::vector<double> CompilableRate(std::span<const BugRecord> bugs, std::span<const int> ks) {
  std::vector<double> rates;
  for (int k : ks) {
    if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
    double sum = 0.0;
    for (const auto& b : bugs) {
      const size_t n = std::min(static_cast<size_t>(k), b.patches.size());
      if (n == 0) continue;
      size_t ok = 0;
      for (size_t i = 0; i < n; ++i) ok += b.patches[i].compilable ? 1 : 0;
      sum += static_cast<double>(ok) / static_cast<double>(n);
    }
    rates.push_back(bugs.empty() ? 0.0 : sum / static_cast<double>(bugs.size()));
  }
  return rates;
}

RepairCounts RepairRate(std::span<const BugRecord> bugs) {
  RepairCounts c;
  c.bugs = static_cast<int64_t>(bugs.size());
  for (const auto& b : bugs) {
    bool plausible = false, correct = false, exact = false;
    for (const auto& p : b.patches) {
      plausible |= p.stage >= discriminator::Stage::kPlausible;
      correct |= p.stage == discriminator::Stage::kLikelyCorrect;
      exact |= p.exact_match;
    }
    c.plausible += plausible;
    c.rgt_correct += correct;
    c.exact_match += exact;
  }
  return c;
}

ErrorHistogram CategorizeErrors(std::span<const BugRecord> bugs, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  std::map<minilang::DiagnosticCategory, int64_t> counts;
  for (const auto& b : bugs) {
    const size_t n = std::min(static_cast<size_t>(k), b.patches.size());
    for (size_t i = 0; i < n; ++i) {
      const auto& p = b.patches[i];
      if (!p.compilable && p.first_error) ++counts[*p.first_error];
    }
  }
  ErrorHistogram hist(counts.begin(), counts.end());
  std::stable_sort(hist.begin(), hist.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return hist;
}

double NoChangeTop1(std::span<const BugRecord> bugs) {
  if (bugs.empty()) return 0.0;
  int64_t n = 0;
  for (const auto& b : bugs) n += !b.patches.empty() && b.patches.front().no_change;
  return static_cast<double>(n) / static_cast<double>(bugs.size());
}

EvalReport Summarize(std::vector<BugRecord> bugs, const EvalConfig& cfg) {
  cfg.Validate();
  EvalReport r;
  r.ks = cfg.ks;
  r.compilable_rates = CompilableRate(bugs, cfg.ks);
  r.counts = RepairRate(bugs);
  r.errors = CategorizeErrors(bugs, cfg.ks.back());
  r.no_change_top1 = NoChangeTop1(bugs);
  r.bugs = std::move(bugs);
  return r;
}

EvalReport Evaluate(const model::Parameters& params, const tokenizer::Vocab& vocab,
                    std::span<const corpus::SemanticSample> test, const EvalConfig& cfg) {
  return Summarize(GeneratePatches(params, vocab, test, cfg), cfg);
}

std::vector<AblationRow> CompareReports(const EvalReport& baseline, const EvalReport& full) {
  if (baseline.ks != full.ks) throw Error(ErrorCode::kConfig, "reports use different ks");
  std::vector<AblationRow> rows;
  auto add = [&](std::string name, double b, double f) {
    rows.push_back({std::move(name), b, f, f - b});
  };
  for (size_t i = 0; i < baseline.ks.size(); ++i) {
    add("compilable@" + std::to_string(baseline.ks[i]), baseline.compilable_rates[i],
        full.compilable_rates[i]);
  }
  add("plausible", static_cast<double>(baseline.counts.plausible),
      static_cast<double>(full.counts.plausible));
  add("rgt_correct", static_cast<double>(baseline.counts.rgt_correct),
      static_cast<double>(full.counts.rgt_correct));
  add("exact_match", static_cast<double>(baseline.counts.exact_match),
      static_cast<double>(full.counts.exact_match));
  add("no_change_top1", baseline.no_change_top1, full.no_change_top1);
  return rows;
}

AblationReport Ablate(const model::Parameters& baseline, const model::Parameters& full,
                      const tokenizer::Vocab& vocab,
                      std::span<const corpus::SemanticSample> test, const EvalConfig& cfg) {
  if (!(baseline.config == full.config))
    throw Error(ErrorCode::kConfig, "baseline and full models have different configurations");
  AblationReport r;
  r.baseline = Evaluate(baseline, vocab, test, cfg);
  r.full = Evaluate(full, vocab, test, cfg);
  r.rows = CompareReports(r.baseline, r.full);
  return r;
}

void WriteCompilableRateCsv(const std::filesystem::path& path, const EvalReport& report) {
  auto out = OpenCsv(path);
  out << "k,compilable_rate\n";
  for (size_t i = 0; i < report.ks.size(); ++i)
    out << report.ks[i] << ',' << Fixed(report.compilable_rates[i]) << '\n';
  Close(out, path);
}

void WriteRepairCountsCsv(const std::filesystem::path& path, const EvalReport& report) {
  auto out = OpenCsv(path);
  out << "bugs,plausible,rgt_correct,exact_match,no_change_top1\n";
  const auto& c = report.counts;
  out << c.bugs << ',' << c.plausible << ',' << c.rgt_correct << ',' << c.exact_match << ','
      << Fixed(report.no_change_top1) << '\n';
  Close(out, path);
}

void WriteErrorHistogramCsv(const std::filesystem::path& path, const EvalReport& report) {
  auto out = OpenCsv(path);
  out << "category,count\n";
  for (const auto& [cat, n] : report.errors) out << minilang::CategoryName(cat) << ',' << n << '\n';
  Close(out, path);
}

std::string PatchRecordsJson(std::span<const BugRecord> bugs) {
  std::string out;
  for (const auto& b : bugs) {
    nlohmann::ordered_json patches = nlohmann::ordered_json::array();
    for (size_t i = 0; i < b.patches.size(); ++i) {
      const auto& p = b.patches[i];
      patches.push_back({{"rank", i + 1},
                         {"text", p.text},
                         {"log_score", p.log_score},
                         {"stage", discriminator::StageName(p.stage)},
                         {"compilable", p.compilable},
                         {"first_error", p.first_error
                                             ? nlohmann::ordered_json(std::string(
                                                   minilang::CategoryName(*p.first_error)))
                                             : nlohmann::ordered_json(nullptr)},
                         {"exact_match", p.exact_match}});
    }
    nlohmann::ordered_json j = {{"id", b.id}, {"patches", std::move(patches)}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

void WritePatchRecords(const std::filesystem::path& path, std::span<const BugRecord> bugs) {
  auto out = OpenCsv(path);
  out << PatchRecordsJson(bugs);
  Close(out, path);
}

void WriteAblationCsv(const std::filesystem::path& path, const AblationReport& report) {
  auto out = OpenCsv(path);
  out << "metric,baseline,full,delta\n";
  for (const auto& r : report.rows)
    out << r.metric << ',' << Fixed(r.baseline) << ',' << Fixed(r.full) << ',' << Signed(r.delta)
        << '\n';
  Close(out, path);
}

void PrintReport(std::ostream& os, const EvalReport& report) {
  os << "bugs            " << report.counts.bugs << '\n';
  for (size_t i = 0; i < report.ks.size(); ++i) {
    std::string label = "compilable@" + std::to_string(report.ks[i]);
    label.resize(16, ' ');
    os << label << Fixed(100.0 * report.compilable_rates[i]) << " %\n";
  }
  os << "plausible       " << report.counts.plausible << '\n'
     << "rgt_correct     " << report.counts.rgt_correct << '\n'
     << "exact_match     " << report.counts.exact_match << '\n'
     << "no_change_top1  " << Fixed(report.no_change_top1) << '\n';
  if (!report.errors.empty()) {
    os << "first errors:\n";
    for (const auto& [cat, n] : report.errors)
      os << "  " << minilang::CategoryName(cat) << ' ' << n << '\n';
  }
}

void PrintAblation(std::ostream& os, const AblationReport& report) {
  os << "metric             baseline         full        delta\n";
  for (const auto& r : report.rows) {
    std::string name = r.metric;
    name.resize(16, ' ');
    char line[160];
    std::snprintf(line, sizeof line, "%s %12.6f %12.6f %+12.6f\n", name.c_str(), r.baseline,
                  r.full, r.delta);
    os << line;
  }
}

}  // namespace rrlab::eval
