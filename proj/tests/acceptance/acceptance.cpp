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

// Acceptance run: one PASS/FAIL line per criterion. Without arguments all
// eight criteria run; `--only 1,2,3` selects a subset. Exit status is 0 iff
// every selected criterion passed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "common/samples.hpp"
#include "rrlab.h"
#include "rrlab/corpus.hpp"
#include "rrlab/discriminator.hpp"
#include "rrlab/error.hpp"
#include "rrlab/eval.hpp"
#include "rrlab/log.hpp"
#include "rrlab/minilang.hpp"
#include "rrlab/model.hpp"
#include "rrlab/rng.hpp"
#include "rrlab/training.hpp"

namespace {

namespace fs = std::filesystem;
using namespace rrlab;
using discriminator::RewardConfig;
using discriminator::Stage;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Reward/loss exactness

Verdict RewardLoss() {
  const RewardConfig cfg;  // {-0.4, -0.2, 0.2, 0.4, 0.6}
  const std::set<double> levels = {cfg.s0, cfg.s1, cfg.s2, cfg.s3, cfg.s4};
  const auto sample = testing::DoublingSample();
  const std::vector<std::pair<std::string, Stage>> patches = {
      {"let x: int = a * 3;", Stage::kNoChange},
      {"let x: int = a * ;", Stage::kNonCompilable},
      {"let x: int = a * 5;", Stage::kCompilable},
      {testing::DevOnlyPatch(sample), Stage::kPlausible},
      {"let x: int = a + a;", Stage::kLikelyCorrect}};
  std::vector<std::string> texts = {sample.base.buggy_text, sample.base.fix_text,
                                    sample.base.context_text};
  for (const auto& p : patches) texts.push_back(p.first);
  const auto vocab = tokenizer::Vocab::Train(texts, 64);

  model::ModelConfig mc;
  mc.d_model = 8;
  mc.n_heads = 2;
  mc.n_layers_enc = 1;
  mc.n_layers_dec = 1;
  mc.d_ff = 16;
  mc.max_input = 64;
  mc.max_target = 16;
  mc.vocab_size = static_cast<int>(vocab.size());
  const auto enc = tokenizer::EncodeExample(sample.base, vocab, 64, 16);

  training::SemanticTrainConfig sc;
  Rng rng(20240607);
  double worst = 0.0;
  int bad_reward = 0, bad_stage = 0;
  std::set<double> seen_losses;
  training::TrainState state;
  for (int i = 0; i < 1000; ++i) {
    // A fresh random model every 50 pairs keeps L spread out.
    if (i % 50 == 0) {
      mc.seed = rng.Next();
      state = training::InitState(mc);
    }
    sc.learning_rate = 1e-3 * (0.5 + rng.Real());
    const auto& [text, stage] = patches[rng.Index(patches.size())];
    const double oracle_loss =
        model::ForwardTeacherForced(state.params, enc.input_ids, enc.target_ids).loss;
    const auto m = training::SemanticUpdate(state, sample, enc, text, vocab, sc);
    const double r = cfg.For(stage);
    if (m.stage != stage) ++bad_stage;
    if (m.reward != r || !levels.count(m.reward)) ++bad_reward;
    const double want = (1.0 - r) * oracle_loss;
    worst = std::max(worst, std::abs(m.scaled_loss - want) / std::abs(want));
    seen_losses.insert(m.loss);
  }

  const std::vector<std::pair<RewardConfig, std::string>> violations = {
      {{-0.1, -0.2, 0.2, 0.4, 0.6}, "s1 must exceed s0"},
      {{-0.4, 0.0, 0.2, 0.4, 0.6}, "s1 must be negative"},
      {{-0.4, -0.2, -0.1, 0.4, 0.6}, "s2 must be non-negative"},
      {{-0.4, -0.2, 0.4, 0.4, 0.6}, "s3 must exceed s2"},
      {{-0.4, -0.2, 0.2, 0.4, 0.3}, "s4 must exceed s3"},
      {{-0.4, -0.2, 0.2, 0.4, 1.0}, "s4 must be below 1"}};
  int rejected = 0;
  for (const auto& [c, msg] : violations) {
    try {
      discriminator::ValidateConfig(c);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig && std::string(e.what()).find(msg) != std::string::npos)
        ++rejected;
    }
  }
  bool default_ok = true;
  try {
    discriminator::ValidateConfig(cfg);
  } catch (const Error&) {
    default_ok = false;
  }

  Verdict v;
  v.pass = worst <= 1e-12 && bad_reward == 0 && bad_stage == 0 && default_ok &&
           rejected == static_cast<int>(violations.size()) && seen_losses.size() > 100;
  v.detail = "1000 pairs, max rel err " + Fmt("%.2e", worst) + ", " +
             std::to_string(seen_losses.size()) + " distinct L, rewards off-table " +
             std::to_string(bad_reward) + ", config violations rejected " +
             std::to_string(rejected) + "/" + std::to_string(violations.size());
  return v;
}

// ---------------------------------------------------------------------------
// 2. Discriminator short-circuit

// Counters derived by running the patched program directly.
discriminator::Counters ExpectedCounters(const corpus::SemanticSample& s, const std::string& patch,
                                         Stage stage) {
  discriminator::Counters c;
  if (stage == Stage::kNoChange) return c;
  c.compiles_run = 1;
  if (stage == Stage::kNonCompilable) return c;
  const auto program =
      minilang::ParseSource(discriminator::ApplyPatch(s.base, patch).patched_program);
  auto run = [&](const std::vector<corpus::TestCase>& tests) {
    for (const auto& t : tests) {
      ++c.tests_run;
      const auto out = minilang::Interpret(*program.program, t.inputs);
      if (!out.returned() || out.value != t.expected) return false;
    }
    return true;
  };
  if (run(s.dev_tests)) run(s.rgt_tests);
  return c;
}

Verdict ShortCircuit() {
  const auto s = testing::DoublingSample();
  std::vector<std::string> texts = {s.base.buggy_text, s.base.fix_text, s.base.context_text};
  const auto vocab = tokenizer::Vocab::Train(texts, 64);
  const RewardConfig cfg;
  const std::vector<std::pair<std::string, Stage>> cases = {
      {"let x: int = a * 3;", Stage::kNoChange},
      {"let x: int = a * ;", Stage::kNonCompilable},
      {"let x: int = a * 5;", Stage::kCompilable},
      {testing::DevOnlyPatch(s), Stage::kPlausible},
      {"let x: int = a + a;", Stage::kLikelyCorrect}};
  Verdict v{true, ""};
  for (const auto& [patch, stage] : cases) {
    const auto out = discriminator::Discriminate(s, patch, cfg, vocab);
    const auto want = ExpectedCounters(s, patch, stage);
    const bool ok = out.stage == stage && out.reward == cfg.For(stage) && out.counters == want;
    v.pass = v.pass && ok;
    v.detail += std::string(v.detail.empty() ? "" : ", ") +
                std::string(discriminator::StageName(stage)) + " " +
                std::to_string(out.counters.compiles_run) + "c/" +
                std::to_string(out.counters.tests_run) + "t" + (ok ? "" : " MISMATCH");
  }
  return v;
}

// ---------------------------------------------------------------------------
// 3. Gradient correctness

Verdict Gradients() {
  model::ModelConfig c;
  c.d_model = 8;
  c.n_heads = 2;
  c.n_layers_enc = 1;
  c.n_layers_dec = 1;
  c.d_ff = 16;
  c.max_input = 16;
  c.max_target = 8;
  c.vocab_size = 12;
  c.seed = 17;
  const auto p = model::Init(c);
  Rng rng(99);
  std::vector<model::GradCheckExample> examples(5);
  for (auto& ex : examples) {
    const auto in_len = rng.Uniform(3, 8);
    const auto out_len = rng.Uniform(2, 5);
    for (int64_t j = 0; j < in_len; ++j) ex.input_ids.push_back(static_cast<int>(rng.Uniform(3, 11)));
    for (int64_t j = 0; j < out_len; ++j) ex.target_ids.push_back(static_cast<int>(rng.Uniform(5, 11)));
    ex.target_ids.push_back(tokenizer::kEos);
  }
  const auto report = model::CheckGradients(p, examples, 1e-4);

  double worst_lin = 0.0;
  for (const auto& ex : examples) {
    model::ActivationCache cache;
    model::ForwardTeacherForced(p, ex.input_ids, ex.target_ids, &cache);
    const auto g1 = model::Backward(p, cache, 1.0);
    const auto g12 = model::Backward(p, cache, 1.2);
    for (size_t i = 0; i < g1.arrays.size(); ++i)
      worst_lin = std::max(worst_lin, (g12.arrays[i] - 1.2 * g1.arrays[i]).cwiseAbs().maxCoeff());
  }
  Verdict v;
  v.pass = report.max_relative_error < 1e-3 && worst_lin <= 1e-10 &&
           report.coordinates == p.Count();
  v.detail = std::to_string(report.coordinates) + " coordinates, max rel err " +
             Fmt("%.2e", report.max_relative_error) + " (" + report.worst_parameter +
             "), |g(1.2) - 1.2 g(1)| max " + Fmt("%.1e", worst_lin);
  return v;
}

// ---------------------------------------------------------------------------
// 4. Beam oracle

Verdict BeamOracle() {
  int agree = 0;
  double worst = 0.0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    model::ModelConfig c;
    c.d_model = 8;
    c.n_heads = 2;
    c.n_layers_enc = 1;
    c.n_layers_dec = 1;
    c.d_ff = 16;
    c.max_input = 8;
    c.max_target = 3;
    c.vocab_size = 6;
    c.seed = DeriveSeed(seed, 0xbea);
    const auto p = model::Init(c);
    const std::vector<int> in = {5, 3, 4, 5};
    // Every length-3 sequence; decoding stops at EOS, so a sequence is scored
    // up to and including its first EOS.
    std::map<std::vector<int>, double> scores;
    for (int code = 0; code < 216; ++code) {
      std::vector<int> seq;
      for (int k = 0, rest = code; k < 3; ++k, rest /= 6) {
        seq.push_back(rest % 6);
        if (seq.back() == tokenizer::kEos) break;
      }
      scores.emplace(seq, model::SequenceLogProb(p, in, seq));
    }
    auto best = scores.begin();
    for (auto it = scores.begin(); it != scores.end(); ++it)
      if (it->second > best->second) best = it;
    const auto r = model::BeamDecode(p, in, 216, 3);
    if (r.sequences.front().ids == best->first) ++agree;
    worst = std::max(worst, std::abs(r.sequences.front().log_score - best->second));
  }
  Verdict v;
  v.pass = agree == 20 && worst < 1e-9;
  v.detail = std::to_string(agree) + "/20 parameterizations agree, score gap " + Fmt("%.1e", worst);
  return v;
}

// ---------------------------------------------------------------------------
// 5. Corpus soundness

Verdict CorpusSoundness() {
  const auto c = corpus::BuildCorpus(7, 2000, 100, 100);
  size_t total = 0, compiled = 0, spliced = 0, with_tests = 0, exposed = 0;
  auto check = [&](const corpus::BugSample& b) {
    ++total;
    if (minilang::Compile(b.fixed_program).empty()) ++compiled;
    if (corpus::Splice(b.buggy_program, b.hunk, b.fix_text) == b.fixed_program) ++spliced;
  };
  for (const auto& b : c.syntactic) check(b);
  for (const auto* split : {&c.semantic, &c.test}) {
    for (const auto& s : *split) {
      check(s.base);
      ++with_tests;
      const auto buggy = minilang::ParseSource(s.base.buggy_program);
      bool any = false;
      for (const auto& t : s.dev_tests) {
        if (!buggy.ok() || !minilang::Compile(s.base.buggy_program).empty()) break;
        const auto out = minilang::Interpret(*buggy.program, t.inputs);
        any = any || !out.returned() || out.value != t.expected;
      }
      if (any) ++exposed;
    }
  }
  Verdict v;
  v.pass = c.syntactic.size() == 2000 && c.semantic.size() == 100 && c.test.size() == 100 &&
           compiled == total && spliced == total && exposed == with_tests;
  v.detail = "fixed compile " + std::to_string(compiled) + "/" + std::to_string(total) +
             ", bug exposed " + std::to_string(exposed) + "/" + std::to_string(with_tests) +
             ", splice exact " + std::to_string(spliced) + "/" + std::to_string(total);
  return v;
}

// ---------------------------------------------------------------------------
// 6 and 7. End-to-end pipeline through the C interface

void Ok(rrlab_status s, const char* what) {
  if (s != RRLAB_OK)
    throw std::runtime_error(std::string(what) + ": " + rrlab_last_error());
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct PipelineRun {
  fs::path dir;
  double seconds = 0.0;
};

PipelineRun RunPipeline(const std::string& config_path, const fs::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  fs::remove_all(dir);
  fs::create_directories(dir);
  rrlab_config* cfg = nullptr;
  Ok(rrlab_config_load(config_path.c_str(), &cfg), "config");
  Ok(rrlab_config_validate(cfg), "config");
  rrlab_corpus* corpus = nullptr;
  Ok(rrlab_corpus_generate(cfg, &corpus), "corpus");
  Ok(rrlab_corpus_write(corpus, (dir / "corpus").c_str()), "corpus");
  char* vs = nullptr;
  Ok(rrlab_config_get(cfg, "tokenizer.vocab_size", &vs), "config");
  const size_t vocab_size = std::stoul(vs);
  rrlab_string_free(vs);
  rrlab_vocab* vocab = nullptr;
  Ok(rrlab_vocab_train(corpus, vocab_size, &vocab), "vocab");
  rrlab_model* syn = nullptr;
  Ok(rrlab_model_init(cfg, vocab, &syn), "init");
  Ok(rrlab_train_syntactic(syn, corpus, cfg), "syntactic");
  Ok(rrlab_model_save(syn, (dir / "syn.ckpt").c_str()), "save");
  rrlab_model* full = nullptr;
  Ok(rrlab_model_load((dir / "syn.ckpt").c_str(), vocab, &full), "load");
  Ok(rrlab_train_semantic(full, corpus, cfg), "semantic");
  Ok(rrlab_model_save(full, (dir / "full.ckpt").c_str()), "save");
  char* table = nullptr;
  Ok(rrlab_ablate(syn, full, corpus, cfg, (dir / "ablation").c_str(), &table), "ablate");
  std::fprintf(stderr, "%s", table);
  rrlab_string_free(table);
  uint64_t ch = 0, vh = 0;
  Ok(rrlab_corpus_hash(corpus, &ch), "hash");
  Ok(rrlab_vocab_hash(vocab, &vh), "hash");
  const std::string chs = std::to_string(ch), vhs = std::to_string(vh);
  const char* keys[] = {"corpus", "vocab"};
  const char* values[] = {chs.c_str(), vhs.c_str()};
  Ok(rrlab_write_run_manifest((dir / "run-manifest.json").c_str(), "acceptance", cfg, keys,
                              values, 2),
     "manifest");
  rrlab_model_free(full);
  rrlab_model_free(syn);
  rrlab_vocab_free(vocab);
  rrlab_corpus_free(corpus);
  rrlab_config_free(cfg);
  PipelineRun r;
  r.dir = dir;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::map<std::string, std::pair<double, double>> ReadAblation(const fs::path& csv) {
  std::map<std::string, std::pair<double, double>> rows;
  std::istringstream in(Slurp(csv));
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string metric, b, f;
    std::getline(ss, metric, ',');
    std::getline(ss, b, ',');
    std::getline(ss, f, ',');
    rows[metric] = {std::stod(b), std::stod(f)};
  }
  return rows;
}

double Threshold(const std::string& config_path) {
  rrlab_config* cfg = nullptr;
  Ok(rrlab_config_load(config_path.c_str(), &cfg), "config");
  char* v = nullptr;
  Ok(rrlab_config_get(cfg, "acceptance.min_top10_gain_pp", &v), "config");
  const double t = std::stod(v);
  rrlab_string_free(v);
  rrlab_config_free(cfg);
  return t;
}

Verdict Directional(const PipelineRun& run, double min_gain_pp) {
  const auto rows = ReadAblation(run.dir / "ablation" / "ablation.csv");
  const auto c10 = rows.at("compilable@10");
  const auto rgt = rows.at("rgt_correct");
  const auto nc = rows.at("no_change_top1");
  const double gain_pp = 100.0 * (c10.second - c10.first);
  const bool a = gain_pp >= min_gain_pp;
  const bool b = rgt.second >= rgt.first;
  const bool c = nc.second < nc.first;
  Verdict v;
  v.pass = a && b && c;
  v.detail = "top-10 compilable " + Fmt("%.1f", 100 * c10.first) + "% -> " +
             Fmt("%.1f", 100 * c10.second) + "% (" + Fmt("%+.1f", gain_pp) + " pp, need >= " +
             Fmt("%g", min_gain_pp) + ")" + (a ? "" : " FAIL") + "; rgt_correct " +
             Fmt("%g", rgt.first) + " -> " + Fmt("%g", rgt.second) + (b ? "" : " FAIL") +
             "; no-change top-1 " + Fmt("%.2f", nc.first) + " -> " + Fmt("%.2f", nc.second) +
             (c ? "" : " FAIL") + "; " + Fmt("%.0f", run.seconds) + " s";
  return v;
}

std::vector<fs::path> ListFiles(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir));
  std::sort(out.begin(), out.end());
  return out;
}

Verdict Determinism(const PipelineRun& a, const PipelineRun& b) {
  std::vector<fs::path> files = {"corpus/manifest.json", "corpus/syntactic.jsonl",
                                 "corpus/semantic.jsonl", "corpus/test.jsonl",
                                 "syn.ckpt", "full.ckpt", "ablation/ablation.csv"};
  for (const char* side : {"baseline", "full"}) {
    for (const char* f : {"compilable_rate.csv", "repair_counts.csv", "error_histogram.csv",
                          "patches.jsonl"}) {
      files.push_back(fs::path("ablation") / side / f);
    }
  }
  size_t same = 0;
  std::string diff;
  for (const auto& f : files) {
    if (fs::exists(a.dir / f) && fs::exists(b.dir / f) && Slurp(a.dir / f) == Slurp(b.dir / f)) {
      ++same;
    } else {
      diff += " " + f.string();
    }
  }
  // Nothing beyond the manifests may differ in which files were written.
  const bool same_set = ListFiles(a.dir / "ablation") == ListFiles(b.dir / "ablation");
  Verdict v;
  v.pass = same == files.size() && same_set;
  v.detail = std::to_string(same) + "/" + std::to_string(files.size()) +
             " outputs byte-identical (corpus, checkpoints, CSVs, patch records)" +
             (diff.empty() ? "" : "; differ or missing:" + diff) +
             (same_set ? "" : "; output file sets differ") + "; second run " +
             Fmt("%.0f", b.seconds) + " s";
  return v;
}

// ---------------------------------------------------------------------------
// 8. Error taxonomy

Verdict ErrorTaxonomy() {
  using minilang::DiagnosticCategory;
  const auto s = testing::DoublingSample();
  const tokenizer::Vocab vocab = tokenizer::Vocab::Train(
      std::vector<std::string>{s.base.buggy_text, s.base.fix_text, s.base.context_text}, 64);
  struct Case {
    std::string patch;
    DiagnosticCategory first;
  };
  // Each patch carries several diagnostics; only the first is counted.
  const std::vector<Case> cases = {
      {"let x: int = b + true;", DiagnosticCategory::kUndefinedIdentifier},
      {"let x: bool = y;\nlet x: int = 1;", DiagnosticCategory::kUndefinedIdentifier},
      {"let y: int = z;\ny = true;", DiagnosticCategory::kUndefinedIdentifier},
      {"let x: int = a * 2;\nlet x: bool = c;", DiagnosticCategory::kDuplicateDefinition},
      {"let x: bool = a;", DiagnosticCategory::kTypeMismatch},
      {"let x: int = (a;", DiagnosticCategory::kSyntaxError},
      {"let x: int = a * 2;\nreturn true;", DiagnosticCategory::kTypeMismatch}};
  std::vector<eval::RankedPatch> ranked;
  size_t diagnostics = 0, multi = 0;
  for (const auto& c : cases) {
    const auto d = minilang::Compile(discriminator::ApplyPatch(s.base, c.patch).patched_program);
    diagnostics += d.size();
    multi += d.size() > 1;
    ranked.push_back({{}, c.patch, 0.0});
  }
  ranked.push_back({{}, "let x: int = a + a;", 0.0});
  const std::vector<eval::BugRecord> bugs = {eval::ScorePatches(s, ranked, vocab, 10000)};
  const auto hist = eval::CategorizeErrors(bugs, static_cast<int>(ranked.size()));
  std::map<DiagnosticCategory, int64_t> want;
  for (const auto& c : cases) ++want[c.first];
  std::map<DiagnosticCategory, int64_t> got(hist.begin(), hist.end());
  int64_t counted = 0;
  for (const auto& [cat, n] : hist) counted += n;
  bool sorted = true;
  for (size_t i = 1; i < hist.size(); ++i) sorted = sorted && hist[i - 1].second >= hist[i].second;
  Verdict v;
  v.pass = got == want && counted == static_cast<int64_t>(cases.size()) && sorted && multi >= 5;
  v.detail = std::to_string(cases.size()) + " uncompilable patches (" + std::to_string(multi) +
             " with several errors, " + std::to_string(diagnostics) + " diagnostics) counted " +
             std::to_string(counted) + " times, first-error categories " +
             (got == want ? "match" : "MISMATCH");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rrlab acceptance criteria"};
  std::vector<int> only;
  std::string config = RRLAB_REFERENCE_CONFIG;
  std::string work = (fs::temp_directory_path() / "rrlab_acceptance").string();
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',');
  app.add_option("--config", config, "Reference configuration for criteria 6 and 7")
      ->capture_default_str();
  app.add_option("--work", work, "Scratch directory for criteria 6 and 7")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  std::set<int> selected(only.begin(), only.end());
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8};

  SetLogSink([](std::string_view m) { std::fprintf(stderr, "%.*s\n", static_cast<int>(m.size()), m.data()); });

  bool all = true;
  auto report = [&](int n, const char* name, const std::function<Verdict()>& fn) {
    if (!selected.count(n)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all = all && v.pass;
    std::printf("[%s] criterion %d %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", n, name,
                v.detail.c_str(), s);
    std::fflush(stdout);
  };

  report(1, "reward/loss exactness", RewardLoss);
  report(2, "discriminator short-circuit", ShortCircuit);
  report(3, "gradient correctness", Gradients);
  report(4, "beam oracle", BeamOracle);
  report(5, "corpus soundness", CorpusSoundness);

  if (selected.count(6) || selected.count(7)) {
    std::optional<PipelineRun> first, second;
    std::string error;
    try {
      first = RunPipeline(config, fs::path(work) / "run1");
      if (selected.count(7)) second = RunPipeline(config, fs::path(work) / "run2");
    } catch (const std::exception& e) {
      error = e.what();
    }
    report(6, "end-to-end direction", [&] {
      if (!first) return Verdict{false, "pipeline failed: " + error};
      return Directional(*first, Threshold(config));
    });
    report(7, "determinism", [&] {
      if (!first || !second) return Verdict{false, "pipeline failed: " + error};
      return Determinism(*first, *second);
    });
  }

  report(8, "error taxonomy", ErrorTaxonomy);
  return all ? 0 : 1;
}
