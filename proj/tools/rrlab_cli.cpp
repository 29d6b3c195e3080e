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

// rrlab command line: one subcommand per pipeline stage. Progress goes to
// stderr, results to stdout or the files named by --out.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "rrlab.h"

namespace {

namespace fs = std::filesystem;

// Failure reported by the library or by the command itself; exit code 1.
struct DomainError {
  std::string message;
};

void Check(rrlab_status s, const std::string& context) {
  if (s != RRLAB_OK) {
    throw DomainError{context + ": " + rrlab_last_error()};
  }
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Config = std::unique_ptr<rrlab_config, Deleter<rrlab_config, rrlab_config_free>>;
using Corpus = std::unique_ptr<rrlab_corpus, Deleter<rrlab_corpus, rrlab_corpus_free>>;
using Vocab = std::unique_ptr<rrlab_vocab, Deleter<rrlab_vocab, rrlab_vocab_free>>;
using Model = std::unique_ptr<rrlab_model, Deleter<rrlab_model, rrlab_model_free>>;

std::string TakeString(char* s) {
  std::string out = s ? s : "";
  rrlab_string_free(s);
  return out;
}

std::string Hex(uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Flags shared by every subcommand.
struct Common {
  std::string config_path;
  std::optional<uint64_t> seed;
  int threads = 0;
  std::vector<std::string> sets;
  bool quiet = false;
};

// A subcommand flag that maps onto one config key.
struct Override {
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

struct Command {
  CLI::App* app = nullptr;
  Common common;
  std::vector<std::unique_ptr<Override>> overrides;

  void AddCommon() {
    app->add_option("--config", common.config_path, "INI run configuration")
        ->check(CLI::ExistingFile);
    app->add_option("--seed", common.seed, "Seed for all randomness (run.seed)");
    app->add_option("--threads", common.threads,
                    "Worker threads (default: RRLAB_THREADS, else all cores)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--set", common.sets, "Override a config key: section.key=value")
        ->allow_extra_args(false);
    app->add_flag("-q,--quiet", common.quiet, "Suppress progress output");
  }

  void Flag(const std::string& name, const std::string& key, const std::string& help) {
    auto o = std::make_unique<Override>();
    o->key = key;
    o->option = app->add_option(name, o->value, help + " (" + key + ")");
    overrides.push_back(std::move(o));
  }

  // Base config (file, else `fallback`, else defaults), then --seed, then
  // the command's flags, then --set. Validated before anything is written.
  Config Resolve(Config fallback = nullptr) const {
    rrlab_config* raw = nullptr;
    if (!common.config_path.empty()) {
      Check(rrlab_config_load(common.config_path.c_str(), &raw), "--config");
    } else if (fallback) {
      raw = fallback.release();
    } else {
      Check(rrlab_config_new(&raw), "config");
    }
    Config cfg(raw);
    if (common.seed) {
      Check(rrlab_config_set(cfg.get(), "run.seed", std::to_string(*common.seed).c_str()),
            "--seed");
    }
    for (const auto& o : overrides) {
      if (o->option->count() > 0) {
        Check(rrlab_config_set(cfg.get(), o->key.c_str(), o->value.c_str()), o->option->get_name());
      }
    }
    for (const auto& kv : common.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected section.key=value");
      Check(rrlab_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()),
            "--set " + kv);
    }
    Check(rrlab_config_validate(cfg.get()), "config");
    return cfg;
  }

  void ApplyRuntime() const {
    if (common.threads > 0) rrlab_set_threads(common.threads);
    if (common.quiet) rrlab_set_log_callback([](const char*, void*) {}, nullptr);
  }
};

std::string Get(const rrlab_config* cfg, const char* key) {
  char* out = nullptr;
  Check(rrlab_config_get(cfg, key, &out), key);
  return TakeString(out);
}

void Progress(const Common& c, const std::string& msg) {
  if (!c.quiet) std::cerr << msg << '\n';
}

void Manifest(const fs::path& path, const std::string& command, const rrlab_config* cfg,
              const std::vector<std::pair<std::string, std::string>>& entries) {
  std::vector<const char*> keys, values;
  for (const auto& [k, v] : entries) {
    keys.push_back(k.c_str());
    values.push_back(v.c_str());
  }
  Check(rrlab_write_run_manifest(path.string().c_str(), command.c_str(), cfg, keys.data(),
                                 values.data(), entries.size()),
        "run manifest");
}

fs::path ManifestFor(const fs::path& out_file) {
  return fs::path(out_file.string() + ".manifest.json");
}

void EnsureParent(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

Corpus ReadTestSplit(const std::string& path) {
  rrlab_corpus* c = nullptr;
  if (fs::is_directory(path)) {
    Check(rrlab_corpus_read(path.c_str(), &c), path);
  } else {
    Check(rrlab_corpus_read_split(path.c_str(), RRLAB_SPLIT_TEST, &c), path);
  }
  return Corpus(c);
}

Model LoadModel(const std::string& path) {
  rrlab_model* m = nullptr;
  Check(rrlab_model_load(path.c_str(), nullptr, &m), path);
  return Model(m);
}

Config ModelConfig(const rrlab_model* m) {
  rrlab_config* c = nullptr;
  Check(rrlab_model_config(m, &c), "checkpoint config");
  return Config(c);
}

uint64_t VocabHashOf(const rrlab_model* m) {
  rrlab_vocab* v = nullptr;
  Check(rrlab_model_vocab(m, &v), "checkpoint vocabulary");
  Vocab owned(v);
  uint64_t h = 0;
  Check(rrlab_vocab_hash(v, &h), "vocabulary hash");
  return h;
}

void WriteFileOrStdout(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  EnsureParent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw DomainError{"cannot write " + path};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rrlab: reward-modulated program repair on MiniLang"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rrlab_version());

  // gen-corpus
  Command gen;
  gen.app = app.add_subcommand("gen-corpus", "Generate the syntactic, semantic and test splits");
  gen.AddCommon();
  std::string gen_out;
  gen.app->add_option("--out", gen_out, "Output directory")->required();
  gen.Flag("--syntactic", "corpus.syntactic", "Syntactic samples");
  gen.Flag("--semantic", "corpus.semantic", "Semantic samples");
  gen.Flag("--test", "corpus.test", "Test samples");

  // train-vocab
  Command voc;
  voc.app = app.add_subcommand("train-vocab", "Train the subword vocabulary on the syntactic split");
  voc.AddCommon();
  std::string voc_corpus, voc_out;
  voc.app->add_option("--corpus", voc_corpus, "Corpus directory")->required();
  voc.app->add_option("--out", voc_out, "Vocabulary file")->required();
  voc.Flag("--size", "tokenizer.vocab_size", "Target vocabulary size");

  // train-syntactic
  Command syn;
  syn.app = app.add_subcommand("train-syntactic", "Cross-entropy training on the syntactic split");
  syn.AddCommon();
  std::string syn_corpus, syn_vocab, syn_out;
  syn.app->add_option("--corpus", syn_corpus, "Corpus directory")->required();
  syn.app->add_option("--vocab", syn_vocab, "Vocabulary file")->required();
  syn.app->add_option("--out", syn_out, "Checkpoint to write")->required();
  syn.Flag("--epochs", "syntactic.epochs", "Epochs");
  syn.Flag("--lr", "syntactic.lr", "Learning rate");
  syn.Flag("--batch-size", "syntactic.batch_size", "Batch size");
  syn.Flag("--optimizer", "syntactic.optimizer", "adam or sgd");

  // train-semantic
  Command sem;
  sem.app = app.add_subcommand("train-semantic",
                               "Reward-modulated training on the semantic split, starting from a checkpoint");
  sem.AddCommon();
  std::string sem_corpus, sem_ckpt, sem_out;
  sem.app->add_option("--corpus", sem_corpus, "Corpus directory")->required();
  sem.app->add_option("--checkpoint", sem_ckpt, "Starting checkpoint (its config is the default)")
      ->required();
  sem.app->add_option("--out", sem_out, "Checkpoint to write")->required();
  sem.Flag("--epochs", "semantic.epochs", "Epochs");
  sem.Flag("--lr", "semantic.lr", "Learning rate");
  sem.Flag("--policy", "semantic.candidate_policy", "greedy, beam-top1 or beam-topn");
  sem.Flag("--top-n", "semantic.top_n", "Beam width for the beam policies");
  sem.Flag("--alternation", "semantic.alternation", "S:T semantic to syntactic updates");
  sem.Flag("--augment-beam", "semantic.augment_beam", "Beam width of the replay pool, 0 for none");

  // infer
  Command inf;
  inf.app = app.add_subcommand("infer", "Rank patches for a hunk or for every sample of a split file");
  inf.AddCommon();
  std::string inf_ckpt, inf_test, inf_id, inf_program, inf_hunk, inf_out;
  inf.app->add_option("--checkpoint", inf_ckpt, "Model checkpoint")->required();
  auto* inf_test_opt = inf.app->add_option("--test", inf_test, "Split file (.jsonl) to run over");
  inf.app->add_option("--id", inf_id, "Only this sample id of --test")->needs(inf_test_opt);
  auto* inf_prog_opt = inf.app->add_option("--program", inf_program, "MiniLang source file");
  inf.app->add_option("--hunk", inf_hunk, "Buggy line range START:END of --program")
      ->needs(inf_prog_opt);
  inf_test_opt->excludes(inf_prog_opt);
  inf.app->add_option("--out", inf_out, "Write results here instead of stdout");
  inf.Flag("--beam", "eval.beam", "Beam width");

  // eval
  Command ev;
  ev.app = app.add_subcommand("eval", "Compilable rate, repair counts and error histogram on a test split");
  ev.AddCommon();
  std::string ev_ckpt, ev_test, ev_out;
  ev.app->add_option("--checkpoint", ev_ckpt, "Model checkpoint")->required();
  ev.app->add_option("--test", ev_test, "Test split file or corpus directory")->required();
  ev.app->add_option("--out", ev_out, "Output directory for the CSV files")->required();
  ev.Flag("--beam", "eval.beam", "Beam width");
  ev.Flag("--ks", "eval.ks", "Comma-separated k values");

  // ablate
  Command abl;
  abl.app = app.add_subcommand("ablate", "Compare a syntactic-only and a fully trained checkpoint");
  abl.AddCommon();
  std::string abl_base, abl_full, abl_test, abl_out = ".";
  abl.app->add_option("--baseline", abl_base, "Syntactic-only checkpoint")->required();
  abl.app->add_option("--full", abl_full, "Syntactic plus semantic checkpoint")->required();
  abl.app->add_option("--test", abl_test, "Test split file or corpus directory")->required();
  abl.app->add_option("--out", abl_out, "Output directory")->capture_default_str();
  abl.Flag("--beam", "eval.beam", "Beam width");
  abl.Flag("--ks", "eval.ks", "Comma-separated k values");

  // grad-check
  Command gc;
  gc.app = app.add_subcommand("grad-check",
                              "Finite-difference check of the model's gradients; exit 0 iff the max relative error is below 1e-3");
  gc.AddCommon();
  size_t gc_examples = 5, gc_per_array = 0;
  gc.app->add_option("--examples", gc_examples, "Random examples")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gc.app->add_option("--per-array", gc_per_array,
                     "Coordinates checked per parameter array, 0 for all")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen.app->parsed()) {
      Config cfg = gen.Resolve();
      gen.ApplyRuntime();
      rrlab_corpus* raw = nullptr;
      Check(rrlab_corpus_generate(cfg.get(), &raw), "gen-corpus");
      Corpus corpus(raw);
      Check(rrlab_corpus_write(corpus.get(), gen_out.c_str()), gen_out);
      uint64_t h = 0;
      Check(rrlab_corpus_hash(corpus.get(), &h), "corpus hash");
      Manifest(fs::path(gen_out) / "run-manifest.json", "gen-corpus", cfg.get(),
               {{"corpus", Hex(h)}});
      size_t n[3] = {};
      for (int s = 0; s < 3; ++s)
        Check(rrlab_corpus_size(corpus.get(), static_cast<rrlab_split>(s), &n[s]), "corpus");
      std::cout << "wrote " << n[0] << " syntactic, " << n[1] << " semantic, " << n[2]
                << " test samples to " << gen_out << '\n';
    } else if (voc.app->parsed()) {
      Config cfg = voc.Resolve();
      voc.ApplyRuntime();
      rrlab_corpus* rc = nullptr;
      Check(rrlab_corpus_read(voc_corpus.c_str(), &rc), voc_corpus);
      Corpus corpus(rc);
      const size_t target = std::stoul(Get(cfg.get(), "tokenizer.vocab_size"));
      rrlab_vocab* rv = nullptr;
      Check(rrlab_vocab_train(corpus.get(), target, &rv), "train-vocab");
      Vocab vocab(rv);
      EnsureParent(voc_out);
      Check(rrlab_vocab_save(vocab.get(), voc_out.c_str()), voc_out);
      uint64_t ch = 0, vh = 0;
      size_t size = 0;
      Check(rrlab_corpus_hash(corpus.get(), &ch), "corpus hash");
      Check(rrlab_vocab_hash(vocab.get(), &vh), "vocabulary hash");
      Check(rrlab_vocab_size(vocab.get(), &size), "vocabulary");
      Manifest(ManifestFor(voc_out), "train-vocab", cfg.get(),
               {{"corpus", Hex(ch)}, {"vocab", Hex(vh)}, {"input:corpus", voc_corpus}});
      std::cout << "vocabulary of " << size << " pieces written to " << voc_out << '\n';
    } else if (syn.app->parsed()) {
      Config cfg = syn.Resolve();
      syn.ApplyRuntime();
      rrlab_corpus* rc = nullptr;
      Check(rrlab_corpus_read(syn_corpus.c_str(), &rc), syn_corpus);
      Corpus corpus(rc);
      rrlab_vocab* rv = nullptr;
      Check(rrlab_vocab_load(syn_vocab.c_str(), &rv), syn_vocab);
      Vocab vocab(rv);
      rrlab_model* rm = nullptr;
      Check(rrlab_model_init(cfg.get(), vocab.get(), &rm), "model");
      Model model(rm);
      Progress(syn.common, "training (syntactic)");
      Check(rrlab_train_syntactic(model.get(), corpus.get(), cfg.get()), "train-syntactic");
      EnsureParent(syn_out);
      Check(rrlab_model_save(model.get(), syn_out.c_str()), syn_out);
      uint64_t ch = 0, vh = 0;
      Check(rrlab_corpus_hash(corpus.get(), &ch), "corpus hash");
      Check(rrlab_vocab_hash(vocab.get(), &vh), "vocabulary hash");
      Manifest(ManifestFor(syn_out), "train-syntactic", cfg.get(),
               {{"corpus", Hex(ch)}, {"vocab", Hex(vh)}, {"input:corpus", syn_corpus},
                {"input:vocab", syn_vocab}});
      int64_t steps = 0;
      Check(rrlab_model_step(model.get(), &steps), "model");
      std::cout << "checkpoint after " << steps << " updates written to " << syn_out << '\n';
    } else if (sem.app->parsed()) {
      Model model = LoadModel(sem_ckpt);
      Config cfg = sem.Resolve(ModelConfig(model.get()));
      sem.ApplyRuntime();
      rrlab_corpus* rc = nullptr;
      Check(rrlab_corpus_read(sem_corpus.c_str(), &rc), sem_corpus);
      Corpus corpus(rc);
      Progress(sem.common, "training (semantic)");
      Check(rrlab_train_semantic(model.get(), corpus.get(), cfg.get()), "train-semantic");
      EnsureParent(sem_out);
      Check(rrlab_model_save(model.get(), sem_out.c_str()), sem_out);
      uint64_t ch = 0;
      Check(rrlab_corpus_hash(corpus.get(), &ch), "corpus hash");
      Manifest(ManifestFor(sem_out), "train-semantic", cfg.get(),
               {{"corpus", Hex(ch)}, {"vocab", Hex(VocabHashOf(model.get()))},
                {"input:corpus", sem_corpus}, {"input:checkpoint", sem_ckpt}});
      int64_t steps = 0;
      Check(rrlab_model_step(model.get(), &steps), "model");
      std::cout << "checkpoint after " << steps << " updates written to " << sem_out << '\n';
    } else if (inf.app->parsed()) {
      if (inf_test.empty() == inf_program.empty())
        throw CLI::ValidationError("infer", "give exactly one of --test or --program");
      Model model = LoadModel(inf_ckpt);
      Config cfg = inf.Resolve(ModelConfig(model.get()));
      inf.ApplyRuntime();
      std::string text;
      if (!inf_test.empty()) {
        Corpus corpus = ReadTestSplit(inf_test);
        char* out = nullptr;
        Check(rrlab_infer_split(model.get(), corpus.get(), RRLAB_SPLIT_TEST,
                                inf_id.empty() ? nullptr : inf_id.c_str(), cfg.get(), &out),
              "infer");
        text = TakeString(out);
      } else {
        int start = 0, end = 0;
        if (std::sscanf(inf_hunk.c_str(), "%d:%d", &start, &end) != 2)
          throw CLI::ValidationError("--hunk", "expected START:END");
        std::ifstream in(inf_program, std::ios::binary);
        if (!in) throw DomainError{"cannot read " + inf_program};
        std::stringstream ss;
        ss << in.rdbuf();
        const int beam = std::stoi(Get(cfg.get(), "eval.beam"));
        char* out = nullptr;
        Check(rrlab_infer(model.get(), ss.str().c_str(), start, end, beam, &out), "infer");
        text = TakeString(out) + "\n";
      }
      WriteFileOrStdout(inf_out, text);
      if (!inf_out.empty()) {
        Manifest(ManifestFor(inf_out), "infer", cfg.get(),
                 {{"vocab", Hex(VocabHashOf(model.get()))}, {"input:checkpoint", inf_ckpt}});
      }
    } else if (ev.app->parsed()) {
      Model model = LoadModel(ev_ckpt);
      Config cfg = ev.Resolve(ModelConfig(model.get()));
      ev.ApplyRuntime();
      Corpus corpus = ReadTestSplit(ev_test);
      char* table = nullptr;
      Check(rrlab_eval(model.get(), corpus.get(), cfg.get(), ev_out.c_str(), &table), "eval");
      std::cout << TakeString(table);
      uint64_t ch = 0;
      Check(rrlab_corpus_hash(corpus.get(), &ch), "corpus hash");
      Manifest(fs::path(ev_out) / "run-manifest.json", "eval", cfg.get(),
               {{"test", Hex(ch)}, {"vocab", Hex(VocabHashOf(model.get()))},
                {"input:checkpoint", ev_ckpt}, {"input:test", ev_test}});
    } else if (abl.app->parsed()) {
      Model base = LoadModel(abl_base);
      Model full = LoadModel(abl_full);
      Config cfg = abl.Resolve(ModelConfig(full.get()));
      abl.ApplyRuntime();
      Corpus corpus = ReadTestSplit(abl_test);
      char* table = nullptr;
      Check(rrlab_ablate(base.get(), full.get(), corpus.get(), cfg.get(), abl_out.c_str(), &table),
            "ablate");
      std::cout << TakeString(table);
      uint64_t ch = 0;
      Check(rrlab_corpus_hash(corpus.get(), &ch), "corpus hash");
      Manifest(fs::path(abl_out) / "run-manifest.json", "ablate", cfg.get(),
               {{"test", Hex(ch)}, {"vocab", Hex(VocabHashOf(full.get()))},
                {"input:baseline", abl_base}, {"input:full", abl_full}, {"input:test", abl_test}});
    } else if (gc.app->parsed()) {
      Config cfg = gc.Resolve();
      gc.ApplyRuntime();
      double err = 0.0;
      char* report = nullptr;
      Check(rrlab_grad_check(cfg.get(), gc_examples, gc_per_array, &err, &report), "grad-check");
      std::cerr << TakeString(report);
      std::printf("max relative error %.6e\n", err);
      return err < 1e-3 ? 0 : 1;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.message << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
