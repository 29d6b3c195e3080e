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

#include "rrlab.h"

#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "json.hpp"
#include "rrlab/config.hpp"
#include "rrlab/corpus.hpp"
#include "rrlab/error.hpp"
#include "rrlab/eval.hpp"
#include "rrlab/log.hpp"
#include "rrlab/parallel.hpp"
#include "rrlab/rng.hpp"
#include "rrlab/tokenizer.hpp"
#include "rrlab/training.hpp"

struct rrlab_config {
  rrlab::RunConfig cfg;
};
struct rrlab_corpus {
  rrlab::corpus::Corpus corpus;
};
struct rrlab_vocab {
  rrlab::tokenizer::Vocab vocab;
};
struct rrlab_model {
  rrlab::training::Checkpoint ckpt;
};

namespace {

using rrlab::Error;
using rrlab::ErrorCode;

thread_local std::string g_last_error;

template <typename F>
rrlab_status Guard(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return RRLAB_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<rrlab_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return RRLAB_INTERNAL;
}

template <typename T>
void Need(const T* p, const char* what) {
  if (p == nullptr) throw Error(ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<rrlab::corpus::SemanticSample>& SplitOf(rrlab::corpus::Corpus& c, rrlab_split s) {
  switch (s) {
    case RRLAB_SPLIT_SEMANTIC: return c.semantic;
    case RRLAB_SPLIT_TEST: return c.test;
    case RRLAB_SPLIT_SYNTACTIC: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "split has no tests");
}

rrlab_split CheckSplit(int s) {
  if (s < RRLAB_SPLIT_SYNTACTIC || s > RRLAB_SPLIT_TEST)
    throw Error(ErrorCode::kInvalidArgument, "unknown split " + std::to_string(s));
  return static_cast<rrlab_split>(s);
}

std::string HistoryJson(const rrlab::training::TrainState& st) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : st.history) {
    nlohmann::ordered_json stages;
    for (int s = 0; s < rrlab::discriminator::kNumStages; ++s) {
      stages[std::string(rrlab::discriminator::StageName(static_cast<rrlab::discriminator::Stage>(s)))] =
          r.stages[static_cast<size_t>(s)];
    }
    arr.push_back({{"phase", r.phase},
                   {"epoch", r.epoch},
                   {"mean_loss", r.mean_loss},
                   {"mean_reward", r.mean_reward},
                   {"stages", stages},
                   {"semantic_updates", r.semantic_updates},
                   {"syntactic_updates", r.syntactic_updates},
                   {"skipped", r.skipped}});
  }
  return arr.dump(2);
}

void WriteReport(const std::filesystem::path& dir, const rrlab::eval::EvalReport& r) {
  rrlab::eval::WriteCompilableRateCsv(dir / "compilable_rate.csv", r);
  rrlab::eval::WriteRepairCountsCsv(dir / "repair_counts.csv", r);
  rrlab::eval::WriteErrorHistogramCsv(dir / "error_histogram.csv", r);
  rrlab::eval::WritePatchRecords(dir / "patches.jsonl", r.bugs);
}

void CheckModelVocab(const rrlab_model* m) {
  if (static_cast<int>(m->ckpt.vocab.size()) != m->ckpt.state.params.config.vocab_size)
    throw Error(ErrorCode::kVersionMismatch, "checkpoint vocabulary does not match the model");
}

}  // namespace

extern "C" {

const char* rrlab_version(void) { return "0.1.0"; }

const char* rrlab_status_name(rrlab_status status) {
  switch (status) {
    case RRLAB_OK: return "ok";
    case RRLAB_INVALID_ARGUMENT: return "invalid-argument";
    case RRLAB_IO: return "io";
    case RRLAB_SCHEMA: return "schema";
    case RRLAB_CONFIG: return "config";
    case RRLAB_GENERATION: return "generation";
    case RRLAB_VERSION_MISMATCH: return "version-mismatch";
    case RRLAB_CORRUPT: return "corrupt";
    case RRLAB_SHAPE_MISMATCH: return "shape-mismatch";
    case RRLAB_STALE_CACHE: return "stale-cache";
    case RRLAB_NON_FINITE: return "non-finite";
    case RRLAB_UNKNOWN_ID: return "unknown-id";
    case RRLAB_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* rrlab_last_error(void) { return g_last_error.c_str(); }

void rrlab_string_free(char* s) { std::free(s); }

void rrlab_set_threads(int threads) { rrlab::SetThreads(threads); }
int rrlab_threads(void) { return rrlab::Threads(); }

void rrlab_set_log_callback(rrlab_log_fn fn, void* user) {
  if (fn == nullptr) {
    rrlab::UseStderrLog();
    return;
  }
  rrlab::SetLogSink([fn, user](std::string_view m) { fn(std::string(m).c_str(), user); });
}

// ---- configuration

rrlab_status rrlab_config_new(rrlab_config** out) {
  return Guard([&] {
    Need(out, "out");
    auto c = std::make_unique<rrlab_config>();
    c->cfg.ResolveSeeds();
    *out = c.release();
  });
}

rrlab_status rrlab_config_load(const char* path, rrlab_config** out) {
  return Guard([&] {
    Need(path, "path");
    Need(out, "out");
    *out = new rrlab_config{rrlab::RunConfig::Load(path)};
  });
}

rrlab_status rrlab_config_parse(const char* ini_text, rrlab_config** out) {
  return Guard([&] {
    Need(ini_text, "ini_text");
    Need(out, "out");
    *out = new rrlab_config{rrlab::RunConfig::Parse(ini_text)};
  });
}

rrlab_status rrlab_config_set(rrlab_config* cfg, const char* key, const char* value) {
  return Guard([&] {
    Need(cfg, "cfg");
    Need(key, "key");
    Need(value, "value");
    cfg->cfg.Set(key, value);
  });
}

rrlab_status rrlab_config_get(const rrlab_config* cfg, const char* key, char** out) {
  return Guard([&] {
    Need(cfg, "cfg");
    Need(key, "key");
    Need(out, "out");
    *out = Dup(cfg->cfg.Get(key));
  });
}

rrlab_status rrlab_config_validate(const rrlab_config* cfg) {
  return Guard([&] {
    Need(cfg, "cfg");
    cfg->cfg.Validate();
  });
}

rrlab_status rrlab_config_to_ini(const rrlab_config* cfg, char** out) {
  return Guard([&] {
    Need(cfg, "cfg");
    Need(out, "out");
    *out = Dup(cfg->cfg.ToIni());
  });
}

rrlab_status rrlab_config_seed(const rrlab_config* cfg, uint64_t* out) {
  return Guard([&] {
    Need(cfg, "cfg");
    Need(out, "out");
    *out = cfg->cfg.seed;
  });
}

void rrlab_config_free(rrlab_config* cfg) { delete cfg; }

// ---- corpus

rrlab_status rrlab_corpus_generate(const rrlab_config* cfg, rrlab_corpus** out) {
  return Guard([&] {
    Need(cfg, "cfg");
    Need(out, "out");
    const auto& c = cfg->cfg;
    if (c.corpus.syntactic == 0)
      throw Error(ErrorCode::kConfig, "corpus.syntactic must be positive");
    *out = new rrlab_corpus{rrlab::corpus::BuildCorpus(c.seed, c.corpus.syntactic,
                                                       c.corpus.semantic, c.corpus.test)};
  });
}

rrlab_status rrlab_corpus_read(const char* dir, rrlab_corpus** out) {
  return Guard([&] {
    Need(dir, "dir");
    Need(out, "out");
    *out = new rrlab_corpus{rrlab::corpus::ReadCorpus(dir)};
  });
}

rrlab_status rrlab_corpus_read_split(const char* path, rrlab_split split, rrlab_corpus** out) {
  return Guard([&] {
    Need(path, "path");
    Need(out, "out");
    const rrlab_split s = CheckSplit(split);
    auto file = rrlab::corpus::ReadSplit(path);
    auto c = std::make_unique<rrlab_corpus>();
    if (file.manifest) c->corpus.manifest = *file.manifest;
    if (s == RRLAB_SPLIT_SYNTACTIC) {
      for (auto& x : file.samples) c->corpus.syntactic.push_back(std::move(x.base));
    } else {
      SplitOf(c->corpus, s) = std::move(file.samples);
    }
    *out = c.release();
  });
}

rrlab_status rrlab_corpus_write(const rrlab_corpus* corpus, const char* dir) {
  return Guard([&] {
    Need(corpus, "corpus");
    Need(dir, "dir");
    rrlab::corpus::WriteCorpus(dir, corpus->corpus);
  });
}

rrlab_status rrlab_corpus_size(const rrlab_corpus* corpus, rrlab_split split, size_t* out) {
  return Guard([&] {
    Need(corpus, "corpus");
    Need(out, "out");
    const rrlab_split s = CheckSplit(split);
    *out = s == RRLAB_SPLIT_SYNTACTIC
               ? corpus->corpus.syntactic.size()
               : SplitOf(const_cast<rrlab::corpus::Corpus&>(corpus->corpus), s).size();
  });
}

rrlab_status rrlab_corpus_hash(const rrlab_corpus* corpus, uint64_t* out) {
  return Guard([&] {
    Need(corpus, "corpus");
    Need(out, "out");
    *out = rrlab::corpus::CorpusHash(corpus->corpus);
  });
}

void rrlab_corpus_free(rrlab_corpus* corpus) { delete corpus; }

// ---- vocabulary

rrlab_status rrlab_vocab_train(const rrlab_corpus* corpus, size_t target_size,
                               rrlab_vocab** out) {
  return Guard([&] {
    Need(corpus, "corpus");
    Need(out, "out");
    if (corpus->corpus.syntactic.empty())
      throw Error(ErrorCode::kInvalidArgument, "corpus has no syntactic samples");
    const auto texts = rrlab::tokenizer::VocabTexts(corpus->corpus.syntactic);
    *out = new rrlab_vocab{rrlab::tokenizer::Vocab::Train(texts, target_size)};
  });
}

rrlab_status rrlab_vocab_load(const char* path, rrlab_vocab** out) {
  return Guard([&] {
    Need(path, "path");
    Need(out, "out");
    *out = new rrlab_vocab{rrlab::tokenizer::Vocab::Load(path)};
  });
}

rrlab_status rrlab_vocab_save(const rrlab_vocab* vocab, const char* path) {
  return Guard([&] {
    Need(vocab, "vocab");
    Need(path, "path");
    vocab->vocab.Save(path);
  });
}

rrlab_status rrlab_vocab_size(const rrlab_vocab* vocab, size_t* out) {
  return Guard([&] {
    Need(vocab, "vocab");
    Need(out, "out");
    *out = vocab->vocab.size();
  });
}

rrlab_status rrlab_vocab_hash(const rrlab_vocab* vocab, uint64_t* out) {
  return Guard([&] {
    Need(vocab, "vocab");
    Need(out, "out");
    *out = vocab->vocab.Hash();
  });
}

void rrlab_vocab_free(rrlab_vocab* vocab) { delete vocab; }

// ---- model

rrlab_status rrlab_model_init(const rrlab_config* cfg, const rrlab_vocab* vocab,
                              rrlab_model** out) {
  return Guard([&] {
    Need(cfg, "cfg");
    Need(vocab, "vocab");
    Need(out, "out");
    cfg->cfg.Validate();
    auto mc = cfg->cfg.model;
    mc.vocab_size = static_cast<int>(vocab->vocab.size());
    auto m = std::make_unique<rrlab_model>();
    m->ckpt.state = rrlab::training::InitState(mc);
    m->ckpt.vocab = vocab->vocab;
    m->ckpt.config_snapshot = cfg->cfg.ToIni();
    *out = m.release();
  });
}

rrlab_status rrlab_model_load(const char* path, const rrlab_vocab* expected_vocab,
                              rrlab_model** out) {
  return Guard([&] {
    Need(path, "path");
    Need(out, "out");
    *out = new rrlab_model{
        rrlab::training::LoadCheckpoint(path, expected_vocab ? &expected_vocab->vocab : nullptr)};
  });
}

void rrlab_model_free(rrlab_model* model) { delete model; }

rrlab_status rrlab_model_save(const rrlab_model* model, const char* path) {
  return Guard([&] {
    Need(model, "model");
    Need(path, "path");
    rrlab::training::SaveCheckpoint(model->ckpt, path);
  });
}

rrlab_status rrlab_model_vocab(const rrlab_model* model, rrlab_vocab** out) {
  return Guard([&] {
    Need(model, "model");
    Need(out, "out");
    *out = new rrlab_vocab{model->ckpt.vocab};
  });
}

rrlab_status rrlab_model_config(const rrlab_model* model, rrlab_config** out) {
  return Guard([&] {
    Need(model, "model");
    Need(out, "out");
    if (model->ckpt.config_snapshot.empty()) {
      *out = new rrlab_config{};
      (*out)->cfg.ResolveSeeds();
    } else {
      *out = new rrlab_config{rrlab::RunConfig::Parse(model->ckpt.config_snapshot, "checkpoint")};
    }
  });
}

rrlab_status rrlab_model_step(const rrlab_model* model, int64_t* out) {
  return Guard([&] {
    Need(model, "model");
    Need(out, "out");
    *out = model->ckpt.state.step;
  });
}

rrlab_status rrlab_model_history(const rrlab_model* model, char** out_json) {
  return Guard([&] {
    Need(model, "model");
    Need(out_json, "out_json");
    *out_json = Dup(HistoryJson(model->ckpt.state));
  });
}

rrlab_status rrlab_train_syntactic(rrlab_model* model, const rrlab_corpus* corpus,
                                   const rrlab_config* cfg) {
  return Guard([&] {
    Need(model, "model");
    Need(corpus, "corpus");
    Need(cfg, "cfg");
    cfg->cfg.Validate();
    rrlab::training::TrainSyntactic(model->ckpt.state, corpus->corpus.syntactic,
                                    model->ckpt.vocab, cfg->cfg.syntactic);
    model->ckpt.corpus_hash = rrlab::corpus::CorpusHash(corpus->corpus);
    model->ckpt.config_snapshot = cfg->cfg.ToIni();
  });
}

rrlab_status rrlab_train_semantic(rrlab_model* model, const rrlab_corpus* corpus,
                                  const rrlab_config* cfg) {
  return Guard([&] {
    Need(model, "model");
    Need(corpus, "corpus");
    Need(cfg, "cfg");
    cfg->cfg.Validate();
    rrlab::training::TrainSemantic(model->ckpt.state, corpus->corpus.semantic,
                                   corpus->corpus.syntactic, model->ckpt.vocab,
                                   cfg->cfg.semantic, cfg->cfg.syntactic);
    model->ckpt.corpus_hash = rrlab::corpus::CorpusHash(corpus->corpus);
    model->ckpt.config_snapshot = cfg->cfg.ToIni();
  });
}

rrlab_status rrlab_infer(const rrlab_model* model, const char* buggy_program, int hunk_start,
                         int hunk_end, int beam, char** out_json) {
  return Guard([&] {
    Need(model, "model");
    Need(buggy_program, "buggy_program");
    Need(out_json, "out_json");
    if (beam < 1) throw Error(ErrorCode::kInvalidArgument, "beam must be positive");
    CheckModelVocab(model);
    const auto sample =
        rrlab::corpus::SampleFromHunk(buggy_program, rrlab::corpus::Hunk{hunk_start, hunk_end});
    const auto patches =
        rrlab::eval::Infer(model->ckpt.state.params, model->ckpt.vocab, sample, beam);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (size_t i = 0; i < patches.size(); ++i) {
      arr.push_back({{"rank", i + 1}, {"text", patches[i].text}, {"log_score", patches[i].log_score}});
    }
    *out_json = Dup(arr.dump(2));
  });
}

rrlab_status rrlab_infer_split(const rrlab_model* model, const rrlab_corpus* corpus,
                               rrlab_split split, const char* id, const rrlab_config* cfg,
                               char** out_jsonl) {
  return Guard([&] {
    Need(model, "model");
    Need(corpus, "corpus");
    Need(cfg, "cfg");
    Need(out_jsonl, "out_jsonl");
    cfg->cfg.Validate();
    CheckModelVocab(model);
    const auto& all = SplitOf(const_cast<rrlab::corpus::Corpus&>(corpus->corpus), CheckSplit(split));
    std::vector<rrlab::corpus::SemanticSample> picked;
    if (id != nullptr) {
      for (const auto& s : all) {
        if (s.base.id == id) picked.push_back(s);
      }
      if (picked.empty())
        throw Error(ErrorCode::kInvalidArgument, "no sample with id '" + std::string(id) + "'");
    }
    const auto& samples = id != nullptr ? picked : all;
    const auto bugs = rrlab::eval::GeneratePatches(model->ckpt.state.params, model->ckpt.vocab,
                                                   samples, cfg->cfg.eval);
    *out_jsonl = Dup(rrlab::eval::PatchRecordsJson(bugs));
  });
}

rrlab_status rrlab_eval(const rrlab_model* model, const rrlab_corpus* corpus,
                        const rrlab_config* cfg, const char* out_dir, char** out_table) {
  return Guard([&] {
    Need(model, "model");
    Need(corpus, "corpus");
    Need(cfg, "cfg");
    Need(out_dir, "out_dir");
    cfg->cfg.Validate();
    CheckModelVocab(model);
    if (corpus->corpus.test.empty())
      throw Error(ErrorCode::kInvalidArgument, "corpus has no test samples");
    const auto report = rrlab::eval::Evaluate(model->ckpt.state.params, model->ckpt.vocab,
                                              corpus->corpus.test, cfg->cfg.eval);
    WriteReport(out_dir, report);
    if (out_table) {
      std::ostringstream os;
      rrlab::eval::PrintReport(os, report);
      *out_table = Dup(os.str());
    }
  });
}

rrlab_status rrlab_ablate(const rrlab_model* baseline, const rrlab_model* full,
                          const rrlab_corpus* corpus, const rrlab_config* cfg,
                          const char* out_dir, char** out_table) {
  return Guard([&] {
    Need(baseline, "baseline");
    Need(full, "full");
    Need(corpus, "corpus");
    Need(cfg, "cfg");
    Need(out_dir, "out_dir");
    cfg->cfg.Validate();
    CheckModelVocab(baseline);
    CheckModelVocab(full);
    if (!(baseline->ckpt.vocab == full->ckpt.vocab))
      throw Error(ErrorCode::kConfig, "baseline and full models use different vocabularies");
    if (corpus->corpus.test.empty())
      throw Error(ErrorCode::kInvalidArgument, "corpus has no test samples");
    const auto r = rrlab::eval::Ablate(baseline->ckpt.state.params, full->ckpt.state.params,
                                       full->ckpt.vocab, corpus->corpus.test, cfg->cfg.eval);
    const std::filesystem::path dir(out_dir);
    rrlab::eval::WriteAblationCsv(dir / "ablation.csv", r);
    WriteReport(dir / "baseline", r.baseline);
    WriteReport(dir / "full", r.full);
    if (out_table) {
      std::ostringstream os;
      rrlab::eval::PrintAblation(os, r);
      *out_table = Dup(os.str());
    }
  });
}

rrlab_status rrlab_grad_check(const rrlab_config* cfg, size_t n_examples, size_t max_per_array,
                              double* out_max_relative_error, char** out_report) {
  return Guard([&] {
    Need(cfg, "cfg");
    Need(out_max_relative_error, "out_max_relative_error");
    if (n_examples == 0) throw Error(ErrorCode::kInvalidArgument, "n_examples must be positive");
    cfg->cfg.Validate();
    auto mc = cfg->cfg.model;
    mc.vocab_size = static_cast<int>(cfg->cfg.vocab_size);
    const auto params = rrlab::model::Init(mc);
    rrlab::Rng rng(rrlab::DeriveSeed(cfg->cfg.seed, 0x47524144));
    std::vector<rrlab::model::GradCheckExample> examples(n_examples);
    for (auto& ex : examples) {
      const auto in_len = rng.Uniform(2, std::min<int64_t>(mc.max_input, 10));
      const auto out_len = rng.Uniform(2, std::min<int64_t>(mc.max_target, 6));
      for (int64_t i = 0; i < in_len; ++i)
        ex.input_ids.push_back(static_cast<int>(rng.Uniform(1, mc.vocab_size - 1)));
      for (int64_t i = 0; i < out_len; ++i)
        ex.target_ids.push_back(static_cast<int>(rng.Uniform(1, mc.vocab_size - 1)));
    }
    const auto report = rrlab::model::CheckGradients(params, examples, 1e-4, 1e-8, max_per_array);
    *out_max_relative_error = report.max_relative_error;
    if (out_report) {
      std::ostringstream os;
      os << "parameters " << params.Count() << ", checked " << report.coordinates
         << " coordinates on " << n_examples << " examples\n"
         << "worst " << report.worst_parameter << "[" << report.worst_index << "]\n";
      *out_report = Dup(os.str());
    }
  });
}

rrlab_status rrlab_write_run_manifest(const char* path, const char* command,
                                      const rrlab_config* cfg, const char* const* keys,
                                      const char* const* values, size_t n) {
  return Guard([&] {
    Need(path, "path");
    Need(command, "command");
    Need(cfg, "cfg");
    if (n > 0) {
      Need(keys, "keys");
      Need(values, "values");
    }
    rrlab::RunManifest m;
    m.command = command;
    m.seed = cfg->cfg.seed;
    m.config_ini = cfg->cfg.ToIni();
    for (size_t i = 0; i < n; ++i) {
      Need(keys[i], "key");
      Need(values[i], "value");
      const std::string k = keys[i];
      if (k.rfind("input:", 0) == 0) {
        m.inputs[k.substr(6)] = values[i];
      } else {
        m.hashes[k] = values[i];
      }
    }
    rrlab::WriteRunManifest(path, m);
  });
}

}  // extern "C"
