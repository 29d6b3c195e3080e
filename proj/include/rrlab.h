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

/* C interface to rrlab: corpus generation, vocabulary, model training,
 * inference and evaluation. Every handle is opaque and owned by the caller;
 * strings returned through char** are freed with rrlab_string_free. On
 * failure a function returns a non-zero status and rrlab_last_error() holds
 * the message for the calling thread. */

#ifndef RRLAB_H_
#define RRLAB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RRLAB_API __declspec(dllexport)
#else
#define RRLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rrlab_status {
  RRLAB_OK = 0,
  RRLAB_INVALID_ARGUMENT = 1,
  RRLAB_IO = 2,
  RRLAB_SCHEMA = 3,
  RRLAB_CONFIG = 4,
  RRLAB_GENERATION = 5,
  RRLAB_VERSION_MISMATCH = 6,
  RRLAB_CORRUPT = 7,
  RRLAB_SHAPE_MISMATCH = 8,
  RRLAB_STALE_CACHE = 9,
  RRLAB_NON_FINITE = 10,
  RRLAB_UNKNOWN_ID = 11,
  RRLAB_INTERNAL = 99
} rrlab_status;

typedef enum rrlab_split {
  RRLAB_SPLIT_SYNTACTIC = 0,
  RRLAB_SPLIT_SEMANTIC = 1,
  RRLAB_SPLIT_TEST = 2
} rrlab_split;

typedef struct rrlab_config rrlab_config;
typedef struct rrlab_corpus rrlab_corpus;
typedef struct rrlab_vocab rrlab_vocab;
typedef struct rrlab_model rrlab_model;

typedef void (*rrlab_log_fn)(const char* message, void* user);

RRLAB_API const char* rrlab_version(void);
RRLAB_API const char* rrlab_status_name(rrlab_status status);
RRLAB_API const char* rrlab_last_error(void);
RRLAB_API void rrlab_string_free(char* s);

/* Worker cap; below 1 means 1. Defaults to RRLAB_THREADS or the core count. */
RRLAB_API void rrlab_set_threads(int threads);
RRLAB_API int rrlab_threads(void);

/* NULL restores logging to standard error. */
RRLAB_API void rrlab_set_log_callback(rrlab_log_fn fn, void* user);

/* ---- configuration ---- */

RRLAB_API rrlab_status rrlab_config_new(rrlab_config** out);
RRLAB_API rrlab_status rrlab_config_load(const char* path, rrlab_config** out);
RRLAB_API rrlab_status rrlab_config_parse(const char* ini_text, rrlab_config** out);
/* key is "section.key", e.g. "semantic.epochs". */
RRLAB_API rrlab_status rrlab_config_set(rrlab_config* cfg, const char* key, const char* value);
/* Current value of "section.key" in its INI text form. */
RRLAB_API rrlab_status rrlab_config_get(const rrlab_config* cfg, const char* key, char** out);
RRLAB_API rrlab_status rrlab_config_validate(const rrlab_config* cfg);
RRLAB_API rrlab_status rrlab_config_to_ini(const rrlab_config* cfg, char** out);
RRLAB_API rrlab_status rrlab_config_seed(const rrlab_config* cfg, uint64_t* out);
RRLAB_API void rrlab_config_free(rrlab_config* cfg);

/* ---- corpus ---- */

/* Sizes come from the [corpus] section, the seed from [run]. */
RRLAB_API rrlab_status rrlab_corpus_generate(const rrlab_config* cfg, rrlab_corpus** out);
RRLAB_API rrlab_status rrlab_corpus_read(const char* dir, rrlab_corpus** out);
/* Loads one split file into `split`; the other splits stay empty. */
RRLAB_API rrlab_status rrlab_corpus_read_split(const char* path, rrlab_split split,
                                               rrlab_corpus** out);
RRLAB_API rrlab_status rrlab_corpus_write(const rrlab_corpus* corpus, const char* dir);
RRLAB_API rrlab_status rrlab_corpus_size(const rrlab_corpus* corpus, rrlab_split split,
                                         size_t* out);
RRLAB_API rrlab_status rrlab_corpus_hash(const rrlab_corpus* corpus, uint64_t* out);
RRLAB_API void rrlab_corpus_free(rrlab_corpus* corpus);

/* ---- vocabulary ---- */

/* Trained on the syntactic split. */
RRLAB_API rrlab_status rrlab_vocab_train(const rrlab_corpus* corpus, size_t target_size,
                                         rrlab_vocab** out);
RRLAB_API rrlab_status rrlab_vocab_load(const char* path, rrlab_vocab** out);
RRLAB_API rrlab_status rrlab_vocab_save(const rrlab_vocab* vocab, const char* path);
RRLAB_API rrlab_status rrlab_vocab_size(const rrlab_vocab* vocab, size_t* out);
RRLAB_API rrlab_status rrlab_vocab_hash(const rrlab_vocab* vocab, uint64_t* out);
RRLAB_API void rrlab_vocab_free(rrlab_vocab* vocab);

/* ---- model ---- */

RRLAB_API rrlab_status rrlab_model_init(const rrlab_config* cfg, const rrlab_vocab* vocab,
                                        rrlab_model** out);
/* expected_vocab may be NULL; otherwise its hash must match the checkpoint. */
RRLAB_API rrlab_status rrlab_model_load(const char* path, const rrlab_vocab* expected_vocab,
                                        rrlab_model** out);
RRLAB_API void rrlab_model_free(rrlab_model* model);
RRLAB_API rrlab_status rrlab_model_save(const rrlab_model* model, const char* path);
RRLAB_API rrlab_status rrlab_model_vocab(const rrlab_model* model, rrlab_vocab** out);
/* The run configuration stored with the checkpoint. */
RRLAB_API rrlab_status rrlab_model_config(const rrlab_model* model, rrlab_config** out);
RRLAB_API rrlab_status rrlab_model_step(const rrlab_model* model, int64_t* out);
/* Per-epoch training records as a JSON array. */
RRLAB_API rrlab_status rrlab_model_history(const rrlab_model* model, char** out_json);

RRLAB_API rrlab_status rrlab_train_syntactic(rrlab_model* model, const rrlab_corpus* corpus,
                                             const rrlab_config* cfg);
/* Semantic split, interleaved with syntactic batches per semantic.alternation. */
RRLAB_API rrlab_status rrlab_train_semantic(rrlab_model* model, const rrlab_corpus* corpus,
                                            const rrlab_config* cfg);

/* Ranked patches for lines [hunk_start, hunk_end] of a program, as a JSON
 * array of {rank, text, log_score}. */
RRLAB_API rrlab_status rrlab_infer(const rrlab_model* model, const char* buggy_program,
                                   int hunk_start, int hunk_end, int beam, char** out_json);

/* Scores every sample of `split` (only sample `id` when not NULL) and
 * returns one JSON line per bug. */
RRLAB_API rrlab_status rrlab_infer_split(const rrlab_model* model, const rrlab_corpus* corpus,
                                         rrlab_split split, const char* id,
                                         const rrlab_config* cfg, char** out_jsonl);

/* Evaluates on the test split. Writes compilable_rate.csv, repair_counts.csv,
 * error_histogram.csv and patches.jsonl into out_dir; out_table (may be NULL)
 * receives the printed summary. */
RRLAB_API rrlab_status rrlab_eval(const rrlab_model* model, const rrlab_corpus* corpus,
                                  const rrlab_config* cfg, const char* out_dir,
                                  char** out_table);

/* Writes ablation.csv plus the per-model reports under baseline/ and full/. */
RRLAB_API rrlab_status rrlab_ablate(const rrlab_model* baseline, const rrlab_model* full,
                                    const rrlab_corpus* corpus, const rrlab_config* cfg,
                                    const char* out_dir, char** out_table);

/* Finite-difference check of the model described by cfg on n_examples random
 * sequences. max_per_array = 0 checks every coordinate. */
RRLAB_API rrlab_status rrlab_grad_check(const rrlab_config* cfg, size_t n_examples,
                                        size_t max_per_array, double* out_max_relative_error,
                                        char** out_report);

/* run-manifest.json with the config and seed. Keys starting with "input:"
 * are recorded as input paths, all others as hashes. */
RRLAB_API rrlab_status rrlab_write_run_manifest(const char* path, const char* command,
                                                const rrlab_config* cfg,
                                                const char* const* keys,
                                                const char* const* values, size_t n);

#ifdef __cplusplus
}
#endif

#endif /* RRLAB_H_ */
