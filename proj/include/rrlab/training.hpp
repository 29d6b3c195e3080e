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

// Syntactic training, the reward-modulated semantic step, the alternating
// schedule, beam-based augmentation and checkpoints.

#ifndef RRLAB_TRAINING_HPP_
#define RRLAB_TRAINING_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rrlab/corpus.hpp"
#include "rrlab/discriminator.hpp"
#include "rrlab/model.hpp"
#include "rrlab/tokenizer.hpp"

namespace rrlab::training {

using discriminator::RewardConfig;
using discriminator::Stage;

enum class CandidatePolicy { kGreedy, kBeamTop1, kBeamTopN };

std::string_view PolicyName(CandidatePolicy policy);
CandidatePolicy ParsePolicy(std::string_view name);  // throws kConfig

struct SyntacticTrainConfig {
  int epochs = 15;
  int batch_size = 16;
  double learning_rate = 1e-4;
  model::OptimizerMode optimizer = model::OptimizerMode::kAdam;
  uint64_t seed = 0;
  bool shuffle = true;

  void Validate() const;
};

struct SemanticTrainConfig {
  int epochs = 4;
  double learning_rate = 1e-4;
  RewardConfig reward;
  CandidatePolicy candidate_policy = CandidatePolicy::kGreedy;
  // Beam width for the beam policies; kBeamTopN scores this many candidates.
  int top_n = 1;
  // After every `alternation_semantic` semantic updates, run
  // `alternation_syntactic` syntactic batches.
  int alternation_semantic = 1;
  int alternation_syntactic = 1;
  int64_t budget = minilang::kDefaultStepBudget;
  uint64_t seed = 0;
  // When positive, beam candidates of this width are pooled once before the
  // first epoch and replayed as extra semantic updates every epoch.
  int augment_beam = 0;

  void Validate() const;
};

using StageHistogram = std::array<int64_t, discriminator::kNumStages>;

struct EpochRecord {
  std::string phase;  // "syntactic" or "semantic"
  int epoch = 0;
  double mean_loss = 0.0;          // mean L over the epoch's updates
  double mean_reward = 0.0;        // semantic only
  StageHistogram stages{};         // semantic only
  int64_t semantic_updates = 0;
  int64_t syntactic_updates = 0;
  int64_t skipped = 0;
};

struct TrainState {
  model::Parameters params;
  model::Optimizer optimizer;
  int64_t step = 0;  // applied updates
  int64_t skipped_steps = 0;
  std::vector<EpochRecord> history;
};

TrainState InitState(const model::ModelConfig& config);

// Every sample encoded with the model's length limits.
std::vector<tokenizer::EncodedExample> EncodeAll(std::span<const corpus::BugSample> samples,
                                                 const tokenizer::Vocab& vocab,
                                                 const model::ModelConfig& config);

// L_RR of the modulated loss.
inline double ModulatedLoss(double loss, double reward) { return (1.0 - reward) * loss; }

void TrainSyntactic(TrainState& state, std::span<const corpus::BugSample> corpus,
                    const tokenizer::Vocab& vocab, const SyntacticTrainConfig& cfg);

struct StepMetrics {
  double loss = 0.0;         // teacher-forced L against the ground-truth fix
  double reward = 0.0;       // R
  double scaled_loss = 0.0;  // L_RR = (1 - R) L
  Stage stage = Stage::kNoChange;
  std::string candidate;     // decoded patch text
  bool skipped = false;      // non-finite gradient, no update applied
};

// One semantic step per candidate drawn by cfg.candidate_policy.
std::vector<StepMetrics> SemanticStep(TrainState& state, const corpus::SemanticSample& sample,
                                      const tokenizer::Vocab& vocab,
                                      const SemanticTrainConfig& cfg);

// Semantic step with a given candidate in place of the generated one.
StepMetrics SemanticUpdate(TrainState& state, const corpus::SemanticSample& sample,
                           const tokenizer::EncodedExample& encoded,
                           std::string_view candidate_text, const tokenizer::Vocab& vocab,
                           const SemanticTrainConfig& cfg);

void TrainSemantic(TrainState& state, std::span<const corpus::SemanticSample> semantic,
                   std::span<const corpus::BugSample> syntactic, const tokenizer::Vocab& vocab,
                   const SemanticTrainConfig& cfg, const SyntacticTrainConfig& syntactic_cfg);

struct PoolEntry {
  size_t sample_index = 0;
  std::vector<int> ids;
  std::string patch_text;
  discriminator::RewardOutcome outcome;
};

std::vector<PoolEntry> AugmentSemanticDataset(const TrainState& state,
                                              std::span<const corpus::SemanticSample> semantic,
                                              const tokenizer::Vocab& vocab, int beam_size,
                                              const RewardConfig& reward, int64_t budget);

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  TrainState state;
  tokenizer::Vocab vocab;
  uint64_t corpus_hash = 0;
  std::string config_snapshot;  // INI text of the run configuration
};

void SaveCheckpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);

// Throws kIo, kCorrupt (with the byte offset) or kVersionMismatch. When
// `expected_vocab` is given its hash must match the stored one.
Checkpoint LoadCheckpoint(const std::filesystem::path& path,
                          const tokenizer::Vocab* expected_vocab = nullptr);

}  // namespace rrlab::training

#endif  // RRLAB_TRAINING_HPP_
