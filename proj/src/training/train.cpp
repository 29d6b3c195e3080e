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
#include <numeric>
#include <sstream>

#include "rrlab/error.hpp"
#include "rrlab/log.hpp"
#include "rrlab/parallel.hpp"
#include "rrlab/training.hpp"

namespace rrlab::training {
namespace {

constexpr uint64_t kDropoutSalt = 0x44524f50;
constexpr uint64_t kSyntacticOrderSalt = 0x53594e4f;

void UseOptimizer(TrainState& state, model::OptimizerMode mode, double lr) {
  if (state.optimizer.mode != mode) {
    state.optimizer.mode = mode;
    state.optimizer.m.clear();
    state.optimizer.v.clear();
  }
  state.optimizer.lr = lr;
}

// Applies `grads`; a non-finite gradient skips the step and is logged.
bool Update(TrainState& state, const model::Gradients& grads, std::string_view what) {
  try {
    model::ApplyUpdate(state.params, grads, state.optimizer);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNonFinite) throw;
    ++state.skipped_steps;
    Log("skipped " + std::string(what) + " update at step " + std::to_string(state.step) + ": " +
        e.what());
    return false;
  }
  ++state.step;
  return true;
}

struct BatchResult {
  double mean_loss = 0.0;
  bool applied = false;
};

// Mean-loss gradient over the batch; per-example gradients are computed
// concurrently and summed in index order.
BatchResult SyntacticBatch(TrainState& state, std::span<const tokenizer::EncodedExample> encoded,
                           std::span<const size_t> batch, uint64_t seed) {
  const size_t n = batch.size();
  std::vector<model::Gradients> grads(n);
  std::vector<double> losses(n);
  const uint64_t step_seed = DeriveSeed(DeriveSeed(seed, kDropoutSalt), static_cast<uint64_t>(state.step));
  ParallelFor(n, [&](size_t i) {
    const auto& ex = encoded[batch[i]];
    Rng rng(DeriveSeed(step_seed, i));
    model::ActivationCache cache;
    losses[i] = model::ForwardTeacherForced(state.params, ex.input_ids, ex.target_ids, &cache,
                                            {true, &rng})
                    .loss;
    grads[i] = model::Backward(state.params, cache, 1.0 / static_cast<double>(n));
  });
  for (size_t i = 1; i < n; ++i) model::AddInto(grads[0], grads[i]);
  BatchResult r;
  r.mean_loss = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(n);
  r.applied = Update(state, grads[0], "syntactic");
  return r;
}

// Endless shuffled pass over the syntactic examples for interleaved batches.
class SyntacticFeed {
 public:
  SyntacticFeed(size_t n, const SyntacticTrainConfig& cfg) : order_(n), cfg_(cfg) {
    std::iota(order_.begin(), order_.end(), 0);
    Reshuffle();
  }

  std::vector<size_t> NextBatch() {
    std::vector<size_t> batch;
    const size_t size = std::min(static_cast<size_t>(cfg_.batch_size), order_.size());
    while (batch.size() < size) {
      if (cursor_ == order_.size()) Reshuffle();
      batch.push_back(order_[cursor_++]);
    }
    return batch;
  }

 private:
  void Reshuffle() {
    if (cfg_.shuffle) {
      Rng rng(DeriveSeed(DeriveSeed(cfg_.seed, kSyntacticOrderSalt), pass_));
      rng.Shuffle(std::span<size_t>(order_));
    }
    ++pass_;
    cursor_ = 0;
  }

  std::vector<size_t> order_;
  const SyntacticTrainConfig& cfg_;
  size_t cursor_ = 0;
  uint64_t pass_ = 0;
};

std::string Fixed(double v, int digits = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace

std::string_view PolicyName(CandidatePolicy policy) {
  switch (policy) {
    case CandidatePolicy::kGreedy: return "greedy";
    case CandidatePolicy::kBeamTop1: return "beam-top1";
    case CandidatePolicy::kBeamTopN: return "beam-topn";
  }
  return "?";
}

CandidatePolicy ParsePolicy(std::string_view name) {
  for (auto p : {CandidatePolicy::kGreedy, CandidatePolicy::kBeamTop1, CandidatePolicy::kBeamTopN}) {
    if (PolicyName(p) == name) return p;
  }
  throw Error(ErrorCode::kConfig, "unknown candidate policy '" + std::string(name) +
                                      "' (expected greedy, beam-top1 or beam-topn)");
}

void SyntacticTrainConfig::Validate() const {
  if (epochs < 1) throw Error(ErrorCode::kConfig, "syntactic.epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::kConfig, "syntactic.batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kConfig, "syntactic.lr must be > 0");
}

void SemanticTrainConfig::Validate() const {
  if (epochs < 1) throw Error(ErrorCode::kConfig, "semantic.epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kConfig, "semantic.lr must be > 0");
  discriminator::ValidateConfig(reward);
  if (top_n < 1) throw Error(ErrorCode::kConfig, "semantic.top_n must be >= 1");
  if (alternation_semantic < 1 || alternation_syntactic < 0) {
    throw Error(ErrorCode::kConfig, "semantic.alternation must be S:T with S >= 1 and T >= 0");
  }
  if (budget < 1) throw Error(ErrorCode::kConfig, "semantic.budget must be >= 1");
  if (augment_beam < 0) throw Error(ErrorCode::kConfig, "semantic.augment_beam must be >= 0");
}

TrainState InitState(const model::ModelConfig& config) {
  TrainState s;
  s.params = model::Init(config);
  return s;
}

std::vector<tokenizer::EncodedExample> EncodeAll(std::span<const corpus::BugSample> samples,
                                                 const tokenizer::Vocab& vocab,
                                                 const model::ModelConfig& config) {
  std::vector<tokenizer::EncodedExample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(tokenizer::EncodeExample(s, vocab, static_cast<size_t>(config.max_input),
                                           static_cast<size_t>(config.max_target)));
  }
  return out;
}

void TrainSyntactic(TrainState& state, std::span<const corpus::BugSample> corpus,
                    const tokenizer::Vocab& vocab, const SyntacticTrainConfig& cfg) {
  cfg.Validate();
  if (corpus.empty()) throw Error(ErrorCode::kInvalidArgument, "empty syntactic corpus");
  const auto encoded = EncodeAll(corpus, vocab, state.params.config);
  UseOptimizer(state, cfg.optimizer, cfg.learning_rate);
  std::vector<size_t> order(encoded.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<size_t>(cfg.batch_size);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) {
      Rng rng(DeriveSeed(cfg.seed, static_cast<uint64_t>(epoch)));
      rng.Shuffle(std::span<size_t>(order));
    }
    EpochRecord rec;
    rec.phase = "syntactic";
    rec.epoch = epoch;
    double total = 0.0;
    for (size_t at = 0; at < order.size(); at += batch) {
      const size_t end = std::min(at + batch, order.size());
      const auto r = SyntacticBatch(state, encoded,
                                    std::span<const size_t>(order.data() + at, end - at), cfg.seed);
      total += r.mean_loss;
      ++rec.syntactic_updates;
      if (!r.applied) ++rec.skipped;
    }
    rec.mean_loss = total / static_cast<double>(rec.syntactic_updates);
    Log("syntactic epoch " + std::to_string(epoch) + "/" + std::to_string(cfg.epochs) +
        " loss " + Fixed(rec.mean_loss));
    state.history.push_back(rec);
  }
}

StepMetrics SemanticUpdate(TrainState& state, const corpus::SemanticSample& sample,
                           const tokenizer::EncodedExample& encoded,
                           std::string_view candidate_text, const tokenizer::Vocab& vocab,
                           const SemanticTrainConfig& cfg) {
  model::ActivationCache cache;
  const auto fwd = model::ForwardTeacherForced(state.params, encoded.input_ids, encoded.target_ids,
                                               &cache);
  const auto outcome = discriminator::Discriminate(sample, candidate_text, cfg.reward, vocab,
                                                   cfg.budget);
  StepMetrics m;
  m.loss = fwd.loss;
  m.reward = outcome.reward;
  m.stage = outcome.stage;
  m.scaled_loss = ModulatedLoss(m.loss, m.reward);
  m.candidate = std::string(candidate_text);
  const auto grads = model::Backward(state.params, cache, 1.0 - m.reward);
  state.optimizer.lr = cfg.learning_rate;
  m.skipped = !Update(state, grads, "semantic");
  return m;
}

std::vector<StepMetrics> SemanticStep(TrainState& state, const corpus::SemanticSample& sample,
                                      const tokenizer::Vocab& vocab,
                                      const SemanticTrainConfig& cfg) {
  const auto& mc = state.params.config;
  const auto encoded = tokenizer::EncodeExample(sample.base, vocab,
                                                static_cast<size_t>(mc.max_input),
                                                static_cast<size_t>(mc.max_target));
  std::vector<std::string> candidates;
  switch (cfg.candidate_policy) {
    case CandidatePolicy::kGreedy:
      candidates.push_back(
          vocab.Decode(model::GreedyDecode(state.params, encoded.input_ids, mc.max_target)));
      break;
    case CandidatePolicy::kBeamTop1:
    case CandidatePolicy::kBeamTopN: {
      const auto beam = model::BeamDecode(state.params, encoded.input_ids, cfg.top_n, mc.max_target);
      for (const auto& h : beam.sequences) {
        candidates.push_back(vocab.Decode(h.ids));
        if (cfg.candidate_policy == CandidatePolicy::kBeamTop1) break;
      }
      break;
    }
  }
  std::vector<StepMetrics> out;
  for (const auto& c : candidates) out.push_back(SemanticUpdate(state, sample, encoded, c, vocab, cfg));
  return out;
}

void TrainSemantic(TrainState& state, std::span<const corpus::SemanticSample> semantic,
                   std::span<const corpus::BugSample> syntactic, const tokenizer::Vocab& vocab,
                   const SemanticTrainConfig& cfg, const SyntacticTrainConfig& syntactic_cfg) {
  cfg.Validate();
  syntactic_cfg.Validate();
  if (semantic.empty()) throw Error(ErrorCode::kInvalidArgument, "empty semantic corpus");
  const bool interleave = cfg.alternation_syntactic > 0;
  if (interleave && syntactic.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "alternation needs a syntactic corpus");
  }
  const auto& mc = state.params.config;
  std::vector<tokenizer::EncodedExample> sem_encoded;
  for (const auto& s : semantic) {
    sem_encoded.push_back(tokenizer::EncodeExample(s.base, vocab, static_cast<size_t>(mc.max_input),
                                                   static_cast<size_t>(mc.max_target)));
  }
  const auto syn_encoded = interleave ? EncodeAll(syntactic, vocab, mc)
                                      : std::vector<tokenizer::EncodedExample>{};
  SyntacticFeed feed(syn_encoded.size(), syntactic_cfg);
  const auto pool = cfg.augment_beam > 0
                        ? AugmentSemanticDataset(state, semantic, vocab, cfg.augment_beam,
                                                 cfg.reward, cfg.budget)
                        : std::vector<PoolEntry>{};
  if (!pool.empty()) Log("semantic augmentation pool: " + std::to_string(pool.size()) + " entries");
  if (state.optimizer.mode != syntactic_cfg.optimizer) {
    UseOptimizer(state, syntactic_cfg.optimizer, cfg.learning_rate);
  }

  // Work items: sample indices, then pool entries offset by semantic.size().
  std::vector<size_t> items(semantic.size() + pool.size());
  std::iota(items.begin(), items.end(), 0);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng(DeriveSeed(cfg.seed, static_cast<uint64_t>(epoch)));
    rng.Shuffle(std::span<size_t>(items));
    EpochRecord rec;
    rec.phase = "semantic";
    rec.epoch = epoch;
    double loss_total = 0.0, reward_total = 0.0;
    int since_syntactic = 0;
    for (size_t item : items) {
      std::vector<StepMetrics> steps;
      if (item < semantic.size()) {
        steps = SemanticStep(state, semantic[item], vocab, cfg);
      } else {
        const PoolEntry& e = pool[item - semantic.size()];
        steps.push_back(SemanticUpdate(state, semantic[e.sample_index], sem_encoded[e.sample_index],
                                       e.patch_text, vocab, cfg));
      }
      for (const auto& m : steps) {
        ++rec.semantic_updates;
        if (m.skipped) ++rec.skipped;
        loss_total += m.loss;
        reward_total += m.reward;
        ++rec.stages[static_cast<size_t>(m.stage)];
        if (!interleave || ++since_syntactic < cfg.alternation_semantic) continue;
        since_syntactic = 0;
        for (int k = 0; k < cfg.alternation_syntactic; ++k) {
          state.optimizer.lr = syntactic_cfg.learning_rate;
          const auto batch = feed.NextBatch();
          const auto r = SyntacticBatch(state, syn_encoded, batch, syntactic_cfg.seed);
          ++rec.syntactic_updates;
          if (!r.applied) ++rec.skipped;
        }
      }
    }
    const auto n = static_cast<double>(std::max<int64_t>(rec.semantic_updates, 1));
    rec.mean_loss = loss_total / n;
    rec.mean_reward = reward_total / n;
    std::string hist;
    for (int s = 0; s < discriminator::kNumStages; ++s) {
      hist += " " + std::string(discriminator::StageName(static_cast<Stage>(s))) + "=" +
              std::to_string(rec.stages[static_cast<size_t>(s)]);
    }
    Log("semantic epoch " + std::to_string(epoch) + "/" + std::to_string(cfg.epochs) + " loss " +
        Fixed(rec.mean_loss) + " reward " + Fixed(rec.mean_reward) + hist);
    state.history.push_back(rec);
  }
}

std::vector<PoolEntry> AugmentSemanticDataset(const TrainState& state,
                                              std::span<const corpus::SemanticSample> semantic,
                                              const tokenizer::Vocab& vocab, int beam_size,
                                              const RewardConfig& reward, int64_t budget) {
  discriminator::ValidateConfig(reward);
  const auto& mc = state.params.config;
  std::vector<std::vector<PoolEntry>> per_sample(semantic.size());
  ParallelFor(semantic.size(), [&](size_t i) {
    const auto enc = tokenizer::EncodeExample(semantic[i].base, vocab,
                                              static_cast<size_t>(mc.max_input),
                                              static_cast<size_t>(mc.max_target));
    std::vector<std::vector<int>> seen;
    for (const auto& h : model::BeamDecode(state.params, enc.input_ids, beam_size, mc.max_target)
                             .sequences) {
      if (std::find(seen.begin(), seen.end(), h.ids) != seen.end()) continue;
      seen.push_back(h.ids);
      PoolEntry e;
      e.sample_index = i;
      e.ids = h.ids;
      e.patch_text = vocab.Decode(h.ids);
      e.outcome = discriminator::Discriminate(semantic[i], e.patch_text, reward, vocab, budget);
      per_sample[i].push_back(std::move(e));
    }
  });
  std::vector<PoolEntry> pool;
  for (auto& v : per_sample) {
    for (auto& e : v) pool.push_back(std::move(e));
  }
  return pool;
}

}  // namespace rrlab::training
