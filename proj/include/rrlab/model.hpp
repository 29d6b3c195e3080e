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

// Encoder-decoder patch generator: pre-norm transformer with hand-written
// reverse mode, greedy and beam decoding, and the parameter update rules.

#ifndef RRLAB_MODEL_HPP_
#define RRLAB_MODEL_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rrlab/rng.hpp"

namespace rrlab::model {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ModelConfig {
  int d_model = 64;
  int n_heads = 4;
  int n_layers_enc = 2;
  int n_layers_dec = 2;
  int d_ff = 128;
  int max_input = 512;
  int max_target = 100;
  int vocab_size = 512;
  double dropout_rate = 0.0;
  uint64_t seed = 0;

  // Throws kConfig naming the first bad field.
  void Validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Closed-form parameter count; see docs/parameters.md.
size_t ParameterCount(const ModelConfig& config);

// Named dense arrays. Gradients use the same type with the same shapes.
struct Parameters {
  ModelConfig config;
  std::vector<std::string> names;
  std::vector<Matrix> arrays;
  // Changes whenever the values change through this API; activation caches
  // remember it to detect staleness.
  uint64_t generation = 0;

  size_t Count() const;
  size_t Index(const std::string& name) const;  // throws kInvalidArgument
  bool AllFinite() const;
  // Same names and shapes, all zero.
  Parameters ZerosLike() const;
  // Marks direct edits of `arrays` so older caches become stale.
  void Touch();
};

using Gradients = Parameters;

Parameters Init(const ModelConfig& config);

class ActivationCache {
 public:
  ActivationCache();
  ~ActivationCache();
  ActivationCache(ActivationCache&&) noexcept;
  ActivationCache& operator=(ActivationCache&&) noexcept;

  bool filled() const;

  struct Data;  // defined by the model implementation

 private:
  friend struct CacheAccess;
  std::unique_ptr<Data> data_;
};

struct ForwardOptions {
  // Dropout is applied only when both are set and config.dropout_rate > 0.
  bool train = false;
  Rng* rng = nullptr;
};

struct ForwardResult {
  double loss = 0.0;          // mean over non-PAD target positions
  int counted = 0;            // number of non-PAD target positions
  Matrix log_probs;           // target_len x vocab_size
};

// Teacher forcing: the decoder reads [BOS, target[0..T-2]] and predicts
// target[0..T-1].
ForwardResult ForwardTeacherForced(const Parameters& params, std::span<const int> input_ids,
                                   std::span<const int> target_ids,
                                   ActivationCache* cache = nullptr,
                                   const ForwardOptions& options = {});

// d(loss_scale * L)/d(theta) for the forward pass recorded in `cache`.
Gradients Backward(const Parameters& params, const ActivationCache& cache, double loss_scale);

// Accumulates `from` into `into` (same layout).
void AddInto(Gradients& into, const Gradients& from);
void Scale(Gradients& grads, double factor);

enum class OptimizerMode { kSgd, kAdam };

struct Optimizer {
  OptimizerMode mode = OptimizerMode::kSgd;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int64_t step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
};

// theta <- theta - lr * g (kSgd) or the bias-corrected Adam rule (kAdam).
// A non-finite gradient or result throws kNonFinite and leaves both the
// parameters and the optimizer state untouched.
void ApplyUpdate(Parameters& params, const Gradients& grads, Optimizer& optimizer);

// Argmax at every step, ties to the lowest id. Includes the EOS if emitted.
std::vector<int> GreedyDecode(const Parameters& params, std::span<const int> input_ids,
                              int max_target);

struct Hypothesis {
  std::vector<int> ids;
  double log_score = 0.0;
};

struct DecodeResult {
  std::vector<Hypothesis> sequences;  // best first
};

// Beam search over summed log-probabilities without length normalisation.
// Equal scores rank by lexicographic id order.
DecodeResult BeamDecode(const Parameters& params, std::span<const int> input_ids,
                        int beam_size, int max_target);

// Sum of log q(target) under teacher forcing over every position, PAD
// included, for scoring a fixed sequence.
double SequenceLogProb(const Parameters& params, std::span<const int> input_ids,
                       std::span<const int> target_ids);

struct GradCheckExample {
  std::vector<int> input_ids;
  std::vector<int> target_ids;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  size_t worst_index = 0;
  size_t coordinates = 0;
};

// Central differences on the mean loss over `examples`; relative error is
// |a - n| / max(|a|, |n|, floor). A nonzero `max_per_array` checks that many
// evenly strided coordinates of each array instead of all of them.
GradCheckReport CheckGradients(const Parameters& params,
                               std::span<const GradCheckExample> examples,
                               double epsilon = 1e-4, double floor = 1e-8,
                               size_t max_per_array = 0);

}  // namespace rrlab::model

#endif  // RRLAB_MODEL_HPP_
