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

#ifndef RRLAB_SRC_MODEL_INTERNAL_HPP_
#define RRLAB_SRC_MODEL_INTERNAL_HPP_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rrlab/model.hpp"

namespace rrlab::model {

struct LnIdx {
  size_t g, b;
};
struct AttnIdx {
  size_t wq, bq, wk, bk, wv, bv, wo, bo;
};
struct FfIdx {
  size_t w1, b1, w2, b2;
};
struct EncLayerIdx {
  LnIdx ln1;
  AttnIdx attn;
  LnIdx ln2;
  FfIdx ff;
};
struct DecLayerIdx {
  LnIdx ln1;
  AttnIdx self;
  LnIdx ln2;
  AttnIdx cross;
  LnIdx ln3;
  FfIdx ff;
};

struct Layout {
  size_t embed = 0;
  std::vector<EncLayerIdx> enc;
  LnIdx enc_ln{};
  std::vector<DecLayerIdx> dec;
  LnIdx dec_ln{};
  size_t out_w = 0;
  size_t out_b = 0;
};

struct ArraySpec {
  std::string name;
  int rows;
  int cols;
  enum class Init { kEmbedding, kXavier, kZero, kOne } init;
};

// Indices into Parameters::arrays; when `specs` is given it receives the
// array list in index order.
Layout BuildLayout(const ModelConfig& config, std::vector<ArraySpec>* specs = nullptr);

// Fixed sinusoidal position table row.
void AddPositions(Matrix& x, int first_position);

struct LnCache {
  Matrix xhat;
  Eigen::VectorXd inv_std;
};

Matrix LayerNormFwd(const Matrix& x, const Matrix& g, const Matrix& b, LnCache* cache);
Matrix LayerNormBwd(const Matrix& dy, const Matrix& g, const LnCache& cache, Matrix& dg,
                    Matrix& db);

inline Matrix LinearFwd(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

inline Matrix LinearBwd(const Matrix& dy, const Matrix& x, const Matrix& w, Matrix& dw,
                        Matrix& db) {
  dw.noalias() += x.transpose() * dy;
  db += dy.colwise().sum();
  return dy * w.transpose();
}

Matrix Gelu(const Matrix& x);
Matrix GeluBwd(const Matrix& dy, const Matrix& x);

// Which keys each query may attend to.
struct AttnMask {
  bool causal = false;
  // key_valid[j] false masks key j for every query; empty means all valid.
  std::vector<bool> key_valid;
  // Position of query row 0 for the causal rule.
  int query_offset = 0;
};

struct AttnCache {
  Matrix xq, xkv, q, k, v, o;
  std::vector<Matrix> p;  // per head, rows x keys
};

// Multi-head attention of xq over xkv. k_pre/v_pre, when non-null, supply
// already projected keys and values (xkv is then ignored).
Matrix AttentionFwd(const Parameters& params, const AttnIdx& ix, const Matrix& xq,
                    const Matrix& xkv, const AttnMask& mask, AttnCache* cache,
                    const Matrix* k_pre = nullptr, const Matrix* v_pre = nullptr);

// Returns (d xq, d xkv).
std::pair<Matrix, Matrix> AttentionBwd(const Parameters& params, const AttnIdx& ix,
                                       const Matrix& dy, const AttnCache& cache,
                                       Gradients& grads);

struct FfCache {
  Matrix x, pre, act;
};

Matrix FeedForwardFwd(const Parameters& params, const FfIdx& ix, const Matrix& x, FfCache* cache);
Matrix FeedForwardBwd(const Parameters& params, const FfIdx& ix, const Matrix& dy,
                      const FfCache& cache, Gradients& grads);

// Row-wise log-softmax.
Matrix LogSoftmax(const Matrix& logits);

// Input positions that are not PAD.
std::vector<bool> KeyValid(std::span<const int> ids);

Matrix Embed(const Parameters& params, size_t embed, std::span<const int> ids);

// Encoder stack without caching or dropout; returns the final normalised memory.
Matrix EncodeMemory(const Parameters& params, const Layout& layout,
                    std::span<const int> input_ids);

void CheckIds(std::span<const int> ids, int vocab_size, const char* what);

}  // namespace rrlab::model

#endif  // RRLAB_SRC_MODEL_INTERNAL_HPP_
