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

#include <atomic>
#include <cmath>

#include "model/internal.hpp"
#include "rrlab/error.hpp"
#include "rrlab/tokenizer.hpp"

namespace rrlab::model {
namespace {

std::atomic<uint64_t> g_generation{1};

uint64_t NextGeneration() { return g_generation.fetch_add(1, std::memory_order_relaxed); }

struct EncLayerCache {
  LnCache ln1;
  AttnCache attn;
  Matrix drop1;
  LnCache ln2;
  FfCache ff;
  Matrix drop2;
};

struct DecLayerCache {
  LnCache ln1;
  AttnCache self;
  Matrix drop1;
  LnCache ln2;
  AttnCache cross;
  Matrix drop2;
  LnCache ln3;
  FfCache ff;
  Matrix drop3;
};

// Inverted dropout; an empty mask means identity.
class Dropout {
 public:
  Dropout(double rate, Rng* rng) : rate_(rate), rng_(rng) {}

  void Apply(Matrix& x, Matrix* mask_out) {
    if (rng_ == nullptr || rate_ <= 0.0) return;
    Matrix mask(x.rows(), x.cols());
    const double keep = 1.0 / (1.0 - rate_);
    for (Eigen::Index i = 0; i < mask.size(); ++i) {
      mask.data()[i] = rng_->Bernoulli(rate_) ? 0.0 : keep;
    }
    x.array() *= mask.array();
    if (mask_out != nullptr) *mask_out = std::move(mask);
  }

 private:
  double rate_;
  Rng* rng_;
};

void ApplyMask(Matrix& dx, const Matrix& mask) {
  if (mask.size() != 0) dx.array() *= mask.array();
}

void ScatterRows(Matrix& table, std::span<const int> ids, const Matrix& rows) {
  for (size_t i = 0; i < ids.size(); ++i) {
    table.row(ids[i]) += rows.row(static_cast<Eigen::Index>(i));
  }
}

}  // namespace

struct ActivationCache::Data {
  uint64_t generation = 0;
  ModelConfig config;
  std::vector<int> input, dec_in, target;
  Matrix enc_drop, dec_drop;
  std::vector<EncLayerCache> enc;
  LnCache enc_ln;
  std::vector<DecLayerCache> dec;
  LnCache dec_ln;
  Matrix dec_out;
  Matrix log_probs;
  int counted = 0;
};

struct CacheAccess {
  static std::unique_ptr<ActivationCache::Data>& Get(ActivationCache& c) { return c.data_; }
  static const ActivationCache::Data* Get(const ActivationCache& c) { return c.data_.get(); }
};

ActivationCache::ActivationCache() = default;
ActivationCache::~ActivationCache() = default;
ActivationCache::ActivationCache(ActivationCache&&) noexcept = default;
ActivationCache& ActivationCache::operator=(ActivationCache&&) noexcept = default;
bool ActivationCache::filled() const { return data_ != nullptr; }

void ModelConfig::Validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfig, what); };
  if (d_model <= 0) fail("d_model must be positive");
  if (n_heads <= 0) fail("n_heads must be positive");
  if (d_model % n_heads != 0) {
    fail("d_model (" + std::to_string(d_model) + ") must be divisible by n_heads (" +
         std::to_string(n_heads) + ")");
  }
  if (n_layers_enc <= 0) fail("n_layers_enc must be positive");
  if (n_layers_dec <= 0) fail("n_layers_dec must be positive");
  if (d_ff <= 0) fail("d_ff must be positive");
  if (max_input <= 0) fail("max_input must be positive");
  if (max_target <= 0) fail("max_target must be positive");
  if (vocab_size <= tokenizer::kNumSpecials) fail("vocab_size must exceed the special ids");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must be in [0, 1)");
}

size_t ParameterCount(const ModelConfig& c) {
  const size_t d = c.d_model, f = c.d_ff, v = c.vocab_size;
  const size_t enc_layer = (4 * d * d + 4 * d) + (2 * d * f + f + d) + 4 * d;
  const size_t dec_layer = (8 * d * d + 8 * d) + (2 * d * f + f + d) + 6 * d;
  return v * d + c.n_layers_enc * enc_layer + c.n_layers_dec * dec_layer + 4 * d + d * v + v;
}

size_t Parameters::Count() const {
  size_t n = 0;
  for (const auto& a : arrays) n += static_cast<size_t>(a.size());
  return n;
}

size_t Parameters::Index(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw Error(ErrorCode::kInvalidArgument, "no parameter named '" + name + "'");
}

bool Parameters::AllFinite() const {
  for (const auto& a : arrays) {
    if (!a.allFinite()) return false;
  }
  return true;
}

Parameters Parameters::ZerosLike() const {
  Parameters z;
  z.config = config;
  z.names = names;
  z.arrays.reserve(arrays.size());
  for (const auto& a : arrays) z.arrays.push_back(Matrix::Zero(a.rows(), a.cols()));
  z.generation = NextGeneration();
  return z;
}

void Parameters::Touch() { generation = NextGeneration(); }

Parameters Init(const ModelConfig& config) {
  config.Validate();
  std::vector<ArraySpec> specs;
  BuildLayout(config, &specs);
  Rng rng(DeriveSeed(config.seed, 0x494e4954));
  Parameters p;
  p.config = config;
  for (const auto& s : specs) {
    Matrix m(s.rows, s.cols);
    double limit = 0.0;
    switch (s.init) {
      case ArraySpec::Init::kZero: m.setZero(); break;
      case ArraySpec::Init::kOne: m.setOnes(); break;
      case ArraySpec::Init::kEmbedding: limit = std::sqrt(3.0); break;
      case ArraySpec::Init::kXavier: limit = std::sqrt(6.0 / (s.rows + s.cols)); break;
    }
    if (limit > 0.0) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = limit * (2.0 * rng.Real() - 1.0);
    }
    p.names.push_back(s.name);
    p.arrays.push_back(std::move(m));
  }
  p.generation = NextGeneration();
  return p;
}

namespace {

Matrix RunEncoder(const Parameters& params, const Layout& layout, std::span<const int> input,
                  Dropout& dropout, ActivationCache::Data* c) {
  const auto& a = params.arrays;
  Matrix x = Embed(params, layout.embed, input);
  AddPositions(x, 0);
  dropout.Apply(x, c ? &c->enc_drop : nullptr);
  AttnMask mask;
  mask.key_valid = KeyValid(input);
  if (c) c->enc.resize(layout.enc.size());
  for (size_t i = 0; i < layout.enc.size(); ++i) {
    const auto& l = layout.enc[i];
    EncLayerCache* lc = c ? &c->enc[i] : nullptr;
    const Matrix h = LayerNormFwd(x, a[l.ln1.g], a[l.ln1.b], lc ? &lc->ln1 : nullptr);
    Matrix att = AttentionFwd(params, l.attn, h, h, mask, lc ? &lc->attn : nullptr);
    dropout.Apply(att, lc ? &lc->drop1 : nullptr);
    x += att;
    const Matrix h2 = LayerNormFwd(x, a[l.ln2.g], a[l.ln2.b], lc ? &lc->ln2 : nullptr);
    Matrix ff = FeedForwardFwd(params, l.ff, h2, lc ? &lc->ff : nullptr);
    dropout.Apply(ff, lc ? &lc->drop2 : nullptr);
    x += ff;
  }
  return LayerNormFwd(x, a[layout.enc_ln.g], a[layout.enc_ln.b], c ? &c->enc_ln : nullptr);
}

}  // namespace

Matrix EncodeMemory(const Parameters& params, const Layout& layout,
                    std::span<const int> input_ids) {
  Dropout none(0.0, nullptr);
  return RunEncoder(params, layout, input_ids, none, nullptr);
}

ForwardResult ForwardTeacherForced(const Parameters& params, std::span<const int> input_ids,
                                   std::span<const int> target_ids, ActivationCache* cache,
                                   const ForwardOptions& options) {
  const ModelConfig& cfg = params.config;
  if (input_ids.empty() || static_cast<int>(input_ids.size()) > cfg.max_input) {
    throw Error(ErrorCode::kShapeMismatch, "input length " + std::to_string(input_ids.size()) +
                                               " outside [1, " + std::to_string(cfg.max_input) + "]");
  }
  if (target_ids.empty() || static_cast<int>(target_ids.size()) > cfg.max_target) {
    throw Error(ErrorCode::kShapeMismatch, "target length " + std::to_string(target_ids.size()) +
                                               " outside [1, " + std::to_string(cfg.max_target) +
                                               "]");
  }
  CheckIds(input_ids, cfg.vocab_size, "input");
  CheckIds(target_ids, cfg.vocab_size, "target");

  const Layout layout = BuildLayout(cfg);
  const auto& a = params.arrays;
  std::unique_ptr<ActivationCache::Data> data;
  if (cache != nullptr) data = std::make_unique<ActivationCache::Data>();
  ActivationCache::Data* c = data.get();
  Dropout dropout(options.train ? cfg.dropout_rate : 0.0, options.train ? options.rng : nullptr);

  const Matrix mem = RunEncoder(params, layout, input_ids, dropout, c);

  std::vector<int> dec_in;
  dec_in.reserve(target_ids.size());
  dec_in.push_back(tokenizer::kBos);
  dec_in.insert(dec_in.end(), target_ids.begin(), target_ids.end() - 1);

  Matrix y = Embed(params, layout.embed, dec_in);
  AddPositions(y, 0);
  dropout.Apply(y, c ? &c->dec_drop : nullptr);
  AttnMask self_mask;
  self_mask.causal = true;
  AttnMask cross_mask;
  cross_mask.key_valid = KeyValid(input_ids);
  if (c) c->dec.resize(layout.dec.size());
  for (size_t i = 0; i < layout.dec.size(); ++i) {
    const auto& l = layout.dec[i];
    DecLayerCache* lc = c ? &c->dec[i] : nullptr;
    const Matrix h1 = LayerNormFwd(y, a[l.ln1.g], a[l.ln1.b], lc ? &lc->ln1 : nullptr);
    Matrix s = AttentionFwd(params, l.self, h1, h1, self_mask, lc ? &lc->self : nullptr);
    dropout.Apply(s, lc ? &lc->drop1 : nullptr);
    y += s;
    const Matrix h2 = LayerNormFwd(y, a[l.ln2.g], a[l.ln2.b], lc ? &lc->ln2 : nullptr);
    Matrix x = AttentionFwd(params, l.cross, h2, mem, cross_mask, lc ? &lc->cross : nullptr);
    dropout.Apply(x, lc ? &lc->drop2 : nullptr);
    y += x;
    const Matrix h3 = LayerNormFwd(y, a[l.ln3.g], a[l.ln3.b], lc ? &lc->ln3 : nullptr);
    Matrix ff = FeedForwardFwd(params, l.ff, h3, lc ? &lc->ff : nullptr);
    dropout.Apply(ff, lc ? &lc->drop3 : nullptr);
    y += ff;
  }
  Matrix out = LayerNormFwd(y, a[layout.dec_ln.g], a[layout.dec_ln.b], c ? &c->dec_ln : nullptr);
  ForwardResult result;
  result.log_probs = LogSoftmax(LinearFwd(out, a[layout.out_w], a[layout.out_b]));
  double total = 0.0;
  for (size_t t = 0; t < target_ids.size(); ++t) {
    if (target_ids[t] == tokenizer::kPad) continue;
    total -= result.log_probs(static_cast<Eigen::Index>(t), target_ids[t]);
    ++result.counted;
  }
  result.loss = result.counted > 0 ? total / result.counted : 0.0;

  if (c != nullptr) {
    c->generation = params.generation;
    c->config = cfg;
    c->input.assign(input_ids.begin(), input_ids.end());
    c->dec_in = std::move(dec_in);
    c->target.assign(target_ids.begin(), target_ids.end());
    c->dec_out = std::move(out);
    c->log_probs = result.log_probs;
    c->counted = result.counted;
    CacheAccess::Get(*cache) = std::move(data);
  }
  return result;
}

Gradients Backward(const Parameters& params, const ActivationCache& cache, double loss_scale) {
  const ActivationCache::Data* c = CacheAccess::Get(cache);
  if (c == nullptr) {
    throw Error(ErrorCode::kStaleCache, "backward called without a cached forward pass");
  }
  if (c->generation != params.generation || !(c->config == params.config)) {
    throw Error(ErrorCode::kStaleCache, "activation cache was recorded for different parameters");
  }
  const Layout layout = BuildLayout(params.config);
  const auto& a = params.arrays;
  Gradients grads = params.ZerosLike();
  auto& g = grads.arrays;
  if (c->counted == 0) return grads;

  Matrix dlogits = c->log_probs.array().exp();
  const double row_scale = loss_scale / c->counted;
  for (size_t t = 0; t < c->target.size(); ++t) {
    const auto r = static_cast<Eigen::Index>(t);
    if (c->target[t] == tokenizer::kPad) {
      dlogits.row(r).setZero();
      continue;
    }
    dlogits(r, c->target[t]) -= 1.0;
    dlogits.row(r) *= row_scale;
  }

  const Matrix dout = LinearBwd(dlogits, c->dec_out, a[layout.out_w], g[layout.out_w],
                                g[layout.out_b]);
  Matrix dy = LayerNormBwd(dout, a[layout.dec_ln.g], c->dec_ln, g[layout.dec_ln.g],
                           g[layout.dec_ln.b]);
  Matrix dmem = Matrix::Zero(static_cast<Eigen::Index>(c->input.size()), params.config.d_model);
  for (size_t i = layout.dec.size(); i-- > 0;) {
    const auto& l = layout.dec[i];
    const auto& lc = c->dec[i];
    Matrix d = dy;
    ApplyMask(d, lc.drop3);
    dy += LayerNormBwd(FeedForwardBwd(params, l.ff, d, lc.ff, grads), a[l.ln3.g], lc.ln3,
                       g[l.ln3.g], g[l.ln3.b]);
    d = dy;
    ApplyMask(d, lc.drop2);
    auto [dq, dkv] = AttentionBwd(params, l.cross, d, lc.cross, grads);
    dmem += dkv;
    dy += LayerNormBwd(dq, a[l.ln2.g], lc.ln2, g[l.ln2.g], g[l.ln2.b]);
    d = dy;
    ApplyMask(d, lc.drop1);
    auto [sq, skv] = AttentionBwd(params, l.self, d, lc.self, grads);
    sq += skv;
    dy += LayerNormBwd(sq, a[l.ln1.g], lc.ln1, g[l.ln1.g], g[l.ln1.b]);
  }
  ApplyMask(dy, c->dec_drop);
  ScatterRows(g[layout.embed], c->dec_in, dy);

  Matrix dx = LayerNormBwd(dmem, a[layout.enc_ln.g], c->enc_ln, g[layout.enc_ln.g],
                           g[layout.enc_ln.b]);
  for (size_t i = layout.enc.size(); i-- > 0;) {
    const auto& l = layout.enc[i];
    const auto& lc = c->enc[i];
    Matrix d = dx;
    ApplyMask(d, lc.drop2);
    dx += LayerNormBwd(FeedForwardBwd(params, l.ff, d, lc.ff, grads), a[l.ln2.g], lc.ln2,
                       g[l.ln2.g], g[l.ln2.b]);
    d = dx;
    ApplyMask(d, lc.drop1);
    auto [dq, dkv] = AttentionBwd(params, l.attn, d, lc.attn, grads);
    dq += dkv;
    dx += LayerNormBwd(dq, a[l.ln1.g], lc.ln1, g[l.ln1.g], g[l.ln1.b]);
  }
  ApplyMask(dx, c->enc_drop);
  ScatterRows(g[layout.embed], c->input, dx);
  return grads;
}

void AddInto(Gradients& into, const Gradients& from) {
  if (into.arrays.size() != from.arrays.size()) {
    throw Error(ErrorCode::kShapeMismatch, "gradient layouts differ");
  }
  for (size_t i = 0; i < into.arrays.size(); ++i) into.arrays[i] += from.arrays[i];
}

void Scale(Gradients& grads, double factor) {
  for (auto& a : grads.arrays) a *= factor;
}

double SequenceLogProb(const Parameters& params, std::span<const int> input_ids,
                       std::span<const int> target_ids) {
  const ForwardResult r = ForwardTeacherForced(params, input_ids, target_ids);
  double total = 0.0;
  for (size_t t = 0; t < target_ids.size(); ++t) {
    total += r.log_probs(static_cast<Eigen::Index>(t), target_ids[t]);
  }
  return total;
}

}  // namespace rrlab::model
