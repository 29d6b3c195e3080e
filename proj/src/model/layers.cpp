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

#include <cmath>
#include <limits>

#include "model/internal.hpp"
#include "rrlab/error.hpp"

namespace rrlab::model {
namespace {

constexpr double kLnEpsilon = 1e-5;
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

LnIdx AddLn(std::vector<ArraySpec>& specs, const std::string& prefix, int d) {
  LnIdx ix{specs.size(), specs.size() + 1};
  specs.push_back({prefix + ".g", 1, d, ArraySpec::Init::kOne});
  specs.push_back({prefix + ".b", 1, d, ArraySpec::Init::kZero});
  return ix;
}

size_t AddLinear(std::vector<ArraySpec>& specs, const std::string& prefix, const char* w,
                 const char* b, int in, int out) {
  const size_t at = specs.size();
  specs.push_back({prefix + "." + w, in, out, ArraySpec::Init::kXavier});
  specs.push_back({prefix + "." + b, 1, out, ArraySpec::Init::kZero});
  return at;
}

AttnIdx AddAttn(std::vector<ArraySpec>& specs, const std::string& prefix, int d) {
  AttnIdx ix{};
  ix.wq = AddLinear(specs, prefix, "wq", "bq", d, d);
  ix.bq = ix.wq + 1;
  ix.wk = AddLinear(specs, prefix, "wk", "bk", d, d);
  ix.bk = ix.wk + 1;
  ix.wv = AddLinear(specs, prefix, "wv", "bv", d, d);
  ix.bv = ix.wv + 1;
  ix.wo = AddLinear(specs, prefix, "wo", "bo", d, d);
  ix.bo = ix.wo + 1;
  return ix;
}

FfIdx AddFf(std::vector<ArraySpec>& specs, const std::string& prefix, int d, int dff) {
  FfIdx ix{};
  ix.w1 = AddLinear(specs, prefix, "w1", "b1", d, dff);
  ix.b1 = ix.w1 + 1;
  ix.w2 = AddLinear(specs, prefix, "w2", "b2", dff, d);
  ix.b2 = ix.w2 + 1;
  return ix;
}

}  // namespace

Layout BuildLayout(const ModelConfig& c, std::vector<ArraySpec>* out_specs) {
  std::vector<ArraySpec> specs;
  Layout layout;
  const int d = c.d_model;
  layout.embed = specs.size();
  specs.push_back({"embed", c.vocab_size, d, ArraySpec::Init::kEmbedding});
  for (int l = 0; l < c.n_layers_enc; ++l) {
    const std::string p = "enc." + std::to_string(l);
    EncLayerIdx e{};
    e.ln1 = AddLn(specs, p + ".ln1", d);
    e.attn = AddAttn(specs, p + ".attn", d);
    e.ln2 = AddLn(specs, p + ".ln2", d);
    e.ff = AddFf(specs, p + ".ff", d, c.d_ff);
    layout.enc.push_back(e);
  }
  layout.enc_ln = AddLn(specs, "enc.ln", d);
  for (int l = 0; l < c.n_layers_dec; ++l) {
    const std::string p = "dec." + std::to_string(l);
    DecLayerIdx e{};
    e.ln1 = AddLn(specs, p + ".ln1", d);
    e.self = AddAttn(specs, p + ".self", d);
    e.ln2 = AddLn(specs, p + ".ln2", d);
    e.cross = AddAttn(specs, p + ".cross", d);
    e.ln3 = AddLn(specs, p + ".ln3", d);
    e.ff = AddFf(specs, p + ".ff", d, c.d_ff);
    layout.dec.push_back(e);
  }
  layout.dec_ln = AddLn(specs, "dec.ln", d);
  layout.out_w = AddLinear(specs, "out", "w", "b", d, c.vocab_size);
  layout.out_b = layout.out_w + 1;
  if (out_specs != nullptr) *out_specs = std::move(specs);
  return layout;
}

void AddPositions(Matrix& x, int first_position) {
  const Eigen::Index d = x.cols();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double pos = static_cast<double>(first_position + r);
    for (Eigen::Index i = 0; i < d; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(d));
      x(r, i) += std::sin(pos * freq);
      if (i + 1 < d) x(r, i + 1) += std::cos(pos * freq);
    }
  }
}

Matrix LayerNormFwd(const Matrix& x, const Matrix& g, const Matrix& b, LnCache* cache) {
  const Eigen::Index n = x.rows();
  const double d = static_cast<double>(x.cols());
  Matrix xhat(n, x.cols());
  Eigen::VectorXd inv_std(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mean = x.row(r).sum() / d;
    const auto centered = x.row(r).array() - mean;
    const double var = centered.square().sum() / d;
    inv_std(r) = 1.0 / std::sqrt(var + kLnEpsilon);
    xhat.row(r) = centered * inv_std(r);
  }
  Matrix y = (xhat.array().rowwise() * g.row(0).array()).rowwise() + b.row(0).array();
  if (cache != nullptr) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Matrix LayerNormBwd(const Matrix& dy, const Matrix& g, const LnCache& cache, Matrix& dg,
                    Matrix& db) {
  dg += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  db += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * g.row(0).array();
  const double d = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_dxhat = dxhat.row(r).sum() / d;
    const double mean_dot = dxhat.row(r).dot(cache.xhat.row(r)) / d;
    dx.row(r) = (dxhat.row(r).array() - mean_dxhat - cache.xhat.row(r).array() * mean_dot) *
                cache.inv_std(r);
  }
  return dx;
}

Matrix Gelu(const Matrix& x) {
  return x.unaryExpr([](double v) {
    return 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  });
}

Matrix GeluBwd(const Matrix& dy, const Matrix& x) {
  const Matrix deriv = x.unaryExpr([](double v) {
    const double t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
    return 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
  });
  return dy.cwiseProduct(deriv);
}

Matrix AttentionFwd(const Parameters& params, const AttnIdx& ix, const Matrix& xq,
                    const Matrix& xkv, const AttnMask& mask, AttnCache* cache,
                    const Matrix* k_pre, const Matrix* v_pre) {
  const auto& a = params.arrays;
  const int heads = params.config.n_heads;
  const Eigen::Index dh = params.config.d_model / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Matrix q = LinearFwd(xq, a[ix.wq], a[ix.bq]);
  Matrix k_own, v_own;
  if (k_pre == nullptr) {
    k_own = LinearFwd(xkv, a[ix.wk], a[ix.bk]);
    v_own = LinearFwd(xkv, a[ix.wv], a[ix.bv]);
  }
  const Matrix& k = k_pre != nullptr ? *k_pre : k_own;
  const Matrix& v = v_pre != nullptr ? *v_pre : v_own;

  const Eigen::Index nq = q.rows();
  const Eigen::Index nk = k.rows();
  Matrix o(nq, q.cols());
  std::vector<Matrix> probs;
  for (int h = 0; h < heads; ++h) {
    Matrix s = q.middleCols(h * dh, dh) * k.middleCols(h * dh, dh).transpose() * scale;
    for (Eigen::Index i = 0; i < nq; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < nk; ++j) {
        const bool allowed = (mask.key_valid.empty() || mask.key_valid[j]) &&
                             (!mask.causal || j <= i + mask.query_offset);
        if (!allowed) {
          s(i, j) = -std::numeric_limits<double>::infinity();
        } else if (s(i, j) > best) {
          best = s(i, j);
        }
      }
      if (best == -std::numeric_limits<double>::infinity()) {
        s.row(i).setZero();
        continue;
      }
      double total = 0.0;
      for (Eigen::Index j = 0; j < nk; ++j) {
        const double e = std::isinf(s(i, j)) ? 0.0 : std::exp(s(i, j) - best);
        s(i, j) = e;
        total += e;
      }
      s.row(i) /= total;
    }
    o.middleCols(h * dh, dh).noalias() = s * v.middleCols(h * dh, dh);
    if (cache != nullptr) probs.push_back(std::move(s));
  }
  Matrix y = LinearFwd(o, a[ix.wo], a[ix.bo]);
  if (cache != nullptr) {
    cache->xq = xq;
    cache->xkv = xkv;
    cache->q = std::move(q);
    cache->k = k;
    cache->v = v;
    cache->o = std::move(o);
    cache->p = std::move(probs);
  }
  return y;
}

std::pair<Matrix, Matrix> AttentionBwd(const Parameters& params, const AttnIdx& ix,
                                       const Matrix& dy, const AttnCache& c, Gradients& grads) {
  const auto& a = params.arrays;
  auto& g = grads.arrays;
  const int heads = params.config.n_heads;
  const Eigen::Index dh = params.config.d_model / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  const Matrix d_o = LinearBwd(dy, c.o, a[ix.wo], g[ix.wo], g[ix.bo]);
  Matrix dq = Matrix::Zero(c.q.rows(), c.q.cols());
  Matrix dk = Matrix::Zero(c.k.rows(), c.k.cols());
  Matrix dv = Matrix::Zero(c.v.rows(), c.v.cols());
  for (int h = 0; h < heads; ++h) {
    const Matrix& p = c.p[h];
    const auto d_oh = d_o.middleCols(h * dh, dh);
    const Matrix dp = d_oh * c.v.middleCols(h * dh, dh).transpose();
    dv.middleCols(h * dh, dh).noalias() += p.transpose() * d_oh;
    const Eigen::VectorXd row_dot = (dp.array() * p.array()).rowwise().sum();
    const Matrix ds = (p.array() * (dp.array().colwise() - row_dot.array())).matrix() * scale;
    dq.middleCols(h * dh, dh).noalias() += ds * c.k.middleCols(h * dh, dh);
    dk.middleCols(h * dh, dh).noalias() += ds.transpose() * c.q.middleCols(h * dh, dh);
  }
  Matrix dxq = LinearBwd(dq, c.xq, a[ix.wq], g[ix.wq], g[ix.bq]);
  Matrix dxkv = LinearBwd(dk, c.xkv, a[ix.wk], g[ix.wk], g[ix.bk]);
  dxkv += LinearBwd(dv, c.xkv, a[ix.wv], g[ix.wv], g[ix.bv]);
  return {std::move(dxq), std::move(dxkv)};
}

Matrix FeedForwardFwd(const Parameters& params, const FfIdx& ix, const Matrix& x, FfCache* cache) {
  const auto& a = params.arrays;
  Matrix pre = LinearFwd(x, a[ix.w1], a[ix.b1]);
  Matrix act = Gelu(pre);
  Matrix y = LinearFwd(act, a[ix.w2], a[ix.b2]);
  if (cache != nullptr) {
    cache->x = x;
    cache->pre = std::move(pre);
    cache->act = std::move(act);
  }
  return y;
}

Matrix FeedForwardBwd(const Parameters& params, const FfIdx& ix, const Matrix& dy,
                      const FfCache& c, Gradients& grads) {
  const auto& a = params.arrays;
  auto& g = grads.arrays;
  const Matrix dact = LinearBwd(dy, c.act, a[ix.w2], g[ix.w2], g[ix.b2]);
  const Matrix dpre = GeluBwd(dact, c.pre);
  return LinearBwd(dpre, c.x, a[ix.w1], g[ix.w1], g[ix.b1]);
}

Matrix LogSoftmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    const double lse = m + std::log((logits.row(r).array() - m).exp().sum());
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

std::vector<bool> KeyValid(std::span<const int> ids) {
  std::vector<bool> valid(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) valid[i] = ids[i] != 0;
  return valid;
}

Matrix Embed(const Parameters& params, size_t embed, std::span<const int> ids) {
  const Matrix& e = params.arrays[embed];
  Matrix x(static_cast<Eigen::Index>(ids.size()), e.cols());
  for (size_t i = 0; i < ids.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = e.row(ids[i]);
  return x;
}

void CheckIds(std::span<const int> ids, int vocab_size, const char* what) {
  for (int id : ids) {
    if (id < 0 || id >= vocab_size) {
      throw Error(ErrorCode::kShapeMismatch, std::string(what) + " id " + std::to_string(id) +
                                                 " outside vocabulary of " +
                                                 std::to_string(vocab_size));
    }
  }
}

}  // namespace rrlab::model
