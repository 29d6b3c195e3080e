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

#include "model/internal.hpp"
#include "rrlab/error.hpp"
#include "rrlab/tokenizer.hpp"

namespace rrlab::model {
namespace {

// Decoder run one position at a time with cached self-attention keys and
// values; cross-attention keys and values are projected once.
class IncrementalDecoder {
 public:
  struct State {
    std::vector<Matrix> k, v;  // per layer, one row per consumed token
    int length = 0;
  };

  IncrementalDecoder(const Parameters& params, std::span<const int> input_ids)
      : params_(params), layout_(BuildLayout(params.config)) {
    const ModelConfig& cfg = params.config;
    if (input_ids.empty() || static_cast<int>(input_ids.size()) > cfg.max_input) {
      throw Error(ErrorCode::kShapeMismatch, "input length " + std::to_string(input_ids.size()) +
                                                 " outside [1, " + std::to_string(cfg.max_input) +
                                                 "]");
    }
    CheckIds(input_ids, cfg.vocab_size, "input");
    const Matrix mem = EncodeMemory(params, layout_, input_ids);
    cross_mask_.key_valid = KeyValid(input_ids);
    const auto& a = params.arrays;
    for (const auto& l : layout_.dec) {
      cross_k_.push_back(LinearFwd(mem, a[l.cross.wk], a[l.cross.bk]));
      cross_v_.push_back(LinearFwd(mem, a[l.cross.wv], a[l.cross.bv]));
    }
  }

  State Start() const {
    State s;
    const auto d = params_.config.d_model;
    s.k.assign(layout_.dec.size(), Matrix(0, d));
    s.v.assign(layout_.dec.size(), Matrix(0, d));
    return s;
  }

  // Consumes `token` and returns log-probabilities for the next position.
  Eigen::RowVectorXd Step(State& s, int token) const {
    const auto& a = params_.arrays;
    Matrix y = a[layout_.embed].row(token);
    AddPositions(y, s.length);
    const AttnMask self_mask;  // every cached key precedes the query
    for (size_t i = 0; i < layout_.dec.size(); ++i) {
      const auto& l = layout_.dec[i];
      const Matrix h1 = LayerNormFwd(y, a[l.ln1.g], a[l.ln1.b], nullptr);
      Append(s.k[i], LinearFwd(h1, a[l.self.wk], a[l.self.bk]));
      Append(s.v[i], LinearFwd(h1, a[l.self.wv], a[l.self.bv]));
      y += AttentionFwd(params_, l.self, h1, h1, self_mask, nullptr, &s.k[i], &s.v[i]);
      const Matrix h2 = LayerNormFwd(y, a[l.ln2.g], a[l.ln2.b], nullptr);
      y += AttentionFwd(params_, l.cross, h2, h2, cross_mask_, nullptr, &cross_k_[i],
                        &cross_v_[i]);
      const Matrix h3 = LayerNormFwd(y, a[l.ln3.g], a[l.ln3.b], nullptr);
      y += FeedForwardFwd(params_, l.ff, h3, nullptr);
    }
    ++s.length;
    const Matrix out = LayerNormFwd(y, a[layout_.dec_ln.g], a[layout_.dec_ln.b], nullptr);
    return LogSoftmax(LinearFwd(out, a[layout_.out_w], a[layout_.out_b])).row(0);
  }

 private:
  static void Append(Matrix& m, const Matrix& row) {
    m.conservativeResize(m.rows() + 1, Eigen::NoChange);
    m.row(m.rows() - 1) = row.row(0);
  }

  const Parameters& params_;
  Layout layout_;
  AttnMask cross_mask_;
  std::vector<Matrix> cross_k_, cross_v_;
};

struct Live {
  std::vector<int> ids;
  double score;
  IncrementalDecoder::State state;
  Eigen::RowVectorXd next;
};

struct Candidate {
  double score;
  size_t parent;
  int token;
};

// Higher score first; equal scores by lexicographic sequence order.
bool Better(const Hypothesis& x, const Hypothesis& y) {
  if (x.log_score != y.log_score) return x.log_score > y.log_score;
  return x.ids < y.ids;
}

}  // namespace

std::vector<int> GreedyDecode(const Parameters& params, std::span<const int> input_ids,
                              int max_target) {
  IncrementalDecoder decoder(params, input_ids);
  auto state = decoder.Start();
  std::vector<int> out;
  int token = tokenizer::kBos;
  for (int t = 0; t < max_target; ++t) {
    const Eigen::RowVectorXd lp = decoder.Step(state, token);
    int best = 0;
    for (Eigen::Index v = 1; v < lp.size(); ++v) {
      if (lp(v) > lp(best)) best = static_cast<int>(v);
    }
    out.push_back(best);
    if (best == tokenizer::kEos) break;
    token = best;
  }
  return out;
}

DecodeResult BeamDecode(const Parameters& params, std::span<const int> input_ids,
                        int beam_size, int max_target) {
  if (beam_size < 1) throw Error(ErrorCode::kInvalidArgument, "beam_size must be >= 1");
  if (max_target < 1) throw Error(ErrorCode::kInvalidArgument, "max_target must be >= 1");
  IncrementalDecoder decoder(params, input_ids);
  std::vector<Live> live;
  {
    Live root{{}, 0.0, decoder.Start(), {}};
    root.next = decoder.Step(root.state, tokenizer::kBos);
    live.push_back(std::move(root));
  }
  const auto beam = static_cast<size_t>(beam_size);
  std::vector<Hypothesis> finished;
  for (int t = 0; t < max_target && !live.empty(); ++t) {
    std::vector<Candidate> cands;
    for (size_t i = 0; i < live.size(); ++i) {
      for (Eigen::Index v = 0; v < live[i].next.size(); ++v) {
        cands.push_back({live[i].score + live[i].next(v), i, static_cast<int>(v)});
      }
    }
    // Live sequences share a length, so lexicographic order compares the
    // parent prefix and then the token id.
    auto better = [&](const Candidate& x, const Candidate& y) {
      if (x.score != y.score) return x.score > y.score;
      if (x.parent != y.parent) return live[x.parent].ids < live[y.parent].ids;
      return x.token < y.token;
    };
    const size_t keep = std::min(beam, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep),
                      cands.end(), better);
    std::vector<Live> next;
    for (size_t r = 0; r < keep; ++r) {
      const Candidate& cand = cands[r];
      std::vector<int> ids = live[cand.parent].ids;
      ids.push_back(cand.token);
      if (cand.token == tokenizer::kEos || static_cast<int>(ids.size()) == max_target) {
        finished.push_back({std::move(ids), cand.score});
        continue;
      }
      Live child{std::move(ids), cand.score, live[cand.parent].state, {}};
      child.next = decoder.Step(child.state, cand.token);
      next.push_back(std::move(child));
    }
    live = std::move(next);
    // Scores only fall as sequences grow, so stop once no live hypothesis can
    // enter the finished top beam.
    if (finished.size() >= beam && !live.empty()) {
      std::sort(finished.begin(), finished.end(), Better);
      finished.resize(beam);
      double best_live = live.front().score;
      for (const auto& l : live) best_live = std::max(best_live, l.score);
      if (best_live < finished.back().log_score) break;
    }
  }
  std::sort(finished.begin(), finished.end(), Better);
  if (finished.size() > beam) finished.resize(beam);
  return DecodeResult{std::move(finished)};
}

}  // namespace rrlab::model
