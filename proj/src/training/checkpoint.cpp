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

// Checkpoint layout (little-endian):
//   "RRLABCK\0"  u32 version
//   u64 n + n bytes   JSON header (config, counters, array shapes, hashes)
//   u64 n + n bytes   vocabulary text
//   doubles           parameter arrays in header order, then Adam m and v
//   u64               FNV-1a of every preceding byte

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rrlab/error.hpp"
#include "rrlab/training.hpp"

namespace rrlab::training {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoints assume little-endian");

constexpr char kMagic[8] = {'R', 'R', 'L', 'A', 'B', 'C', 'K', '\0'};

using nlohmann::ordered_json;

std::string Hex(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

uint64_t FromHex(const std::string& s) { return std::stoull(s, nullptr, 16); }

class Writer {
 public:
  template <typename T>
  void Pod(const T& v) {
    Bytes(&v, sizeof v);
  }
  void Bytes(const void* data, size_t n) { out_.append(static_cast<const char*>(data), n); }
  void Blob(const std::string& s) {
    Pod<uint64_t>(s.size());
    out_ += s;
  }
  void Array(const model::Matrix& m) {
    Bytes(m.data(), static_cast<size_t>(m.size()) * sizeof(double));
  }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  void Bytes(void* out, size_t n) {
    if (n > data_.size() - pos_) {
      throw Error(ErrorCode::kCorrupt, "checkpoint truncated at offset " + std::to_string(pos_) +
                                           " (needed " + std::to_string(n) + " bytes, " +
                                           std::to_string(data_.size() - pos_) + " left)");
    }
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }
  template <typename T>
  T Pod() {
    T v;
    Bytes(&v, sizeof v);
    return v;
  }
  std::string Blob() {
    const auto n = Pod<uint64_t>();
    if (n > data_.size() - pos_) {
      throw Error(ErrorCode::kCorrupt, "checkpoint truncated at offset " + std::to_string(pos_));
    }
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void Array(model::Matrix& m) { Bytes(m.data(), static_cast<size_t>(m.size()) * sizeof(double)); }
  size_t pos() const { return pos_; }
  const std::string& data() const { return data_; }

 private:
  std::string data_;
  size_t pos_ = 0;
};

ordered_json ModelJson(const model::ModelConfig& c) {
  return {{"d_model", c.d_model},       {"n_heads", c.n_heads},
          {"n_layers_enc", c.n_layers_enc}, {"n_layers_dec", c.n_layers_dec},
          {"d_ff", c.d_ff},             {"max_input", c.max_input},
          {"max_target", c.max_target}, {"vocab_size", c.vocab_size},
          {"dropout_rate", c.dropout_rate}, {"seed", c.seed}};
}

model::ModelConfig ModelFromJson(const ordered_json& j) {
  model::ModelConfig c;
  c.d_model = j.at("d_model");
  c.n_heads = j.at("n_heads");
  c.n_layers_enc = j.at("n_layers_enc");
  c.n_layers_dec = j.at("n_layers_dec");
  c.d_ff = j.at("d_ff");
  c.max_input = j.at("max_input");
  c.max_target = j.at("max_target");
  c.vocab_size = j.at("vocab_size");
  c.dropout_rate = j.at("dropout_rate");
  c.seed = j.at("seed");
  return c;
}

ordered_json HistoryJson(const std::vector<EpochRecord>& history) {
  ordered_json out = ordered_json::array();
  for (const auto& r : history) {
    out.push_back({{"phase", r.phase},
                   {"epoch", r.epoch},
                   {"mean_loss", r.mean_loss},
                   {"mean_reward", r.mean_reward},
                   {"stages", r.stages},
                   {"semantic_updates", r.semantic_updates},
                   {"syntactic_updates", r.syntactic_updates},
                   {"skipped", r.skipped}});
  }
  return out;
}

std::vector<EpochRecord> HistoryFromJson(const ordered_json& j) {
  std::vector<EpochRecord> out;
  for (const auto& e : j) {
    EpochRecord r;
    r.phase = e.at("phase");
    r.epoch = e.at("epoch");
    r.mean_loss = e.at("mean_loss");
    r.mean_reward = e.at("mean_reward");
    r.stages = e.at("stages").get<StageHistogram>();
    r.semantic_updates = e.at("semantic_updates");
    r.syntactic_updates = e.at("syntactic_updates");
    r.skipped = e.at("skipped");
    out.push_back(r);
  }
  return out;
}

}  // namespace

void SaveCheckpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  const auto& p = ck.state.params;
  const auto& opt = ck.state.optimizer;
  const bool moments = !opt.m.empty();
  ordered_json header;
  header["format"] = "rrlab-checkpoint";
  header["model"] = ModelJson(p.config);
  header["step"] = ck.state.step;
  header["skipped_steps"] = ck.state.skipped_steps;
  header["optimizer"] = {{"mode", opt.mode == model::OptimizerMode::kAdam ? "adam" : "sgd"},
                         {"lr", opt.lr},
                         {"beta1", opt.beta1},
                         {"beta2", opt.beta2},
                         {"epsilon", opt.epsilon},
                         {"step", opt.step},
                         {"moments", moments}};
  header["vocab_hash"] = Hex(ck.vocab.Hash());
  header["corpus_hash"] = Hex(ck.corpus_hash);
  header["config"] = ck.config_snapshot;
  header["history"] = HistoryJson(ck.state.history);
  ordered_json arrays = ordered_json::array();
  for (size_t i = 0; i < p.arrays.size(); ++i) {
    arrays.push_back({{"name", p.names[i]}, {"rows", p.arrays[i].rows()}, {"cols", p.arrays[i].cols()}});
  }
  header["arrays"] = arrays;

  Writer w;
  w.Bytes(kMagic, sizeof kMagic);
  w.Pod<uint32_t>(kCheckpointVersion);
  w.Blob(header.dump());
  w.Blob(ck.vocab.Serialize());
  for (const auto& a : p.arrays) w.Array(a);
  if (moments) {
    for (const auto& a : opt.m) w.Array(a);
    for (const auto& a : opt.v) w.Array(a);
  }
  w.Pod<uint64_t>(Fnv1a64(w.str()));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  f.write(w.str().data(), static_cast<std::streamsize>(w.str().size()));
  if (!f) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path, const tokenizer::Vocab* expected_vocab) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  Reader r(buf.str());

  char magic[8];
  r.Bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw Error(ErrorCode::kCorrupt, path.string() + ": not a checkpoint (bad magic at offset 0)");
  }
  const auto version = r.Pod<uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionMismatch, path.string() + ": checkpoint version " +
                                                 std::to_string(version) + ", expected " +
                                                 std::to_string(kCheckpointVersion));
  }
  const size_t header_at = r.pos();
  ordered_json header;
  try {
    header = ordered_json::parse(r.Blob());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorrupt, path.string() + ": bad header at offset " +
                                         std::to_string(header_at) + ": " + e.what());
  }
  const size_t vocab_at = r.pos();
  const std::string vocab_text = r.Blob();

  Checkpoint ck;
  try {
    ck.vocab = tokenizer::Vocab::Parse(vocab_text, path.string());
    auto& st = ck.state;
    st.params.config = ModelFromJson(header.at("model"));
    st.step = header.at("step");
    st.skipped_steps = header.at("skipped_steps");
    const auto& o = header.at("optimizer");
    st.optimizer.mode = o.at("mode") == "adam" ? model::OptimizerMode::kAdam : model::OptimizerMode::kSgd;
    st.optimizer.lr = o.at("lr");
    st.optimizer.beta1 = o.at("beta1");
    st.optimizer.beta2 = o.at("beta2");
    st.optimizer.epsilon = o.at("epsilon");
    st.optimizer.step = o.at("step");
    const bool moments = o.at("moments");
    ck.corpus_hash = FromHex(header.at("corpus_hash"));
    ck.config_snapshot = header.at("config");
    st.history = HistoryFromJson(header.at("history"));
    if (FromHex(header.at("vocab_hash")) != ck.vocab.Hash()) {
      throw Error(ErrorCode::kCorrupt, path.string() + ": embedded vocabulary at offset " +
                                           std::to_string(vocab_at) + " does not match its hash");
    }
    for (const auto& a : header.at("arrays")) {
      st.params.names.push_back(a.at("name"));
      st.params.arrays.emplace_back(a.at("rows").get<Eigen::Index>(), a.at("cols").get<Eigen::Index>());
    }
    const auto reference = model::Init(st.params.config);
    if (reference.names != st.params.names) {
      throw Error(ErrorCode::kCorrupt, path.string() + ": array list does not match the model config");
    }
    for (size_t i = 0; i < reference.arrays.size(); ++i) {
      if (reference.arrays[i].rows() != st.params.arrays[i].rows() ||
          reference.arrays[i].cols() != st.params.arrays[i].cols()) {
        throw Error(ErrorCode::kCorrupt, path.string() + ": shape of " + reference.names[i] +
                                             " does not match the model config");
      }
    }
    for (auto& a : st.params.arrays) r.Array(a);
    if (moments) {
      for (auto* dst : {&st.optimizer.m, &st.optimizer.v}) {
        for (const auto& a : st.params.arrays) {
          dst->emplace_back(a.rows(), a.cols());
          r.Array(dst->back());
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorrupt, path.string() + ": bad header at offset " +
                                         std::to_string(header_at) + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchema) throw Error(ErrorCode::kCorrupt, e.what());
    throw;
  }
  const size_t sum_at = r.pos();
  const auto stored = r.Pod<uint64_t>();
  if (stored != Fnv1a64(std::string_view(r.data()).substr(0, sum_at))) {
    throw Error(ErrorCode::kCorrupt, path.string() + ": checksum mismatch at offset " +
                                         std::to_string(sum_at));
  }
  if (r.pos() != r.data().size()) {
    throw Error(ErrorCode::kCorrupt, path.string() + ": trailing bytes at offset " +
                                         std::to_string(r.pos()));
  }
  if (expected_vocab != nullptr && expected_vocab->Hash() != ck.vocab.Hash()) {
    throw Error(ErrorCode::kVersionMismatch,
                path.string() + ": checkpoint vocabulary hash " + Hex(ck.vocab.Hash()) +
                    " differs from the supplied vocabulary " + Hex(expected_vocab->Hash()));
  }
  ck.state.params.Touch();
  return ck;
}

}  // namespace rrlab::training
