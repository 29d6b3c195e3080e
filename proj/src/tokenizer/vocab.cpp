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
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "rrlab/error.hpp"
#include "rrlab/minilang.hpp"
#include "rrlab/rng.hpp"
#include "rrlab/tokenizer.hpp"

namespace rrlab::tokenizer {
namespace {

constexpr const char* kSpecialNames[kNumSpecials] = {"<pad>", "<bos>", "<eos>", "<sep>", "<unk>"};

bool IsWordChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool IsOperatorChar(char c) {
  return std::string_view("<>=!+-*/%").find(c) != std::string_view::npos;
}

std::string Escape(const std::string& piece) {
  std::string out;
  for (char c : piece) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case ' ': out += "\\s"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Unescape(std::string_view line, size_t line_no) {
  std::string out;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] != '\\') {
      out += line[i];
      continue;
    }
    if (++i >= line.size()) {
      throw Error(ErrorCode::kSchema, "vocab line " + std::to_string(line_no) + ": dangling escape");
    }
    switch (line[i]) {
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 's': out += ' '; break;
      default:
        throw Error(ErrorCode::kSchema, "vocab line " + std::to_string(line_no) + ": bad escape");
    }
  }
  return out;
}

}  // namespace

std::string CanonicalText(std::string_view text) { return minilang::CanonicalizeFragment(text); }

std::vector<std::string_view> Chunks(std::string_view s) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < s.size()) {
    const size_t start = i;
    if (s[i] == ' ' && i + 1 < s.size() && s[i + 1] != ' ' && s[i + 1] != '\n') ++i;
    if (IsWordChar(s[i])) {
      while (i < s.size() && IsWordChar(s[i])) ++i;
    } else if (IsOperatorChar(s[i])) {
      while (i < s.size() && IsOperatorChar(s[i])) ++i;
    } else {
      ++i;
    }
    out.push_back(s.substr(start, i - start));
  }
  return out;
}

Vocab Vocab::FromPieces(std::vector<std::string> pieces) {
  Vocab v;
  for (const char* name : kSpecialNames) v.pieces_.emplace_back(name);
  for (auto& p : pieces) {
    if (p.empty()) throw Error(ErrorCode::kSchema, "empty vocabulary piece");
    if (!v.index_.emplace(p, static_cast<int>(v.pieces_.size())).second) {
      throw Error(ErrorCode::kSchema, "duplicate vocabulary piece '" + Escape(p) + "'");
    }
    v.pieces_.push_back(std::move(p));
  }
  return v;
}

Vocab Vocab::Train(std::span<const std::string> texts, size_t target_size) {
  std::map<std::string, int64_t> chunk_counts;
  std::set<char> alphabet;
  for (const auto& text : texts) {
    const std::string canon = CanonicalText(text);
    for (char c : canon) alphabet.insert(c);
    for (std::string_view chunk : Chunks(canon)) ++chunk_counts[std::string(chunk)];
  }
  if (alphabet.size() + kNumSpecials > target_size) {
    throw Error(ErrorCode::kInvalidArgument,
                "vocabulary size " + std::to_string(target_size) + " too small for alphabet of " +
                    std::to_string(alphabet.size()) + " characters");
  }

  std::vector<std::string> pieces;
  for (char c : alphabet) pieces.emplace_back(1, c);
  Vocab vocab = FromPieces(pieces);

  struct Word {
    std::vector<int> symbols;
    int64_t count;
  };
  std::vector<Word> words;
  for (const auto& [chunk, count] : chunk_counts) {
    Word w{{}, count};
    for (char c : chunk) w.symbols.push_back(*vocab.Find(std::string(1, c)));
    words.push_back(std::move(w));
  }

  while (vocab.size() < target_size) {
    std::map<std::pair<int, int>, int64_t> pair_counts;
    for (const Word& w : words) {
      for (size_t i = 0; i + 1 < w.symbols.size(); ++i) {
        pair_counts[{w.symbols[i], w.symbols[i + 1]}] += w.count;
      }
    }
    // Most frequent pair; ties go to the lexicographically smallest pieces.
    const std::pair<int, int>* best = nullptr;
    int64_t best_count = 0;
    for (const auto& [pair, count] : pair_counts) {
      if (best != nullptr) {
        if (count < best_count) continue;
        if (count == best_count) {
          const auto& a = vocab.pieces_;
          const auto lhs = std::tie(a[pair.first], a[pair.second]);
          const auto rhs = std::tie(a[best->first], a[best->second]);
          if (!(lhs < rhs)) continue;
        }
      }
      best = &pair;
      best_count = count;
    }
    if (best == nullptr || best_count < 2) break;
    const std::pair<int, int> merge = *best;
    const std::string merged = vocab.pieces_[merge.first] + vocab.pieces_[merge.second];
    int merged_id;
    if (auto existing = vocab.Find(merged)) {
      merged_id = *existing;
    } else {
      merged_id = static_cast<int>(vocab.pieces_.size());
      vocab.pieces_.push_back(merged);
      vocab.index_.emplace(merged, merged_id);
    }
    for (Word& w : words) {
      std::vector<int> next;
      next.reserve(w.symbols.size());
      for (size_t i = 0; i < w.symbols.size(); ++i) {
        if (i + 1 < w.symbols.size() && w.symbols[i] == merge.first &&
            w.symbols[i + 1] == merge.second) {
          next.push_back(merged_id);
          ++i;
        } else {
          next.push_back(w.symbols[i]);
        }
      }
      w.symbols = std::move(next);
    }
  }
  return vocab;
}

std::optional<int> Vocab::Find(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> Vocab::EncodeChunk(std::string_view chunk) const {
  struct Symbol {
    std::string text;
    int id;
  };
  std::vector<Symbol> symbols;
  symbols.reserve(chunk.size());
  for (char c : chunk) {
    std::string s(1, c);
    auto id = Find(s);
    symbols.push_back(Symbol{std::move(s), id ? *id : kUnk});
  }
  // Merge the adjacent pair whose concatenation has the lowest id (earliest
  // learned) until no concatenation is a known piece.
  while (symbols.size() > 1) {
    int best_id = -1;
    size_t best_at = 0;
    for (size_t i = 0; i + 1 < symbols.size(); ++i) {
      if (symbols[i].id == kUnk || symbols[i + 1].id == kUnk) continue;
      auto id = Find(symbols[i].text + symbols[i + 1].text);
      if (id && (best_id < 0 || *id < best_id)) {
        best_id = *id;
        best_at = i;
      }
    }
    if (best_id < 0) break;
    symbols[best_at].text += symbols[best_at + 1].text;
    symbols[best_at].id = best_id;
    symbols.erase(symbols.begin() + static_cast<std::ptrdiff_t>(best_at) + 1);
  }
  std::vector<int> ids;
  ids.reserve(symbols.size());
  for (const auto& s : symbols) ids.push_back(s.id);
  return ids;
}

std::vector<int> Vocab::Encode(std::string_view text) const {
  const std::string canon = CanonicalText(text);
  std::vector<int> ids;
  for (std::string_view chunk : Chunks(canon)) {
    const auto part = EncodeChunk(chunk);
    ids.insert(ids.end(), part.begin(), part.end());
  }
  return ids;
}

std::string Vocab::Decode(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (id < 0 || static_cast<size_t>(id) >= pieces_.size()) {
      throw Error(ErrorCode::kUnknownId, "token id " + std::to_string(id) + " outside vocabulary of " +
                                             std::to_string(pieces_.size()));
    }
    if (id < kNumSpecials) continue;
    out += pieces_[static_cast<size_t>(id)];
  }
  return CanonicalText(out);
}

uint64_t Vocab::Hash() const {
  uint64_t h = Fnv1a64("rrlab-vocab-v1");
  for (const auto& p : pieces_) {
    h = Fnv1a64(p, h);
    h = Fnv1a64(std::string_view("\0", 1), h);
  }
  return h;
}

std::string Vocab::Serialize() const {
  std::string out;
  for (const auto& p : pieces_) {
    out += Escape(p);
    out += '\n';
  }
  return out;
}

Vocab Vocab::Parse(std::string_view text, std::string_view origin) {
  std::vector<std::string> pieces;
  size_t line_no = 0;
  const std::string where(origin);
  while (!text.empty()) {
    const size_t nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    if (line_no <= kNumSpecials) {
      if (line != kSpecialNames[line_no - 1]) {
        throw Error(ErrorCode::kSchema, where + ":" + std::to_string(line_no) +
                                            ": expected special '" + kSpecialNames[line_no - 1] + "'");
      }
      continue;
    }
    pieces.push_back(Unescape(line, line_no));
  }
  if (line_no < kNumSpecials) throw Error(ErrorCode::kSchema, where + ": missing specials header");
  return FromPieces(std::move(pieces));
}

void Vocab::Save(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  f << Serialize();
  if (!f) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

Vocab Vocab::Load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return Parse(buf.str(), path.string());
}

EncodedExample EncodeExample(const corpus::BugSample& sample, const Vocab& vocab,
                             size_t max_input, size_t max_target) {
  if (max_input < 3 || max_target < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_input must be >= 3 and max_target >= 1");
  }
  EncodedExample ex;
  const std::vector<int> buggy = vocab.Encode(sample.buggy_text);
  if (buggy.size() > max_input - 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "buggy hunk of " + sample.id + " needs " + std::to_string(buggy.size()) +
                    " tokens; max_input is " + std::to_string(max_input));
  }
  const std::string context = CanonicalText(sample.context_text);
  std::vector<int> ctx = vocab.Encode(context);
  const size_t room = max_input - buggy.size() - 1;
  if (ctx.size() > room) {
    // Keep a window centred on the hole marker.
    const size_t hole = context.find(minilang::kHoleMarker);
    const size_t hole_at =
        hole == std::string::npos ? 0 : vocab.Encode(context.substr(0, hole)).size();
    const size_t start = std::min(hole_at > room / 2 ? hole_at - room / 2 : 0, ctx.size() - room);
    ctx = std::vector<int>(ctx.begin() + static_cast<std::ptrdiff_t>(start),
                           ctx.begin() + static_cast<std::ptrdiff_t>(start + room));
  }
  ex.input_ids = buggy;
  ex.input_ids.push_back(kSep);
  ex.input_ids.insert(ex.input_ids.end(), ctx.begin(), ctx.end());

  ex.target_ids = vocab.Encode(sample.fix_text);
  if (ex.target_ids.size() > max_target - 1) ex.target_ids.resize(max_target - 1);
  ex.target_ids.push_back(kEos);
  return ex;
}

std::vector<std::string> VocabTexts(std::span<const corpus::BugSample> samples) {
  std::vector<std::string> texts;
  texts.reserve(samples.size() * 3);
  for (const auto& s : samples) {
    texts.push_back(s.buggy_text);
    texts.push_back(s.fix_text);
    texts.push_back(s.context_text);
  }
  return texts;
}

}  // namespace rrlab::tokenizer
