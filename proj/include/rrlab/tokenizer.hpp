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

// Byte-pair-style subword vocabulary over canonical MiniLang text and the
// (buggy, context) -> fix example encoding.

#ifndef RRLAB_TOKENIZER_HPP_
#define RRLAB_TOKENIZER_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rrlab/corpus.hpp"

namespace rrlab::tokenizer {

inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kSep = 3;
inline constexpr int kUnk = 4;
inline constexpr int kNumSpecials = 5;

inline constexpr size_t kDefaultVocabSize = 512;

class Vocab {
 public:
  Vocab() = default;

  // Learns merges from the canonical forms of `texts` until `target_size`
  // pieces exist or no pair occurs twice. Throws Error(kInvalidArgument) if
  // the character alphabet alone does not fit.
  static Vocab Train(std::span<const std::string> texts, size_t target_size);

  // Text file: 5 specials lines, then one escaped piece per line (line = id).
  static Vocab Load(const std::filesystem::path& path);
  void Save(const std::filesystem::path& path) const;
  // The same format in memory; `origin` prefixes error messages.
  std::string Serialize() const;
  static Vocab Parse(std::string_view text, std::string_view origin = "vocab");

  // Builds a vocabulary from an explicit piece list (ids from kNumSpecials).
  static Vocab FromPieces(std::vector<std::string> pieces);

  size_t size() const { return pieces_.size(); }
  const std::string& piece(int id) const { return pieces_.at(static_cast<size_t>(id)); }
  std::optional<int> Find(std::string_view piece) const;
  const std::vector<std::string>& pieces() const { return pieces_; }

  // Canonicalizes `text` and splits it into piece ids (no specials except UNK).
  std::vector<int> Encode(std::string_view text) const;

  // Drops specials and concatenates pieces. Throws Error(kUnknownId).
  std::string Decode(std::span<const int> ids) const;

  uint64_t Hash() const;

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.pieces_ == b.pieces_; }

 private:
  std::vector<int> EncodeChunk(std::string_view chunk) const;

  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> index_;
};

// The text the vocabulary is trained on and the encoder sees for a hunk.
std::string CanonicalText(std::string_view text);

// Pre-tokenization: an optional single leading space followed by a run of
// identifier characters, a run of operator characters, or one other character.
std::vector<std::string_view> Chunks(std::string_view canonical);

struct EncodedExample {
  std::vector<int> input_ids;   // enc(buggy) SEP enc(context)
  std::vector<int> target_ids;  // enc(fix) EOS
};

// Throws Error(kInvalidArgument) when enc(buggy) exceeds max_input - 2.
EncodedExample EncodeExample(const corpus::BugSample& sample, const Vocab& vocab,
                             size_t max_input, size_t max_target);

// Training texts for a vocabulary: buggy, fix and context of every sample.
std::vector<std::string> VocabTexts(std::span<const corpus::BugSample> samples);

}  // namespace rrlab::tokenizer

#endif  // RRLAB_TOKENIZER_HPP_
