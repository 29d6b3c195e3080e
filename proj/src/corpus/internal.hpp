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

#ifndef RRLAB_SRC_CORPUS_INTERNAL_HPP_
#define RRLAB_SRC_CORPUS_INTERNAL_HPP_

#include <optional>
#include <set>
#include <string>

#include "rrlab/corpus.hpp"
#include "rrlab/rng.hpp"

namespace rrlab::corpus {

// AST builders that insert the parentheses needed for Render/Parse to
// round-trip.
minilang::Expr WrapBinary(minilang::BinaryOp op, minilang::Expr lhs, minilang::Expr rhs);
minilang::Expr WrapUnary(minilang::UnaryOp op, minilang::Expr operand);
minilang::Expr IntConstant(int64_t v);

// Stream of distinct, well-formed, terminating programs.
class ProgramSource {
 public:
  ProgramSource(uint64_t seed, const SizeConfig& size, const CorpusConfig& cfg);
  ~ProgramSource();

  minilang::Program Next();

 private:
  std::optional<minilang::Program> TryOne();

  Rng rng_;
  SizeConfig size_;
  CorpusConfig cfg_;
  std::set<std::string> seen_;
};

}  // namespace rrlab::corpus

#endif  // RRLAB_SRC_CORPUS_INTERNAL_HPP_
