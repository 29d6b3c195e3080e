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

#include <set>
#include <string>
#include <vector>

#include "corpus/internal.hpp"
#include "rrlab/error.hpp"
#include "rrlab/rng.hpp"

namespace rrlab::corpus {

using minilang::BinaryOp;
using minilang::Expr;
using minilang::Program;
using minilang::Stmt;
using minilang::Type;
using minilang::UnaryOp;

Expr WrapBinary(BinaryOp op, Expr lhs, Expr rhs) {
  const int prec = minilang::Precedence(op);
  // Comparisons do not chain, so an equal-precedence lhs needs parentheses too.
  const int lhs_floor = minilang::IsComparison(op) ? prec + 1 : prec;
  if (lhs.kind == Expr::Kind::kBinary && minilang::Precedence(lhs.binary_op) < lhs_floor) {
    lhs = Expr::Paren(std::move(lhs));
  }
  if (rhs.kind == Expr::Kind::kBinary && minilang::Precedence(rhs.binary_op) <= prec) {
    rhs = Expr::Paren(std::move(rhs));
  }
  return Expr::Binary(op, std::move(lhs), std::move(rhs));
}

Expr WrapUnary(UnaryOp op, Expr operand) {
  if (operand.kind == Expr::Kind::kBinary) operand = Expr::Paren(std::move(operand));
  return Expr::Unary(op, std::move(operand));
}

Expr IntConstant(int64_t v) {
  if (v < 0) return Expr::Unary(UnaryOp::kNeg, Expr::Int(-v));
  return Expr::Int(v);
}

namespace {

constexpr const char* kParamNames[] = {"a", "b", "c"};
constexpr const char* kIntNames[] = {"x", "y", "z", "w", "u", "v"};
constexpr const char* kBoolNames[] = {"f", "g"};
constexpr const char* kCounterNames[] = {"i", "j"};

class ProgramGenerator {
 public:
  ProgramGenerator(Rng& rng, const SizeConfig& size) : rng_(rng), size_(size) {}

  Program Generate() {
    Program p;
    scopes_.assign(1, {});
    used_.clear();
    in_loop_ = false;
    const int n_params = static_cast<int>(rng_.Uniform(size_.min_params, size_.max_params));
    for (int i = 0; i < n_params; ++i) {
      p.params.push_back(minilang::Param{kParamNames[i], Type::kInt, {}});
      Bind(kParamNames[i], Type::kInt, /*assignable=*/true);
    }
    const int n_stmts =
        static_cast<int>(rng_.Uniform(size_.min_statements, size_.max_statements));
    for (int i = 0; i < n_stmts; ++i) Statement(p.body, 0);
    p.body.push_back(Return(IntExpr(size_.max_expr_depth)));
    return p;
  }

 private:
  struct Var {
    std::string name;
    Type type;
    bool assignable;
  };

  void Bind(const std::string& name, Type type, bool assignable) {
    scopes_.back().push_back(Var{name, type, assignable});
    used_.insert(name);
  }

  std::vector<const Var*> Visible(Type type, bool assignable_only = false) const {
    std::vector<const Var*> out;
    for (const auto& scope : scopes_) {
      for (const Var& v : scope) {
        if (v.type == type && (!assignable_only || v.assignable)) out.push_back(&v);
      }
    }
    return out;
  }

  template <size_t N>
  const char* FreshName(const char* const (&pool)[N]) const {
    for (const char* name : pool) {
      if (!used_.count(name)) return name;
    }
    return nullptr;
  }

  static Stmt Return(Expr e) {
    Stmt s;
    s.kind = Stmt::Kind::kReturn;
    s.expr = std::move(e);
    return s;
  }

  static Stmt Let(std::string name, Type type, Expr e) {
    Stmt s;
    s.kind = Stmt::Kind::kLet;
    s.name = std::move(name);
    s.declared = type;
    s.expr = std::move(e);
    return s;
  }

  static Stmt Assign(std::string name, Expr e) {
    Stmt s;
    s.kind = Stmt::Kind::kAssign;
    s.name = std::move(name);
    s.expr = std::move(e);
    return s;
  }

  Expr Leaf() {
    const auto vars = Visible(Type::kInt);
    if (!vars.empty() && rng_.Bernoulli(0.7)) {
      return Expr::Ident(vars[rng_.Index(vars.size())]->name);
    }
    return Expr::Int(rng_.Uniform(0, size_.max_constant));
  }

  Expr IntExpr(int depth) {
    if (depth <= 0 || rng_.Bernoulli(0.35)) {
      if (rng_.Bernoulli(0.04)) return WrapUnary(UnaryOp::kNeg, Leaf());
      return Leaf();
    }
    const double r = rng_.Real();
    if (r < 0.14) {
      const BinaryOp op = r < 0.08 ? BinaryOp::kDiv : BinaryOp::kMod;
      return WrapBinary(op, IntExpr(depth - 1), Expr::Int(rng_.Uniform(2, size_.max_constant)));
    }
    const BinaryOp op = r < 0.5 ? BinaryOp::kAdd : (r < 0.75 ? BinaryOp::kSub : BinaryOp::kMul);
    return WrapBinary(op, IntExpr(depth - 1), IntExpr(depth - 1));
  }

  Expr Comparison() {
    static constexpr BinaryOp kCmp[] = {BinaryOp::kLt, BinaryOp::kLe, BinaryOp::kGt,
                                        BinaryOp::kGe, BinaryOp::kEq, BinaryOp::kNe};
    const BinaryOp op = kCmp[rng_.Index(6)];
    Expr lhs = IntExpr(1);
    Expr rhs = IntExpr(1);
    return WrapBinary(op, std::move(lhs), std::move(rhs));
  }

  Expr Condition() {
    const auto bools = Visible(Type::kBool);
    const double r = rng_.Real();
    if (!bools.empty() && r < 0.15) return Expr::Ident(bools[rng_.Index(bools.size())]->name);
    if (r < 0.27) {
      const BinaryOp op = rng_.Bernoulli(0.5) ? BinaryOp::kAnd : BinaryOp::kOr;
      return WrapBinary(op, Comparison(), Comparison());
    }
    if (r < 0.32) return WrapUnary(UnaryOp::kNot, Comparison());
    return Comparison();
  }

  std::vector<Stmt> Block(int depth, int max_stmts, bool may_return) {
    scopes_.emplace_back();
    std::vector<Stmt> body;
    const int n = static_cast<int>(rng_.Uniform(1, max_stmts));
    for (int i = 0; i < n; ++i) Statement(body, depth);
    if (may_return && rng_.Bernoulli(0.3)) body.push_back(Return(IntExpr(1)));
    scopes_.pop_back();
    return body;
  }

  void Statement(std::vector<Stmt>& out, int depth) {
    const double r = rng_.Real();
    const bool nest = depth < size_.max_depth;
    if (nest && r < 0.22) {
      Stmt s;
      s.kind = Stmt::Kind::kIf;
      s.expr = Condition();
      s.body = Block(depth + 1, 2, true);
      if (rng_.Bernoulli(0.4)) {
        s.has_else = true;
        s.else_body = Block(depth + 1, 2, true);
      }
      out.push_back(std::move(s));
      return;
    }
    if (nest && !in_loop_ && r < 0.32) {
      const char* counter = FreshName(kCounterNames);
      if (counter != nullptr) {
        Loop(out, depth, counter);
        return;
      }
    }
    const auto assignable = Visible(Type::kInt, true);
    if (r < 0.5 && !assignable.empty()) {
      const Var* target = assignable[rng_.Index(assignable.size())];
      out.push_back(Assign(target->name, IntExpr(size_.max_expr_depth)));
      return;
    }
    if (r < 0.58) {
      if (const char* name = FreshName(kBoolNames)) {
        out.push_back(Let(name, Type::kBool, Condition()));
        Bind(name, Type::kBool, false);
        return;
      }
    }
    if (const char* name = FreshName(kIntNames)) {
      out.push_back(Let(name, Type::kInt, IntExpr(size_.max_expr_depth)));
      Bind(name, Type::kInt, true);
      return;
    }
    if (!assignable.empty()) {
      const Var* target = assignable[rng_.Index(assignable.size())];
      out.push_back(Assign(target->name, IntExpr(size_.max_expr_depth)));
    }
  }

  void Loop(std::vector<Stmt>& out, int depth, const std::string& counter) {
    out.push_back(Let(counter, Type::kInt, Expr::Int(0)));
    Bind(counter, Type::kInt, false);
    Stmt loop;
    loop.kind = Stmt::Kind::kWhile;
    const auto params = Visible(Type::kInt);
    Expr bound = rng_.Bernoulli(0.5) || params.empty()
                     ? Expr::Int(rng_.Uniform(1, 5))
                     : Expr::Ident(params[rng_.Index(params.size())]->name);
    loop.expr = WrapBinary(BinaryOp::kLt, Expr::Ident(counter), std::move(bound));
    in_loop_ = true;
    loop.body = Block(depth + 1, 2, false);
    in_loop_ = false;
    loop.body.push_back(
        Assign(counter, WrapBinary(BinaryOp::kAdd, Expr::Ident(counter), Expr::Int(1))));
    out.push_back(std::move(loop));
  }

  Rng& rng_;
  SizeConfig size_;
  std::vector<std::vector<Var>> scopes_;
  std::set<std::string> used_;
  bool in_loop_ = false;
};

}  // namespace

ProgramSource::ProgramSource(uint64_t seed, const SizeConfig& size, const CorpusConfig& cfg)
    : rng_(seed), size_(size), cfg_(cfg) {}

ProgramSource::~ProgramSource() = default;

std::optional<Program> ProgramSource::TryOne() {
  ProgramGenerator gen(rng_, size_);
  Program p = gen.Generate();
  if (!minilang::Check(p).empty()) return std::nullopt;
  std::string text = minilang::Render(p);
  if (seen_.count(text)) return std::nullopt;
  // Needs at least one probe input on which it terminates normally.
  const auto probes = ProbeInputs(p.params.size(), cfg_, rng_.Next(), 64);
  bool returns = false;
  for (const auto& in : probes) {
    if (minilang::Interpret(p, in, cfg_.step_budget).returned()) {
      returns = true;
      break;
    }
  }
  if (!returns) return std::nullopt;
  seen_.insert(std::move(text));
  return p;
}

Program ProgramSource::Next() {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    if (auto p = TryOne()) return std::move(*p);
  }
  throw Error(ErrorCode::kGeneration, "program generation exhausted: 1000 consecutive rejections");
}

std::vector<Program> GeneratePrograms(uint64_t seed, size_t count, const SizeConfig& size,
                                      const CorpusConfig& cfg) {
  ProgramSource source(seed, size, cfg);
  std::vector<Program> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) out.push_back(source.Next());
  return out;
}

}  // namespace rrlab::corpus
