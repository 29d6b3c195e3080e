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

#include <limits>
#include <string>
#include <utility>

#include "rrlab/error.hpp"
#include "rrlab/minilang.hpp"

namespace rrlab::minilang {
namespace {

struct BudgetExhausted {};
struct RuntimeFault {
  RuntimeErrorKind kind;
};

int64_t WrapAdd(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) + static_cast<uint64_t>(b));
}
int64_t WrapSub(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) - static_cast<uint64_t>(b));
}
int64_t WrapMul(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) * static_cast<uint64_t>(b));
}

class Interpreter {
 public:
  explicit Interpreter(int64_t budget) : budget_(budget) {}

  ExecOutcome Run(const Program& program, std::span<const int64_t> inputs) {
    for (size_t i = 0; i < program.params.size(); ++i) {
      env_.emplace_back(&program.params[i].name, inputs[i]);
    }
    ExecOutcome out;
    try {
      // Check() guarantees every path returns.
      if (!ExecBlock(program.body)) {
        throw Error(ErrorCode::kInternal, "interpreter fell off the end of main");
      }
      out.kind = ExecOutcome::Kind::kReturned;
      out.value = returned_;
    } catch (const RuntimeFault& f) {
      out.kind = ExecOutcome::Kind::kRuntimeError;
      out.runtime_error = f.kind;
    } catch (const BudgetExhausted&) {
      out.kind = ExecOutcome::Kind::kBudgetExhausted;
    }
    out.steps_used = steps_;
    return out;
  }

 private:
  void Tick() {
    if (steps_ >= budget_) throw BudgetExhausted{};
    ++steps_;
  }

  int64_t& Slot(const std::string& name) {
    for (auto it = env_.rbegin(); it != env_.rend(); ++it) {
      if (*it->first == name) return it->second;
    }
    throw Error(ErrorCode::kInternal, "unbound identifier '" + name + "' at runtime");
  }

  // Each Exec* returns true once a `return` has executed.
  bool ExecBlock(const std::vector<Stmt>& stmts) {
    const size_t mark = env_.size();
    for (const Stmt& s : stmts) {
      if (ExecStmt(s)) return true;
    }
    env_.resize(mark);
    return false;
  }

  bool ExecStmt(const Stmt& s) {
    Tick();
    switch (s.kind) {
      case Stmt::Kind::kLet:
        env_.emplace_back(&s.name, Eval(s.expr));
        return false;
      case Stmt::Kind::kAssign: {
        const int64_t v = Eval(s.expr);
        Slot(s.name) = v;
        return false;
      }
      case Stmt::Kind::kIf:
        if (Eval(s.expr) != 0) return ExecBlock(s.body);
        if (s.has_else) return ExecBlock(s.else_body);
        return false;
      case Stmt::Kind::kWhile:
        while (Eval(s.expr) != 0) {
          if (ExecBlock(s.body)) return true;
        }
        return false;
      case Stmt::Kind::kReturn:
        returned_ = Eval(s.expr);
        return true;
      case Stmt::Kind::kExprStmt:
        Eval(s.expr);
        return false;
    }
    return false;
  }

  int64_t Eval(const Expr& e) {
    Tick();
    switch (e.kind) {
      case Expr::Kind::kIntLit: return e.int_value;
      case Expr::Kind::kBoolLit: return e.bool_value ? 1 : 0;
      case Expr::Kind::kIdent: return Slot(e.name);
      case Expr::Kind::kParen: return Eval(e.children[0]);
      case Expr::Kind::kUnary: {
        const int64_t v = Eval(e.children[0]);
        return e.unary_op == UnaryOp::kNeg ? WrapSub(0, v) : (v == 0 ? 1 : 0);
      }
      case Expr::Kind::kBinary: break;
    }
    const BinaryOp op = e.binary_op;
    const int64_t lhs = Eval(e.children[0]);
    // and/or short-circuit
    if (op == BinaryOp::kAnd && lhs == 0) return 0;
    if (op == BinaryOp::kOr && lhs != 0) return 1;
    const int64_t rhs = Eval(e.children[1]);
    switch (op) {
      case BinaryOp::kAdd: return WrapAdd(lhs, rhs);
      case BinaryOp::kSub: return WrapSub(lhs, rhs);
      case BinaryOp::kMul: return WrapMul(lhs, rhs);
      case BinaryOp::kDiv:
        if (rhs == 0) throw RuntimeFault{RuntimeErrorKind::kDivByZero};
        if (lhs == std::numeric_limits<int64_t>::min() && rhs == -1) return lhs;
        return lhs / rhs;
      case BinaryOp::kMod:
        if (rhs == 0) throw RuntimeFault{RuntimeErrorKind::kModByZero};
        if (rhs == -1) return 0;
        return lhs % rhs;
      case BinaryOp::kLt: return lhs < rhs;
      case BinaryOp::kLe: return lhs <= rhs;
      case BinaryOp::kGt: return lhs > rhs;
      case BinaryOp::kGe: return lhs >= rhs;
      case BinaryOp::kEq: return lhs == rhs;
      case BinaryOp::kNe: return lhs != rhs;
      case BinaryOp::kAnd:
      case BinaryOp::kOr: return rhs != 0 ? 1 : 0;
    }
    return 0;
  }

  int64_t budget_;
  int64_t steps_ = 0;
  int64_t returned_ = 0;
  std::vector<std::pair<const std::string*, int64_t>> env_;
};

}  // namespace

ExecOutcome Interpret(const Program& program, std::span<const int64_t> inputs,
                      int64_t step_budget) {
  if (step_budget <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "step budget must be positive");
  }
  if (inputs.size() != program.params.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "expected " + std::to_string(program.params.size()) + " inputs, got " +
                    std::to_string(inputs.size()));
  }
  return Interpreter(step_budget).Run(program, inputs);
}

}  // namespace rrlab::minilang
