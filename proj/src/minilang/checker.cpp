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
#include <string>

#include "rrlab/minilang.hpp"

namespace rrlab::minilang {
namespace {

// kError suppresses cascaded diagnostics from an already-reported fault.
enum class ExprType { kInt, kBool, kError };

ExprType FromType(Type t) { return t == Type::kInt ? ExprType::kInt : ExprType::kBool; }

std::string_view TypeName(ExprType t) {
  switch (t) {
    case ExprType::kInt: return "int";
    case ExprType::kBool: return "bool";
    case ExprType::kError: return "<error>";
  }
  return "?";
}

class Checker {
 public:
  std::vector<Diagnostic> Run(const Program& program) {
    scopes_.emplace_back();
    for (const Param& p : program.params) {
      if (p.type != Type::kInt) {
        Report(DiagnosticCategory::kTypeMismatch, p.span,
               "parameter '" + p.name + "' must be int");
      }
      Declare(p.name, p.type, p.span);
    }
    if (program.return_type != Type::kInt) {
      Report(DiagnosticCategory::kTypeMismatch, program.span, "main must return int");
    }
    const bool returns = CheckBlock(program.body, /*new_scope=*/false);
    if (!returns) {
      const Span end{program.span.end > 0 ? program.span.end - 1 : 0, program.span.end,
                     program.span.line};
      Report(DiagnosticCategory::kMissingReturn, end, "missing return statement");
    }
    std::stable_sort(diagnostics_.begin(), diagnostics_.end(),
                     [](const Diagnostic& a, const Diagnostic& b) {
                       if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
                       return a.span.end < b.span.end;
                     });
    return std::move(diagnostics_);
  }

 private:
  struct Binding {
    std::string name;
    Type type;
  };

  void Report(DiagnosticCategory category, Span span, std::string message) {
    diagnostics_.push_back(Diagnostic{category, span, std::move(message)});
  }

  const Binding* Lookup(const std::string& name) const {
    for (auto scope = scopes_.rbegin(); scope != scopes_.rend(); ++scope) {
      for (const Binding& b : *scope) {
        if (b.name == name) return &b;
      }
    }
    return nullptr;
  }

  void Declare(const std::string& name, Type type, Span span) {
    if (Lookup(name) != nullptr) {
      Report(DiagnosticCategory::kDuplicateDefinition, span,
             "variable '" + name + "' is already defined");
      return;
    }
    scopes_.back().push_back(Binding{name, type});
  }

  // Returns true when every path through the block returns.
  bool CheckBlock(const std::vector<Stmt>& stmts, bool new_scope) {
    if (new_scope) scopes_.emplace_back();
    bool returns = false;
    for (const Stmt& s : stmts) {
      if (CheckStmt(s)) returns = true;
    }
    if (new_scope) scopes_.pop_back();
    return returns;
  }

  void Require(ExprType want, ExprType got, Span span, std::string_view what) {
    if (got == ExprType::kError || got == want) return;
    Report(DiagnosticCategory::kTypeMismatch, span,
           "incompatible types in " + std::string(what) + ": expected " +
               std::string(TypeName(want)) + ", found " + std::string(TypeName(got)));
  }

  bool CheckStmt(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::kLet: {
        const ExprType t = CheckExpr(s.expr);
        Require(FromType(s.declared), t, s.expr.span, "initializer");
        Declare(s.name, s.declared, s.span);
        return false;
      }
      case Stmt::Kind::kAssign: {
        const ExprType t = CheckExpr(s.expr);
        const Binding* b = Lookup(s.name);
        if (b == nullptr) {
          Report(DiagnosticCategory::kUndefinedIdentifier, s.span,
                 "cannot find symbol '" + s.name + "'");
        } else {
          Require(FromType(b->type), t, s.expr.span, "assignment");
        }
        return false;
      }
      case Stmt::Kind::kIf: {
        Require(ExprType::kBool, CheckExpr(s.expr), s.expr.span, "if condition");
        const bool then_returns = CheckBlock(s.body, true);
        const bool else_returns = s.has_else && CheckBlock(s.else_body, true);
        return then_returns && else_returns;
      }
      case Stmt::Kind::kWhile:
        Require(ExprType::kBool, CheckExpr(s.expr), s.expr.span, "while condition");
        CheckBlock(s.body, true);
        return false;
      case Stmt::Kind::kReturn:
        Require(ExprType::kInt, CheckExpr(s.expr), s.expr.span, "return");
        return true;
      case Stmt::Kind::kExprStmt:
        CheckExpr(s.expr);
        Report(DiagnosticCategory::kNotAStatement, s.span, "not a statement");
        return false;
    }
    return false;
  }

  ExprType CheckExpr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::kIntLit:
        return ExprType::kInt;
      case Expr::Kind::kBoolLit:
        return ExprType::kBool;
      case Expr::Kind::kIdent: {
        const Binding* b = Lookup(e.name);
        if (b == nullptr) {
          Report(DiagnosticCategory::kUndefinedIdentifier, e.span,
                 "cannot find symbol '" + e.name + "'");
          return ExprType::kError;
        }
        return FromType(b->type);
      }
      case Expr::Kind::kParen:
        return CheckExpr(e.children[0]);
      case Expr::Kind::kUnary: {
        const ExprType t = CheckExpr(e.children[0]);
        const ExprType want = e.unary_op == UnaryOp::kNeg ? ExprType::kInt : ExprType::kBool;
        Require(want, t, e.span, "unary operand");
        return want;
      }
      case Expr::Kind::kBinary: {
        const ExprType lhs = CheckExpr(e.children[0]);
        const ExprType rhs = CheckExpr(e.children[1]);
        const BinaryOp op = e.binary_op;
        if (IsArithmetic(op)) {
          Require(ExprType::kInt, lhs, e.children[0].span, "arithmetic operand");
          Require(ExprType::kInt, rhs, e.children[1].span, "arithmetic operand");
          return ExprType::kInt;
        }
        if (op == BinaryOp::kEq || op == BinaryOp::kNe) {
          if (lhs != ExprType::kError && rhs != ExprType::kError && lhs != rhs) {
            Report(DiagnosticCategory::kTypeMismatch, e.span,
                   "incomparable types: " + std::string(TypeName(lhs)) + " and " +
                       std::string(TypeName(rhs)));
          }
          return ExprType::kBool;
        }
        if (IsComparison(op)) {
          Require(ExprType::kInt, lhs, e.children[0].span, "comparison operand");
          Require(ExprType::kInt, rhs, e.children[1].span, "comparison operand");
          return ExprType::kBool;
        }
        Require(ExprType::kBool, lhs, e.children[0].span, "logical operand");
        Require(ExprType::kBool, rhs, e.children[1].span, "logical operand");
        return ExprType::kBool;
      }
    }
    return ExprType::kError;
  }

  std::vector<std::vector<Binding>> scopes_;
  std::vector<Diagnostic> diagnostics_;
};

}  // namespace

std::vector<Diagnostic> Check(const Program& program) { return Checker().Run(program); }

}  // namespace rrlab::minilang
