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

#include "rrlab/minilang.hpp"

namespace rrlab::minilang {

std::string_view OpLexeme(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd: return "+";
    case BinaryOp::kSub: return "-";
    case BinaryOp::kMul: return "*";
    case BinaryOp::kDiv: return "/";
    case BinaryOp::kMod: return "%";
    case BinaryOp::kLt: return "<";
    case BinaryOp::kLe: return "<=";
    case BinaryOp::kGt: return ">";
    case BinaryOp::kGe: return ">=";
    case BinaryOp::kEq: return "==";
    case BinaryOp::kNe: return "!=";
    case BinaryOp::kAnd: return "and";
    case BinaryOp::kOr: return "or";
  }
  return "?";
}

std::string_view OpLexeme(UnaryOp op) {
  return op == UnaryOp::kNeg ? "-" : "not";
}

int Precedence(BinaryOp op) {
  switch (op) {
    case BinaryOp::kOr: return 1;
    case BinaryOp::kAnd: return 2;
    case BinaryOp::kLt:
    case BinaryOp::kLe:
    case BinaryOp::kGt:
    case BinaryOp::kGe:
    case BinaryOp::kEq:
    case BinaryOp::kNe: return 3;
    case BinaryOp::kAdd:
    case BinaryOp::kSub: return 4;
    case BinaryOp::kMul:
    case BinaryOp::kDiv:
    case BinaryOp::kMod: return 5;
  }
  return 0;
}

bool IsArithmetic(BinaryOp op) { return Precedence(op) >= 4; }
bool IsComparison(BinaryOp op) { return Precedence(op) == 3; }

Expr Expr::Int(int64_t v) {
  Expr e;
  e.kind = Kind::kIntLit;
  e.int_value = v;
  return e;
}

Expr Expr::Bool(bool v) {
  Expr e;
  e.kind = Kind::kBoolLit;
  e.bool_value = v;
  return e;
}

Expr Expr::Ident(std::string name) {
  Expr e;
  e.kind = Kind::kIdent;
  e.name = std::move(name);
  return e;
}

Expr Expr::Unary(UnaryOp op, Expr operand) {
  Expr e;
  e.kind = Kind::kUnary;
  e.unary_op = op;
  e.children.push_back(std::move(operand));
  return e;
}

Expr Expr::Binary(BinaryOp op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = Kind::kBinary;
  e.binary_op = op;
  e.children.push_back(std::move(lhs));
  e.children.push_back(std::move(rhs));
  return e;
}

Expr Expr::Paren(Expr inner) {
  Expr e;
  e.kind = Kind::kParen;
  e.children.push_back(std::move(inner));
  return e;
}

bool StructurallyEqual(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
  switch (a.kind) {
    case Expr::Kind::kIntLit:
      if (a.int_value != b.int_value) return false;
      break;
    case Expr::Kind::kBoolLit:
      if (a.bool_value != b.bool_value) return false;
      break;
    case Expr::Kind::kIdent:
      if (a.name != b.name) return false;
      break;
    case Expr::Kind::kUnary:
      if (a.unary_op != b.unary_op) return false;
      break;
    case Expr::Kind::kBinary:
      if (a.binary_op != b.binary_op) return false;
      break;
    case Expr::Kind::kParen:
      break;
  }
  for (size_t i = 0; i < a.children.size(); ++i) {
    if (!StructurallyEqual(a.children[i], b.children[i])) return false;
  }
  return true;
}

namespace {

bool BlocksEqual(const std::vector<Stmt>& a, const std::vector<Stmt>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!StructurallyEqual(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace

bool StructurallyEqual(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Stmt::Kind::kLet:
      if (a.declared != b.declared) return false;
      [[fallthrough]];
    case Stmt::Kind::kAssign:
      if (a.name != b.name) return false;
      break;
    case Stmt::Kind::kIf:
      if (a.has_else != b.has_else || !BlocksEqual(a.else_body, b.else_body)) {
        return false;
      }
      [[fallthrough]];
    case Stmt::Kind::kWhile:
      if (!BlocksEqual(a.body, b.body)) return false;
      break;
    case Stmt::Kind::kReturn:
    case Stmt::Kind::kExprStmt:
      break;
  }
  return StructurallyEqual(a.expr, b.expr);
}

bool StructurallyEqual(const Program& a, const Program& b) {
  if (a.name != b.name || a.return_type != b.return_type ||
      a.params.size() != b.params.size()) {
    return false;
  }
  for (size_t i = 0; i < a.params.size(); ++i) {
    if (a.params[i].name != b.params[i].name ||
        a.params[i].type != b.params[i].type) {
      return false;
    }
  }
  return BlocksEqual(a.body, b.body);
}

}  // namespace rrlab::minilang
