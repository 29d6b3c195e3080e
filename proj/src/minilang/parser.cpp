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

#include <string>

#include "rrlab/minilang.hpp"

namespace rrlab::minilang {
namespace {

struct SyntaxFailure {
  Diagnostic diagnostic;
};

class Parser {
 public:
  explicit Parser(std::span<const Token> tokens) : tokens_(tokens) {}

  Program ParseProgram() {
    Program program;
    const Span start = Peek().span;
    Expect(TokenKind::kFn, "'fn'");
    program.name = Expect(TokenKind::kIdent, "function name").lexeme;
    Expect(TokenKind::kLParen, "'('");
    if (!At(TokenKind::kRParen)) {
      do {
        Param p;
        const Token& name = Expect(TokenKind::kIdent, "parameter name");
        p.name = name.lexeme;
        p.span = name.span;
        Expect(TokenKind::kColon, "':'");
        p.type = ParseType();
        p.span.end = Previous().span.end;
        program.params.push_back(std::move(p));
      } while (Accept(TokenKind::kComma));
    }
    Expect(TokenKind::kRParen, "')'");
    Expect(TokenKind::kArrow, "'->'");
    program.return_type = ParseType();
    program.body = ParseBlock();
    if (pos_ < tokens_.size()) Fail(tokens_[pos_].span, "expected end of input");
    program.span = Join(start, Previous().span);
    return program;
  }

 private:
  bool AtEnd() const { return pos_ >= tokens_.size(); }
  bool At(TokenKind kind) const { return !AtEnd() && tokens_[pos_].kind == kind; }

  const Token& Peek() const {
    if (AtEnd()) Fail(EndSpan(), "unexpected end of input");
    return tokens_[pos_];
  }
  const Token& Previous() const { return tokens_[pos_ - 1]; }

  bool Accept(TokenKind kind) {
    if (!At(kind)) return false;
    ++pos_;
    return true;
  }

  const Token& Expect(TokenKind kind, std::string_view what) {
    if (AtEnd()) Fail(EndSpan(), "expected " + std::string(what) + " but reached end of input");
    if (tokens_[pos_].kind != kind) {
      Fail(tokens_[pos_].span, "expected " + std::string(what) + " but found '" +
                                   tokens_[pos_].lexeme + "'");
    }
    return tokens_[pos_++];
  }

  Span EndSpan() const {
    if (tokens_.empty()) return Span{0, 0, 1};
    const Span& last = tokens_.back().span;
    return Span{last.end, last.end, last.line};
  }

  [[noreturn]] void Fail(Span span, std::string message) const {
    throw SyntaxFailure{
        Diagnostic{DiagnosticCategory::kSyntaxError, span, std::move(message)}};
  }

  static Span Join(Span a, Span b) { return Span{a.begin, b.end, a.line}; }

  Type ParseType() {
    if (Accept(TokenKind::kIntType)) return Type::kInt;
    if (Accept(TokenKind::kBoolType)) return Type::kBool;
    const Token& t = Peek();
    Fail(t.span, "expected type but found '" + t.lexeme + "'");
  }

  std::vector<Stmt> ParseBlock() {
    Expect(TokenKind::kLBrace, "'{'");
    std::vector<Stmt> stmts;
    while (!At(TokenKind::kRBrace)) {
      if (AtEnd()) Fail(EndSpan(), "expected '}' but reached end of input");
      stmts.push_back(ParseStmt());
    }
    Expect(TokenKind::kRBrace, "'}'");
    return stmts;
  }

  Stmt ParseStmt() {
    const Token& first = Peek();
    Stmt s;
    switch (first.kind) {
      case TokenKind::kLet: {
        ++pos_;
        s.kind = Stmt::Kind::kLet;
        s.name = Expect(TokenKind::kIdent, "variable name").lexeme;
        Expect(TokenKind::kColon, "':'");
        s.declared = ParseType();
        Expect(TokenKind::kAssign, "'='");
        s.expr = ParseExpr();
        Expect(TokenKind::kSemicolon, "';'");
        break;
      }
      case TokenKind::kIf: {
        ++pos_;
        s.kind = Stmt::Kind::kIf;
        s.expr = ParseExpr();
        s.body = ParseBlock();
        if (Accept(TokenKind::kElse)) {
          s.has_else = true;
          s.else_body = ParseBlock();
        }
        break;
      }
      case TokenKind::kWhile: {
        ++pos_;
        s.kind = Stmt::Kind::kWhile;
        s.expr = ParseExpr();
        s.body = ParseBlock();
        break;
      }
      case TokenKind::kReturn: {
        ++pos_;
        s.kind = Stmt::Kind::kReturn;
        s.expr = ParseExpr();
        Expect(TokenKind::kSemicolon, "';'");
        break;
      }
      default: {
        if (first.kind == TokenKind::kIdent && pos_ + 1 < tokens_.size() &&
            tokens_[pos_ + 1].kind == TokenKind::kAssign) {
          s.kind = Stmt::Kind::kAssign;
          s.name = first.lexeme;
          pos_ += 2;
          s.expr = ParseExpr();
        } else {
          s.kind = Stmt::Kind::kExprStmt;
          s.expr = ParseExpr();
        }
        Expect(TokenKind::kSemicolon, "';'");
        break;
      }
    }
    s.span = Join(first.span, Previous().span);
    return s;
  }

  Expr ParseExpr() { return ParseOr(); }

  Expr MakeBinary(BinaryOp op, Expr lhs, Expr rhs) {
    const Span span = Join(lhs.span, rhs.span);
    Expr e = Expr::Binary(op, std::move(lhs), std::move(rhs));
    e.span = span;
    return e;
  }

  Expr ParseOr() {
    Expr lhs = ParseAnd();
    while (Accept(TokenKind::kOr)) lhs = MakeBinary(BinaryOp::kOr, std::move(lhs), ParseAnd());
    return lhs;
  }

  Expr ParseAnd() {
    Expr lhs = ParseComparison();
    while (Accept(TokenKind::kAnd)) {
      lhs = MakeBinary(BinaryOp::kAnd, std::move(lhs), ParseComparison());
    }
    return lhs;
  }

  Expr ParseComparison() {
    Expr lhs = ParseAdditive();
    if (AtEnd()) return lhs;
    BinaryOp op;
    switch (tokens_[pos_].kind) {
      case TokenKind::kLt: op = BinaryOp::kLt; break;
      case TokenKind::kLe: op = BinaryOp::kLe; break;
      case TokenKind::kGt: op = BinaryOp::kGt; break;
      case TokenKind::kGe: op = BinaryOp::kGe; break;
      case TokenKind::kEq: op = BinaryOp::kEq; break;
      case TokenKind::kNe: op = BinaryOp::kNe; break;
      default: return lhs;
    }
    ++pos_;
    return MakeBinary(op, std::move(lhs), ParseAdditive());
  }

  Expr ParseAdditive() {
    Expr lhs = ParseMultiplicative();
    while (!AtEnd()) {
      BinaryOp op;
      if (At(TokenKind::kPlus)) op = BinaryOp::kAdd;
      else if (At(TokenKind::kMinus)) op = BinaryOp::kSub;
      else break;
      ++pos_;
      lhs = MakeBinary(op, std::move(lhs), ParseMultiplicative());
    }
    return lhs;
  }

  Expr ParseMultiplicative() {
    Expr lhs = ParseUnary();
    while (!AtEnd()) {
      BinaryOp op;
      if (At(TokenKind::kStar)) op = BinaryOp::kMul;
      else if (At(TokenKind::kSlash)) op = BinaryOp::kDiv;
      else if (At(TokenKind::kPercent)) op = BinaryOp::kMod;
      else break;
      ++pos_;
      lhs = MakeBinary(op, std::move(lhs), ParseUnary());
    }
    return lhs;
  }

  Expr ParseUnary() {
    const Token& t = Peek();
    if (t.kind == TokenKind::kMinus || t.kind == TokenKind::kNot) {
      ++pos_;
      Expr operand = ParseUnary();
      const Span span = Join(t.span, operand.span);
      Expr e = Expr::Unary(t.kind == TokenKind::kMinus ? UnaryOp::kNeg : UnaryOp::kNot,
                           std::move(operand));
      e.span = span;
      return e;
    }
    return ParsePrimary();
  }

  Expr ParsePrimary() {
    const Token& t = Peek();
    Expr e;
    switch (t.kind) {
      case TokenKind::kIntLit:
        e = Expr::Int(std::stoll(t.lexeme));
        break;
      case TokenKind::kTrue:
        e = Expr::Bool(true);
        break;
      case TokenKind::kFalse:
        e = Expr::Bool(false);
        break;
      case TokenKind::kIdent:
        e = Expr::Ident(t.lexeme);
        break;
      case TokenKind::kLParen: {
        ++pos_;
        Expr inner = ParseExpr();
        const Token& close = Expect(TokenKind::kRParen, "')'");
        e = Expr::Paren(std::move(inner));
        e.span = Join(t.span, close.span);
        return e;
      }
      default:
        Fail(t.span, "expected expression but found '" + t.lexeme + "'");
    }
    ++pos_;
    e.span = t.span;
    return e;
  }

  std::span<const Token> tokens_;
  size_t pos_ = 0;
};

}  // namespace

ParseResult Parse(std::span<const Token> tokens) {
  ParseResult result;
  try {
    result.program = Parser(tokens).ParseProgram();
  } catch (const SyntaxFailure& failure) {
    result.error = failure.diagnostic;
  }
  return result;
}

ParseResult ParseSource(std::string_view source) {
  LexResult lexed = Lex(source);
  if (!lexed.ok()) {
    ParseResult result;
    result.error = std::move(lexed.error);
    return result;
  }
  return Parse(lexed.tokens);
}

std::vector<Diagnostic> Compile(std::string_view source) {
  ParseResult parsed = ParseSource(source);
  if (!parsed.ok()) return {*parsed.error};
  return Check(*parsed.program);
}

}  // namespace rrlab::minilang
