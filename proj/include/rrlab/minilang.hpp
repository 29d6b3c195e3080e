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

// MiniLang: a single-function integer/boolean language used as the repair
// target. Provides the lexer, parser, static checker ("compiler"), a
// step-budgeted interpreter ("test runner") and the canonical renderer.

#ifndef RRLAB_MINILANG_HPP_
#define RRLAB_MINILANG_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rrlab::minilang {

inline constexpr int64_t kDefaultStepBudget = 10000;
inline constexpr std::string_view kHoleMarker = "<HOLE>";

// Byte range [begin, end) into the source plus the 1-based line of `begin`.
struct Span {
  uint32_t begin = 0;
  uint32_t end = 0;
  uint32_t line = 1;

  friend bool operator==(const Span&, const Span&) = default;
};

enum class DiagnosticCategory {
  kSyntaxError,
  kUndefinedIdentifier,
  kTypeMismatch,
  kMissingReturn,
  kNotAStatement,
  kDuplicateDefinition,
};

std::string_view CategoryName(DiagnosticCategory category);

struct Diagnostic {
  DiagnosticCategory category;
  Span span;
  std::string message;
};

enum class TokenKind {
  kIdent,
  kIntLit,
  // keywords
  kFn,
  kLet,
  kIf,
  kElse,
  kWhile,
  kReturn,
  kTrue,
  kFalse,
  kAnd,
  kOr,
  kNot,
  kIntType,
  kBoolType,
  // punctuation
  kLParen,
  kRParen,
  kLBrace,
  kRBrace,
  kColon,
  kSemicolon,
  kComma,
  kArrow,
  kAssign,
  kPlus,
  kMinus,
  kStar,
  kSlash,
  kPercent,
  kLt,
  kLe,
  kGt,
  kGe,
  kEq,
  kNe,
};

struct Token {
  TokenKind kind;
  std::string lexeme;
  Span span;
};

struct LexResult {
  std::vector<Token> tokens;
  std::optional<Diagnostic> error;
  bool ok() const { return !error.has_value(); }
};

LexResult Lex(std::string_view source);

// ---------------------------------------------------------------------------
// AST

enum class Type { kInt, kBool };

enum class UnaryOp { kNeg, kNot };

enum class BinaryOp {
  kAdd, kSub, kMul, kDiv, kMod,
  kLt, kLe, kGt, kGe, kEq, kNe,
  kAnd, kOr,
};

std::string_view OpLexeme(BinaryOp op);
std::string_view OpLexeme(UnaryOp op);
int Precedence(BinaryOp op);
bool IsArithmetic(BinaryOp op);
bool IsComparison(BinaryOp op);

struct Expr {
  enum class Kind { kIntLit, kBoolLit, kIdent, kUnary, kBinary, kParen };

  Kind kind = Kind::kIntLit;
  int64_t int_value = 0;
  bool bool_value = false;
  std::string name;
  UnaryOp unary_op = UnaryOp::kNeg;
  BinaryOp binary_op = BinaryOp::kAdd;
  std::vector<Expr> children;
  Span span;

  static Expr Int(int64_t v);
  static Expr Bool(bool v);
  static Expr Ident(std::string name);
  static Expr Unary(UnaryOp op, Expr operand);
  static Expr Binary(BinaryOp op, Expr lhs, Expr rhs);
  static Expr Paren(Expr inner);
};

struct Stmt {
  enum class Kind { kLet, kAssign, kIf, kWhile, kReturn, kExprStmt };

  Kind kind = Kind::kReturn;
  std::string name;            // let / assign target
  Type declared = Type::kInt;  // let only
  Expr expr;                   // value, condition, or returned expression
  std::vector<Stmt> body;      // if-then / while body
  std::vector<Stmt> else_body;
  bool has_else = false;
  Span span;
};

struct Param {
  std::string name;
  Type type = Type::kInt;
  Span span;
};

struct Program {
  std::string name = "main";
  std::vector<Param> params;
  Type return_type = Type::kInt;
  std::vector<Stmt> body;
  Span span;
};

// Equality on structure only; spans are ignored.
bool StructurallyEqual(const Expr& a, const Expr& b);
bool StructurallyEqual(const Stmt& a, const Stmt& b);
bool StructurallyEqual(const Program& a, const Program& b);

struct ParseResult {
  std::optional<Program> program;
  std::optional<Diagnostic> error;
  bool ok() const { return program.has_value(); }
};

ParseResult Parse(std::span<const Token> tokens);

// Lex + Parse.
ParseResult ParseSource(std::string_view source);

// Static semantics. Empty result iff the program compiles. Ordered by span.
std::vector<Diagnostic> Check(const Program& program);

// Lex + parse + check; a syntax error is returned as the single diagnostic.
std::vector<Diagnostic> Compile(std::string_view source);

// ---------------------------------------------------------------------------
// Execution

enum class RuntimeErrorKind { kDivByZero, kModByZero };

struct ExecOutcome {
  enum class Kind { kReturned, kRuntimeError, kBudgetExhausted };

  Kind kind = Kind::kReturned;
  int64_t value = 0;
  RuntimeErrorKind runtime_error = RuntimeErrorKind::kDivByZero;
  int64_t steps_used = 0;

  bool returned() const { return kind == Kind::kReturned; }
  friend bool operator==(const ExecOutcome&, const ExecOutcome&) = default;
};

// Requires Check(program) to be empty and inputs.size() == params.size().
// Booleans are not valid inputs; every parameter must be `int`.
ExecOutcome Interpret(const Program& program, std::span<const int64_t> inputs,
                      int64_t step_budget = kDefaultStepBudget);

// ---------------------------------------------------------------------------
// Rendering and canonical text

// Canonical program text: one statement per line, four-space indentation,
// trailing newline.
std::string Render(const Program& program);

// Joins lexemes using the canonical spacing rule shared with Render.
std::string JoinLexemes(std::span<const std::string> lexemes);

// Canonical form of an arbitrary code fragment: each non-blank line is
// re-spaced token by token (lines that do not lex are whitespace-collapsed),
// indentation dropped, blank lines removed, joined by '\n'.
std::string CanonicalizeFragment(std::string_view text);

std::vector<std::string> SplitLines(std::string_view text);
std::string JoinLines(std::span<const std::string> lines);

}  // namespace rrlab::minilang

#endif  // RRLAB_MINILANG_HPP_
