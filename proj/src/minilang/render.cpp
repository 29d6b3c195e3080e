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
#include <cctype>
#include <string>

#include "rrlab/minilang.hpp"

namespace rrlab::minilang {
namespace {

bool IsWordLexeme(std::string_view s) {
  return !s.empty() && (std::isalnum(static_cast<unsigned char>(s[0])) || s[0] == '_');
}

// A '-' is unary when it cannot end an operand on its left.
bool MinusIsUnary(const std::string* prev) {
  if (prev == nullptr) return true;
  static constexpr std::string_view kOperandEnders[] = {")", "true", "false"};
  if (std::find(std::begin(kOperandEnders), std::end(kOperandEnders), *prev) !=
      std::end(kOperandEnders)) {
    return false;
  }
  static constexpr std::string_view kKeywords[] = {"return", "if", "while", "and",
                                                    "or", "not", "else", "let"};
  if (std::find(std::begin(kKeywords), std::end(kKeywords), *prev) != std::end(kKeywords)) {
    return true;
  }
  return !IsWordLexeme(*prev);
}

class LineWriter {
 public:
  void Add(std::string_view lexeme) { lexemes_.emplace_back(lexeme); }

  void AddExpr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::kIntLit:
        if (e.int_value < 0) {
          Add("-");
          Add(std::to_string(0 - static_cast<uint64_t>(e.int_value)));
        } else {
          Add(std::to_string(e.int_value));
        }
        return;
      case Expr::Kind::kBoolLit:
        Add(e.bool_value ? "true" : "false");
        return;
      case Expr::Kind::kIdent:
        Add(e.name);
        return;
      case Expr::Kind::kParen:
        Add("(");
        AddExpr(e.children[0]);
        Add(")");
        return;
      case Expr::Kind::kUnary:
        Add(OpLexeme(e.unary_op));
        AddExpr(e.children[0]);
        return;
      case Expr::Kind::kBinary:
        AddExpr(e.children[0]);
        Add(OpLexeme(e.binary_op));
        AddExpr(e.children[1]);
        return;
    }
  }

  std::string Take() {
    std::string line = JoinLexemes(lexemes_);
    lexemes_.clear();
    return line;
  }

 private:
  std::vector<std::string> lexemes_;
};

std::string_view TypeLexeme(Type t) { return t == Type::kInt ? "int" : "bool"; }

class Renderer {
 public:
  std::string Run(const Program& p) {
    w_.Add("fn");
    w_.Add(p.name);
    w_.Add("(");
    for (size_t i = 0; i < p.params.size(); ++i) {
      if (i > 0) w_.Add(",");
      w_.Add(p.params[i].name);
      w_.Add(":");
      w_.Add(TypeLexeme(p.params[i].type));
    }
    w_.Add(")");
    w_.Add("->");
    w_.Add(TypeLexeme(p.return_type));
    w_.Add("{");
    Emit(0);
    Block(p.body, 1);
    w_.Add("}");
    Emit(0);
    return std::move(out_);
  }

 private:
  void Emit(int depth) {
    out_.append(static_cast<size_t>(depth) * 4, ' ');
    out_ += w_.Take();
    out_ += '\n';
  }

  void Block(const std::vector<Stmt>& stmts, int depth) {
    for (const Stmt& s : stmts) Statement(s, depth);
  }

  void Statement(const Stmt& s, int depth) {
    switch (s.kind) {
      case Stmt::Kind::kLet:
        w_.Add("let");
        w_.Add(s.name);
        w_.Add(":");
        w_.Add(TypeLexeme(s.declared));
        w_.Add("=");
        w_.AddExpr(s.expr);
        w_.Add(";");
        Emit(depth);
        return;
      case Stmt::Kind::kAssign:
        w_.Add(s.name);
        w_.Add("=");
        w_.AddExpr(s.expr);
        w_.Add(";");
        Emit(depth);
        return;
      case Stmt::Kind::kIf:
      case Stmt::Kind::kWhile:
        w_.Add(s.kind == Stmt::Kind::kIf ? "if" : "while");
        w_.AddExpr(s.expr);
        w_.Add("{");
        Emit(depth);
        Block(s.body, depth + 1);
        w_.Add("}");
        if (s.kind == Stmt::Kind::kIf && s.has_else) {
          w_.Add("else");
          w_.Add("{");
          Emit(depth);
          Block(s.else_body, depth + 1);
          w_.Add("}");
        }
        Emit(depth);
        return;
      case Stmt::Kind::kReturn:
        w_.Add("return");
        w_.AddExpr(s.expr);
        w_.Add(";");
        Emit(depth);
        return;
      case Stmt::Kind::kExprStmt:
        w_.AddExpr(s.expr);
        w_.Add(";");
        Emit(depth);
        return;
    }
  }

  LineWriter w_;
  std::string out_;
};

std::string CollapseWhitespace(std::string_view line) {
  std::string out;
  bool pending_space = false;
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\r') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

}  // namespace

std::string JoinLexemes(std::span<const std::string> lexemes) {
  std::string out;
  const std::string* prev = nullptr;
  bool prev_unary_minus = false;
  for (const std::string& lex : lexemes) {
    bool space = prev != nullptr;
    if (space) {
      if (lex == ";" || lex == "," || lex == ")" || lex == ":") space = false;
      if (*prev == "(") space = false;
      if (lex == "(" && IsWordLexeme(*prev) && *prev != "not" && *prev != "return" &&
          *prev != "if" && *prev != "while" && *prev != "and" && *prev != "or") {
        space = false;
      }
      if (prev_unary_minus) space = false;
    }
    if (space) out += ' ';
    out += lex;
    prev_unary_minus = lex == "-" && MinusIsUnary(prev);
    prev = &lex;
  }
  return out;
}

std::string Render(const Program& program) { return Renderer().Run(program); }

std::vector<std::string> SplitLines(std::string_view text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start < text.size()) {
    size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::string JoinLines(std::span<const std::string> lines) {
  std::string out;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += '\n';
    out += lines[i];
  }
  return out;
}

std::string CanonicalizeFragment(std::string_view text) {
  std::vector<std::string> out;
  for (const std::string& raw : SplitLines(text)) {
    const std::string collapsed = CollapseWhitespace(raw);
    if (collapsed.empty()) continue;
    if (collapsed == kHoleMarker) {
      out.push_back(collapsed);
      continue;
    }
    const LexResult lexed = Lex(collapsed);
    if (!lexed.ok()) {
      out.push_back(collapsed);
      continue;
    }
    std::vector<std::string> lexemes;
    lexemes.reserve(lexed.tokens.size());
    for (const Token& t : lexed.tokens) lexemes.push_back(t.lexeme);
    out.push_back(JoinLexemes(lexemes));
  }
  return JoinLines(out);
}

}  // namespace rrlab::minilang
