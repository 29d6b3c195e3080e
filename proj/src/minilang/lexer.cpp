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

#include <cctype>
#include <limits>
#include <string>

#include "rrlab/minilang.hpp"

namespace rrlab::minilang {
namespace {

struct Keyword {
  std::string_view text;
  TokenKind kind;
};

constexpr Keyword kKeywords[] = {
    {"fn", TokenKind::kFn},         {"let", TokenKind::kLet},
    {"if", TokenKind::kIf},         {"else", TokenKind::kElse},
    {"while", TokenKind::kWhile},   {"return", TokenKind::kReturn},
    {"true", TokenKind::kTrue},     {"false", TokenKind::kFalse},
    {"and", TokenKind::kAnd},       {"or", TokenKind::kOr},
    {"not", TokenKind::kNot},       {"int", TokenKind::kIntType},
    {"bool", TokenKind::kBoolType},
};

bool IsIdentStart(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool IsIdentChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

std::string_view CategoryName(DiagnosticCategory category) {
  switch (category) {
    case DiagnosticCategory::kSyntaxError: return "SyntaxError";
    case DiagnosticCategory::kUndefinedIdentifier: return "UndefinedIdentifier";
    case DiagnosticCategory::kTypeMismatch: return "TypeMismatch";
    case DiagnosticCategory::kMissingReturn: return "MissingReturn";
    case DiagnosticCategory::kNotAStatement: return "NotAStatement";
    case DiagnosticCategory::kDuplicateDefinition: return "DuplicateDefinition";
  }
  return "Unknown";
}

LexResult Lex(std::string_view src) {
  LexResult result;
  uint32_t line = 1;
  size_t i = 0;
  auto push = [&](TokenKind kind, size_t begin, size_t end) {
    result.tokens.push_back(
        Token{kind, std::string(src.substr(begin, end - begin)),
              Span{static_cast<uint32_t>(begin), static_cast<uint32_t>(end),
                   line}});
  };
  auto fail = [&](size_t at, std::string message) {
    result.tokens.clear();
    result.error = Diagnostic{
        DiagnosticCategory::kSyntaxError,
        Span{static_cast<uint32_t>(at), static_cast<uint32_t>(at + 1), line},
        std::move(message)};
    return result;
  };

  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (IsIdentStart(c)) {
      size_t j = i + 1;
      while (j < src.size() && IsIdentChar(src[j])) ++j;
      const std::string_view word = src.substr(i, j - i);
      TokenKind kind = TokenKind::kIdent;
      for (const auto& kw : kKeywords) {
        if (kw.text == word) kind = kw.kind;
      }
      push(kind, i, j);
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      uint64_t value = 0;
      bool overflow = false;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
        const uint64_t digit = static_cast<uint64_t>(src[j] - '0');
        if (value > (static_cast<uint64_t>(std::numeric_limits<int64_t>::max()) - digit) / 10) {
          overflow = true;
        }
        value = value * 10 + digit;
        ++j;
      }
      if (overflow) return fail(i, "integer literal out of range");
      if (j < src.size() && IsIdentStart(src[j])) {
        return fail(j, "unexpected character after integer literal");
      }
      push(TokenKind::kIntLit, i, j);
      i = j;
      continue;
    }
    const char next = i + 1 < src.size() ? src[i + 1] : '\0';
    auto two = [&](TokenKind kind) {
      push(kind, i, i + 2);
      i += 2;
    };
    auto one = [&](TokenKind kind) {
      push(kind, i, i + 1);
      i += 1;
    };
    switch (c) {
      case '(': one(TokenKind::kLParen); continue;
      case ')': one(TokenKind::kRParen); continue;
      case '{': one(TokenKind::kLBrace); continue;
      case '}': one(TokenKind::kRBrace); continue;
      case ':': one(TokenKind::kColon); continue;
      case ';': one(TokenKind::kSemicolon); continue;
      case ',': one(TokenKind::kComma); continue;
      case '+': one(TokenKind::kPlus); continue;
      case '*': one(TokenKind::kStar); continue;
      case '/': one(TokenKind::kSlash); continue;
      case '%': one(TokenKind::kPercent); continue;
      case '-':
        if (next == '>') two(TokenKind::kArrow); else one(TokenKind::kMinus);
        continue;
      case '<':
        if (next == '=') two(TokenKind::kLe); else one(TokenKind::kLt);
        continue;
      case '>':
        if (next == '=') two(TokenKind::kGe); else one(TokenKind::kGt);
        continue;
      case '=':
        if (next == '=') two(TokenKind::kEq); else one(TokenKind::kAssign);
        continue;
      case '!':
        if (next == '=') {
          two(TokenKind::kNe);
          continue;
        }
        break;
      default:
        break;
    }
    return fail(i, std::string("illegal character '") + c + "'");
  }
  return result;
}

}  // namespace rrlab::minilang
