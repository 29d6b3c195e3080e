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
#include <array>
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

std::string_view MutationName(MutationKind kind) {
  switch (kind) {
    case MutationKind::kArithOpSwap: return "ArithOpSwap";
    case MutationKind::kCmpOpSwap: return "CmpOpSwap";
    case MutationKind::kConstPerturb: return "ConstPerturb";
    case MutationKind::kIdentifierMisuse: return "IdentifierMisuse";
    case MutationKind::kNegateCondition: return "NegateCondition";
    case MutationKind::kDeleteStatement: return "DeleteStatement";
    case MutationKind::kOffByOne: return "OffByOne";
  }
  return "?";
}

std::optional<MutationKind> ParseMutationName(std::string_view name) {
  for (int k = 0; k < kMutationKindCount; ++k) {
    const auto kind = static_cast<MutationKind>(k);
    if (MutationName(kind) == name) return kind;
  }
  return std::nullopt;
}

namespace {

constexpr std::array<BinaryOp, 5> kArithOps = {BinaryOp::kAdd, BinaryOp::kSub, BinaryOp::kMul,
                                               BinaryOp::kDiv, BinaryOp::kMod};
constexpr std::array<BinaryOp, 6> kCmpOps = {BinaryOp::kLt, BinaryOp::kLe, BinaryOp::kGt,
                                             BinaryOp::kGe, BinaryOp::kEq, BinaryOp::kNe};
constexpr std::array<const char*, 4> kUndefinedNames = {"d", "n", "m", "q"};

struct StmtSite {
  Stmt* stmt;
  std::vector<Stmt>* block;
  size_t index;
  std::vector<std::string> visible;  // names in scope before the statement
};

void CollectStmts(std::vector<Stmt>& block, std::vector<std::string>& visible,
                  std::vector<StmtSite>& out) {
  const size_t mark = visible.size();
  for (size_t i = 0; i < block.size(); ++i) {
    Stmt& s = block[i];
    out.push_back(StmtSite{&s, &block, i, visible});
    if (s.kind == Stmt::Kind::kIf || s.kind == Stmt::Kind::kWhile) {
      CollectStmts(s.body, visible, out);
      if (s.has_else) CollectStmts(s.else_body, visible, out);
    }
    if (s.kind == Stmt::Kind::kLet) visible.push_back(s.name);
  }
  visible.resize(mark);
}

std::vector<StmtSite> StmtSites(Program& p) {
  std::vector<std::string> visible;
  for (const auto& param : p.params) visible.push_back(param.name);
  std::vector<StmtSite> out;
  CollectStmts(p.body, visible, out);
  return out;
}

void CollectExprs(Expr& e, std::vector<Expr*>& out) {
  out.push_back(&e);
  for (Expr& c : e.children) CollectExprs(c, out);
}

std::string UndefinedName(const Program& p) {
  const std::string text = minilang::Render(p);
  for (const char* name : kUndefinedNames) {
    bool used = false;
    for (const auto& t : minilang::Lex(text).tokens) {
      if (t.lexeme == name) used = true;
    }
    if (!used) return name;
  }
  return "undefined_var";
}

struct Candidate {
  MutationKind kind;
  size_t stmt;
  size_t expr;  // pre-order index within the statement's expression
  int variant;
};

constexpr size_t kStmtLevel = static_cast<size_t>(-1);

std::vector<std::string> MisuseTargets(const StmtSite& site, const std::string& current,
                                       const std::string& undefined) {
  std::vector<std::string> targets;
  for (const auto& name : site.visible) {
    if (name != current) targets.push_back(name);
  }
  targets.push_back(undefined);
  return targets;
}

std::vector<Candidate> Enumerate(Program& p, const std::string& undefined) {
  std::vector<Candidate> out;
  const auto sites = StmtSites(p);
  for (size_t si = 0; si < sites.size(); ++si) {
    Stmt& s = *sites[si].stmt;
    if (s.kind == Stmt::Kind::kLet || s.kind == Stmt::Kind::kAssign) {
      out.push_back({MutationKind::kDeleteStatement, si, kStmtLevel, 0});
    }
    if (s.kind == Stmt::Kind::kIf || s.kind == Stmt::Kind::kWhile) {
      out.push_back({MutationKind::kNegateCondition, si, kStmtLevel, 0});
      if (s.expr.kind == Expr::Kind::kBinary && minilang::IsComparison(s.expr.binary_op)) {
        out.push_back({MutationKind::kOffByOne, si, kStmtLevel, 0});
        out.push_back({MutationKind::kOffByOne, si, kStmtLevel, 1});
      }
    }
    const bool int_valued = s.kind == Stmt::Kind::kReturn || s.kind == Stmt::Kind::kAssign ||
                            (s.kind == Stmt::Kind::kLet && s.declared == Type::kInt);
    if (int_valued) {
      out.push_back({MutationKind::kOffByOne, si, kStmtLevel, 0});
      out.push_back({MutationKind::kOffByOne, si, kStmtLevel, 1});
    }
    std::vector<Expr*> exprs;
    CollectExprs(s.expr, exprs);
    for (size_t ei = 0; ei < exprs.size(); ++ei) {
      const Expr& e = *exprs[ei];
      if (e.kind == Expr::Kind::kBinary && minilang::IsArithmetic(e.binary_op)) {
        for (int v = 0; v < 4; ++v) out.push_back({MutationKind::kArithOpSwap, si, ei, v});
      } else if (e.kind == Expr::Kind::kBinary && minilang::IsComparison(e.binary_op)) {
        for (int v = 0; v < 5; ++v) out.push_back({MutationKind::kCmpOpSwap, si, ei, v});
      } else if (e.kind == Expr::Kind::kIntLit) {
        for (int v = 0; v < (e.int_value != 0 ? 3 : 2); ++v) {
          out.push_back({MutationKind::kConstPerturb, si, ei, v});
        }
      } else if (e.kind == Expr::Kind::kIdent) {
        const int n = static_cast<int>(MisuseTargets(sites[si], e.name, undefined).size());
        for (int v = 0; v < n; ++v) out.push_back({MutationKind::kIdentifierMisuse, si, ei, v});
      }
    }
  }
  return out;
}

template <size_t N>
BinaryOp OtherOp(const std::array<BinaryOp, N>& ops, BinaryOp current, int variant) {
  std::vector<BinaryOp> others;
  for (BinaryOp op : ops) {
    if (op != current) others.push_back(op);
  }
  return others[static_cast<size_t>(variant)];
}

Expr AddConstant(Expr e, int variant) {
  return WrapBinary(variant == 0 ? BinaryOp::kAdd : BinaryOp::kSub, std::move(e), Expr::Int(1));
}

// Applies `c` to a copy of `fixed`.
Program Apply(const Program& fixed, const Candidate& c, const std::string& undefined) {
  Program p = fixed;
  auto sites = StmtSites(p);
  StmtSite& site = sites[c.stmt];
  Stmt& s = *site.stmt;
  if (c.expr == kStmtLevel) {
    switch (c.kind) {
      case MutationKind::kDeleteStatement:
        site.block->erase(site.block->begin() + static_cast<std::ptrdiff_t>(site.index));
        break;
      case MutationKind::kNegateCondition:
        if (s.expr.kind == Expr::Kind::kUnary && s.expr.unary_op == UnaryOp::kNot) {
          Expr inner = std::move(s.expr.children[0]);
          if (inner.kind == Expr::Kind::kParen) inner = std::move(inner.children[0]);
          s.expr = std::move(inner);
        } else {
          s.expr = WrapUnary(UnaryOp::kNot, std::move(s.expr));
        }
        break;
      case MutationKind::kOffByOne:
        if (s.kind == Stmt::Kind::kIf || s.kind == Stmt::Kind::kWhile) {
          Expr rhs = std::move(s.expr.children[1]);
          if (rhs.kind == Expr::Kind::kParen) rhs = std::move(rhs.children[0]);
          s.expr.children[1] = AddConstant(std::move(rhs), c.variant);
        } else {
          s.expr = AddConstant(std::move(s.expr), c.variant);
        }
        break;
      default:
        throw Error(ErrorCode::kInternal, "statement-level mutation kind mismatch");
    }
    return p;
  }
  std::vector<Expr*> exprs;
  CollectExprs(s.expr, exprs);
  Expr& e = *exprs[c.expr];
  switch (c.kind) {
    case MutationKind::kArithOpSwap:
      e.binary_op = OtherOp(kArithOps, e.binary_op, c.variant);
      break;
    case MutationKind::kCmpOpSwap:
      e.binary_op = OtherOp(kCmpOps, e.binary_op, c.variant);
      break;
    case MutationKind::kConstPerturb: {
      const int64_t v = e.int_value;
      const int64_t next = c.variant == 0 ? v + 1 : (c.variant == 1 ? v - 1 : 0);
      e = IntConstant(next);
      break;
    }
    case MutationKind::kIdentifierMisuse:
      e.name = MisuseTargets(site, e.name, undefined)[static_cast<size_t>(c.variant)];
      break;
    default:
      throw Error(ErrorCode::kInternal, "expression-level mutation kind mismatch");
  }
  return p;
}

}  // namespace

std::optional<TestCase> MakeTestCase(const Program& fixed, std::vector<int64_t> inputs,
                                     int64_t budget) {
  const auto out = minilang::Interpret(fixed, inputs, budget);
  if (!out.returned()) return std::nullopt;
  return TestCase{std::move(inputs), out.value};
}

bool Passes(const Program& program, const TestCase& test, int64_t budget) {
  // A patch may rewrite the signature; a test it cannot even call is failed.
  if (program.params.size() != test.inputs.size()) return false;
  const auto out = minilang::Interpret(program, test.inputs, budget);
  return out.returned() && out.value == test.expected;
}

std::vector<std::vector<int64_t>> ProbeInputs(size_t param_count, const CorpusConfig& cfg,
                                              uint64_t seed, size_t samples) {
  std::vector<std::vector<int64_t>> out;
  if (param_count <= 2) {
    std::vector<int64_t> cur(param_count, cfg.probe_min);
    while (true) {
      out.push_back(cur);
      size_t i = 0;
      while (i < param_count && cur[i] == cfg.probe_max) cur[i++] = cfg.probe_min;
      if (i == param_count) break;
      ++cur[i];
    }
    return out;
  }
  Rng rng(seed);
  out.reserve(samples);
  for (size_t s = 0; s < samples; ++s) {
    std::vector<int64_t> in(param_count);
    for (auto& v : in) v = rng.Uniform(cfg.probe_min, cfg.probe_max);
    out.push_back(std::move(in));
  }
  return out;
}

std::string Splice(std::string_view program, Hunk hunk, std::string_view replacement) {
  const std::vector<std::string> lines = minilang::SplitLines(program);
  const size_t first = std::min(static_cast<size_t>(std::max(hunk.start_line, 1) - 1), lines.size());
  const size_t last =
      std::clamp(static_cast<size_t>(std::max(hunk.end_line, 0)), first, lines.size());
  std::vector<std::string> out(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(first));
  for (auto& l : minilang::SplitLines(replacement)) out.push_back(std::move(l));
  out.insert(out.end(), lines.begin() + static_cast<std::ptrdiff_t>(last), lines.end());
  std::string text = minilang::JoinLines(out);
  text += '\n';
  return text;
}

BugSample SampleFromHunk(std::string_view buggy_program, Hunk hunk, std::string id) {
  const auto lines = minilang::SplitLines(buggy_program);
  if (hunk.start_line < 1 || hunk.end_line < hunk.start_line ||
      static_cast<size_t>(hunk.end_line) > lines.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "hunk " + std::to_string(hunk.start_line) + ":" + std::to_string(hunk.end_line) +
                    " is outside the program (" + std::to_string(lines.size()) + " lines)");
  }
  BugSample s;
  s.id = std::move(id);
  s.buggy_program = std::string(buggy_program);
  s.hunk = hunk;
  const auto first = lines.begin() + (hunk.start_line - 1);
  const auto last = lines.begin() + hunk.end_line;
  s.buggy_text = minilang::JoinLines(std::vector<std::string>(first, last));
  std::vector<std::string> context(lines.begin(), first);
  const size_t indent = first->find_first_not_of(' ');
  context.push_back(std::string(indent == std::string::npos ? 0 : indent, ' ') +
                    std::string(minilang::kHoleMarker));
  context.insert(context.end(), last, lines.end());
  s.context_text = minilang::JoinLines(context);
  s.context_text += '\n';
  return s;
}

namespace {

BugSample MakeSample(const std::string& fixed_text, const std::string& buggy_text,
                     MutationKind kind) {
  const auto fixed_lines = minilang::SplitLines(fixed_text);
  const auto buggy_lines = minilang::SplitLines(buggy_text);
  size_t prefix = 0;
  while (prefix < fixed_lines.size() && prefix < buggy_lines.size() &&
         fixed_lines[prefix] == buggy_lines[prefix]) {
    ++prefix;
  }
  size_t suffix = 0;
  while (suffix + prefix < fixed_lines.size() && suffix + prefix < buggy_lines.size() &&
         fixed_lines[fixed_lines.size() - 1 - suffix] ==
             buggy_lines[buggy_lines.size() - 1 - suffix]) {
    ++suffix;
  }
  // A pure deletion leaves an empty buggy range; anchor it on the line above.
  if (prefix + suffix == buggy_lines.size() && prefix > 0) --prefix;
  const std::span<const std::string> buggy_hunk(buggy_lines.data() + prefix,
                                                buggy_lines.size() - suffix - prefix);
  const std::span<const std::string> fix_hunk(fixed_lines.data() + prefix,
                                              fixed_lines.size() - suffix - prefix);
  BugSample s;
  s.fixed_program = fixed_text;
  s.buggy_program = buggy_text;
  s.hunk = Hunk{static_cast<int>(prefix) + 1, static_cast<int>(buggy_lines.size() - suffix)};
  s.buggy_text = minilang::JoinLines(buggy_hunk);
  s.fix_text = minilang::JoinLines(fix_hunk);
  s.mutation = kind;

  std::vector<std::string> context(buggy_lines.begin(),
                                   buggy_lines.begin() + static_cast<std::ptrdiff_t>(prefix));
  const std::string& anchor = buggy_lines[prefix];
  const size_t indent = anchor.find_first_not_of(' ');
  context.push_back(std::string(indent == std::string::npos ? 0 : indent, ' ') +
                    std::string(minilang::kHoleMarker));
  context.insert(context.end(),
                 buggy_lines.end() - static_cast<std::ptrdiff_t>(suffix), buggy_lines.end());
  s.context_text = minilang::JoinLines(context);
  s.context_text += '\n';
  return s;
}

}  // namespace

BugSample Mutate(const Program& fixed, uint64_t seed, const MutateOptions& options,
                 const CorpusConfig& cfg) {
  if (!minilang::Check(fixed).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "mutate requires a program that compiles");
  }
  const std::string fixed_text = minilang::Render(fixed);
  const std::string undefined = UndefinedName(fixed);
  Program scratch = fixed;
  std::vector<Candidate> candidates = Enumerate(scratch, undefined);
  if (!options.allowed.empty()) {
    std::erase_if(candidates, [&](const Candidate& c) {
      return std::find(options.allowed.begin(), options.allowed.end(), c.kind) ==
             options.allowed.end();
    });
  }
  // Operator first, then site: kinds with many sites must not dominate.
  Rng rng(seed);
  std::vector<std::vector<Candidate>> by_kind(kMutationKindCount);
  for (const Candidate& c : candidates) by_kind[static_cast<size_t>(c.kind)].push_back(c);
  candidates.clear();
  while (true) {
    std::vector<size_t> live;
    for (size_t k = 0; k < by_kind.size(); ++k) {
      if (!by_kind[k].empty()) live.push_back(k);
    }
    if (live.empty()) break;
    auto& group = by_kind[live[rng.Index(live.size())]];
    const size_t pick = rng.Index(group.size());
    candidates.push_back(group[pick]);
    group.erase(group.begin() + static_cast<std::ptrdiff_t>(pick));
  }

  const auto probes = ProbeInputs(fixed.params.size(), cfg, DeriveSeed(seed, 1));
  std::vector<minilang::ExecOutcome> expected;
  expected.reserve(probes.size());
  for (const auto& in : probes) expected.push_back(minilang::Interpret(fixed, in, cfg.step_budget));

  for (const Candidate& c : candidates) {
    const Program mutated = Apply(fixed, c, undefined);
    const std::string buggy_text = minilang::Render(mutated);
    if (buggy_text == fixed_text) continue;
    // Behavior must come from the text, not the mutated tree.
    const minilang::ParseResult parsed = minilang::ParseSource(buggy_text);
    if (!parsed.ok()) continue;
    const bool compiles = minilang::Check(*parsed.program).empty();
    bool differs = !compiles;
    if (!compiles && options.require_compilable) continue;
    if (compiles) {
      for (size_t i = 0; i < probes.size() && !differs; ++i) {
        if (!expected[i].returned()) continue;
        const auto got = minilang::Interpret(*parsed.program, probes[i], cfg.step_budget);
        differs = !got.returned() || got.value != expected[i].value;
      }
    }
    if (!differs) continue;
    return MakeSample(fixed_text, buggy_text, c.kind);
  }
  throw Error(ErrorCode::kGeneration, "no viable mutation");
}

}  // namespace rrlab::corpus
