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

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "rrlab/corpus.hpp"
#include "rrlab/error.hpp"
#include "rrlab/rng.hpp"

namespace rrlab::corpus {

using nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kSyntactic: return "syntactic";
    case Split::kSemantic: return "semantic";
    case Split::kTest: return "test";
  }
  return "?";
}

namespace {

ordered_json ConfigToJson(const CorpusConfig& c) {
  return ordered_json{
      {"min_params", c.size.min_params},       {"max_params", c.size.max_params},
      {"min_statements", c.size.min_statements}, {"max_statements", c.size.max_statements},
      {"max_depth", c.size.max_depth},         {"max_expr_depth", c.size.max_expr_depth},
      {"max_constant", c.size.max_constant},   {"dev_tests", c.dev_tests},
      {"rgt_tests", c.rgt_tests},              {"step_budget", c.step_budget},
      {"probe_min", c.probe_min},              {"probe_max", c.probe_max},
  };
}

CorpusConfig ConfigFromJson(const ordered_json& j) {
  CorpusConfig c;
  c.size.min_params = j.at("min_params").get<int>();
  c.size.max_params = j.at("max_params").get<int>();
  c.size.min_statements = j.at("min_statements").get<int>();
  c.size.max_statements = j.at("max_statements").get<int>();
  c.size.max_depth = j.at("max_depth").get<int>();
  c.size.max_expr_depth = j.at("max_expr_depth").get<int>();
  c.size.max_constant = j.at("max_constant").get<int>();
  c.dev_tests = j.at("dev_tests").get<int>();
  c.rgt_tests = j.at("rgt_tests").get<int>();
  c.step_budget = j.at("step_budget").get<int64_t>();
  c.probe_min = j.at("probe_min").get<int64_t>();
  c.probe_max = j.at("probe_max").get<int64_t>();
  return c;
}

ordered_json ManifestToJson(const CorpusManifest& m) {
  return ordered_json{{"format_version", kFormatVersion}, {"seed", m.seed},
                      {"n_syntactic", m.n_syntactic},     {"n_semantic", m.n_semantic},
                      {"n_test", m.n_test},               {"config", ConfigToJson(m.config)}};
}

CorpusManifest ManifestFromJson(const ordered_json& j) {
  if (j.at("format_version").get<int>() != kFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch, "unsupported corpus format version");
  }
  CorpusManifest m;
  m.seed = j.at("seed").get<uint64_t>();
  m.n_syntactic = j.at("n_syntactic").get<size_t>();
  m.n_semantic = j.at("n_semantic").get<size_t>();
  m.n_test = j.at("n_test").get<size_t>();
  m.config = ConfigFromJson(j.at("config"));
  return m;
}

ordered_json TestsToJson(const std::vector<TestCase>& tests) {
  ordered_json arr = ordered_json::array();
  for (const auto& t : tests) arr.push_back(ordered_json{{"inputs", t.inputs}, {"expected", t.expected}});
  return arr;
}

std::vector<TestCase> TestsFromJson(const ordered_json& arr) {
  std::vector<TestCase> out;
  for (const auto& t : arr) {
    out.push_back(TestCase{t.at("inputs").get<std::vector<int64_t>>(), t.at("expected").get<int64_t>()});
  }
  return out;
}

ordered_json RecordToJson(const SemanticSample& s, bool with_tests) {
  const BugSample& b = s.base;
  ordered_json j{{"id", b.id},
                 {"fixed_program", b.fixed_program},
                 {"buggy_program", b.buggy_program},
                 {"hunk_start", b.hunk.start_line},
                 {"hunk_end", b.hunk.end_line},
                 {"buggy_text", b.buggy_text},
                 {"fix_text", b.fix_text},
                 {"context_text", b.context_text},
                 {"mutation", MutationName(b.mutation)}};
  if (with_tests) {
    j["dev_tests"] = TestsToJson(s.dev_tests);
    j["rgt_tests"] = TestsToJson(s.rgt_tests);
  }
  return j;
}

SemanticSample RecordFromJson(const ordered_json& j) {
  SemanticSample s;
  BugSample& b = s.base;
  b.id = j.at("id").get<std::string>();
  b.fixed_program = j.at("fixed_program").get<std::string>();
  b.buggy_program = j.at("buggy_program").get<std::string>();
  b.hunk.start_line = j.at("hunk_start").get<int>();
  b.hunk.end_line = j.at("hunk_end").get<int>();
  b.buggy_text = j.at("buggy_text").get<std::string>();
  b.fix_text = j.at("fix_text").get<std::string>();
  b.context_text = j.at("context_text").get<std::string>();
  if (j.contains("mutation")) {
    const auto kind = ParseMutationName(j.at("mutation").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown mutation kind");
    b.mutation = *kind;
  }
  if (j.contains("dev_tests")) s.dev_tests = TestsFromJson(j.at("dev_tests"));
  if (j.contains("rgt_tests")) s.rgt_tests = TestsFromJson(j.at("rgt_tests"));
  if (b.hunk.start_line < 1 || b.hunk.end_line < b.hunk.start_line - 1) {
    throw std::invalid_argument("invalid hunk range");
  }
  return s;
}

std::string SplitContents(const CorpusManifest& manifest, Split split,
                          const std::vector<SemanticSample>& samples) {
  std::string out;
  ordered_json header{{"corpus-manifest", ManifestToJson(manifest)}};
  header["corpus-manifest"]["split"] = SplitName(split);
  header["corpus-manifest"]["count"] = samples.size();
  out += header.dump();
  out += '\n';
  const bool with_tests = split != Split::kSyntactic;
  for (const auto& s : samples) {
    out += RecordToJson(s, with_tests).dump();
    out += '\n';
  }
  return out;
}

std::vector<SemanticSample> Wrap(const std::vector<BugSample>& bugs) {
  std::vector<SemanticSample> out;
  out.reserve(bugs.size());
  for (const auto& b : bugs) out.push_back(SemanticSample{b, {}, {}});
  return out;
}

void WriteFile(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  f << contents;
  if (!f) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace

void WriteSplit(const std::filesystem::path& path, const CorpusManifest& manifest, Split split,
                const std::vector<SemanticSample>& samples) {
  WriteFile(path, SplitContents(manifest, split, samples));
}

SplitFile ReadSplit(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  SplitFile out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const ordered_json j = ordered_json::parse(line);
      if (j.contains("corpus-manifest")) {
        if (line_no != 1) throw std::invalid_argument("manifest header must be the first line");
        out.manifest = ManifestFromJson(j.at("corpus-manifest"));
        continue;
      }
      out.samples.push_back(RecordFromJson(j));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kSchema, path.string() + ":" + std::to_string(line_no) +
                                          ": schema violation: " + e.what());
    }
  }
  return out;
}

void WriteCorpus(const std::filesystem::path& dir, const Corpus& corpus) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  const std::string syn = SplitContents(corpus.manifest, Split::kSyntactic, Wrap(corpus.syntactic));
  const std::string sem = SplitContents(corpus.manifest, Split::kSemantic, corpus.semantic);
  const std::string tst = SplitContents(corpus.manifest, Split::kTest, corpus.test);
  WriteFile(dir / "syntactic.jsonl", syn);
  WriteFile(dir / "semantic.jsonl", sem);
  WriteFile(dir / "test.jsonl", tst);

  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(CorpusHash(corpus)));
  ordered_json manifest{{"corpus-manifest", ManifestToJson(corpus.manifest)}};
  manifest["corpus-manifest"]["corpus_hash"] = hash;
  manifest["corpus-manifest"]["files"] = {"syntactic.jsonl", "semantic.jsonl", "test.jsonl"};
  WriteFile(dir / "manifest.json", manifest.dump(2) + "\n");
}

Corpus ReadCorpus(const std::filesystem::path& dir) {
  Corpus corpus;
  SplitFile syn = ReadSplit(dir / "syntactic.jsonl");
  SplitFile sem = ReadSplit(dir / "semantic.jsonl");
  SplitFile tst = ReadSplit(dir / "test.jsonl");
  if (syn.manifest) corpus.manifest = *syn.manifest;
  for (auto& s : syn.samples) corpus.syntactic.push_back(std::move(s.base));
  corpus.semantic = std::move(sem.samples);
  corpus.test = std::move(tst.samples);
  return corpus;
}

uint64_t CorpusHash(const Corpus& corpus) {
  uint64_t h = Fnv1a64(SplitContents(corpus.manifest, Split::kSyntactic, Wrap(corpus.syntactic)));
  h = Fnv1a64(SplitContents(corpus.manifest, Split::kSemantic, corpus.semantic), h);
  return Fnv1a64(SplitContents(corpus.manifest, Split::kTest, corpus.test), h);
}

}  // namespace rrlab::corpus
