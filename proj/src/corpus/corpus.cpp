#include "relbench/corpus/corpus.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <fstream>
#include <tuple>

#include "extract.hpp"
#include "relbench/common/error.hpp"
#include "relbench/common/hash.hpp"
#include "relbench/common/jsonl.hpp"
#include "relbench/common/text.hpp"
#include "relbench/common/tokenize.hpp"
#include "relbench/pyfront/lexer.hpp"

namespace fs = std::filesystem;

namespace relbench::corpus {

namespace {

constexpr std::string_view kLanguageNames[] = {"c", "javascript", "python", "go", "java"};

bool vcs_dir(const std::string& name) { return name == ".git" || name == ".hg" || name == ".svn"; }

bool ignored(const RepoSpec& spec, const std::string& rel) {
  if (spec.ignore.empty()) return false;
  std::vector<std::string> parts = split(rel, '/');
  for (const auto& pattern : spec.ignore) {
    if (fnmatch(pattern.c_str(), rel.c_str(), 0) == 0) return true;
    for (const auto& part : parts) {
      if (fnmatch(pattern.c_str(), part.c_str(), 0) == 0) return true;
    }
  }
  return false;
}

bool has_extension(const std::string& name, const std::vector<std::string>& exts) {
  for (const auto& e : exts) {
    if (ends_with(name, e) && name.size() > e.size()) return true;
  }
  return false;
}

void walk_dir(const RepoSpec& spec, const std::vector<std::string>& exts, const fs::path& dir,
              const std::string& prefix, WalkResult& out) {
  std::error_code ec;
  fs::directory_iterator it(dir, ec);
  if (ec) {
    out.warnings.push_back({prefix, "cannot list directory: " + ec.message()});
    return;
  }
  std::vector<fs::directory_entry> entries;
  for (; it != fs::directory_iterator(); it.increment(ec)) {
    if (ec) break;
    entries.push_back(*it);
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.path().filename().string() < b.path().filename().string(); });
  for (const auto& entry : entries) {
    std::string name = entry.path().filename().string();
    std::string rel = prefix.empty() ? name : prefix + "/" + name;
    if (ignored(spec, rel)) continue;
    fs::file_status link = entry.symlink_status(ec);
    if (fs::is_directory(link)) {
      if (!vcs_dir(name)) walk_dir(spec, exts, entry.path(), rel, out);
      continue;
    }
    if (!has_extension(name, exts)) continue;
    fs::file_status target = entry.status(ec);
    if (fs::is_symlink(link) && !fs::exists(target)) {
      out.warnings.push_back({rel, "unreadable: dangling symbolic link"});
      continue;
    }
    if (!fs::is_regular_file(target)) continue;
    std::ifstream probe(entry.path(), std::ios::binary);
    if (!probe) {
      out.warnings.push_back({rel, "unreadable: permission denied"});
      continue;
    }
    out.files.push_back(rel);
  }
}

std::string normalize_source(std::string_view raw) {
  std::string text = sanitize_utf8(raw);
  if (starts_with(text, "\xef\xbb\xbf")) text.erase(0, 3);
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') continue;
      out.push_back('\n');
      continue;
    }
    out.push_back(text[i]);
  }
  return out;
}

std::vector<RawFunction> extract_raw(std::string_view src, Language lang) {
  switch (lang) {
    case Language::kC:
      return extract_c(src);
    case Language::kGo:
      return extract_go(src);
    case Language::kJava:
      return extract_java(src);
    case Language::kJavaScript:
      return extract_javascript(src);
    case Language::kPython:
      return extract_python(src);
  }
  return {};
}

Json to_json(const CodeEntity& e) {
  return Json{{"entity_id", e.entity_id}, {"repo", e.repo},           {"rel_path", e.rel_path},
              {"function_name", e.function_name}, {"code", e.code}, {"docstring", e.docstring},
              {"start_line", e.start_line},     {"end_line", e.end_line}};
}

}  // namespace

std::string_view language_name(Language lang) { return kLanguageNames[static_cast<int>(lang)]; }

std::optional<Language> parse_language(std::string_view name) {
  for (int i = 0; i < 5; ++i) {
    if (kLanguageNames[i] == name) return static_cast<Language>(i);
  }
  if (name == "js") return Language::kJavaScript;
  return std::nullopt;
}

std::vector<std::string> default_extensions(Language lang) {
  switch (lang) {
    case Language::kC:
      return {".c", ".h"};
    case Language::kJavaScript:
      return {".js"};
    case Language::kPython:
      return {".py"};
    case Language::kGo:
      return {".go"};
    case Language::kJava:
      return {".java"};
  }
  return {};
}

void RepoSpec::validate() const {
  if (name.empty()) throw Error(ErrorCode::kConfig, "repository name is empty");
  for (const auto& e : extensions) {
    if (e.size() < 2 || e[0] != '.') throw Error(ErrorCode::kConfig, "extension must start with '.': " + e);
  }
}

std::vector<std::string> RepoSpec::effective_extensions() const {
  return extensions.empty() ? default_extensions(language) : extensions;
}

WalkResult walk_repo(const RepoSpec& spec) {
  spec.validate();
  std::error_code ec;
  if (!fs::is_directory(spec.root_path, ec)) {
    throw Error(ErrorCode::kPath, "repository root is not a directory: " + spec.root_path.string());
  }
  WalkResult out;
  walk_dir(spec, spec.effective_extensions(), spec.root_path, "", out);
  std::sort(out.files.begin(), out.files.end());
  return out;
}

std::string make_entity_id(std::string_view repo, std::string_view rel_path, std::int64_t start_line,
                           std::string_view code) {
  std::string line = std::to_string(start_line);
  return sha256_fields({repo, rel_path, line, code});
}

ExtractResult extract_functions(std::string_view source, Language lang, const std::string& repo,
                                const std::string& rel_path) {
  ExtractResult result;
  std::string text = normalize_source(source);
  std::vector<RawFunction> raw;
  try {
    raw = extract_raw(text, lang);
  } catch (const py::SyntaxError& e) {
    result.error = std::string("syntax error: ") + e.what();
    return result;
  } catch (const ScanError& e) {
    result.error = std::string("scan error: ") + e.what();
    return result;
  }
  for (auto& f : raw) {
    CodeEntity e;
    e.repo = repo;
    e.rel_path = rel_path;
    e.function_name = std::move(f.name);
    e.code = text.substr(f.begin, f.end - f.begin);
    e.docstring = std::move(f.doc);
    e.start_line = f.start_line;
    e.end_line = f.end_line;
    e.entity_id = make_entity_id(repo, rel_path, e.start_line, e.code);
    result.entities.push_back(std::move(e));
  }
  return result;
}

namespace {

IngestResult ingest(const RepoSpec& spec, bool parallel) {
  WalkResult walk = walk_repo(spec);
  const long n = static_cast<long>(walk.files.size());
  std::vector<ExtractResult> per_file(walk.files.size());
  std::vector<std::optional<std::string>> read_errors(walk.files.size());
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (long i = 0; i < n; ++i) {
    try {
      std::string source = read_file((spec.root_path / walk.files[i]).string());
      per_file[i] = extract_functions(source, spec.language, spec.name, walk.files[i]);
    } catch (const Error& e) {
      read_errors[i] = e.what();
    }
  }
  IngestResult out;
  out.warnings = std::move(walk.warnings);
  out.files_scanned = walk.files.size();
  for (std::size_t i = 0; i < per_file.size(); ++i) {
    if (read_errors[i]) out.warnings.push_back({walk.files[i], "unreadable: " + *read_errors[i]});
    if (per_file[i].error) out.warnings.push_back({walk.files[i], "skipped: " + *per_file[i].error});
    for (auto& e : per_file[i].entities) out.entities.push_back(std::move(e));
  }
  std::stable_sort(out.entities.begin(), out.entities.end(), [](const CodeEntity& a, const CodeEntity& b) {
    return std::tie(a.rel_path, a.start_line) < std::tie(b.rel_path, b.start_line);
  });
  return out;
}

}  // namespace

IngestResult ingest_repo(const RepoSpec& spec) { return ingest(spec, true); }

IngestResult ingest_repo_serial(const RepoSpec& spec) { return ingest(spec, false); }

std::size_t write_corpus(const std::vector<CodeEntity>& entities, const fs::path& out) {
  std::vector<Json> rows;
  rows.reserve(entities.size());
  for (const auto& e : entities) rows.push_back(to_json(e));
  write_file_atomic(out.string(), to_jsonl(rows));
  return rows.size();
}

std::vector<CodeEntity> read_corpus(const fs::path& path) {
  std::vector<CodeEntity> out;
  auto rows = read_jsonl(path.string());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Json& r = rows[i];
    try {
      CodeEntity e;
      e.entity_id = r.at("entity_id").get<std::string>();
      e.repo = r.at("repo").get<std::string>();
      e.rel_path = r.at("rel_path").get<std::string>();
      e.function_name = r.at("function_name").get<std::string>();
      e.code = r.at("code").get<std::string>();
      e.docstring = r.at("docstring").get<std::string>();
      e.start_line = r.at("start_line").get<std::int64_t>();
      e.end_line = r.at("end_line").get<std::int64_t>();
      out.push_back(std::move(e));
    } catch (const Json::exception& ex) {
      throw Error(ErrorCode::kParse, path.string() + ": record " + std::to_string(i + 1) + ": " + ex.what());
    }
  }
  return out;
}

CorpusStats compute_stats(const std::vector<CodeEntity>& entities) {
  CorpusStats s;
  std::int64_t absent = 0;
  for (const auto& e : entities) {
    ++s.function_count;
    s.lines_of_code += count_lines(e.code);
    s.code_token_count += static_cast<std::int64_t>(tokenize_terms(e.code).size());
    s.doc_token_count += static_cast<std::int64_t>(tokenize_terms(e.docstring).size());
    if (e.docstring.empty()) ++absent;
  }
  if (s.function_count > 0) {
    s.pct_docs_absent = round_to(100.0 * static_cast<double>(absent) / static_cast<double>(s.function_count), 2);
  }
  return s;
}

}  // namespace relbench::corpus
