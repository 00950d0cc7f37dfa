#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace relbench::corpus {

enum class Language { kC, kJavaScript, kPython, kGo, kJava };

std::string_view language_name(Language lang);  // c, javascript, python, go, java
std::optional<Language> parse_language(std::string_view name);
std::vector<std::string> default_extensions(Language lang);

struct RepoSpec {
  std::string name;
  std::filesystem::path root_path;
  Language language = Language::kPython;
  std::vector<std::string> extensions;  // each starts with '.'; empty means the language default
  std::string commit;                   // recorded as a 10-character prefix
  std::vector<std::string> ignore;      // fnmatch patterns on relative paths or single path components

  // Throws Error(kConfig) when extensions are malformed.
  void validate() const;
  std::vector<std::string> effective_extensions() const;
};

struct CodeEntity {
  std::string entity_id;
  std::string repo;
  std::string rel_path;
  std::string function_name;
  std::string code;
  std::string docstring;
  std::int64_t start_line = 0;
  std::int64_t end_line = 0;

  bool operator==(const CodeEntity&) const = default;
};

struct Warning {
  std::string rel_path;
  std::string message;
};

struct WalkResult {
  std::vector<std::string> files;  // relative paths, '/'-separated, lexicographic
  std::vector<Warning> warnings;
};

// Matching regular files under the root. Version-control metadata
// directories are skipped; unreadable matches become warnings.
// Throws Error(kPath) when the root is not a directory.
WalkResult walk_repo(const RepoSpec& spec);

struct ExtractResult {
  std::vector<CodeEntity> entities;
  std::optional<std::string> error;  // set when the file could not be parsed
};

// Functions in one file's text, in source order.
ExtractResult extract_functions(std::string_view source, Language lang, const std::string& repo,
                                const std::string& rel_path);

std::string make_entity_id(std::string_view repo, std::string_view rel_path, std::int64_t start_line,
                           std::string_view code);

struct IngestResult {
  std::vector<CodeEntity> entities;  // sorted by (rel_path, start_line)
  std::vector<Warning> warnings;
  std::size_t files_scanned = 0;
};

// walk_repo + extract_functions over every file (OpenMP across files).
IngestResult ingest_repo(const RepoSpec& spec);
IngestResult ingest_repo_serial(const RepoSpec& spec);

// Writes the corpus atomically; returns the record count.
std::size_t write_corpus(const std::vector<CodeEntity>& entities, const std::filesystem::path& out);
std::vector<CodeEntity> read_corpus(const std::filesystem::path& path);

struct CorpusStats {
  std::int64_t function_count = 0;
  std::int64_t lines_of_code = 0;
  std::int64_t doc_token_count = 0;
  std::int64_t code_token_count = 0;
  double pct_docs_absent = 0.0;  // rounded to 2 decimals
};

CorpusStats compute_stats(const std::vector<CodeEntity>& entities);

}  // namespace relbench::corpus
