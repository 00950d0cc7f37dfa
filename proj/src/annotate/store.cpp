#include "relbench/annotate/store.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <chrono>
#include <set>

#include "relbench/common/error.hpp"
#include "relbench/common/hash.hpp"
#include "relbench/common/text.hpp"

namespace relbench::annotate {

namespace {

// Prepared statement with positional binding; finalized on scope exit.
class Stmt {
 public:
  Stmt(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) fail("prepare");
  }
  ~Stmt() { sqlite3_finalize(stmt_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(int i, const std::string& v) {
    sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Stmt& bind(int i, std::int64_t v) {
    sqlite3_bind_int64(stmt_, i, v);
    return *this;
  }
  Stmt& bind(int i, double v) {
    sqlite3_bind_double(stmt_, i, v);
    return *this;
  }
  // True while rows remain.
  bool step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    fail("step");
  }
  void run() {
    while (step()) {
    }
  }
  std::string text(int col) const {
    auto p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    return p ? std::string(p, sqlite3_column_bytes(stmt_, col)) : std::string();
  }
  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }
  double real(int col) const { return sqlite3_column_double(stmt_, col); }

 private:
  [[noreturn]] void fail(const char* what) const {
    throw Error(ErrorCode::kIo, std::string("annotation store ") + what + ": " + sqlite3_errmsg(db_));
  }
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS queries (
  query_id TEXT PRIMARY KEY,
  text TEXT NOT NULL,
  repo TEXT NOT NULL,
  retriever TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS snapshots (
  query_id TEXT NOT NULL REFERENCES queries(query_id),
  rank INTEGER NOT NULL,
  entity_id TEXT NOT NULL,
  score REAL,
  PRIMARY KEY (query_id, rank)
);
CREATE TABLE IF NOT EXISTS labels (
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  annotator_id TEXT NOT NULL,
  query_id TEXT NOT NULL,
  entity_id TEXT NOT NULL,
  label INTEGER NOT NULL CHECK (label IN (0, 1)),
  timestamp_ms INTEGER NOT NULL,
  source TEXT NOT NULL,
  UNIQUE (annotator_id, query_id, entity_id, label, timestamp_ms, source)
);
CREATE TABLE IF NOT EXISTS annotators (
  annotator_id TEXT PRIMARY KEY,
  source TEXT NOT NULL
);
CREATE TRIGGER IF NOT EXISTS labels_no_update BEFORE UPDATE ON labels
  BEGIN SELECT RAISE(ABORT, 'labels are append-only'); END;
CREATE TRIGGER IF NOT EXISTS labels_no_delete BEFORE DELETE ON labels
  BEGIN SELECT RAISE(ABORT, 'labels are append-only'); END;
)sql";

const char* kLabelColumns = "SELECT annotator_id, query_id, entity_id, label, timestamp_ms, source FROM labels ";

LabelRecord label_from_row(const Stmt& s) {
  return LabelRecord{s.text(0), s.text(1), s.text(2), static_cast<int>(s.integer(3)), s.integer(4),
                     parse_source(s.text(5))};
}

bool later(const LabelRecord& a, const LabelRecord& b) {
  return std::tie(a.timestamp_ms, a.label) > std::tie(b.timestamp_ms, b.label);
}

// Scores compare by bit pattern so that -inf and exact doubles round-trip.
bool same_results(const std::vector<index::RankedResult>& a, const std::vector<index::RankedResult>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].entity_id != b[i].entity_id || a[i].rank != b[i].rank) return false;
    if (!(a[i].score == b[i].score || (a[i].score != a[i].score && b[i].score != b[i].score))) return false;
  }
  return true;
}

}  // namespace

std::string_view source_name(LabelSource s) { return s == LabelSource::kHuman ? "human" : "llm"; }

LabelSource parse_source(std::string_view name) {
  if (name == "human") return LabelSource::kHuman;
  if (name == "llm") return LabelSource::kLlm;
  throw Error(ErrorCode::kParse, "label source must be human or llm, got " + std::string(name));
}

std::string normalize_query(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : trim(text)) {
    bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (ws) {
      space = true;
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

std::string make_query_id(std::string_view text, std::string_view repo, std::string_view retriever) {
  std::string norm = normalize_query(text);
  return "q" + sha256_fields({norm, repo, retriever}).substr(0, 16);
}

Json LabelRecord::to_json() const {
  Json j;
  j["annotator_id"] = annotator_id;
  j["query_id"] = query_id;
  j["entity_id"] = entity_id;
  j["label"] = label;
  j["timestamp_ms"] = timestamp_ms;
  j["source"] = std::string(source_name(source));
  return j;
}

LabelRecord LabelRecord::from_json(const Json& j) {
  try {
    LabelRecord r;
    r.annotator_id = j.at("annotator_id").get<std::string>();
    r.query_id = j.at("query_id").get<std::string>();
    r.entity_id = j.at("entity_id").get<std::string>();
    r.label = j.at("label").get<int>();
    r.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
    r.source = parse_source(j.at("source").get<std::string>());
    if (r.label != 0 && r.label != 1) throw Error(ErrorCode::kParse, "label must be 0 or 1");
    if (r.annotator_id.empty()) throw Error(ErrorCode::kParse, "annotator_id must not be empty");
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad label record: ") + e.what());
  }
}

std::map<LabelKey, LabelRecord> effective_view(const std::vector<LabelRecord>& log) {
  std::map<LabelKey, LabelRecord> view;
  for (const auto& r : log) {
    LabelKey key{r.annotator_id, r.query_id, r.entity_id};
    auto it = view.find(key);
    if (it == view.end()) {
      view.emplace(std::move(key), r);
    } else if (later(r, it->second)) {
      it->second = r;
    }
  }
  return view;
}

void write_label_file(const std::vector<LabelRecord>& labels, const std::filesystem::path& path) {
  std::vector<Json> rows;
  rows.reserve(labels.size());
  for (const auto& l : labels) rows.push_back(l.to_json());
  write_file_atomic(path.string(), to_jsonl(rows));
}

std::vector<LabelRecord> read_label_file(const std::filesystem::path& path) {
  std::vector<LabelRecord> out;
  std::size_t line = 0;
  for (const auto& row : read_jsonl(path.string())) {
    ++line;
    try {
      out.push_back(LabelRecord::from_json(row));
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, path.string() + ": record " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

AnnotationStore::AnnotationStore(const std::filesystem::path& db_file) {
  if (db_file.has_parent_path()) std::filesystem::create_directories(db_file.parent_path());
  if (sqlite3_open(db_file.string().c_str(), &db_) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw Error(ErrorCode::kIo, "cannot open annotation store " + db_file.string() + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec("PRAGMA journal_mode=WAL;");
  exec(kSchema);
  clock_ = [] {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
  };
}

AnnotationStore::~AnnotationStore() { sqlite3_close(db_); }

void AnnotationStore::exec(const char* sql) const {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw Error(ErrorCode::kIo, "annotation store: " + msg);
  }
}

void AnnotationStore::set_clock(std::function<std::int64_t()> clock) {
  std::lock_guard lock(mu_);
  clock_ = std::move(clock);
}

QueryRecord AnnotationStore::register_query(std::string_view text, const std::string& repo,
                                            const std::string& retriever) {
  std::lock_guard lock(mu_);
  QueryRecord q{make_query_id(text, repo, retriever), normalize_query(text), repo, retriever};
  if (q.text.empty()) throw Error(ErrorCode::kPrecondition, "query text is empty");
  Stmt(db_, "INSERT OR IGNORE INTO queries (query_id, text, repo, retriever) VALUES (?, ?, ?, ?)")
      .bind(1, q.query_id)
      .bind(2, q.text)
      .bind(3, q.repo)
      .bind(4, q.retriever)
      .run();
  return q;
}

std::optional<QueryRecord> AnnotationStore::find_query(const std::string& query_id) const {
  std::lock_guard lock(mu_);
  Stmt s(db_, "SELECT query_id, text, repo, retriever FROM queries WHERE query_id = ?");
  s.bind(1, query_id);
  if (!s.step()) return std::nullopt;
  return QueryRecord{s.text(0), s.text(1), s.text(2), s.text(3)};
}

std::vector<QueryRecord> AnnotationStore::queries(const std::string& repo, const std::string& retriever) const {
  std::lock_guard lock(mu_);
  Stmt s(db_,
         "SELECT query_id, text, repo, retriever FROM queries WHERE (?1 = '' OR repo = ?1) AND "
         "(?2 = '' OR retriever = ?2) ORDER BY rowid");
  s.bind(1, repo).bind(2, retriever);
  std::vector<QueryRecord> out;
  while (s.step()) out.push_back({s.text(0), s.text(1), s.text(2), s.text(3)});
  return out;
}

void AnnotationStore::snapshot_results(const QueryRecord& query, const std::vector<index::RankedResult>& results) {
  std::lock_guard lock(mu_);
  {
    Stmt s(db_, "SELECT 1 FROM queries WHERE query_id = ?");
    s.bind(1, query.query_id);
    if (!s.step()) throw Error(ErrorCode::kReferential, "unknown query " + query.query_id);
  }
  std::vector<index::RankedResult> existing;
  {
    Stmt s(db_, "SELECT entity_id, rank, score FROM snapshots WHERE query_id = ? ORDER BY rank");
    s.bind(1, query.query_id);
    while (s.step()) existing.push_back({s.text(0), static_cast<int>(s.integer(1)), s.real(2)});
  }
  if (!existing.empty()) {
    if (same_results(existing, results)) return;
    throw Error(ErrorCode::kConflict, "query " + query.query_id +
                                          " already has a different result snapshot; the corpus or retriever "
                                          "changed since it was annotated");
  }
  exec("BEGIN");
  try {
    for (const auto& r : results) {
      Stmt(db_, "INSERT INTO snapshots (query_id, rank, entity_id, score) VALUES (?, ?, ?, ?)")
          .bind(1, query.query_id)
          .bind(2, static_cast<std::int64_t>(r.rank))
          .bind(3, r.entity_id)
          .bind(4, r.score)
          .run();
    }
    exec("COMMIT");
  } catch (...) {
    exec("ROLLBACK");
    throw;
  }
}

std::vector<index::RankedResult> AnnotationStore::snapshot(const std::string& query_id) const {
  std::lock_guard lock(mu_);
  Stmt s(db_, "SELECT entity_id, rank, score FROM snapshots WHERE query_id = ? ORDER BY rank");
  s.bind(1, query_id);
  std::vector<index::RankedResult> out;
  while (s.step()) out.push_back({s.text(0), static_cast<int>(s.integer(1)), s.real(2)});
  if (out.empty()) throw Error(ErrorCode::kReferential, "no result snapshot for query " + query_id);
  return out;
}

bool AnnotationStore::has_snapshot(const std::string& query_id) const {
  std::lock_guard lock(mu_);
  Stmt s(db_, "SELECT 1 FROM snapshots WHERE query_id = ? LIMIT 1");
  s.bind(1, query_id);
  return s.step();
}

std::map<std::string, LabelSource> AnnotationStore::annotators_locked() const {
  Stmt s(db_, "SELECT annotator_id, source FROM annotators");
  std::map<std::string, LabelSource> out;
  while (s.step()) out[s.text(0)] = parse_source(s.text(1));
  return out;
}

std::map<std::string, LabelSource> AnnotationStore::annotators() const {
  std::lock_guard lock(mu_);
  return annotators_locked();
}

LabelRecord AnnotationStore::record_label(const std::string& annotator_id, const std::string& query_id,
                                          const std::string& entity_id, int label, LabelSource source) {
  if (label != 0 && label != 1) throw Error(ErrorCode::kPrecondition, "label must be 0 or 1");
  if (annotator_id.empty()) throw Error(ErrorCode::kPrecondition, "annotator_id must not be empty");
  std::lock_guard lock(mu_);
  {
    Stmt s(db_, "SELECT 1 FROM snapshots WHERE query_id = ? AND entity_id = ?");
    s.bind(1, query_id).bind(2, entity_id);
    if (!s.step()) {
      throw Error(ErrorCode::kReferential,
                  "entity " + entity_id + " is not in the result snapshot of query " + query_id);
    }
  }
  auto known = annotators_locked();
  if (auto it = known.find(annotator_id); it != known.end() && it->second != source) {
    throw Error(ErrorCode::kCollision, "annotator " + annotator_id + " is already registered as " +
                                           std::string(source_name(it->second)));
  }
  std::int64_t last = 0;
  {
    Stmt s(db_, "SELECT COALESCE(MAX(timestamp_ms), 0) FROM labels");
    if (s.step()) last = s.integer(0);
  }
  LabelRecord r{annotator_id, query_id, entity_id, label, std::max(clock_(), last + 1), source};
  exec("BEGIN");
  try {
    Stmt(db_, "INSERT OR IGNORE INTO annotators (annotator_id, source) VALUES (?, ?)")
        .bind(1, annotator_id)
        .bind(2, std::string(source_name(source)))
        .run();
    Stmt(db_,
         "INSERT INTO labels (annotator_id, query_id, entity_id, label, timestamp_ms, source) "
         "VALUES (?, ?, ?, ?, ?, ?)")
        .bind(1, r.annotator_id)
        .bind(2, r.query_id)
        .bind(3, r.entity_id)
        .bind(4, static_cast<std::int64_t>(r.label))
        .bind(5, r.timestamp_ms)
        .bind(6, std::string(source_name(r.source)))
        .run();
    exec("COMMIT");
  } catch (...) {
    exec("ROLLBACK");
    throw;
  }
  return r;
}

std::vector<LabelRecord> AnnotationStore::query_labels(const char* where, const std::string& bind) const {
  std::lock_guard lock(mu_);
  Stmt s(db_, (std::string(kLabelColumns) + where).c_str());
  if (!bind.empty()) s.bind(1, bind);
  std::vector<LabelRecord> out;
  while (s.step()) out.push_back(label_from_row(s));
  return out;
}

std::vector<LabelRecord> AnnotationStore::log() const { return query_labels("ORDER BY seq", ""); }

std::vector<LabelRecord> AnnotationStore::effective_labels() const {
  std::vector<LabelRecord> out;
  for (auto& [key, r] : effective_view(log())) out.push_back(std::move(r));
  return out;
}

std::vector<LabelRecord> AnnotationStore::export_annotator(const std::string& annotator_id) const {
  return query_labels("WHERE annotator_id = ? ORDER BY seq", annotator_id);
}

MergeReport AnnotationStore::merge(const std::vector<LabelRecord>& imported) {
  std::lock_guard lock(mu_);
  auto known = annotators_locked();
  std::map<std::string, LabelSource> incoming;
  std::set<std::string> collisions;
  for (const auto& r : imported) {
    if (r.label != 0 && r.label != 1) throw Error(ErrorCode::kParse, "label must be 0 or 1");
    auto [it, fresh] = incoming.emplace(r.annotator_id, r.source);
    if (!fresh && it->second != r.source) collisions.insert(r.annotator_id);
    if (auto k = known.find(r.annotator_id); k != known.end() && k->second != r.source) {
      collisions.insert(r.annotator_id);
    }
  }
  if (!collisions.empty()) {
    std::vector<std::string> names(collisions.begin(), collisions.end());
    throw Error(ErrorCode::kCollision, "annotator id collision with a different source: " + join(names, ", "));
  }
  MergeReport report;
  report.read = imported.size();
  exec("BEGIN");
  try {
    for (const auto& [id, source] : incoming) {
      Stmt(db_, "INSERT OR IGNORE INTO annotators (annotator_id, source) VALUES (?, ?)")
          .bind(1, id)
          .bind(2, std::string(source_name(source)))
          .run();
    }
    for (const auto& r : imported) {
      Stmt(db_,
           "INSERT OR IGNORE INTO labels (annotator_id, query_id, entity_id, label, timestamp_ms, source) "
           "VALUES (?, ?, ?, ?, ?, ?)")
          .bind(1, r.annotator_id)
          .bind(2, r.query_id)
          .bind(3, r.entity_id)
          .bind(4, static_cast<std::int64_t>(r.label))
          .bind(5, r.timestamp_ms)
          .bind(6, std::string(source_name(r.source)))
          .run();
      if (sqlite3_changes(db_) > 0) {
        ++report.inserted;
      } else {
        ++report.duplicates;
      }
    }
    exec("COMMIT");
  } catch (...) {
    exec("ROLLBACK");
    throw;
  }
  return report;
}

}  // namespace relbench::annotate
