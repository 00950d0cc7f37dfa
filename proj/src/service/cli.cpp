#include "relbench/service/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>
#include <iostream>

#include "relbench/bootstrap/bootstrap.hpp"
#include "relbench/common/error.hpp"
#include "relbench/common/text.hpp"
#include "relbench/service/server.hpp"
#include "relbench/service/workspace.hpp"
#include "relbench/transpile/dataset.hpp"

namespace relbench::service {

namespace fs = std::filesystem;

namespace {

std::string default_data_dir() {
  const char* v = std::getenv("DATA_DIR");
  return v && *v ? v : "data";
}

std::string stats_table(const std::vector<std::pair<std::string, corpus::CorpusStats>>& rows) {
  std::ostringstream os;
  std::size_t w = 4;
  for (const auto& [name, s] : rows) w = std::max(w, name.size());
  auto line = [&](const std::string& name, const std::vector<std::string>& cols) {
    os << std::left << std::setw(static_cast<int>(w)) << name;
    for (const auto& c : cols) os << "  " << std::right << std::setw(15) << c;
    os << '\n';
  };
  line("repo", {"% docs absent", "functions", "lines of code", "doc tokens", "code tokens"});
  for (const auto& [name, s] : rows) {
    line(name, {format_fixed(s.pct_docs_absent, 2), std::to_string(s.function_count), std::to_string(s.lines_of_code),
                std::to_string(s.doc_token_count), std::to_string(s.code_token_count)});
  }
  return os.str();
}

std::unique_ptr<judge::JudgeProvider> make_provider(const std::string& mock, const judge::JudgeConfig& config) {
  if (mock == "lexical") return std::make_unique<judge::LexicalMockProvider>();
  if (!mock.empty()) return std::make_unique<judge::TranscriptProvider>(mock);
  return judge::OpenAiCompatProvider::from_env(config);
}

judge::JudgeConfig judge_config(const Workspace& ws, std::string model) {
  if (model.empty()) {
    const char* env = std::getenv("JUDGE_MODEL");
    model = env ? env : "";
  }
  if (model.empty()) throw Error(ErrorCode::kConfig, "no judge model given and JUDGE_MODEL is unset");
  for (const auto& j : ws.config().judges) {
    if (j.model_id == model) return j;
  }
  judge::JudgeConfig c;
  c.model_id = model;
  return c;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Code-search relevance benchmarking workbench", "relbench"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string data_dir = default_data_dir();
  app.add_option("--data-dir", data_dir, "Data directory (default $DATA_DIR or ./data)");

  auto workspace = [&] { return std::make_unique<Workspace>(AppConfig::load(data_dir)); };

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Extract functions from a repository into the corpus");
  std::string repo, root, language, commit;
  std::vector<std::string> exts, ignore;
  ingest->add_option("--repo", repo, "Repository name (a configured repository when --root is omitted)");
  ingest->add_option("--root", root, "Repository checkout");
  ingest->add_option("--language", language, "c, javascript, python, go or java");
  ingest->add_option("--ext", exts, "File suffix to include (repeatable)");
  ingest->add_option("--commit", commit, "Revision the checkout is at");
  ingest->add_option("--ignore", ignore, "Glob of paths to skip (repeatable)");
  ingest->callback([&] {
    auto ws = workspace();
    std::vector<corpus::RepoSpec> specs;
    if (!root.empty()) {
      if (repo.empty() || language.empty()) throw Error(ErrorCode::kConfig, "--root needs --repo and --language");
      corpus::RepoSpec spec;
      spec.name = repo;
      spec.root_path = root;
      auto lang = corpus::parse_language(language);
      if (!lang) throw Error(ErrorCode::kConfig, "unknown language " + language);
      spec.language = *lang;
      spec.extensions = exts;
      spec.commit = commit;
      spec.ignore = ignore;
      specs.push_back(spec);
    } else {
      for (const auto& s : ws->config().repos) {
        if (repo.empty() || s.name == repo) specs.push_back(s);
      }
      if (specs.empty()) throw Error(ErrorCode::kConfig, "nothing to ingest: give --root or configure repositories");
    }
    std::vector<std::pair<std::string, corpus::CorpusStats>> rows;
    for (const auto& spec : specs) {
      auto s = ws->ingest(spec);
      for (const auto& w : s.warnings) err << "warning: " << s.repo << "/" << w.rel_path << ": " << w.message << '\n';
      rows.emplace_back(s.repo, s.stats);
    }
    out << stats_table(rows);
  });

  // stats
  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  std::vector<std::string> corpus_files, stat_repos;
  stats->add_option("--corpus", corpus_files, "Corpus JSONL file (repeatable)");
  stats->add_option("--repo", stat_repos, "Ingested repository (repeatable; default all)");
  stats->callback([&] {
    std::vector<std::pair<std::string, corpus::CorpusStats>> rows;
    for (const auto& f : corpus_files) rows.emplace_back(fs::path(f).stem().string(), corpus::compute_stats(corpus::read_corpus(f)));
    if (corpus_files.empty()) {
      auto ws = workspace();
      auto names = stat_repos.empty() ? ws->repos() : stat_repos;
      for (const auto& r : names) rows.emplace_back(r, corpus::compute_stats(*ws->corpus(r)));
    }
    out << stats_table(rows);
  });

  // index
  auto* idx = app.add_subcommand("index", "Build a retriever index for a repository");
  std::string retriever = "bm25";
  bool force = false;
  idx->add_option("--repo", repo, "Repository")->required();
  idx->add_option("--retriever", retriever, "bm25 or dense:<model>");
  idx->add_flag("--force", force, "Rebuild even when up to date");
  idx->callback([&] {
    auto ws = workspace();
    auto config = ws->resolve_retriever(retriever);
    auto o = ws->build_index(repo, config, force);
    out << (o.rebuilt ? "built " : "up to date: ") << repo << " " << config.fingerprint() << " (" << o.meta.documents
        << " documents)\n";
  });

  // search
  auto* search = app.add_subcommand("search", "Run a query and freeze its results");
  std::string query;
  search->add_option("--repo", repo, "Repository")->required();
  search->add_option("--retriever", retriever, "bm25 or dense:<model>");
  search->add_option("--query", query, "Query text")->required();
  search->callback([&] {
    auto ws = workspace();
    out << ws->search(query, repo, ws->resolve_retriever(retriever)).to_json().dump(2) << '\n';
  });

  // annotate
  auto* annotate = app.add_subcommand("annotate", "Record a human relevance label");
  std::string query_id, entity_id, annotator;
  int label = -1;
  annotate->add_option("--query-id", query_id, "Query id from search")->required();
  annotate->add_option("--entity", entity_id, "Entity id")->required();
  annotate->add_option("--label", label, "0 or 1")->required();
  annotate->add_option("--annotator", annotator, "Annotator id")->required();
  annotate->callback([&] { out << workspace()->annotate(query_id, entity_id, label, annotator).to_json().dump() << '\n'; });

  // judge
  auto* jud = app.add_subcommand("judge", "Collect judge verdicts for searched queries");
  std::string model, mock;
  bool batch = false;
  int concurrency = 0;
  jud->add_option("--repo", repo, "Repository")->required();
  jud->add_option("--retriever", retriever, "bm25 or dense:<model>");
  jud->add_option("--model", model, "Judge model id (default $JUDGE_MODEL)");
  jud->add_option("--mock", mock, "\"lexical\" or a transcript JSONL file instead of a live model");
  jud->add_flag("--batch", batch, "Use the batch request file pathway");
  jud->add_option("--concurrency", concurrency, "Requests in flight");
  jud->callback([&] {
    auto ws = workspace();
    auto config = ws->resolve_retriever(retriever);
    auto jc = judge_config(*ws, model);
    if (concurrency > 0) jc.concurrency = concurrency;
    if (batch || (jc.provider == judge::ProviderKind::kBatchFile && mock.empty())) {
      out << ws->run_judge_batch(repo, config, jc).to_json().dump() << '\n';
      return;
    }
    auto provider = make_provider(mock, jc);
    out << ws->run_judge(repo, config, jc, *provider).to_json().dump() << '\n';
  });

  // metrics
  auto* met = app.add_subcommand("metrics", "Agreement between human and judge labels");
  std::vector<std::string> met_repos;
  std::string judge_model, out_file;
  met->add_option("--repo", met_repos, "Repository (repeatable: one table row each)")->required();
  met->add_option("--retriever", retriever, "bm25 or dense:<model>");
  met->add_option("--judge", judge_model, "Judge model id")->required();
  met->add_option("--annotator", annotator, "Human annotator (default: the only one)");
  met->add_option("--out", out_file, "Write the reports as JSON");
  met->callback([&] {
    auto ws = workspace();
    auto config = ws->resolve_retriever(retriever);
    std::vector<metrics::AgreementReport> reports;
    for (const auto& r : met_repos) reports.push_back(ws->report(r, config, judge_model, annotator));
    if (!out_file.empty()) {
      Json j = reports.size() == 1 ? reports[0].to_json() : Json::array();
      if (reports.size() > 1) {
        for (const auto& r : reports) j.push_back(r.to_json());
      }
      write_file_atomic(out_file, j.dump(2) + "\n");
    }
    out << metrics::render_report_table(reports);
    for (const auto& r : reports) out << '\n' << metrics::render_crosstab(r.cross_tab, r.repo);
  });

  // transpile
  auto* tr = app.add_subcommand("transpile", "Translate Python functions to C");
  std::string in_file, out_dir, py_file, default_type = "None";
  tr->add_option("--in", in_file, "QA dataset JSONL with id, query, code, label");
  tr->add_option("--out", out_dir, "Output directory for --in");
  tr->add_option("--file", py_file, "Single Python file to translate to standard output");
  tr->add_option("--default-type", default_type, "C type used for unannotated values");
  tr->callback([&] {
    transpile::TypeMapping types;
    types.default_type = default_type;
    if (!py_file.empty()) {
      auto r = transpile::transpile_function(read_file(py_file), types);
      if (r.ok()) {
        out << r.c_source;
        return;
      }
      throw Error(ErrorCode::kParse, std::string(transpile::category_name(r.failure->category)) +
                                         (r.failure->node_kind.empty() ? "" : "/" + r.failure->node_kind) + ": " +
                                         r.failure->detail);
    }
    if (in_file.empty() || out_dir.empty()) throw Error(ErrorCode::kConfig, "give --file, or --in with --out");
    auto result = transpile::transpile_dataset(transpile::read_qa_jsonl(in_file), types);
    transpile::write_dataset_outputs(out_dir, result);
    out << render_stats_table(result.stats);
  });

  // bootstrap
  auto* boot = app.add_subcommand("bootstrap", "Judge transpiled QA pairs against their original labels");
  boot->add_option("--in", in_file, "QA dataset JSONL")->required();
  boot->add_option("--model", model, "Judge model id (default $JUDGE_MODEL)");
  boot->add_option("--mock", mock, "\"lexical\" or a transcript JSONL keyed by record id");
  boot->add_flag("--batch", batch, "Use the batch request file pathway");
  boot->add_option("--out", out_dir, "Run directory")->required();
  boot->add_option("--default-type", default_type, "C type used for unannotated values");
  boot->callback([&] {
    judge::JudgeConfig jc;
    jc.model_id = model.empty() && std::getenv("JUDGE_MODEL") ? std::getenv("JUDGE_MODEL") : model;
    if (jc.model_id.empty()) throw Error(ErrorCode::kConfig, "no judge model given and JUDGE_MODEL is unset");
    bootstrap::BootstrapOptions opts;
    opts.types.default_type = default_type;
    opts.batch = batch;
    std::unique_ptr<judge::JudgeProvider> provider;
    if (!batch) provider = make_provider(mock, jc);
    bootstrap::run_bootstrap(transpile::read_qa_jsonl(in_file), fs::path(in_file).stem().string(), jc,
                                        provider.get(), out_dir, opts);
    out << read_file((fs::path(out_dir) / "crosstab.txt").string());
  });

  // merge-annotations
  auto* merge = app.add_subcommand("merge-annotations", "Import label files exported elsewhere");
  std::vector<std::string> label_files;
  merge->add_option("files", label_files, "Label JSONL files")->required();
  merge->callback([&] {
    auto ws = workspace();
    std::vector<annotate::LabelRecord> all;
    for (const auto& f : label_files) {
      auto part = annotate::read_label_file(f);
      all.insert(all.end(), part.begin(), part.end());
    }
    auto r = ws->store().merge(all);
    out << Json{{"read", r.read}, {"inserted", r.inserted}, {"duplicates", r.duplicates}}.dump() << '\n';
  });

  // export-annotations
  auto* exp = app.add_subcommand("export-annotations", "Write one annotator's label log");
  exp->add_option("--annotator", annotator, "Annotator id")->required();
  exp->add_option("--out", out_file, "Output JSONL (default standard output)");
  exp->callback([&] {
    auto ws = workspace();
    auto labels = ws->store().export_annotator(annotator);
    if (out_file.empty()) {
      std::vector<Json> rows;
      for (const auto& l : labels) rows.push_back(l.to_json());
      out << to_jsonl(rows);
    } else {
      annotate::write_label_file(labels, out_file);
      out << labels.size() << " labels written to " << out_file << '\n';
    }
  });

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string listen;
  serve->add_option("--listen", listen, "host:port (default from config, localhost:8080)");
  serve->callback([&] {
    auto ws = workspace();
    std::string addr = listen.empty() ? ws->config().listen_addr : listen;
    auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw Error(ErrorCode::kConfig, "listen address must be host:port");
    int port = 0;
    try {
      port = std::stoi(addr.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfig, "bad port in " + addr);
    }
    Server server(*ws);
    port = server.bind(addr.substr(0, colon), port);
    out << "listening on http://" << addr.substr(0, colon) << ":" << port << std::endl;
    server.listen();
  });

  std::vector<std::string> argv_store{"relbench"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;
    err << "error: usage: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace relbench::service
