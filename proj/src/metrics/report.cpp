#include "relbench/metrics/report.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>

#include "relbench/common/error.hpp"
#include "relbench/common/text.hpp"

namespace relbench::metrics {

namespace {

constexpr int kDepth = 10;
constexpr double kPersistence = 0.9;

Json rounded(const std::optional<double>& v) { return v ? Json(round_to(*v, 5)) : Json(nullptr); }

std::string cell(const std::optional<double>& v) { return v ? format_fixed(*v, 5) : "undef"; }

// Entity ids in snapshot order, stably re-sorted so label-1 items come first.
std::vector<std::string> relevance_order(const std::vector<std::pair<std::string, int>>& ranked) {
  auto sorted = ranked;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  std::vector<std::string> ids;
  for (const auto& [id, label] : sorted) ids.push_back(id);
  return ids;
}

}  // namespace

Json AgreementReport::to_json() const {
  return {{"repo", repo},
          {"retriever", retriever},
          {"source_a", source_a},
          {"source_b", source_b},
          {"cross_tab", cross_tab.to_json()},
          {"kappa", rounded(kappa)},
          {"kendall_tau", rounded(kendall_tau)},
          {"spearman_rho", rounded(spearman_rho)},
          {"rbo_at_10", round_to(rbo_at_10, 5)},
          {"map_at_10", round_to(map_at_10, 5)},
          {"excluded_pairs", excluded_pairs},
          {"queries", queries},
          {"zero_relevant_queries", zero_relevant_queries}};
}

AgreementReport agreement_report(const annotate::AnnotationStore& store, const std::string& repo,
                                 const std::string& retriever, const std::string& source_a,
                                 const std::string& source_b) {
  AgreementReport r;
  r.repo = repo;
  r.retriever = retriever;
  r.source_a = source_a;
  r.source_b = source_b;

  using Key = std::pair<std::string, std::string>;  // query, entity
  std::map<Key, int> la, lb;
  for (const auto& rec : store.effective_labels()) {
    if (rec.annotator_id == source_a) la[{rec.query_id, rec.entity_id}] = rec.label;
    if (rec.annotator_id == source_b) lb[{rec.query_id, rec.entity_id}] = rec.label;
  }

  std::vector<int> va, vb;
  double rbo_sum = 0.0;
  std::size_t rbo_queries = 0;
  std::vector<std::vector<int>> relevance_lists;
  for (const auto& q : store.queries(repo, retriever)) {
    if (!store.has_snapshot(q.query_id)) continue;
    auto snapshot = store.snapshot(q.query_id);
    std::vector<std::pair<std::string, int>> ranked_a, ranked_b;
    std::vector<int> relevance;
    bool labelled_by_a = false, touched = false;
    for (const auto& res : snapshot) {
      auto ia = la.find({q.query_id, res.entity_id});
      auto ib = lb.find({q.query_id, res.entity_id});
      bool has_a = ia != la.end(), has_b = ib != lb.end();
      labelled_by_a |= has_a;
      touched |= has_a || has_b;
      if (relevance.size() < kDepth) relevance.push_back(has_a ? ia->second : 0);
      if (has_a && has_b) {
        va.push_back(ia->second);
        vb.push_back(ib->second);
        ranked_a.emplace_back(res.entity_id, ia->second);
        ranked_b.emplace_back(res.entity_id, ib->second);
      }
    }
    if (!touched) continue;
    for (const auto& res : snapshot) {
      if (!la.count({q.query_id, res.entity_id}) || !lb.count({q.query_id, res.entity_id})) ++r.excluded_pairs;
    }
    if (labelled_by_a) relevance_lists.push_back(std::move(relevance));
    if (!ranked_a.empty()) {
      rbo_sum += rbo_at_k(relevance_order(ranked_a), relevance_order(ranked_b), kPersistence, kDepth);
      ++rbo_queries;
    }
  }
  if (va.empty()) {
    throw Error(ErrorCode::kNoAnnotations, "no annotations: no pair in " + repo + " / " + retriever +
                                               " is labelled by both " + source_a + " and " + source_b);
  }

  r.cross_tab = cross_tab(va, vb);
  r.kappa = cohen_kappa(r.cross_tab);
  auto corr = rank_correlations(va, vb);
  r.kendall_tau = corr.kendall_tau;
  r.spearman_rho = corr.spearman_rho;
  r.rbo_at_10 = rbo_sum / static_cast<double>(rbo_queries);
  MapResult m = map_at_k(relevance_lists, kDepth);
  r.map_at_10 = m.map;
  r.queries = rbo_queries;
  r.zero_relevant_queries = m.zero_relevant;
  return r;
}

std::string render_report_table(const std::vector<AgreementReport>& reports) {
  std::size_t w = 4;
  for (const auto& r : reports) w = std::max(w, r.repo.size());
  std::ostringstream os;
  auto line = [&](const std::string& c0, const std::vector<std::string>& cols) {
    os << std::left << std::setw(static_cast<int>(w)) << c0;
    for (const auto& c : cols) os << "  " << std::right << std::setw(9) << c;
    os << '\n';
  };
  line("repo", {"kappa", "tau", "rho", "RBO@10", "MAP@10", "agree%", "N", "excluded"});
  for (const auto& r : reports) {
    line(r.repo, {cell(r.kappa), cell(r.kendall_tau), cell(r.spearman_rho), format_fixed(r.rbo_at_10, 5),
                  format_fixed(r.map_at_10, 5), format_fixed(r.cross_tab.percent_agreement(), 2),
                  std::to_string(r.cross_tab.total()), std::to_string(r.excluded_pairs)});
  }
  return os.str();
}

}  // namespace relbench::metrics
