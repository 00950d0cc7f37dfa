#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relbench/common/jsonl.hpp"

namespace relbench::metrics {

// 2x2 agreement table. Rows are source A's label, columns source B's.
struct CrossTab {
  std::int64_t n00 = 0, n01 = 0, n10 = 0, n11 = 0;

  std::int64_t total() const { return n00 + n01 + n10 + n11; }
  std::int64_t row0() const { return n00 + n01; }
  std::int64_t row1() const { return n10 + n11; }
  std::int64_t col0() const { return n00 + n10; }
  std::int64_t col1() const { return n01 + n11; }

  // 100 * (n00 + n11) / N in hundredths, rounded half up with integer
  // arithmetic. Throws Error(kPrecondition) when N = 0.
  std::int64_t agreement_hundredths() const;
  double percent_agreement() const { return static_cast<double>(agreement_hundredths()) / 100.0; }

  bool operator==(const CrossTab&) const = default;
  Json to_json() const;
};

// Labels must be 0 or 1 and the sequences the same length.
CrossTab cross_tab(const std::vector<int>& a, const std::vector<int>& b);

// (p_o - p_e) / (1 - p_e); nullopt when p_e = 1.
std::optional<double> cohen_kappa(const CrossTab& tab);

struct RankCorrelation {
  std::optional<double> kendall_tau;  // tau-b
  std::optional<double> spearman_rho;
};

// Tie-corrected correlations of two aligned binary sequences. Both are
// undefined for N < 2 or when either sequence is constant.
RankCorrelation rank_correlations(const std::vector<int>& a, const std::vector<int>& b);

// Truncated rank-biased overlap at depth min(k, longer list). Identical
// lists score 1; two empty lists score 0.
double rbo_at_k(const std::vector<std::string>& a, const std::vector<std::string>& b, double p = 0.9, int k = 10);

struct MapResult {
  double map = 0.0;
  std::size_t queries = 0;
  std::size_t zero_relevant = 0;  // queries with nothing relevant in the top k
};

// Average precision at k of each binary relevance list (in rank order),
// averaged over lists. Lists without a relevant item contribute 0.
double average_precision_at_k(const std::vector<int>& relevance, int k = 10);
MapResult map_at_k(const std::vector<std::vector<int>>& relevance_lists, int k = 10);

// The confusion-matrix layout used in reports:
//
//   <title>       not-relevant  relevant
//   not-relevant          3845       987   4832
//   relevant              3171      1018   4189
//   53.91%                7016      2005   9021
std::string render_crosstab(const CrossTab& tab, const std::string& title);

}  // namespace relbench::metrics
