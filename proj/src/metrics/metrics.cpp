#include "relbench/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <unordered_set>

#include "relbench/common/error.hpp"

namespace relbench::metrics {

std::int64_t CrossTab::agreement_hundredths() const {
  std::int64_t n = total();
  if (n <= 0) throw Error(ErrorCode::kPrecondition, "cross tabulation is empty");
  // floor(10000 * agree / n + 1/2)
  return (20000 * (n00 + n11) + n) / (2 * n);
}

Json CrossTab::to_json() const {
  Json j = {{"n00", n00}, {"n01", n01}, {"n10", n10}, {"n11", n11}, {"N", total()}};
  j["percent_agreement"] = total() > 0 ? Json(percent_agreement()) : Json(nullptr);
  return j;
}

CrossTab cross_tab(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kPrecondition, "label sequences differ in length");
  CrossTab t;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] != 0 && a[i] != 1) || (b[i] != 0 && b[i] != 1)) {
      throw Error(ErrorCode::kPrecondition, "labels must be 0 or 1");
    }
    (a[i] ? (b[i] ? t.n11 : t.n10) : (b[i] ? t.n01 : t.n00))++;
  }
  return t;
}

std::optional<double> cohen_kappa(const CrossTab& tab) {
  double n = static_cast<double>(tab.total());
  if (n <= 0) throw Error(ErrorCode::kPrecondition, "cross tabulation is empty");
  double po = static_cast<double>(tab.n00 + tab.n11) / n;
  double pe = (static_cast<double>(tab.row0()) * static_cast<double>(tab.col0()) +
               static_cast<double>(tab.row1()) * static_cast<double>(tab.col1())) /
              (n * n);
  if (pe >= 1.0) return std::nullopt;
  return (po - pe) / (1.0 - pe);
}

RankCorrelation rank_correlations(const std::vector<int>& a, const std::vector<int>& b) {
  CrossTab t = cross_tab(a, b);
  RankCorrelation out;
  if (t.total() < 2 || t.row0() == 0 || t.row1() == 0 || t.col0() == 0 || t.col1() == 0) return out;

  // For 0/1 data every pair is either tied in a, tied in b, or split across
  // one off-diagonal combination.
  double n = static_cast<double>(t.total());
  double concordant = static_cast<double>(t.n00) * static_cast<double>(t.n11);
  double discordant = static_cast<double>(t.n01) * static_cast<double>(t.n10);
  auto pairs = [](double m) { return m * (m - 1) / 2; };
  double n0 = pairs(n);
  double ties_a = pairs(static_cast<double>(t.row0())) + pairs(static_cast<double>(t.row1()));
  double ties_b = pairs(static_cast<double>(t.col0())) + pairs(static_cast<double>(t.col1()));
  out.kendall_tau = (concordant - discordant) / std::sqrt((n0 - ties_a) * (n0 - ties_b));

  // Average ranks are an affine map of the 0/1 values, so Spearman's rho is
  // the Pearson correlation of the labels themselves.
  out.spearman_rho = (concordant - discordant) /
                     std::sqrt(static_cast<double>(t.row0()) * static_cast<double>(t.row1()) *
                               static_cast<double>(t.col0()) * static_cast<double>(t.col1()));
  return out;
}

double rbo_at_k(const std::vector<std::string>& a, const std::vector<std::string>& b, double p, int k) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::kPrecondition, "rbo persistence must lie in (0, 1)");
  if (k < 1) throw Error(ErrorCode::kPrecondition, "rbo depth must be positive");
  std::size_t depth = std::min<std::size_t>(k, std::max(a.size(), b.size()));
  if (depth == 0) return 0.0;

  std::unordered_set<std::string> seen_a, seen_b;
  std::size_t overlap = 0;
  double sum = 0.0, weight = 1.0;
  for (std::size_t d = 1; d <= depth; ++d) {
    if (d <= a.size()) {
      const auto& x = a[d - 1];
      if (!seen_a.insert(x).second) throw Error(ErrorCode::kPrecondition, "duplicate item in ranked list: " + x);
      if (seen_b.count(x)) ++overlap;
    }
    if (d <= b.size()) {
      const auto& y = b[d - 1];
      if (!seen_b.insert(y).second) throw Error(ErrorCode::kPrecondition, "duplicate item in ranked list: " + y);
      if (seen_a.count(y)) ++overlap;
    }
    sum += weight * static_cast<double>(overlap) / static_cast<double>(d);
    weight *= p;
  }
  // weight is now p^depth.
  return sum * (1.0 - p) / (1.0 - weight);
}

double average_precision_at_k(const std::vector<int>& relevance, int k) {
  std::size_t depth = std::min<std::size_t>(relevance.size(), k);
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < depth; ++r) {
    if (relevance[r]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  return hits ? sum / static_cast<double>(hits) : 0.0;
}

MapResult map_at_k(const std::vector<std::vector<int>>& relevance_lists, int k) {
  MapResult out;
  out.queries = relevance_lists.size();
  if (relevance_lists.empty()) return out;
  double sum = 0.0;
  for (const auto& list : relevance_lists) {
    bool any = std::any_of(list.begin(), list.begin() + std::min<std::size_t>(list.size(), k), [](int v) { return v; });
    if (!any) ++out.zero_relevant;
    sum += average_precision_at_k(list, k);
  }
  out.map = sum / static_cast<double>(relevance_lists.size());
  return out;
}

std::string render_crosstab(const CrossTab& tab, const std::string& title) {
  std::ostringstream os;
  std::string pct = tab.total() > 0 ? [&] {
    std::ostringstream p;
    std::int64_t h = tab.agreement_hundredths();
    p << h / 100 << '.' << std::setw(2) << std::setfill('0') << h % 100 << '%';
    return p.str();
  }()
                                    : std::string("n/a");
  std::size_t w0 = std::max<std::size_t>({title.size(), 12, pct.size()});
  auto row = [&](const std::string& head, std::int64_t a, std::int64_t b, std::int64_t total) {
    os << std::left << std::setw(static_cast<int>(w0)) << head << std::right << std::setw(14) << a << std::setw(10)
       << b << std::setw(8) << total << '\n';
  };
  os << std::left << std::setw(static_cast<int>(w0)) << title << std::right << std::setw(14) << "not-relevant"
     << std::setw(10) << "relevant" << '\n';
  row("not-relevant", tab.n00, tab.n01, tab.row0());
  row("relevant", tab.n10, tab.n11, tab.row1());
  row(pct, tab.col0(), tab.col1(), tab.total());
  return os.str();
}

}  // namespace relbench::metrics
