#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relbench/annotate/store.hpp"
#include "relbench/metrics/metrics.hpp"

namespace relbench::metrics {

struct AgreementReport {
  std::string repo;
  std::string retriever;
  std::string source_a;
  std::string source_b;
  CrossTab cross_tab;
  std::optional<double> kappa;
  std::optional<double> kendall_tau;
  std::optional<double> spearman_rho;
  double rbo_at_10 = 0.0;
  double map_at_10 = 0.0;
  std::size_t excluded_pairs = 0;  // snapshot pairs lacking a label from either source
  std::size_t queries = 0;  // queries with at least one pair labelled by both
  std::size_t zero_relevant_queries = 0;

  // Metric values rounded to 5 decimals; undefined values are null.
  Json to_json() const;
};

// Compares the effective labels of two annotators over every snapshotted
// query for (repo, retriever fingerprint). Source A is the reference for
// MAP@10. Throws Error(kNoAnnotations) when no pair carries both labels.
AgreementReport agreement_report(const annotate::AnnotationStore& store, const std::string& repo,
                                 const std::string& retriever, const std::string& source_a,
                                 const std::string& source_b);

// One row per report: kappa, tau, rho, RBO@10, MAP@10.
std::string render_report_table(const std::vector<AgreementReport>& reports);

}  // namespace relbench::metrics
