#pragma once

#include <string>
#include <vector>

#include "graphdist/distance.hpp"
#include "graphdist/graph.hpp"

namespace graphdist {

/// Pearson correlation of fractional ranks (average-rank ties). Errors on
/// length mismatch, length < 2, or a constant sequence.
double spearman_rho(const std::vector<double>& a, const std::vector<double>& b);

/// Tie-adjusted tau-b from concordant/discordant pair counts.
double kendall_tau(const std::vector<double>& a, const std::vector<double>& b);

/// |top-k by prediction ∩ top-k by truth| / k; smaller score ranks first,
/// ties broken by index order.
double precision_at_k(const std::vector<double>& pred_scores,
                      const std::vector<double>& true_scores, std::size_t k);

struct QueryMetrics {
  std::string id;
  double rho = 0.0;
  double tau = 0.0;
  double p_at_k = 0.0;
};

struct EvalReport {
  std::vector<QueryMetrics> per_query;
  double rho = 0.0;
  double tau = 0.0;
  double p_at_k = 0.0;
  std::size_t k = 10;
};

/// Per test query, ranks every other corpus graph by predicted and true
/// distance; metrics are averaged over queries.
EvalReport evaluate(const DistanceMatrix& pred, const DistanceMatrix& truth,
                    const SplitAssignment& splits, std::size_t k);

void save_report(const EvalReport& report, const std::string& path);

}  // namespace graphdist
