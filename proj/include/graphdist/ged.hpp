#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "graphdist/graph.hpp"

namespace graphdist {

/// Node substitution costs apply only when attribute labels differ; equal
/// labels substitute for free. Edge weights are ignored (presence only).
struct EditCostModel {
  double node_insert = 1.0;
  double node_delete = 1.0;
  double node_substitute = 1.0;
  double edge_insert = 1.0;
  double edge_delete = 1.0;

  void validate() const;
};

/// Exact graph edit distance by branch and bound over node assignments with
/// an admissible label-multiset / edge-count lower bound.
double exact_ged(const GraphInstance& g1, const GraphInstance& g2,
                 const EditCostModel& costs = {}, std::size_t size_cap = 8);

/// 1 - exp(-d / ((n1 + n2) / 2)), in [0, 1).
double normalized_ground_truth(double d, std::size_t n1, std::size_t n2);

/// Symmetric labeled-pair map keyed on lexicographically ordered id pairs.
struct LabeledPairs {
  std::map<std::pair<std::string, std::string>, double> values;

  static std::pair<std::string, std::string> key(const std::string& a, const std::string& b);
  bool has(const std::string& a, const std::string& b) const;
  double at(const std::string& a, const std::string& b) const;
  void set(const std::string& a, const std::string& b, double v);
  std::size_t size() const { return values.size(); }

  /// Line-delimited `id_i,id_j,distance` records.
  void save(const std::string& path) const;
  static LabeledPairs load(const std::string& path);
};

/// Normalized exact GED for every requested pair; pairs are independent and
/// computed in parallel with deterministic assembly.
LabeledPairs build_ground_truth_matrix(const Corpus& corpus,
                                       const std::vector<std::pair<std::string, std::string>>& pairs,
                                       const EditCostModel& costs = {}, std::size_t size_cap = 8);

std::vector<std::pair<std::string, std::string>> all_unordered_pairs(const Corpus& corpus);

}  // namespace graphdist
