#include "graphdist/ged.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "graphdist/errors.hpp"
#include "graphdist/kernels.hpp"

namespace graphdist {

void EditCostModel::validate() const {
  if (node_insert < 0 || node_delete < 0 || node_substitute < 0 || edge_insert < 0 ||
      edge_delete < 0) {
    throw DataError("EditCostModel: costs must be non-negative");
  }
}

namespace {

using Label = std::vector<double>;

Label label_of(const GraphInstance& g, std::size_t i) {
  return g.has_attributes() ? g.attribute(i) : Label{};
}

struct GedSearch {
  const GraphInstance& g1;
  const GraphInstance& g2;
  const EditCostModel& costs;

  std::vector<std::size_t> order;       // g1 nodes, decreasing degree
  std::vector<int> assigned;            // g1 node -> g2 node, -1 deleted, -2 undecided
  std::vector<char> used;               // g2 node taken
  std::vector<Label> labels1, labels2;
  double best = std::numeric_limits<double>::infinity();

  GedSearch(const GraphInstance& a, const GraphInstance& b, const EditCostModel& c)
      : g1(a), g2(b), costs(c) {
    order.resize(g1.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      if (g1.degree(x) != g1.degree(y)) return g1.degree(x) > g1.degree(y);
      return x < y;
    });
    assigned.assign(g1.size(), -2);
    used.assign(g2.size(), 0);
    labels1.reserve(g1.size());
    for (std::size_t i = 0; i < g1.size(); ++i) labels1.push_back(label_of(g1, i));
    labels2.reserve(g2.size());
    for (std::size_t i = 0; i < g2.size(); ++i) labels2.push_back(label_of(g2, i));
  }

  /// Edge cost incurred by deciding node u (mapped to v, or v < 0 deleted),
  /// against all previously decided g1 nodes.
  double edge_cost_of_decision(std::size_t step, std::size_t u, int v) const {
    double cost = 0.0;
    for (std::size_t s = 0; s < step; ++s) {
      const std::size_t u2 = order[s];
      const bool e1 = g1.weight(u, u2) != 0.0;
      const int v2 = assigned[u2];
      if (v < 0 || v2 < 0) {
        if (e1) cost += costs.edge_delete;
        continue;
      }
      const bool e2 = g2.weight(static_cast<std::size_t>(v), static_cast<std::size_t>(v2)) != 0.0;
      if (e1 && !e2) cost += costs.edge_delete;
      if (!e1 && e2) cost += costs.edge_insert;
    }
    return cost;
  }

  /// Insertions owed for everything of g2 not reached by the mapping.
  double completion_cost() const {
    double cost = 0.0;
    for (std::size_t v = 0; v < g2.size(); ++v) {
      if (!used[v]) cost += costs.node_insert;
    }
    for (const auto& [key, w] : g2.edge_weights()) {
      (void)w;
      if (!used[key.first] || !used[key.second]) cost += costs.edge_insert;
    }
    return cost;
  }

  double lower_bound(std::size_t step) const {
    // Remaining g1 nodes and unclaimed g2 nodes.
    std::map<Label, long long> counts;
    std::size_t r1 = 0, r2 = 0;
    for (std::size_t s = step; s < order.size(); ++s) {
      ++counts[labels1[order[s]]];
      ++r1;
    }
    long long match = 0;
    for (std::size_t v = 0; v < g2.size(); ++v) {
      if (used[v]) continue;
      ++r2;
      auto it = counts.find(labels2[v]);
      if (it != counts.end() && it->second > 0) {
        --it->second;
        ++match;
      }
    }
    double lb = 0.0;
    if (r1 > r2) lb += static_cast<double>(r1 - r2) * costs.node_delete;
    if (r2 > r1) lb += static_cast<double>(r2 - r1) * costs.node_insert;
    const long long paired = static_cast<long long>(std::min(r1, r2));
    if (paired > match) {
      lb += static_cast<double>(paired - match) *
            std::min(costs.node_substitute, costs.node_delete + costs.node_insert);
    }
    // Edges entirely inside the undecided regions.
    long long e1 = 0, e2 = 0;
    for (const auto& [key, w] : g1.edge_weights()) {
      (void)w;
      if (assigned[key.first] == -2 && assigned[key.second] == -2) ++e1;
    }
    for (const auto& [key, w] : g2.edge_weights()) {
      (void)w;
      if (!used[key.first] && !used[key.second]) ++e2;
    }
    if (e1 > e2) lb += static_cast<double>(e1 - e2) * costs.edge_delete;
    if (e2 > e1) lb += static_cast<double>(e2 - e1) * costs.edge_insert;
    return lb;
  }

  void dfs(std::size_t step, double cost) {
    if (cost + lower_bound(step) >= best) return;
    if (step == order.size()) {
      best = std::min(best, cost + completion_cost());
      return;
    }
    const std::size_t u = order[step];
    for (std::size_t v = 0; v < g2.size(); ++v) {
      if (used[v]) continue;
      const double subst = labels1[u] == labels2[v] ? 0.0 : costs.node_substitute;
      const double next =
          cost + subst + edge_cost_of_decision(step, u, static_cast<int>(v));
      if (next < best) {
        assigned[u] = static_cast<int>(v);
        used[v] = 1;
        dfs(step + 1, next);
        used[v] = 0;
        assigned[u] = -2;
      }
    }
    const double next = cost + costs.node_delete + edge_cost_of_decision(step, u, -1);
    if (next < best) {
      assigned[u] = -1;
      dfs(step + 1, next);
      assigned[u] = -2;
    }
  }
};

}  // namespace

double exact_ged(const GraphInstance& g1, const GraphInstance& g2, const EditCostModel& costs,
                 std::size_t size_cap) {
  costs.validate();
  if (g1.size() > size_cap || g2.size() > size_cap) {
    throw DataError("exact_ged: graphs '" + g1.id() + "' (" + std::to_string(g1.size()) +
                    " nodes) and '" + g2.id() + "' (" + std::to_string(g2.size()) +
                    " nodes) exceed the exact-search cap " + std::to_string(size_cap) +
                    "; use approximate labels from an external file instead");
  }
  GedSearch search(g1, g2, costs);
  search.dfs(0, 0.0);
  return search.best;
}

double normalized_ground_truth(double d, std::size_t n1, std::size_t n2) {
  if (d < 0.0) throw DataError("normalized_ground_truth: negative distance");
  if (n1 == 0 && n2 == 0) throw DataError("normalized_ground_truth: both graphs empty");
  return 1.0 - std::exp(-d / (static_cast<double>(n1 + n2) / 2.0));
}

std::pair<std::string, std::string> LabeledPairs::key(const std::string& a, const std::string& b) {
  return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
}

bool LabeledPairs::has(const std::string& a, const std::string& b) const {
  return values.count(key(a, b)) != 0;
}

double LabeledPairs::at(const std::string& a, const std::string& b) const {
  auto it = values.find(key(a, b));
  if (it == values.end()) throw DataError("LabeledPairs: no label for (" + a + ", " + b + ")");
  return it->second;
}

void LabeledPairs::set(const std::string& a, const std::string& b, double v) {
  values[key(a, b)] = v;
}

namespace {
std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

void LabeledPairs::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("LabeledPairs: cannot open '" + path + "' for writing");
  for (const auto& [k, v] : values) {
    out << k.first << ',' << k.second << ',' << fmt17(v) << '\n';
  }
  if (!out) throw DataError("LabeledPairs: write failure on '" + path + "'");
}

LabeledPairs LabeledPairs::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("LabeledPairs: cannot open '" + path + "'");
  LabeledPairs labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, v;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, v)) {
      throw DataError("LabeledPairs: " + path + ":" + std::to_string(lineno) +
                      ": expected id_i,id_j,distance");
    }
    try {
      labels.set(a, b, std::stod(v));
    } catch (const std::exception&) {
      throw DataError("LabeledPairs: " + path + ":" + std::to_string(lineno) + ": bad number '" +
                      v + "'");
    }
  }
  return labels;
}

LabeledPairs build_ground_truth_matrix(const Corpus& corpus,
                                       const std::vector<std::pair<std::string, std::string>>& pairs,
                                       const EditCostModel& costs, std::size_t size_cap) {
  costs.validate();
  // Validate everything up front; the parallel loop below must not throw.
  std::vector<std::pair<std::size_t, std::size_t>> indexed;
  indexed.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    const std::size_t ia = corpus.index_of(a);
    const std::size_t ib = corpus.index_of(b);
    if (corpus.graphs[ia].size() > size_cap || corpus.graphs[ib].size() > size_cap) {
      throw DataError("build_ground_truth_matrix: pair (" + a + ", " + b +
                      ") exceeds the exact-search cap " + std::to_string(size_cap));
    }
    indexed.emplace_back(ia, ib);
  }
  std::vector<double> out(indexed.size());
  const long long n = static_cast<long long>(indexed.size());
#pragma omp parallel for schedule(dynamic) if (kernels::parallel_enabled())
  for (long long p = 0; p < n; ++p) {
    const auto [ia, ib] = indexed[static_cast<std::size_t>(p)];
    const GraphInstance& ga = corpus.graphs[ia];
    const GraphInstance& gb = corpus.graphs[ib];
    const double d = exact_ged(ga, gb, costs, size_cap);
    out[static_cast<std::size_t>(p)] = normalized_ground_truth(d, ga.size(), gb.size());
  }
  LabeledPairs labels;
  for (std::size_t p = 0; p < indexed.size(); ++p) {
    labels.set(pairs[p].first, pairs[p].second, out[p]);
  }
  return labels;
}

std::vector<std::pair<std::string, std::string>> all_unordered_pairs(const Corpus& corpus) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t j = i + 1; j < corpus.size(); ++j) {
      pairs.emplace_back(corpus.graphs[i].id(), corpus.graphs[j].id());
    }
  }
  return pairs;
}

}  // namespace graphdist
