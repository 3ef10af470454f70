#include "graphdist/graph.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "graphdist/errors.hpp"
#include "graphdist/rng.hpp"

namespace graphdist {

namespace {

void check_id(const std::string& id, const std::string& what) {
  if (id.empty()) throw DataError(what + ": empty identifier");
  if (id.find_first_of(",\r\n") != std::string::npos) {
    throw DataError(what + " '" + id + "': identifiers may not contain commas or newlines");
  }
}

bool is_connected(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  if (n <= 1) return true;
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<char> seen(n, 0);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop();
    for (std::size_t v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        q.push(v);
      }
    }
  }
  return reached == n;
}

}  // namespace

GraphInstance::GraphInstance(std::string id, std::vector<std::string> nodes,
                             const std::vector<std::tuple<std::string, std::string, double>>& edges,
                             const std::map<std::string, std::vector<double>>& attrs)
    : id_(std::move(id)), nodes_(std::move(nodes)) {
  check_id(id_, "graph");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    check_id(nodes_[i], "graph '" + id_ + "' node");
    if (!index_.emplace(nodes_[i], i).second) {
      throw DataError("graph '" + id_ + "': duplicate node '" + nodes_[i] + "'");
    }
  }
  adj_.resize(nodes_.size());
  for (const auto& [u, v, w] : edges) {
    const std::size_t ui = node_index(u);
    const std::size_t vi = node_index(v);
    if (ui == vi) throw DataError("graph '" + id_ + "': self-loop on node '" + u + "'");
    const auto key = std::minmax(ui, vi);
    auto [it, inserted] = edges_.emplace(std::make_pair(key.first, key.second), w);
    if (!inserted) {
      if (it->second != w) {
        throw DataError("graph '" + id_ + "': asymmetric duplicate edge (" + u + "," + v + ")");
      }
      throw DataError("graph '" + id_ + "': duplicate edge (" + u + "," + v + ")");
    }
  }
  // Weight 0 means "no edge" by definition; drop explicit zero entries.
  for (auto it = edges_.begin(); it != edges_.end();) {
    it = it->second == 0.0 ? edges_.erase(it) : std::next(it);
  }
  for (const auto& [key, w] : edges_) {
    adj_[key.first].emplace_back(key.second, w);
    adj_[key.second].emplace_back(key.first, w);
  }
  for (auto& row : adj_) std::sort(row.begin(), row.end());

  if (!attrs.empty()) {
    attributes_.resize(nodes_.size());
    std::size_t dim = attrs.begin()->second.size();
    if (attrs.size() != nodes_.size()) {
      throw DataError("graph '" + id_ + "': attributes must cover every node or none");
    }
    for (const auto& [name, vec] : attrs) {
      auto it = index_.find(name);
      if (it == index_.end()) {
        throw DataError("graph '" + id_ + "': attribute for unknown node '" + name + "'");
      }
      if (vec.size() != dim) {
        throw DataError("graph '" + id_ + "': attribute length mismatch on node '" + name + "'");
      }
      attributes_[it->second] = vec;
    }
    if (dim == 0) attributes_.clear();
  }
}

std::size_t GraphInstance::node_index(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw DataError("graph '" + id_ + "': unknown node '" + name + "'");
  }
  return it->second;
}

double GraphInstance::weight(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  const auto key = std::minmax(i, j);
  auto it = edges_.find(std::make_pair(key.first, key.second));
  return it == edges_.end() ? 0.0 : it->second;
}

double GraphInstance::weighted_degree(std::size_t i) const {
  double s = 0.0;
  for (const auto& [j, w] : adj_[i]) {
    (void)j;
    s += w;
  }
  return s;
}

std::size_t GraphInstance::attribute_dim() const {
  return attributes_.empty() ? 0 : attributes_[0].size();
}

GraphInstance GraphInstance::permuted(const std::vector<std::size_t>& perm) const {
  if (perm.size() != nodes_.size()) throw DataError("permuted: wrong permutation length");
  std::vector<std::string> n(perm.size());
  std::map<std::string, std::vector<double>> attrs;
  for (std::size_t p = 0; p < perm.size(); ++p) {
    n[p] = nodes_[perm[p]];
    if (has_attributes()) attrs[n[p]] = attributes_[perm[p]];
  }
  std::vector<std::tuple<std::string, std::string, double>> es;
  for (const auto& [key, w] : edges_) {
    es.emplace_back(nodes_[key.first], nodes_[key.second], w);
  }
  return GraphInstance(id_, std::move(n), es, attrs);
}

const GraphInstance& Corpus::by_id(const std::string& id) const {
  return graphs[index_of(id)];
}

std::size_t Corpus::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (graphs[i].id() == id) return i;
  }
  throw DataError("corpus: unknown graph id '" + id + "'");
}

std::vector<std::string> Corpus::ids() const {
  std::vector<std::string> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(g.id());
  return out;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_corpus: cannot open '" + path + "'");
  Corpus corpus;
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("load_corpus: " + path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    const std::string where = path + ":" + std::to_string(lineno);
    try {
      const std::string id = rec.at("id").get<std::string>();
      if (!seen.emplace(id, lineno).second) {
        throw DataError("duplicate graph id '" + id + "'");
      }
      std::vector<std::string> nodes = rec.at("nodes").get<std::vector<std::string>>();
      std::vector<std::tuple<std::string, std::string, double>> edges;
      for (const auto& e : rec.value("edges", nlohmann::json::array())) {
        if (!e.is_array() || e.size() != 3) throw DataError("edge record must be [u, v, w]");
        edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>(), e[2].get<double>());
      }
      std::map<std::string, std::vector<double>> attrs;
      if (rec.contains("attrs")) {
        for (const auto& [node, vec] : rec.at("attrs").items()) {
          attrs[node] = vec.get<std::vector<double>>();
        }
      }
      GraphInstance g(id, std::move(nodes), edges, attrs);
      if (corpus.graphs.empty()) {
        corpus.d_x = g.attribute_dim();
      } else if (g.attribute_dim() != corpus.d_x) {
        throw DataError("attribute dimension " + std::to_string(g.attribute_dim()) +
                        " differs from corpus dimension " + std::to_string(corpus.d_x));
      }
      corpus.graphs.push_back(std::move(g));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("load_corpus: " + where + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("load_corpus: " + where + ": " + e.what());
    }
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("save_corpus: cannot open '" + path + "' for writing");
  for (const auto& g : corpus.graphs) {
    nlohmann::json rec;
    rec["id"] = g.id();
    rec["nodes"] = g.nodes();
    auto edges = nlohmann::json::array();
    for (const auto& [key, w] : g.edge_weights()) {
      edges.push_back({g.node(key.first), g.node(key.second), w});
    }
    rec["edges"] = edges;
    if (g.has_attributes()) {
      nlohmann::json attrs;
      for (std::size_t i = 0; i < g.size(); ++i) attrs[g.node(i)] = g.attribute(i);
      rec["attrs"] = attrs;
    }
    out << rec.dump() << '\n';
  }
  if (!out) throw DataError("save_corpus: write failure on '" + path + "'");
}

Corpus generate_synthetic_corpus(const SyntheticSpec& spec) {
  if (spec.count == 0) throw DataError("generate_synthetic_corpus: count must be positive");
  if (spec.size_min < 1 || spec.size_min > spec.size_max) {
    throw DataError("generate_synthetic_corpus: need 1 <= size_min <= size_max");
  }
  if (spec.edge_prob < 0.0 || spec.edge_prob > 1.0) {
    throw DataError("generate_synthetic_corpus: edge_prob outside [0, 1]");
  }
  constexpr std::size_t kMaxAttempts = 1000;
  Rng rng(spec.seed);
  Corpus corpus;
  corpus.d_x = spec.attr_dim;
  for (std::size_t gi = 0; gi < spec.count; ++gi) {
    const std::size_t n = spec.size_min + rng.index(spec.size_max - spec.size_min + 1);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    bool ok = false;
    for (std::size_t attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
      pairs.clear();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (rng.uniform() < spec.edge_prob) pairs.emplace_back(i, j);
        }
      }
      ok = is_connected(n, pairs);
    }
    if (!ok) {
      throw DataError("generate_synthetic_corpus: could not draw a connected graph of size " +
                      std::to_string(n) + " at edge_prob " + std::to_string(spec.edge_prob));
    }
    std::vector<std::string> nodes(n);
    for (std::size_t i = 0; i < n; ++i) nodes[i] = "n" + std::to_string(i);
    std::vector<std::tuple<std::string, std::string, double>> edges;
    for (const auto& [u, v] : pairs) edges.emplace_back(nodes[u], nodes[v], 1.0);
    std::map<std::string, std::vector<double>> attrs;
    if (spec.attr_dim > 0) {
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> vec(spec.attr_dim);
        for (double& x : vec) x = rng.uniform();
        attrs[nodes[i]] = vec;
      }
    }
    corpus.graphs.emplace_back("g" + std::to_string(gi), std::move(nodes), edges, attrs);
  }
  return corpus;
}

SplitAssignment split_corpus(const Corpus& corpus, const std::array<double, 3>& ratios,
                             std::uint64_t seed) {
  for (double r : ratios) {
    if (r < 0.0) throw DataError("split_corpus: ratios must be non-negative");
  }
  const double total = ratios[0] + ratios[1] + ratios[2];
  if (total <= 0.0) throw DataError("split_corpus: ratios must sum to a positive value");
  const std::size_t m = corpus.size();
  if (m < 3 && ratios[0] > 0.0 && ratios[1] > 0.0 && ratios[2] > 0.0) {
    throw DataError("split_corpus: corpus of " + std::to_string(m) +
                    " graphs cannot fill three positive splits");
  }
  const std::size_t n_val = static_cast<std::size_t>(m * ratios[1] / total);
  const std::size_t n_test = static_cast<std::size_t>(m * ratios[2] / total);
  const std::size_t n_train = m - n_val - n_test;  // floor remainders land in train

  std::vector<std::string> ids = corpus.ids();
  Rng rng(seed);
  rng.shuffle(ids);
  SplitAssignment split;
  split.train_ids.assign(ids.begin(), ids.begin() + n_train);
  split.validation_ids.assign(ids.begin() + n_train, ids.begin() + n_train + n_val);
  split.test_ids.assign(ids.begin() + n_train + n_val, ids.end());
  return split;
}

std::size_t max_graph_size(const Corpus& corpus) {
  if (corpus.graphs.empty()) throw DataError("max_graph_size: empty corpus");
  std::size_t k = 0;
  for (const auto& g : corpus.graphs) k = std::max(k, g.size());
  return k;
}

}  // namespace graphdist
