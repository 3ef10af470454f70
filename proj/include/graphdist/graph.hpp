#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace graphdist {

/// Undirected weighted graph with optional per-node real attribute vectors.
/// Immutable after construction; build through the validating constructor.
class GraphInstance {
 public:
  /// edges are (node id, node id, weight) triples, one per unordered pair.
  /// attrs maps node id -> attribute vector; either empty or total with a
  /// single shared length.
  GraphInstance(std::string id, std::vector<std::string> nodes,
                const std::vector<std::tuple<std::string, std::string, double>>& edges,
                const std::map<std::string, std::vector<double>>& attrs = {});

  const std::string& id() const { return id_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::string& node(std::size_t i) const { return nodes_[i]; }
  std::size_t node_index(const std::string& name) const;

  /// Weight of the unordered pair (i, j); absent pairs read as 0.
  double weight(std::size_t i, std::size_t j) const;
  std::size_t degree(std::size_t i) const { return adj_[i].size(); }
  double weighted_degree(std::size_t i) const;
  const std::vector<std::pair<std::size_t, double>>& neighbors(std::size_t i) const {
    return adj_[i];
  }

  /// Unordered-pair edge map keyed on (min index, max index).
  const std::map<std::pair<std::size_t, std::size_t>, double>& edge_weights() const {
    return edges_;
  }
  std::size_t edge_count() const { return edges_.size(); }

  bool has_attributes() const { return !attributes_.empty(); }
  std::size_t attribute_dim() const;
  const std::vector<double>& attribute(std::size_t i) const { return attributes_[i]; }

  /// Same graph with its node list permuted: nodes()[p] == old nodes()[perm[p]].
  GraphInstance permuted(const std::vector<std::size_t>& perm) const;

 private:
  std::string id_;
  std::vector<std::string> nodes_;
  std::map<std::string, std::size_t> index_;
  std::map<std::pair<std::size_t, std::size_t>, double> edges_;
  std::vector<std::vector<std::pair<std::size_t, double>>> adj_;  // sorted by neighbor index
  std::vector<std::vector<double>> attributes_;                   // empty or one vector per node
};

struct Corpus {
  std::vector<GraphInstance> graphs;
  std::size_t d_x = 0;  // shared attribute dimension, 0 if attribute-free

  std::size_t size() const { return graphs.size(); }
  const GraphInstance& by_id(const std::string& id) const;
  std::size_t index_of(const std::string& id) const;
  std::vector<std::string> ids() const;
};

struct SplitAssignment {
  std::vector<std::string> train_ids;
  std::vector<std::string> validation_ids;
  std::vector<std::string> test_ids;
};

/// Line-delimited JSON corpus, one graph per line; see README for the record
/// layout. Weights round-trip bit-exactly.
Corpus load_corpus(const std::string& path);
void save_corpus(const Corpus& corpus, const std::string& path);

struct SyntheticSpec {
  std::size_t count = 60;
  std::size_t size_min = 5;
  std::size_t size_max = 8;
  double edge_prob = 0.5;
  std::size_t attr_dim = 0;
  std::uint64_t seed = 1;
};

/// Connected Erdos-Renyi graphs with unit edge weights; resamples until
/// connected (bounded), deterministic given the seed.
Corpus generate_synthetic_corpus(const SyntheticSpec& spec);

/// Floor-apportioned sizes with the remainder assigned to train.
SplitAssignment split_corpus(const Corpus& corpus, const std::array<double, 3>& ratios,
                             std::uint64_t seed);

std::size_t max_graph_size(const Corpus& corpus);

}  // namespace graphdist
