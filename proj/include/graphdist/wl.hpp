#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "graphdist/graph.hpp"
#include "graphdist/matrix.hpp"

namespace graphdist {

/// Corpus-wide Weisfeiler-Lehman codes. Code dictionaries are built from
/// sorted key sets, so codes depend only on structure, never on the node
/// input order.
struct WLCodeTable {
  std::map<std::pair<std::string, std::string>, int> codes;  // (graph id, node id) -> code
  int iterations = 0;

  int code(const std::string& graph_id, const std::string& node_id) const;
};

/// Iterative color refinement. Initial color: attribute vector when the
/// corpus has attributes, node degree otherwise. Each round recolors by
/// (own color, sorted neighbor colors) through a shared dictionary.
WLCodeTable compute_wl_codes(const Corpus& corpus, int iterations);

/// Total order by (WL code, degree, sorted neighbor WL codes, attributes),
/// with remaining tied classes resolved by individualization-refinement so
/// the order is invariant to the node input order whenever surviving ties
/// are automorphic. Returns node indices in canonical order.
std::vector<std::size_t> canonical_node_order(const GraphInstance& g, const WLCodeTable& wl);

/// Sinusoidal embedding: entry 2l is sin(code / 10000^(2l/d_h)), entry 2l+1
/// is cos(code / 10000^((2l+1)/d_h)). d_h must be even.
std::vector<double> positional_embedding(long long code, std::size_t d_h);

struct NodeEmbeddingConfig {
  std::size_t d_h = 32;
  std::size_t d_x = 0;
  std::size_t k_max = 0;
  Mat attr_weight;  // d_x x d_h, unused when d_x == 0
  Mat weight_map;   // k_max x d_h

  void validate() const;
};

struct InitialEmbeddings {
  Mat h0;  // k_max x d_h, rows >= valid_count all zero
  std::size_t valid_count = 0;
};

/// Constant per-graph inputs consumed by both the plain and the
/// differentiable embedding paths. Rows follow the canonical node order.
struct EncoderInputs {
  Mat attrs;        // k_max x d_x (absent columns when d_x == 0)
  Mat weight_rows;  // k_max x k_max, row i = canonical weight vector of node i
  Mat positional;   // k_max x d_h, WL-code embedding + degree embedding
  std::size_t valid_count = 0;
};

EncoderInputs build_encoder_inputs(const GraphInstance& g, const WLCodeTable& wl,
                                   std::size_t d_h, std::size_t d_x, std::size_t k_max);

/// h_i = attr embedding + WL-code embedding + weight-vector embedding +
/// degree embedding, rows in canonical order, zero-padded to k_max.
InitialEmbeddings initial_embedding_matrix(const GraphInstance& g, const WLCodeTable& wl,
                                           const NodeEmbeddingConfig& config);

}  // namespace graphdist
