#include "graphdist/wl.hpp"

#include <algorithm>
#include <cmath>

#include "graphdist/errors.hpp"
#include "graphdist/kernels.hpp"

namespace graphdist {

int WLCodeTable::code(const std::string& graph_id, const std::string& node_id) const {
  auto it = codes.find({graph_id, node_id});
  if (it == codes.end()) {
    throw DataError("WLCodeTable: no code for node '" + node_id + "' of graph '" + graph_id + "'");
  }
  return it->second;
}

WLCodeTable compute_wl_codes(const Corpus& corpus, int iterations) {
  if (iterations < 0) throw DataError("compute_wl_codes: iterations must be non-negative");

  // colors[g][i] = current color of node i of graph g
  std::vector<std::vector<int>> colors(corpus.size());

  // Round 0: key is the attribute vector (attributed corpus) or the degree.
  {
    std::vector<std::vector<double>> keys;
    for (std::size_t gi = 0; gi < corpus.size(); ++gi) {
      const auto& g = corpus.graphs[gi];
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (corpus.d_x > 0) {
          keys.push_back(g.attribute(i));
        } else {
          keys.push_back({static_cast<double>(g.degree(i))});
        }
      }
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    for (std::size_t gi = 0; gi < corpus.size(); ++gi) {
      const auto& g = corpus.graphs[gi];
      colors[gi].resize(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        const std::vector<double> key =
            corpus.d_x > 0 ? g.attribute(i)
                           : std::vector<double>{static_cast<double>(g.degree(i))};
        colors[gi][i] = static_cast<int>(
            std::lower_bound(keys.begin(), keys.end(), key) - keys.begin());
      }
    }
  }

  for (int round = 0; round < iterations; ++round) {
    std::vector<std::vector<int>> keys;
    std::vector<std::vector<std::vector<int>>> per_node(corpus.size());
    for (std::size_t gi = 0; gi < corpus.size(); ++gi) {
      const auto& g = corpus.graphs[gi];
      per_node[gi].resize(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        std::vector<int> key{colors[gi][i]};
        std::vector<int> neigh;
        for (const auto& [j, w] : g.neighbors(i)) {
          (void)w;
          neigh.push_back(colors[gi][j]);
        }
        std::sort(neigh.begin(), neigh.end());
        key.insert(key.end(), neigh.begin(), neigh.end());
        per_node[gi][i] = key;
        keys.push_back(std::move(key));
      }
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    for (std::size_t gi = 0; gi < corpus.size(); ++gi) {
      for (std::size_t i = 0; i < per_node[gi].size(); ++i) {
        colors[gi][i] = static_cast<int>(
            std::lower_bound(keys.begin(), keys.end(), per_node[gi][i]) - keys.begin());
      }
    }
  }

  WLCodeTable table;
  table.iterations = iterations;
  for (std::size_t gi = 0; gi < corpus.size(); ++gi) {
    const auto& g = corpus.graphs[gi];
    for (std::size_t i = 0; i < g.size(); ++i) {
      table.codes[{g.id(), g.node(i)}] = colors[gi][i];
    }
  }
  return table;
}

namespace {

// Rank nodes by key; equal keys share a color. Colors inherit the key order.
template <typename Key>
std::vector<int> colors_from_keys(std::vector<Key> keys) {
  std::vector<Key> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> colors(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    colors[i] = static_cast<int>(
        std::lower_bound(sorted.begin(), sorted.end(), keys[i]) - sorted.begin());
  }
  return colors;
}

// Graph-local color refinement to a fixed point.
void refine_to_stable(const GraphInstance& g, std::vector<int>& colors) {
  for (;;) {
    std::vector<std::vector<int>> keys(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::vector<int> key{colors[i]};
      std::vector<int> neigh;
      for (const auto& [j, w] : g.neighbors(i)) {
        (void)w;
        neigh.push_back(colors[j]);
      }
      std::sort(neigh.begin(), neigh.end());
      key.insert(key.end(), neigh.begin(), neigh.end());
      keys[i] = std::move(key);
    }
    const std::vector<int> next = colors_from_keys(std::move(keys));
    if (next == colors) return;
    colors = next;
  }
}

}  // namespace

std::vector<std::size_t> canonical_node_order(const GraphInstance& g, const WLCodeTable& wl) {
  // Primary key per node: (WL code, degree, sorted neighbor WL codes,
  // attributes). The input index alone cannot break the remaining ties
  // consistently (tied pairs could flip independently of each other), so
  // tied classes are resolved by individualization-refinement: promote the
  // lowest-input-index member of the first tied class, re-refine, repeat.
  // Ties that survive refinement correspond to automorphic nodes, for which
  // any resolution yields the same embedding inputs.
  struct PrimaryKey {
    int code;
    std::size_t degree;
    std::vector<int> neighbor_codes;
    std::vector<double> attrs;
    auto operator<=>(const PrimaryKey&) const = default;
  };
  std::vector<PrimaryKey> keys(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    PrimaryKey& k = keys[i];
    k.code = wl.code(g.id(), g.node(i));
    k.degree = g.degree(i);
    for (const auto& [j, w] : g.neighbors(i)) {
      (void)w;
      k.neighbor_codes.push_back(wl.code(g.id(), g.node(j)));
    }
    std::sort(k.neighbor_codes.begin(), k.neighbor_codes.end());
    if (g.has_attributes()) k.attrs = g.attribute(i);
  }
  std::vector<int> colors = colors_from_keys(std::move(keys));
  refine_to_stable(g, colors);

  for (;;) {
    // first color class with more than one member
    int target = -1;
    std::vector<int> counts(g.size(), 0);
    for (int c : colors) ++counts[static_cast<std::size_t>(c)];
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] > 1) {
        target = static_cast<int>(c);
        break;
      }
    }
    if (target < 0) break;
    std::size_t chosen = g.size();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (colors[i] == target) {
        chosen = i;
        break;
      }
    }
    std::vector<std::pair<int, int>> split_keys(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      split_keys[i] = {colors[i], i == chosen ? 0 : 1};
    }
    colors = colors_from_keys(std::move(split_keys));
    refine_to_stable(g, colors);
  }

  std::vector<std::size_t> order(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    order[static_cast<std::size_t>(colors[i])] = i;
  }
  return order;
}

std::vector<double> positional_embedding(long long code, std::size_t d_h) {
  if (d_h % 2 != 0) {
    throw DataError("positional_embedding: d_h must be even, got " + std::to_string(d_h));
  }
  std::vector<double> out(d_h);
  const double c = static_cast<double>(code);
  const double dh = static_cast<double>(d_h);
  for (std::size_t l = 0; 2 * l < d_h; ++l) {
    out[2 * l] = std::sin(c / std::pow(10000.0, (2.0 * l) / dh));
    out[2 * l + 1] = std::cos(c / std::pow(10000.0, (2.0 * l + 1.0) / dh));
  }
  return out;
}

void NodeEmbeddingConfig::validate() const {
  if (d_h % 2 != 0) throw DataError("NodeEmbeddingConfig: d_h must be even");
  if (k_max == 0) throw DataError("NodeEmbeddingConfig: k_max must be positive");
  if (d_x > 0 && (attr_weight.rows != d_x || attr_weight.cols != d_h)) {
    throw DataError("NodeEmbeddingConfig: attr_weight is " + attr_weight.shape_str() +
                    ", expected " + std::to_string(d_x) + "x" + std::to_string(d_h));
  }
  if (weight_map.rows != k_max || weight_map.cols != d_h) {
    throw DataError("NodeEmbeddingConfig: weight_map is " + weight_map.shape_str() +
                    ", expected " + std::to_string(k_max) + "x" + std::to_string(d_h));
  }
}

EncoderInputs build_encoder_inputs(const GraphInstance& g, const WLCodeTable& wl,
                                   std::size_t d_h, std::size_t d_x, std::size_t k_max) {
  if (g.size() > k_max) {
    throw DataError("graph '" + g.id() + "' has " + std::to_string(g.size()) +
                    " nodes, exceeding k_max " + std::to_string(k_max));
  }
  const std::vector<std::size_t> order = canonical_node_order(g, wl);
  EncoderInputs in;
  in.valid_count = g.size();
  in.attrs = Mat(k_max, d_x);
  in.weight_rows = Mat(k_max, k_max);
  in.positional = Mat(k_max, d_h);
  for (std::size_t p = 0; p < order.size(); ++p) {
    const std::size_t node = order[p];
    if (d_x > 0) {
      const auto& x = g.attribute(node);
      for (std::size_t c = 0; c < d_x; ++c) in.attrs(p, c) = x[c];
    }
    for (std::size_t q = 0; q < order.size(); ++q) {
      in.weight_rows(p, q) = g.weight(node, order[q]);
    }
    const auto code_emb = positional_embedding(wl.code(g.id(), g.node(node)), d_h);
    const auto deg_emb = positional_embedding(static_cast<long long>(g.degree(node)), d_h);
    for (std::size_t c = 0; c < d_h; ++c) in.positional(p, c) = code_emb[c] + deg_emb[c];
  }
  return in;
}

InitialEmbeddings initial_embedding_matrix(const GraphInstance& g, const WLCodeTable& wl,
                                           const NodeEmbeddingConfig& config) {
  config.validate();
  const EncoderInputs in = build_encoder_inputs(g, wl, config.d_h, config.d_x, config.k_max);
  InitialEmbeddings out;
  out.valid_count = in.valid_count;
  out.h0 = in.positional;
  Mat term;
  kernels::matmul(in.weight_rows, config.weight_map, term);
  for (std::size_t i = 0; i < out.h0.a.size(); ++i) out.h0.a[i] += term.a[i];
  if (config.d_x > 0) {
    kernels::matmul(in.attrs, config.attr_weight, term);
    for (std::size_t i = 0; i < out.h0.a.size(); ++i) out.h0.a[i] += term.a[i];
  }
  return out;
}

}  // namespace graphdist
