#pragma once

#include <string>
#include <utility>
#include <vector>

#include "graphdist/matrix.hpp"
#include "graphdist/params.hpp"
#include "graphdist/tape.hpp"

namespace graphdist {

/// Bias-free two-layer head; FC(0) = 0 makes d(G, G) = 0 exact.
struct HeadWeights {
  Mat fc1;  // d_h x intermediate
  Mat fc2;  // intermediate x 1
};

HeadWeights head_weights_from(const ParameterStore& params);

/// d = 1 - exp(-|FC((z_i - z_j)^2)|), in [0, 1).
Tape::NodeId pair_distance_on_tape(Tape& tape, Tape::NodeId zi, Tape::NodeId zj, Tape::NodeId fc1,
                                   Tape::NodeId fc2);

double pair_distance(const std::vector<double>& zi, const std::vector<double>& zj,
                     const HeadWeights& head);

struct MaskMatrix {
  Mat m;
  double alpha = 0.1;
  double beta = 1000.0;
};

/// Diagonal beta, labeled pairs (both orientations) 1, everything else alpha.
MaskMatrix build_mask(std::size_t m, const std::vector<std::pair<std::size_t, std::size_t>>& labeled,
                      double alpha, double beta);

/// Entrywise-weighted p-norm of D - D_bar.
double masked_loss(const Mat& d, const Mat& d_bar, const Mat& mask, double p);

/// Symmetric pairwise distance matrix aligned to an id list.
struct DistanceMatrix {
  std::vector<std::string> ids;
  Mat d;

  /// Exact symmetry and zero diagonal; optionally entries in [0, 1).
  void validate(bool check_range) const;

  void save_csv(const std::string& path) const;
  static DistanceMatrix load_csv(const std::string& path);
};

}  // namespace graphdist
