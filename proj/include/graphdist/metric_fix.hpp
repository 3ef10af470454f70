#pragma once

#include <cstddef>
#include <vector>

#include "graphdist/errors.hpp"
#include "graphdist/matrix.hpp"

namespace graphdist {

struct TriangleViolation {
  std::size_t i, j, k;  // d(i,j) > d(i,k) + d(j,k)
  double magnitude;
};

/// All violated triangle sides with magnitude > tol, one record per violated
/// side, in lexicographic (i, j, k) order with i < j, k distinct. Input must
/// be symmetric with a zero diagonal.
std::vector<TriangleViolation> triangle_violations(const Mat& d, double tol);

double max_triangle_violation(const Mat& d);

struct FixingOptions {
  double epsilon = 1e-7;
  std::size_t max_sweeps = 1000000;
  /// `projection` orients each correction toward the feasible halfspace
  /// (Dykstra); `verbatim` keeps the printed sign of the update, which
  /// leaves violated triangles untouched and exists for comparison only.
  enum class Orientation { projection, verbatim };
  Orientation orientation = Orientation::projection;
};

struct FixingResult {
  Mat d;
  std::size_t sweeps = 0;
  double final_delta = 0.0;
};

struct FixingDidNotConverge : NumericError {
  FixingDidNotConverge(const std::string& msg, Mat best)
      : NumericError(msg), best_so_far(std::move(best)) {}
  Mat best_so_far;  // D_hat + E at the iteration cap
};

/// Dual-variable triangle fixing: cycles every triangle side constraint,
/// projecting onto its halfspace with Dykstra corrections, until the sweep
/// change delta drops to epsilon and every violation is within 10 * epsilon.
FixingResult triangle_fixing(const Mat& d_hat, const FixingOptions& options = {});

/// Shortest-path closure of the complete graph weighted by d_hat; exact
/// metric, entrywise <= d_hat. Independent feasibility oracle for
/// triangle_fixing.
Mat apsp_metric_repair(const Mat& d_hat);

}  // namespace graphdist
