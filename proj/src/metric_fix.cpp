#include "graphdist/metric_fix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "graphdist/kernels.hpp"

namespace graphdist {

namespace {

void check_square_symmetric(const Mat& d, const char* op) {
  if (d.rows != d.cols) throw DataError(std::string(op) + ": matrix " + d.shape_str() + " not square");
  for (std::size_t i = 0; i < d.rows; ++i) {
    if (d(i, i) != 0.0) throw DataError(std::string(op) + ": nonzero diagonal at " + std::to_string(i));
    for (std::size_t j = i + 1; j < d.cols; ++j) {
      if (d(i, j) != d(j, i)) {
        throw DataError(std::string(op) + ": asymmetric at (" + std::to_string(i) + ", " +
                        std::to_string(j) + ")");
      }
    }
  }
}

}  // namespace

std::vector<TriangleViolation> triangle_violations(const Mat& d, double tol) {
  check_square_symmetric(d, "triangle_violations");
  const std::size_t m = d.rows;
  const long long mm = static_cast<long long>(m);
  // Parallel over the long-side pair (i, j); per-(i, j) buckets are merged in
  // index order, so output order never depends on the schedule.
  std::vector<std::vector<TriangleViolation>> buckets(m * m);
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled() && m >= 24)
  for (long long ii = 0; ii < mm; ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    for (std::size_t j = i + 1; j < m; ++j) {
      auto& bucket = buckets[i * m + j];
      for (std::size_t k = 0; k < m; ++k) {
        if (k == i || k == j) continue;
        const double v = d(i, j) - d(i, k) - d(j, k);
        if (v > tol) bucket.push_back({i, j, k, v});
      }
    }
  }
  std::vector<TriangleViolation> out;
  for (const auto& bucket : buckets) out.insert(out.end(), bucket.begin(), bucket.end());
  return out;
}

double max_triangle_violation(const Mat& d) {
  const std::size_t m = d.rows;
  const long long mm = static_cast<long long>(m);
  double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst) \
    if (kernels::parallel_enabled() && m >= 24)
  for (long long ii = 0; ii < mm; ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    for (std::size_t j = i + 1; j < m; ++j) {
      for (std::size_t k = 0; k < m; ++k) {
        if (k == i || k == j) continue;
        worst = std::max(worst, d(i, j) - d(i, k) - d(j, k));
      }
    }
  }
  return worst;
}

FixingResult triangle_fixing(const Mat& d_hat, const FixingOptions& options) {
  check_square_symmetric(d_hat, "triangle_fixing");
  if (options.epsilon <= 0.0) throw DataError("triangle_fixing: epsilon must be positive");
  const std::size_t m = d_hat.rows;
  const bool projection = options.orientation == FixingOptions::Orientation::projection;

  Mat e(m, m);
  // One dual per triangle side; sides of triple (i<j<k) are visited in a
  // fixed order, so a running counter addresses the dual array every sweep.
  const std::size_t triples = m < 3 ? 0 : m * (m - 1) * (m - 2) / 6;
  std::vector<double> z(3 * triples, 0.0);

  // Halfspace e_ab - e_bc - e_ca <= slack for side (a, b) of triangle {a, b, c}.
  auto process_side = [&](std::size_t a, std::size_t b, std::size_t c, double& dual,
                          double& delta) {
    const double slack = d_hat(c, a) + d_hat(b, c) - d_hat(a, b);
    const double mu = -(slack - e(a, b) + e(b, c) + e(c, a)) / 3.0;
    // mu > 0 iff the (a, b) side is currently violated. The printed update
    // visits violated triangles only; the projection orientation must visit
    // every side so Dykstra can release accumulated duals.
    if (!projection && mu <= 0.0) return;
    const double theta = projection ? std::min(-mu, dual) : std::min(mu, dual);
    if (theta == 0.0) return;
    e(a, b) += theta;
    e(b, a) += theta;
    e(b, c) -= theta;
    e(c, b) -= theta;
    e(c, a) -= theta;
    e(a, c) -= theta;
    dual -= theta;
    delta += 3.0 * std::fabs(theta);
  };

  FixingResult result;
  double delta = options.epsilon + 1.0;
  std::size_t sweeps = 0;
  while (sweeps < options.max_sweeps) {
    delta = 0.0;
    std::size_t t = 0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        for (std::size_t k = j + 1; k < m; ++k) {
          process_side(i, j, k, z[t++], delta);
          process_side(j, k, i, z[t++], delta);
          process_side(k, i, j, z[t++], delta);
        }
      }
    }
    ++sweeps;
    if (delta <= options.epsilon) {
      Mat fixed = d_hat;
      for (std::size_t idx = 0; idx < fixed.a.size(); ++idx) fixed.a[idx] += e.a[idx];
      for (std::size_t i = 0; i < m; ++i) fixed(i, i) = 0.0;
      if (max_triangle_violation(fixed) <= 10.0 * options.epsilon) {
        result.d = std::move(fixed);
        result.sweeps = sweeps;
        result.final_delta = delta;
        return result;
      }
      // delta == 0 is an exact fixed point: no sweep will ever change e again.
      if (delta == 0.0) break;
    }
  }
  Mat best = d_hat;
  for (std::size_t idx = 0; idx < best.a.size(); ++idx) best.a[idx] += e.a[idx];
  throw FixingDidNotConverge("triangle_fixing: no convergence after " +
                                 std::to_string(sweeps) + " sweeps (delta " +
                                 std::to_string(delta) + ")",
                             std::move(best));
}

Mat apsp_metric_repair(const Mat& d_hat) {
  check_square_symmetric(d_hat, "apsp_metric_repair");
  for (double v : d_hat.a) {
    if (v < 0.0) throw DataError("apsp_metric_repair: negative entry");
  }
  Mat d = d_hat;
  kernels::floyd_warshall(d);
  return d;
}

}  // namespace graphdist
