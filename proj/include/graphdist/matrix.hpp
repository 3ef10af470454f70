#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace graphdist {

/// Dense row-major matrix of doubles. Scalars are represented as 1x1.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  std::size_t size() const { return a.size(); }
  bool empty() const { return a.empty(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

  static Mat scalar(double v) {
    Mat m(1, 1);
    m.a[0] = v;
    return m;
  }

  /// Value of a 1x1 matrix; throws DataError otherwise.
  double scalar_value() const;

  std::string shape_str() const;
};

bool all_finite(const Mat& m);
bool bitwise_equal(const Mat& x, const Mat& y);

/// max_ij |x - y|; shapes must match.
double max_abs_diff(const Mat& x, const Mat& y);

/// Frobenius norm of (x - y).
double frobenius_diff(const Mat& x, const Mat& y);

}  // namespace graphdist
