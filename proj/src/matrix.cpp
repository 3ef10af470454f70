#include "graphdist/matrix.hpp"

#include <cmath>
#include <cstdio>

#include "graphdist/errors.hpp"

namespace graphdist {

double Mat::scalar_value() const {
  if (rows != 1 || cols != 1) {
    throw DataError("scalar_value: matrix is " + shape_str() + ", expected 1x1");
  }
  return a[0];
}

std::string Mat::shape_str() const {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%zux%zu", rows, cols);
  return buf;
}

bool all_finite(const Mat& m) {
  for (double v : m.a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool bitwise_equal(const Mat& x, const Mat& y) {
  if (!x.same_shape(y)) return false;
  for (std::size_t i = 0; i < x.a.size(); ++i) {
    // bit-level compare so that -0.0 != 0.0 is visible to determinism checks
    if (x.a[i] != y.a[i]) return false;
    if (std::signbit(x.a[i]) != std::signbit(y.a[i])) return false;
  }
  return true;
}

double max_abs_diff(const Mat& x, const Mat& y) {
  if (!x.same_shape(y)) {
    throw DataError("max_abs_diff: shapes " + x.shape_str() + " vs " + y.shape_str());
  }
  double m = 0.0;
  for (std::size_t i = 0; i < x.a.size(); ++i) {
    m = std::max(m, std::fabs(x.a[i] - y.a[i]));
  }
  return m;
}

double frobenius_diff(const Mat& x, const Mat& y) {
  if (!x.same_shape(y)) {
    throw DataError("frobenius_diff: shapes " + x.shape_str() + " vs " + y.shape_str());
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x.a.size(); ++i) {
    const double d = x.a[i] - y.a[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace graphdist
