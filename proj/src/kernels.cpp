#include "graphdist/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "graphdist/errors.hpp"

namespace graphdist::kernels {

namespace {

std::atomic<bool> g_parallel{true};

void check_inner(const char* op, const Mat& a, const Mat& b, std::size_t ai, std::size_t bi) {
  if (ai != bi) {
    throw DataError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
}

inline double dot_row_row(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += x[k] * y[k];
  return s;
}

}  // namespace

void set_parallel(bool on) { g_parallel.store(on); }
bool parallel_enabled() { return g_parallel.load(); }

// ---------------------------------------------------------------------------
// matmul

void matmul_serial(const Mat& a, const Mat& b, Mat& c) {
  check_inner("matmul", a, b, a.cols, b.rows);
  c = Mat(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = &a.a[i * a.cols];
    double* crow = &c.a[i * c.cols];
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double av = arow[k];
      if (av == 0.0) continue;
      const double* brow = &b.a[k * b.cols];
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_omp(const Mat& a, const Mat& b, Mat& c) {
  check_inner("matmul", a, b, a.cols, b.rows);
  c = Mat(a.rows, b.cols);
  const long long n = static_cast<long long>(a.rows);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    const double* arow = &a.a[static_cast<std::size_t>(i) * a.cols];
    double* crow = &c.a[static_cast<std::size_t>(i) * c.cols];
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double av = arow[k];
      if (av == 0.0) continue;
      const double* brow = &b.a[k * b.cols];
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul(const Mat& a, const Mat& b, Mat& c) {
  if (parallel_enabled() && a.rows * a.cols * b.cols >= kParallelGrain) {
    matmul_omp(a, b, c);
  } else {
    matmul_serial(a, b, c);
  }
}

Mat matmul(const Mat& a, const Mat& b) {
  Mat c;
  matmul(a, b, c);
  return c;
}

// ---------------------------------------------------------------------------
// matmul_nt: c(i,j) = sum_k a(i,k) b(j,k)

void matmul_nt_serial(const Mat& a, const Mat& b, Mat& c) {
  check_inner("matmul_nt", a, b, a.cols, b.cols);
  c = Mat(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = &a.a[i * a.cols];
    for (std::size_t j = 0; j < b.rows; ++j) {
      c.a[i * c.cols + j] = dot_row_row(arow, &b.a[j * b.cols], a.cols);
    }
  }
}

void matmul_nt_omp(const Mat& a, const Mat& b, Mat& c) {
  check_inner("matmul_nt", a, b, a.cols, b.cols);
  c = Mat(a.rows, b.rows);
  const long long n = static_cast<long long>(a.rows);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    const double* arow = &a.a[static_cast<std::size_t>(i) * a.cols];
    for (std::size_t j = 0; j < b.rows; ++j) {
      c.a[static_cast<std::size_t>(i) * c.cols + j] = dot_row_row(arow, &b.a[j * b.cols], a.cols);
    }
  }
}

void matmul_nt(const Mat& a, const Mat& b, Mat& c) {
  if (parallel_enabled() && a.rows * a.cols * b.rows >= kParallelGrain) {
    matmul_nt_omp(a, b, c);
  } else {
    matmul_nt_serial(a, b, c);
  }
}

Mat matmul_nt(const Mat& a, const Mat& b) {
  Mat c;
  matmul_nt(a, b, c);
  return c;
}

// ---------------------------------------------------------------------------
// matmul_tn: c(i,j) = sum_k a(k,i) b(k,j)

void matmul_tn_serial(const Mat& a, const Mat& b, Mat& c) {
  check_inner("matmul_tn", a, b, a.rows, b.rows);
  c = Mat(a.cols, b.cols);
  for (std::size_t i = 0; i < a.cols; ++i) {
    double* crow = &c.a[i * c.cols];
    for (std::size_t k = 0; k < a.rows; ++k) {
      const double av = a.a[k * a.cols + i];
      if (av == 0.0) continue;
      const double* brow = &b.a[k * b.cols];
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_tn_omp(const Mat& a, const Mat& b, Mat& c) {
  check_inner("matmul_tn", a, b, a.rows, b.rows);
  c = Mat(a.cols, b.cols);
  const long long n = static_cast<long long>(a.cols);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    double* crow = &c.a[static_cast<std::size_t>(i) * c.cols];
    for (std::size_t k = 0; k < a.rows; ++k) {
      const double av = a.a[k * a.cols + static_cast<std::size_t>(i)];
      if (av == 0.0) continue;
      const double* brow = &b.a[k * b.cols];
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_tn(const Mat& a, const Mat& b, Mat& c) {
  if (parallel_enabled() && a.rows * a.cols * b.cols >= kParallelGrain) {
    matmul_tn_omp(a, b, c);
  } else {
    matmul_tn_serial(a, b, c);
  }
}

Mat matmul_tn(const Mat& a, const Mat& b) {
  Mat c;
  matmul_tn(a, b, c);
  return c;
}

// ---------------------------------------------------------------------------
// softmax

namespace {
inline void softmax_row(const double* in, double* out, std::size_t n) {
  double mx = in[0];
  for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, in[j]);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = std::exp(in[j] - mx);
    sum += out[j];
  }
  const double inv = 1.0 / sum;
  for (std::size_t j = 0; j < n; ++j) out[j] *= inv;
}
}  // namespace

void softmax_rows_serial(const Mat& in, Mat& out) {
  if (in.cols == 0) throw DataError("softmax_rows: empty rows in " + in.shape_str());
  out = Mat(in.rows, in.cols);
  for (std::size_t i = 0; i < in.rows; ++i) {
    softmax_row(&in.a[i * in.cols], &out.a[i * in.cols], in.cols);
  }
}

void softmax_rows_omp(const Mat& in, Mat& out) {
  if (in.cols == 0) throw DataError("softmax_rows: empty rows in " + in.shape_str());
  out = Mat(in.rows, in.cols);
  const long long n = static_cast<long long>(in.rows);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    const std::size_t off = static_cast<std::size_t>(i) * in.cols;
    softmax_row(&in.a[off], &out.a[off], in.cols);
  }
}

void softmax_rows(const Mat& in, Mat& out) {
  if (parallel_enabled() && in.size() >= kParallelGrain) {
    softmax_rows_omp(in, out);
  } else {
    softmax_rows_serial(in, out);
  }
}

// ---------------------------------------------------------------------------
// Floyd-Warshall
//
// For a fixed k every row is updated independently against the (already
// final for this k) row k, so the row loop parallelizes without changing
// results.

void floyd_warshall_serial(Mat& d) {
  const std::size_t n = d.rows;
  for (std::size_t k = 0; k < n; ++k) {
    const double* dk = &d.a[k * n];
    for (std::size_t i = 0; i < n; ++i) {
      double* di = &d.a[i * n];
      const double dik = di[k];
      for (std::size_t j = 0; j < n; ++j) {
        const double via = dik + dk[j];
        if (via < di[j]) di[j] = via;
      }
    }
  }
}

void floyd_warshall_omp(Mat& d) {
  const std::size_t n = d.rows;
  for (std::size_t k = 0; k < n; ++k) {
    const double* dk = &d.a[k * n];
    const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < nn; ++i) {
      double* di = &d.a[static_cast<std::size_t>(i) * n];
      const double dik = di[k];
      for (std::size_t j = 0; j < n; ++j) {
        const double via = dik + dk[j];
        if (via < di[j]) di[j] = via;
      }
    }
  }
}

void floyd_warshall(Mat& d) {
  if (d.rows != d.cols) throw DataError("floyd_warshall: matrix " + d.shape_str() + " not square");
  if (parallel_enabled() && d.size() >= kParallelGrain) {
    floyd_warshall_omp(d);
  } else {
    floyd_warshall_serial(d);
  }
}

}  // namespace graphdist::kernels
