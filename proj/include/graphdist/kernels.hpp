#pragma once

#include "graphdist/matrix.hpp"

namespace graphdist::kernels {

/// Process-wide switch between the OpenMP kernels and the serial references.
/// Every kernel writes each output element independently with a fixed
/// accumulation order, so both paths produce bitwise-identical results.
void set_parallel(bool on);
bool parallel_enabled();

/// Loops over less work than this run serially even when parallel is on.
inline constexpr std::size_t kParallelGrain = 1u << 14;

// c = a * b
void matmul_serial(const Mat& a, const Mat& b, Mat& c);
void matmul_omp(const Mat& a, const Mat& b, Mat& c);
void matmul(const Mat& a, const Mat& b, Mat& c);
Mat matmul(const Mat& a, const Mat& b);

// c = a * b^T
void matmul_nt_serial(const Mat& a, const Mat& b, Mat& c);
void matmul_nt_omp(const Mat& a, const Mat& b, Mat& c);
void matmul_nt(const Mat& a, const Mat& b, Mat& c);
Mat matmul_nt(const Mat& a, const Mat& b);

// c = a^T * b
void matmul_tn_serial(const Mat& a, const Mat& b, Mat& c);
void matmul_tn_omp(const Mat& a, const Mat& b, Mat& c);
void matmul_tn(const Mat& a, const Mat& b, Mat& c);
Mat matmul_tn(const Mat& a, const Mat& b);

// Row-wise numerically stable softmax.
void softmax_rows_serial(const Mat& in, Mat& out);
void softmax_rows_omp(const Mat& in, Mat& out);
void softmax_rows(const Mat& in, Mat& out);

// In-place all-pairs shortest paths on a dense weight matrix.
void floyd_warshall_serial(Mat& d);
void floyd_warshall_omp(Mat& d);
void floyd_warshall(Mat& d);

}  // namespace graphdist::kernels
