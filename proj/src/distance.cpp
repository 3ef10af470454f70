#include "graphdist/distance.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "graphdist/encoder.hpp"
#include "graphdist/errors.hpp"

namespace graphdist {

HeadWeights head_weights_from(const ParameterStore& params) {
  return HeadWeights{params.value(kParamHeadFc1), params.value(kParamHeadFc2)};
}

Tape::NodeId pair_distance_on_tape(Tape& tape, Tape::NodeId zi, Tape::NodeId zj, Tape::NodeId fc1,
                                   Tape::NodeId fc2) {
  const Tape::NodeId sq = tape.square(tape.sub(zi, zj));
  const Tape::NodeId hidden = tape.relu(tape.matmul(sq, fc1));
  const Tape::NodeId out = tape.abs(tape.matmul(hidden, fc2));
  // 1 - exp(-|t|)
  return tape.add_const(tape.scale(tape.exp(tape.scale(out, -1.0)), -1.0), 1.0);
}

double pair_distance(const std::vector<double>& zi, const std::vector<double>& zj,
                     const HeadWeights& head) {
  if (zi.size() != zj.size()) {
    throw DataError("pair_distance: representation lengths " + std::to_string(zi.size()) +
                    " vs " + std::to_string(zj.size()));
  }
  if (head.fc1.rows != zi.size()) {
    throw DataError("pair_distance: fc1 is " + head.fc1.shape_str() + " for length " +
                    std::to_string(zi.size()) + " inputs");
  }
  Mat a(1, zi.size());
  Mat b(1, zj.size());
  a.a = zi;
  b.a = zj;
  if (!all_finite(a) || !all_finite(b)) {
    throw NumericError("pair_distance: non-finite representation");
  }
  Tape tape;
  return tape.value(pair_distance_on_tape(tape, tape.leaf(std::move(a)), tape.leaf(std::move(b)),
                                          tape.leaf(head.fc1), tape.leaf(head.fc2)))
      .scalar_value();
}

MaskMatrix build_mask(std::size_t m, const std::vector<std::pair<std::size_t, std::size_t>>& labeled,
                      double alpha, double beta) {
  if (alpha < 0.0 || alpha > 1.0) throw DataError("build_mask: alpha outside [0, 1]");
  if (beta <= 0.0) throw DataError("build_mask: beta must be positive");
  MaskMatrix mask;
  mask.alpha = alpha;
  mask.beta = beta;
  mask.m = Mat(m, m, alpha);
  for (std::size_t i = 0; i < m; ++i) mask.m(i, i) = beta;
  for (const auto& [i, j] : labeled) {
    if (i >= m || j >= m) {
      throw DataError("build_mask: pair (" + std::to_string(i) + ", " + std::to_string(j) +
                      ") out of range for m = " + std::to_string(m));
    }
    if (i == j) continue;  // diagonal entries stay beta
    mask.m(i, j) = 1.0;
    mask.m(j, i) = 1.0;
  }
  return mask;
}

double masked_loss(const Mat& d, const Mat& d_bar, const Mat& mask, double p) {
  if (!d.same_shape(d_bar) || !d.same_shape(mask)) {
    throw DataError("masked_loss: shapes " + d.shape_str() + ", " + d_bar.shape_str() + ", " +
                    mask.shape_str() + " differ");
  }
  if (p < 1.0) throw DataError("masked_loss: p must be >= 1");
  double acc = 0.0;
  for (std::size_t i = 0; i < d.a.size(); ++i) {
    acc += std::pow(std::fabs(mask.a[i] * (d.a[i] - d_bar.a[i])), p);
  }
  return std::pow(acc, 1.0 / p);
}

void DistanceMatrix::validate(bool check_range) const {
  if (d.rows != d.cols || d.rows != ids.size()) {
    throw DataError("DistanceMatrix: matrix " + d.shape_str() + " for " +
                    std::to_string(ids.size()) + " ids");
  }
  for (std::size_t i = 0; i < d.rows; ++i) {
    if (d(i, i) != 0.0) {
      throw DataError("DistanceMatrix: nonzero diagonal at '" + ids[i] + "'");
    }
    for (std::size_t j = i + 1; j < d.cols; ++j) {
      if (d(i, j) != d(j, i)) {
        throw DataError("DistanceMatrix: asymmetric at (" + ids[i] + ", " + ids[j] + ")");
      }
      if (check_range && (d(i, j) < 0.0 || d(i, j) >= 1.0)) {
        throw DataError("DistanceMatrix: entry (" + ids[i] + ", " + ids[j] + ") outside [0, 1)");
      }
    }
  }
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void DistanceMatrix::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("DistanceMatrix: cannot open '" + path + "' for writing");
  out << "id";
  for (const auto& id : ids) out << ',' << id;
  out << '\n';
  for (std::size_t i = 0; i < d.rows; ++i) {
    out << ids[i];
    for (std::size_t j = 0; j < d.cols; ++j) out << ',' << fmt17(d(i, j));
    out << '\n';
  }
  if (!out) throw DataError("DistanceMatrix: write failure on '" + path + "'");
}

DistanceMatrix DistanceMatrix::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("DistanceMatrix: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("DistanceMatrix: '" + path + "' is empty");
  DistanceMatrix dm;
  {
    std::stringstream ss(line);
    std::string cell;
    if (!std::getline(ss, cell, ',') || cell != "id") {
      throw DataError("DistanceMatrix: '" + path + "' missing 'id' header");
    }
    while (std::getline(ss, cell, ',')) dm.ids.push_back(cell);
  }
  const std::size_t m = dm.ids.size();
  dm.d = Mat(m, m);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= m) throw DataError("DistanceMatrix: '" + path + "' has more rows than ids");
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    if (cell != dm.ids[row]) {
      throw DataError("DistanceMatrix: row id '" + cell + "' does not match header '" +
                      dm.ids[row] + "'");
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (!std::getline(ss, cell, ',')) {
        throw DataError("DistanceMatrix: short row for id '" + dm.ids[row] + "'");
      }
      try {
        dm.d(row, j) = std::stod(cell);
      } catch (const std::exception&) {
        throw DataError("DistanceMatrix: bad number '" + cell + "' in row '" + dm.ids[row] + "'");
      }
    }
    ++row;
  }
  if (row != m) throw DataError("DistanceMatrix: '" + path + "' has fewer rows than ids");
  return dm;
}

}  // namespace graphdist
