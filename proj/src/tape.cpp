#include "graphdist/tape.hpp"

#include <cmath>
#include <string>

#include "graphdist/errors.hpp"
#include "graphdist/kernels.hpp"

namespace graphdist {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw DataError(msg);
}

}  // namespace

Tape::NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

const Tape::Node& Tape::node(NodeId id) const {
  check(id);
  return nodes_[static_cast<std::size_t>(id)];
}

void Tape::check(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    throw DataError("tape: invalid node id " + std::to_string(id));
  }
}

const Mat& Tape::value(NodeId id) const { return node(id).value; }

const Mat& Tape::grad(NodeId id) const {
  check(id);
  if (!backward_done_) throw DataError("tape: grad() before backward()");
  return grads_[static_cast<std::size_t>(id)];
}

Tape::NodeId Tape::leaf(Mat v) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(v);
  return push(std::move(n));
}

Tape::NodeId Tape::matmul(NodeId x, NodeId y) {
  const Mat& a = value(x);
  const Mat& b = value(y);
  require(a.cols == b.rows, "matmul: shape mismatch " + a.shape_str() + " * " + b.shape_str());
  Node n;
  n.op = Op::MatMul;
  n.x = x;
  n.y = y;
  kernels::matmul(a, b, n.value);
  return push(std::move(n));
}

Tape::NodeId Tape::matmul_nt(NodeId x, NodeId y) {
  const Mat& a = value(x);
  const Mat& b = value(y);
  require(a.cols == b.cols, "matmul_nt: shape mismatch " + a.shape_str() + " * " + b.shape_str() + "^T");
  Node n;
  n.op = Op::MatMulNT;
  n.x = x;
  n.y = y;
  kernels::matmul_nt(a, b, n.value);
  return push(std::move(n));
}

Tape::NodeId Tape::add(NodeId x, NodeId y) {
  const Mat& a = value(x);
  const Mat& b = value(y);
  require(a.same_shape(b), "add: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  Node n;
  n.op = Op::Add;
  n.x = x;
  n.y = y;
  n.value = a;
  for (std::size_t i = 0; i < b.a.size(); ++i) n.value.a[i] += b.a[i];
  return push(std::move(n));
}

Tape::NodeId Tape::sub(NodeId x, NodeId y) {
  const Mat& a = value(x);
  const Mat& b = value(y);
  require(a.same_shape(b), "sub: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  Node n;
  n.op = Op::Sub;
  n.x = x;
  n.y = y;
  n.value = a;
  for (std::size_t i = 0; i < b.a.size(); ++i) n.value.a[i] -= b.a[i];
  return push(std::move(n));
}

Tape::NodeId Tape::hadamard(NodeId x, NodeId y) {
  const Mat& a = value(x);
  const Mat& b = value(y);
  require(a.same_shape(b), "hadamard: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  Node n;
  n.op = Op::Hadamard;
  n.x = x;
  n.y = y;
  n.value = a;
  for (std::size_t i = 0; i < b.a.size(); ++i) n.value.a[i] *= b.a[i];
  return push(std::move(n));
}

Tape::NodeId Tape::row_softmax(NodeId x) {
  Node n;
  n.op = Op::RowSoftmax;
  n.x = x;
  kernels::softmax_rows(value(x), n.value);
  return push(std::move(n));
}

Tape::NodeId Tape::relu(NodeId x) {
  Node n;
  n.op = Op::Relu;
  n.x = x;
  n.value = value(x);
  for (double& v : n.value.a) v = v > 0.0 ? v : 0.0;
  return push(std::move(n));
}

Tape::NodeId Tape::square(NodeId x) {
  Node n;
  n.op = Op::Square;
  n.x = x;
  n.value = value(x);
  for (double& v : n.value.a) v *= v;
  return push(std::move(n));
}

Tape::NodeId Tape::exp(NodeId x) {
  Node n;
  n.op = Op::Exp;
  n.x = x;
  n.value = value(x);
  for (double& v : n.value.a) v = std::exp(v);
  return push(std::move(n));
}

Tape::NodeId Tape::abs(NodeId x) {
  Node n;
  n.op = Op::Abs;
  n.x = x;
  n.value = value(x);
  for (double& v : n.value.a) v = std::fabs(v);
  return push(std::move(n));
}

Tape::NodeId Tape::sqrt(NodeId x) {
  Node n;
  n.op = Op::Sqrt;
  n.x = x;
  n.value = value(x);
  for (double& v : n.value.a) v = std::sqrt(v);
  return push(std::move(n));
}

Tape::NodeId Tape::recip(NodeId x) {
  Node n;
  n.op = Op::Recip;
  n.x = x;
  n.value = value(x);
  for (double& v : n.value.a) v = 1.0 / v;
  return push(std::move(n));
}

Tape::NodeId Tape::scale(NodeId x, double c) {
  Node n;
  n.op = Op::Scale;
  n.x = x;
  n.c = c;
  n.value = value(x);
  for (double& v : n.value.a) v *= c;
  return push(std::move(n));
}

Tape::NodeId Tape::add_const(NodeId x, double c) {
  Node n;
  n.op = Op::AddConst;
  n.x = x;
  n.c = c;
  n.value = value(x);
  for (double& v : n.value.a) v += c;
  return push(std::move(n));
}

Tape::NodeId Tape::mul_mask(NodeId x, Mat mask) {
  const Mat& a = value(x);
  require(a.same_shape(mask), "mul_mask: shape mismatch " + a.shape_str() + " vs " + mask.shape_str());
  Node n;
  n.op = Op::MulMask;
  n.x = x;
  n.value = a;
  for (std::size_t i = 0; i < mask.a.size(); ++i) n.value.a[i] *= mask.a[i];
  n.mask = std::move(mask);
  return push(std::move(n));
}

Tape::NodeId Tape::add_mask(NodeId x, Mat mask) {
  const Mat& a = value(x);
  require(a.same_shape(mask), "add_mask: shape mismatch " + a.shape_str() + " vs " + mask.shape_str());
  Node n;
  n.op = Op::AddMask;
  n.x = x;
  n.value = a;
  for (std::size_t i = 0; i < mask.a.size(); ++i) n.value.a[i] += mask.a[i];
  n.mask = std::move(mask);
  return push(std::move(n));
}

Tape::NodeId Tape::cols(NodeId x, std::size_t c0, std::size_t c1) {
  const Mat& a = value(x);
  require(c0 < c1 && c1 <= a.cols, "cols: bad slice [" + std::to_string(c0) + ", " +
                                       std::to_string(c1) + ") of " + a.shape_str());
  Node n;
  n.op = Op::Cols;
  n.x = x;
  n.c0 = c0;
  n.c1 = c1;
  n.value = Mat(a.rows, c1 - c0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = c0; j < c1; ++j) n.value(i, j - c0) = a(i, j);
  }
  return push(std::move(n));
}

Tape::NodeId Tape::hcat(const std::vector<NodeId>& xs) {
  require(!xs.empty(), "hcat: no inputs");
  std::size_t rows = value(xs[0]).rows;
  std::size_t cols_total = 0;
  for (NodeId id : xs) {
    require(value(id).rows == rows, "hcat: row mismatch " + value(id).shape_str());
    cols_total += value(id).cols;
  }
  Node n;
  n.op = Op::HCat;
  n.many = xs;
  n.value = Mat(rows, cols_total);
  std::size_t off = 0;
  for (NodeId id : xs) {
    const Mat& a = value(id);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < a.cols; ++j) n.value(i, off + j) = a(i, j);
    }
    off += a.cols;
  }
  return push(std::move(n));
}

Tape::NodeId Tape::diag(NodeId x) {
  const Mat& a = value(x);
  require(a.rows == a.cols, "diag: matrix " + a.shape_str() + " not square");
  Node n;
  n.op = Op::Diag;
  n.x = x;
  n.value = Mat(a.rows, 1);
  for (std::size_t i = 0; i < a.rows; ++i) n.value(i, 0) = a(i, i);
  return push(std::move(n));
}

Tape::NodeId Tape::mean_rows(NodeId x) {
  const Mat& a = value(x);
  require(a.rows > 0, "mean_rows: empty input");
  Node n;
  n.op = Op::MeanRows;
  n.x = x;
  n.value = Mat(1, a.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) n.value(0, j) += a(i, j);
  }
  const double inv = 1.0 / static_cast<double>(a.rows);
  for (double& v : n.value.a) v *= inv;
  return push(std::move(n));
}

Tape::NodeId Tape::sum(NodeId x) {
  Node n;
  n.op = Op::Sum;
  n.x = x;
  double s = 0.0;
  for (double v : value(x).a) s += v;
  n.value = Mat::scalar(s);
  return push(std::move(n));
}

Tape::NodeId Tape::stack_scalars(const std::vector<NodeId>& xs) {
  require(!xs.empty(), "stack_scalars: no inputs");
  Node n;
  n.op = Op::StackScalars;
  n.many = xs;
  n.value = Mat(xs.size(), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Mat& a = value(xs[i]);
    require(a.rows == 1 && a.cols == 1, "stack_scalars: input " + std::to_string(i) +
                                            " is " + a.shape_str() + ", expected 1x1");
    n.value(i, 0) = a.a[0];
  }
  return push(std::move(n));
}

void Tape::backward(NodeId loss) {
  check(loss);
  if (backward_done_) throw DataError("tape: backward() called twice without a fresh tape");
  const Mat& lv = nodes_[static_cast<std::size_t>(loss)].value;
  if (lv.rows != 1 || lv.cols != 1) {
    throw DataError("tape: backward target is " + lv.shape_str() + ", expected scalar");
  }
  backward_done_ = true;
  grads_.assign(nodes_.size(), Mat());
  touched_.assign(nodes_.size(), 0);

  auto ensure = [&](NodeId id) -> Mat& {
    Mat& g = grads_[static_cast<std::size_t>(id)];
    if (!touched_[static_cast<std::size_t>(id)]) {
      const Mat& v = nodes_[static_cast<std::size_t>(id)].value;
      g = Mat(v.rows, v.cols);
      touched_[static_cast<std::size_t>(id)] = 1;
    }
    return g;
  };

  ensure(loss).a[0] = 1.0;

  for (NodeId id = loss; id >= 0; --id) {
    if (!touched_[static_cast<std::size_t>(id)]) continue;
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    const Mat& g = grads_[static_cast<std::size_t>(id)];
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::MatMul: {
        Mat tmp;
        kernels::matmul_nt(g, nodes_[static_cast<std::size_t>(n.y)].value, tmp);
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < tmp.a.size(); ++i) gx.a[i] += tmp.a[i];
        kernels::matmul_tn(nodes_[static_cast<std::size_t>(n.x)].value, g, tmp);
        Mat& gy = ensure(n.y);
        for (std::size_t i = 0; i < tmp.a.size(); ++i) gy.a[i] += tmp.a[i];
        break;
      }
      case Op::MatMulNT: {
        Mat tmp;
        kernels::matmul(g, nodes_[static_cast<std::size_t>(n.y)].value, tmp);
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < tmp.a.size(); ++i) gx.a[i] += tmp.a[i];
        kernels::matmul_tn(g, nodes_[static_cast<std::size_t>(n.x)].value, tmp);
        Mat& gy = ensure(n.y);
        for (std::size_t i = 0; i < tmp.a.size(); ++i) gy.a[i] += tmp.a[i];
        break;
      }
      case Op::Add: {
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < g.a.size(); ++i) gx.a[i] += g.a[i];
        Mat& gy = ensure(n.y);
        for (std::size_t i = 0; i < g.a.size(); ++i) gy.a[i] += g.a[i];
        break;
      }
      case Op::Sub: {
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < g.a.size(); ++i) gx.a[i] += g.a[i];
        Mat& gy = ensure(n.y);
        for (std::size_t i = 0; i < g.a.size(); ++i) gy.a[i] -= g.a[i];
        break;
      }
      case Op::Hadamard: {
        const Mat& xv = nodes_[static_cast<std::size_t>(n.x)].value;
        const Mat& yv = nodes_[static_cast<std::size_t>(n.y)].value;
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < g.a.size(); ++i) gx.a[i] += g.a[i] * yv.a[i];
        Mat& gy = ensure(n.y);
        for (std::size_t i = 0; i < g.a.size(); ++i) gy.a[i] += g.a[i] * xv.a[i];
        break;
      }
      case Op::RowSoftmax: {
        const Mat& s = n.value;
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < s.rows; ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < s.cols; ++j) dot += g(i, j) * s(i, j);
          for (std::size_t j = 0; j < s.cols; ++j) gx(i, j) += s(i, j) * (g(i, j) - dot);
        }
        break;
      }
      case Op::Relu: {
        const Mat& xv = nodes_[static_cast<std::size_t>(n.x)].value;
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < g.a.size(); ++i) {
          if (xv.a[i] > 0.0) gx.a[i] += g.a[i];
        }
        break;
      }
      case Op::Square: {
        const Mat& xv = nodes_[static_cast<std::size_t>(n.x)].value;
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < g.a.size(); ++i) gx.a[i] += 2.0 * xv.a[i] * g.a[i];
        break;
      }
      case Op::Exp: {
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < g.a.size(); ++i) gx.a[i] += n.value.a[i] * g.a[i];
        break;
      }
      case Op::Abs: {
        const Mat& xv = nodes_[static_cast<std::size_t>(n.x)].value;
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < g.a.size(); ++i) {
          const double s = xv.a[i] > 0.0 ? 1.0 : (xv.a[i] < 0.0 ? -1.0 : 0.0);
          gx.a[i] += s * g.a[i];
        }
        break;
      }
      case Op::Sqrt: {
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < g.a.size(); ++i) gx.a[i] += 0.5 / n.value.a[i] * g.a[i];
        break;
      }
      case Op::Recip: {
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < g.a.size(); ++i) {
          gx.a[i] -= n.value.a[i] * n.value.a[i] * g.a[i];
        }
        break;
      }
      case Op::Scale: {
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < g.a.size(); ++i) gx.a[i] += n.c * g.a[i];
        break;
      }
      case Op::AddConst: {
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < g.a.size(); ++i) gx.a[i] += g.a[i];
        break;
      }
      case Op::MulMask: {
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < g.a.size(); ++i) gx.a[i] += n.mask.a[i] * g.a[i];
        break;
      }
      case Op::AddMask: {
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < g.a.size(); ++i) gx.a[i] += g.a[i];
        break;
      }
      case Op::Cols: {
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < g.rows; ++i) {
          for (std::size_t j = 0; j < g.cols; ++j) gx(i, n.c0 + j) += g(i, j);
        }
        break;
      }
      case Op::HCat: {
        std::size_t off = 0;
        for (NodeId src : n.many) {
          Mat& gx = ensure(src);
          for (std::size_t i = 0; i < gx.rows; ++i) {
            for (std::size_t j = 0; j < gx.cols; ++j) gx(i, j) += g(i, off + j);
          }
          off += gx.cols;
        }
        break;
      }
      case Op::Diag: {
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < g.rows; ++i) gx(i, i) += g(i, 0);
        break;
      }
      case Op::MeanRows: {
        const Mat& xv = nodes_[static_cast<std::size_t>(n.x)].value;
        const double inv = 1.0 / static_cast<double>(xv.rows);
        Mat& gx = ensure(n.x);
        for (std::size_t i = 0; i < xv.rows; ++i) {
          for (std::size_t j = 0; j < xv.cols; ++j) gx(i, j) += inv * g(0, j);
        }
        break;
      }
      case Op::Sum: {
        Mat& gx = ensure(n.x);
        for (double& v : gx.a) v += g.a[0];
        break;
      }
      case Op::StackScalars: {
        for (std::size_t i = 0; i < n.many.size(); ++i) {
          ensure(n.many[i]).a[0] += g(i, 0);
        }
        break;
      }
    }
  }

  // Untouched nodes keep zero gradients of the right shape for callers.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!touched_[i]) grads_[i] = Mat(nodes_[i].value.rows, nodes_[i].value.cols);
  }
}

}  // namespace graphdist
