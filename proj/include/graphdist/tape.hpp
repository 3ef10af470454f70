#pragma once

#include <vector>

#include "graphdist/matrix.hpp"

namespace graphdist {

/// Reverse-mode tape over dense double matrices. Values are computed eagerly
/// as nodes are recorded; creation order is a topological order, so backward
/// is a single reverse walk that visits each node exactly once. One tape per
/// training step, single writer.
class Tape {
 public:
  using NodeId = int;

  NodeId leaf(Mat v);

  NodeId matmul(NodeId x, NodeId y);     // x * y
  NodeId matmul_nt(NodeId x, NodeId y);  // x * y^T
  NodeId add(NodeId x, NodeId y);
  NodeId sub(NodeId x, NodeId y);
  NodeId hadamard(NodeId x, NodeId y);
  NodeId row_softmax(NodeId x);
  NodeId relu(NodeId x);
  NodeId square(NodeId x);
  NodeId exp(NodeId x);
  NodeId abs(NodeId x);
  NodeId sqrt(NodeId x);
  NodeId recip(NodeId x);
  NodeId scale(NodeId x, double c);
  NodeId add_const(NodeId x, double c);
  NodeId mul_mask(NodeId x, Mat mask);  // elementwise product with a constant
  NodeId add_mask(NodeId x, Mat mask);  // elementwise sum with a constant
  NodeId cols(NodeId x, std::size_t c0, std::size_t c1);  // column slice [c0, c1)
  NodeId hcat(const std::vector<NodeId>& xs);
  NodeId diag(NodeId x);       // n x n -> n x 1
  NodeId mean_rows(NodeId x);  // R x C -> 1 x C, column means
  NodeId sum(NodeId x);        // 1 x 1
  NodeId stack_scalars(const std::vector<NodeId>& xs);  // n x 1 from 1x1 nodes

  const Mat& value(NodeId id) const;

  /// Gradient of the last backward() target w.r.t. node id.
  const Mat& grad(NodeId id) const;

  /// Reverse sweep from a scalar node. Calling it again on the same tape is
  /// an error; record a fresh tape per step instead.
  void backward(NodeId loss);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op {
    Leaf, MatMul, MatMulNT, Add, Sub, Hadamard, RowSoftmax, Relu, Square, Exp,
    Abs, Sqrt, Recip, Scale, AddConst, MulMask, AddMask, Cols, HCat, Diag,
    MeanRows, Sum, StackScalars,
  };

  struct Node {
    Op op = Op::Leaf;
    NodeId x = -1;
    NodeId y = -1;
    double c = 0.0;
    std::size_t c0 = 0, c1 = 0;
    std::vector<NodeId> many;
    Mat mask;
    Mat value;
  };

  NodeId push(Node n);
  const Node& node(NodeId id) const;
  void check(NodeId id) const;

  std::vector<Node> nodes_;
  std::vector<Mat> grads_;
  std::vector<char> touched_;
  bool backward_done_ = false;
};

}  // namespace graphdist
