#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "graphdist/matrix.hpp"
#include "graphdist/rng.hpp"
#include "graphdist/tape.hpp"

namespace graphdist {

struct OptimConfig {
  double lr = 0.001;
  double weight_decay = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Named trainable matrices with gradient and adaptive-moment buffers.
/// Iteration follows insertion order everywhere, which keeps staging,
/// updates and checkpoints deterministic.
class ParameterStore {
 public:
  Mat& add(const std::string& name, Mat value);
  bool has(const std::string& name) const { return index_.count(name) != 0; }
  Mat& value(const std::string& name);
  const Mat& value(const std::string& name) const;
  Mat& grad(const std::string& name);
  const Mat& grad(const std::string& name) const;
  const std::vector<std::string>& names() const { return names_; }

  void zero_grad();
  void accumulate_grad(const std::string& name, const Mat& g);

  /// Adaptive-moment update with decoupled weight decay. Throws NumericError
  /// on non-finite gradients.
  void step(const OptimConfig& config);
  long long step_count() const { return step_; }

  std::size_t coordinate_count() const;

  /// Binary checkpoint: named arrays, shape header, little-endian f64.
  /// Round-trips bit-exactly. Parameters only; moments are not persisted.
  void save(const std::string& path) const;
  static ParameterStore load(const std::string& path);

 private:
  struct Entry {
    std::string name;
    Mat value, grad, m, v;
  };
  std::size_t at(const std::string& name) const;

  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> names_;
  long long step_ = 0;
};

/// Uniform(-s, s) with s = sqrt(6 / (rows + cols)); row-major fill order.
Mat xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng);

/// One tape leaf per parameter, insertion order.
struct ParamLeaves {
  std::map<std::string, Tape::NodeId> ids;
  Tape::NodeId at(const std::string& name) const;
};

ParamLeaves stage_parameters(Tape& tape, const ParameterStore& params);

/// Adds the tape gradients of every staged parameter into the store.
void accumulate_gradients(const Tape& tape, const ParamLeaves& leaves, ParameterStore& params);

struct FdCheckResult {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
};

/// Central finite differences against the gradients already present in
/// `params` on a sampled coordinate subset. `loss_value` must be pure and
/// deterministic (dropout off).
FdCheckResult finite_difference_check(const std::function<double(const ParameterStore&)>& loss_value,
                                      const ParameterStore& params, double eps,
                                      std::size_t max_coords, Rng& rng);

}  // namespace graphdist
