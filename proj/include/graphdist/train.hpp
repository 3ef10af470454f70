#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphdist/distance.hpp"
#include "graphdist/encoder.hpp"
#include "graphdist/errors.hpp"
#include "graphdist/ged.hpp"
#include "graphdist/graph.hpp"
#include "graphdist/params.hpp"

namespace graphdist {

struct ModelConfig {
  EncoderConfig encoder;
  int wl_iterations = 2;
};

struct TrainConfig {
  std::size_t epochs = 1000;  // early stop on validation rank correlation
  std::size_t patience = 50;
  std::size_t batch_pairs = 64;
  std::size_t pretrain_epochs = 0;
  std::size_t pretrain_batch_graphs = 16;
  double lr = 0.001;
  double weight_decay = 5e-4;
  double alpha = 0.1;
  double beta = 1000.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Per-corpus constants shared by training, prediction and evaluation.
struct EncodingContext {
  WLCodeTable wl;
  std::size_t k_max = 0;
  std::vector<EncoderInputs> inputs;      // aligned with corpus.graphs
  std::vector<Mat> structure_targets;     // aligned with corpus.graphs

  static EncodingContext build(const Corpus& corpus, const ModelConfig& model);
};

struct TrainLogEntry {
  std::size_t epoch = 0;
  double loss = 0.0;       // mean sampled-batch loss (dropout on)
  double full_loss = 0.0;  // masked loss over the full matrix, dropout off
  double val_rho = 0.0;    // NaN when no validation pairs or undefined
};

struct TrainResult {
  ParameterStore params;  // validation-selected checkpoint
  std::vector<TrainLogEntry> log;
  std::size_t best_epoch = 0;
  double best_val_rho = 0.0;
};

struct TrainingDiverged : NumericError {
  TrainingDiverged(const std::string& msg, ParameterStore last)
      : NumericError(msg), last_good(std::move(last)) {}
  ParameterStore last_good;
};

/// Semi-supervised minimization of the masked L2 loss over sampled labeled
/// train-pairs plus an equal count of unlabeled pairs. Only train x train
/// labels are consumed; validation x train labels drive checkpoint
/// selection. Deterministic given the seed.
TrainResult train_unconstrained(const Corpus& corpus, const SplitAssignment& splits,
                                const LabeledPairs& labels, const ModelConfig& model,
                                const TrainConfig& config, const ParameterStore* init = nullptr);

struct PretrainResult {
  ParameterStore params;
  std::vector<TrainLogEntry> log;  // val_rho unused
};

/// Unsupervised pre-training on attribute reconstruction + structure
/// recovery over single graphs.
PretrainResult pretrain_encoder(const Corpus& corpus, const ModelConfig& model,
                                const TrainConfig& config);

/// Full predicted matrix with labeled training entries overwritten by their
/// ground truth, zero diagonal, exactly symmetric.
DistanceMatrix predict_distance_matrix(const ParameterStore& params, const Corpus& corpus,
                                       const ModelConfig& model, const LabeledPairs& train_truth);

/// Dense truth matrix; every off-diagonal pair must be labeled.
DistanceMatrix truth_matrix_from_labels(const Corpus& corpus, const LabeledPairs& labels);

std::vector<std::pair<std::string, std::string>> train_train_pairs(const SplitAssignment& splits);
std::vector<std::pair<std::string, std::string>> validation_train_pairs(
    const SplitAssignment& splits);

/// Labels restricted to train x train pairs.
LabeledPairs restrict_to_train(const LabeledPairs& labels, const SplitAssignment& splits);

void save_train_log(const std::vector<TrainLogEntry>& log, const std::string& path);

}  // namespace graphdist
