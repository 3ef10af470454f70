#include "graphdist/train.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "graphdist/eval.hpp"
#include "graphdist/kernels.hpp"
#include "graphdist/rng.hpp"

namespace graphdist {

void TrainConfig::validate() const {
  if (epochs == 0) throw DataError("TrainConfig: epochs must be positive");
  if (batch_pairs == 0) throw DataError("TrainConfig: batch_pairs must be positive");
  if (pretrain_batch_graphs == 0) throw DataError("TrainConfig: pretrain_batch_graphs must be positive");
  if (alpha < 0.0 || alpha > 1.0) throw DataError("TrainConfig: alpha outside [0, 1]");
  if (beta <= 0.0) throw DataError("TrainConfig: beta must be positive");
  if (lr <= 0.0) throw DataError("TrainConfig: lr must be positive");
  if (weight_decay < 0.0) throw DataError("TrainConfig: weight_decay must be non-negative");
}

EncodingContext EncodingContext::build(const Corpus& corpus, const ModelConfig& model) {
  model.encoder.validate();
  EncodingContext ctx;
  ctx.k_max = max_graph_size(corpus);
  ctx.wl = compute_wl_codes(corpus, model.wl_iterations);
  ctx.inputs.resize(corpus.size());
  ctx.structure_targets.resize(corpus.size());
  std::vector<std::exception_ptr> errors(corpus.size());
  const long long n = static_cast<long long>(corpus.size());
#pragma omp parallel for schedule(dynamic) if (kernels::parallel_enabled())
  for (long long i = 0; i < n; ++i) {
    try {
      const auto& g = corpus.graphs[static_cast<std::size_t>(i)];
      ctx.inputs[static_cast<std::size_t>(i)] =
          build_encoder_inputs(g, ctx.wl, model.encoder.d_h, corpus.d_x, ctx.k_max);
      ctx.structure_targets[static_cast<std::size_t>(i)] =
          structure_recovery_targets(g, ctx.wl, ctx.k_max);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return ctx;
}

namespace {

struct PairSample {
  std::size_t i, j;
  double target;
  double weight;
};

/// Representations of the unique graphs of a batch plus the batch loss node.
Tape::NodeId batch_loss_on_tape(Tape& tape, const ParamLeaves& leaves,
                                const EncodingContext& ctx, const EncoderConfig& encoder,
                                const std::vector<PairSample>& batch, Rng& dropout_rng,
                                bool use_dropout) {
  std::set<std::size_t> unique;
  for (const auto& p : batch) {
    unique.insert(p.i);
    unique.insert(p.j);
  }
  std::map<std::size_t, Tape::NodeId> z;
  for (std::size_t gi : unique) {
    DropoutPlan plan;
    if (use_dropout) plan = sample_dropout(dropout_rng, encoder, ctx.k_max);
    z[gi] = encode_on_tape(tape, ctx.inputs[gi], leaves, encoder,
                           use_dropout ? &plan : nullptr);
  }
  std::vector<Tape::NodeId> distances;
  Mat targets(batch.size(), 1);
  Mat weights(batch.size(), 1);
  distances.reserve(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    distances.push_back(pair_distance_on_tape(tape, z.at(batch[b].i), z.at(batch[b].j),
                                              leaves.at(kParamHeadFc1),
                                              leaves.at(kParamHeadFc2)));
    targets(b, 0) = batch[b].target;
    weights(b, 0) = batch[b].weight;
  }
  const Tape::NodeId residual = tape.sub(tape.stack_scalars(distances), tape.leaf(targets));
  return tape.sqrt(tape.sum(tape.square(tape.mul_mask(residual, std::move(weights)))));
}

std::vector<std::vector<double>> encode_all(const Corpus& corpus, const EncodingContext& ctx,
                                            const ParameterStore& params,
                                            const EncoderConfig& encoder) {
  std::vector<std::vector<double>> z(corpus.size());
  std::vector<std::exception_ptr> errors(corpus.size());
  const long long n = static_cast<long long>(corpus.size());
#pragma omp parallel for schedule(dynamic) if (kernels::parallel_enabled())
  for (long long i = 0; i < n; ++i) {
    try {
      z[static_cast<std::size_t>(i)] =
          encode_inputs(ctx.inputs[static_cast<std::size_t>(i)], params, encoder);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return z;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> train_train_pairs(const SplitAssignment& splits) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < splits.train_ids.size(); ++i) {
    for (std::size_t j = i + 1; j < splits.train_ids.size(); ++j) {
      pairs.emplace_back(splits.train_ids[i], splits.train_ids[j]);
    }
  }
  return pairs;
}

std::vector<std::pair<std::string, std::string>> validation_train_pairs(
    const SplitAssignment& splits) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& v : splits.validation_ids) {
    for (const auto& t : splits.train_ids) pairs.emplace_back(v, t);
  }
  return pairs;
}

LabeledPairs restrict_to_train(const LabeledPairs& labels, const SplitAssignment& splits) {
  LabeledPairs out;
  for (const auto& [a, b] : train_train_pairs(splits)) {
    if (labels.has(a, b)) out.set(a, b, labels.at(a, b));
  }
  return out;
}

TrainResult train_unconstrained(const Corpus& corpus, const SplitAssignment& splits,
                                const LabeledPairs& labels, const ModelConfig& model,
                                const TrainConfig& config, const ParameterStore* init) {
  config.validate();
  const EncodingContext ctx = EncodingContext::build(corpus, model);
  const EncoderConfig& encoder = model.encoder;

  // Labeled pool: train x train pairs present in the label map. Everything
  // else is unlabeled regardless of the file contents, so validation and
  // test labels cannot leak into the loss.
  std::vector<PairSample> labeled;
  std::set<std::pair<std::size_t, std::size_t>> labeled_keys;
  for (const auto& [a, b] : train_train_pairs(splits)) {
    if (!labels.has(a, b)) continue;
    const std::size_t i = corpus.index_of(a);
    const std::size_t j = corpus.index_of(b);
    labeled.push_back({i, j, labels.at(a, b), 1.0});
    labeled_keys.insert(std::minmax(i, j));
  }
  if (labeled.empty()) {
    throw DataError("train_unconstrained: no labeled train pairs");
  }
  std::vector<std::pair<std::size_t, std::size_t>> unlabeled_pool;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t j = i + 1; j < corpus.size(); ++j) {
      if (!labeled_keys.count({i, j})) unlabeled_pool.emplace_back(i, j);
    }
  }

  // Validation pairs (validation x train) drive checkpoint selection.
  std::vector<std::pair<std::size_t, std::size_t>> val_pairs;
  std::vector<double> val_truth;
  for (const auto& [a, b] : validation_train_pairs(splits)) {
    if (!labels.has(a, b)) continue;
    val_pairs.emplace_back(corpus.index_of(a), corpus.index_of(b));
    val_truth.push_back(labels.at(a, b));
  }

  Rng root(config.seed);
  const std::uint64_t param_seed = root.bits();
  Rng batch_rng = root.fork();
  Rng dropout_rng = root.fork();

  ParameterStore params =
      init != nullptr
          ? *init
          : build_model_parameters(encoder, corpus.d_x, ctx.k_max, param_seed);
  if (params.value(kParamEmbedWeightVec).rows != ctx.k_max) {
    throw DataError("train_unconstrained: checkpoint built for k_max " +
                    std::to_string(params.value(kParamEmbedWeightVec).rows) +
                    ", corpus needs " + std::to_string(ctx.k_max));
  }

  OptimConfig optim;
  optim.lr = config.lr;
  optim.weight_decay = config.weight_decay;

  TrainResult result;
  ParameterStore best = params;
  double best_rho = -std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  bool have_best = false;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    batch_rng.shuffle(labeled);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < labeled.size(); start += config.batch_pairs) {
      const std::size_t stop = std::min(labeled.size(), start + config.batch_pairs);
      std::vector<PairSample> batch(labeled.begin() + start, labeled.begin() + stop);
      // Matching count of unlabeled pairs: target 1 ("far by default"),
      // weight alpha.
      if (!unlabeled_pool.empty() && config.alpha > 0.0) {
        const std::size_t want = stop - start;
        for (std::size_t s = 0; s < want; ++s) {
          const auto& [i, j] = unlabeled_pool[batch_rng.index(unlabeled_pool.size())];
          batch.push_back({i, j, 1.0, config.alpha});
        }
      }
      Tape tape;
      const ParamLeaves leaves = stage_parameters(tape, params);
      const Tape::NodeId loss =
          batch_loss_on_tape(tape, leaves, ctx, encoder, batch, dropout_rng, true);
      const double loss_value = tape.value(loss).scalar_value();
      if (!std::isfinite(loss_value)) {
        throw TrainingDiverged("train_unconstrained: non-finite loss at epoch " +
                                   std::to_string(epoch),
                               have_best ? best : params);
      }
      tape.backward(loss);
      params.zero_grad();
      accumulate_gradients(tape, leaves, params);
      params.step(optim);
      epoch_loss += loss_value;
      ++batches;
    }
    epoch_loss /= static_cast<double>(batches);

    // Clean epoch diagnostics from one dropout-off pass: the full-matrix
    // masked loss and the validation rank correlation.
    const auto z = encode_all(corpus, ctx, params, encoder);
    const HeadWeights head = head_weights_from(params);
    double full_sq = 0.0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      for (std::size_t j = i + 1; j < corpus.size(); ++j) {
        const bool is_labeled = labeled_keys.count({i, j}) != 0;
        const double target = is_labeled ? labels.at(corpus.graphs[i].id(), corpus.graphs[j].id())
                                         : 1.0;
        const double weight = is_labeled ? 1.0 : config.alpha;
        const double r = weight * (pair_distance(z[i], z[j], head) - target);
        full_sq += 2.0 * r * r;  // both orientations of the symmetric matrix
      }
    }
    const double full_loss = std::sqrt(full_sq);

    double val_rho = std::numeric_limits<double>::quiet_NaN();
    if (!val_pairs.empty()) {
      std::vector<double> pred;
      pred.reserve(val_pairs.size());
      for (const auto& [i, j] : val_pairs) pred.push_back(pair_distance(z[i], z[j], head));
      try {
        val_rho = spearman_rho(pred, val_truth);
      } catch (const DataError&) {
        // constant predictions: leave NaN, treated as no improvement
      }
    }
    result.log.push_back({epoch, epoch_loss, full_loss, val_rho});

    if (std::isfinite(val_rho) && val_rho > best_rho) {
      best_rho = val_rho;
      best = params;
      best_epoch = epoch;
      have_best = true;
    }
    if (have_best && config.patience > 0 && epoch - best_epoch >= config.patience) {
      break;
    }
  }

  result.params = have_best ? std::move(best) : std::move(params);
  result.best_epoch = have_best ? best_epoch : result.log.size();
  result.best_val_rho = best_rho;
  return result;
}

PretrainResult pretrain_encoder(const Corpus& corpus, const ModelConfig& model,
                                const TrainConfig& config) {
  config.validate();
  if (config.pretrain_epochs == 0) {
    throw DataError("pretrain_encoder: pretrain_epochs must be positive");
  }
  const EncodingContext ctx = EncodingContext::build(corpus, model);
  const EncoderConfig& encoder = model.encoder;

  Rng root(config.seed);
  const std::uint64_t param_seed = root.bits();
  Rng batch_rng = root.fork();
  Rng dropout_rng = root.fork();
  ParameterStore params = build_model_parameters(encoder, corpus.d_x, ctx.k_max, param_seed);

  OptimConfig optim;
  optim.lr = config.lr;
  optim.weight_decay = config.weight_decay;

  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  PretrainResult result;
  for (std::size_t epoch = 1; epoch <= config.pretrain_epochs; ++epoch) {
    batch_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.pretrain_batch_graphs) {
      const std::size_t stop = std::min(order.size(), start + config.pretrain_batch_graphs);
      Tape tape;
      const ParamLeaves leaves = stage_parameters(tape, params);
      std::vector<Tape::NodeId> losses;
      for (std::size_t s = start; s < stop; ++s) {
        const std::size_t gi = order[s];
        DropoutPlan plan = sample_dropout(dropout_rng, encoder, ctx.k_max);
        losses.push_back(pretrain_loss_on_tape(tape, ctx.inputs[gi], ctx.structure_targets[gi],
                                               ctx.inputs[gi].attrs, leaves, encoder, &plan,
                                               corpus.d_x));
      }
      Tape::NodeId loss = losses[0];
      for (std::size_t s = 1; s < losses.size(); ++s) loss = tape.add(loss, losses[s]);
      loss = tape.scale(loss, 1.0 / static_cast<double>(losses.size()));
      const double loss_value = tape.value(loss).scalar_value();
      if (!std::isfinite(loss_value)) {
        throw TrainingDiverged("pretrain_encoder: non-finite loss at epoch " +
                                   std::to_string(epoch),
                               params);
      }
      tape.backward(loss);
      params.zero_grad();
      accumulate_gradients(tape, leaves, params);
      params.step(optim);
      epoch_loss += loss_value;
      ++batches;
    }
    // clean (dropout-off) loss over the whole corpus for the log
    std::vector<std::size_t> all(corpus.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const double clean = pretrain_losses(corpus, all, ctx.wl, params, encoder, ctx.k_max);
    result.log.push_back({epoch, epoch_loss / static_cast<double>(batches), clean,
                          std::numeric_limits<double>::quiet_NaN()});
  }
  result.params = std::move(params);
  return result;
}

DistanceMatrix predict_distance_matrix(const ParameterStore& params, const Corpus& corpus,
                                       const ModelConfig& model, const LabeledPairs& train_truth) {
  const EncodingContext ctx = EncodingContext::build(corpus, model);
  const auto z = encode_all(corpus, ctx, params, model.encoder);
  const HeadWeights head = head_weights_from(params);
  const std::size_t m = corpus.size();

  DistanceMatrix dm;
  dm.ids = corpus.ids();
  dm.d = Mat(m, m);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> values(pairs.size());
  std::vector<std::exception_ptr> errors(pairs.size());
  const long long n = static_cast<long long>(pairs.size());
#pragma omp parallel for schedule(dynamic) if (kernels::parallel_enabled())
  for (long long p = 0; p < n; ++p) {
    try {
      const auto& [i, j] = pairs[static_cast<std::size_t>(p)];
      values[static_cast<std::size_t>(p)] = pair_distance(z[i], z[j], head);
    } catch (...) {
      errors[static_cast<std::size_t>(p)] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& [i, j] = pairs[p];
    double v = values[p];
    // Training entries are overwritten with their true distance values.
    if (train_truth.has(dm.ids[i], dm.ids[j])) v = train_truth.at(dm.ids[i], dm.ids[j]);
    dm.d(i, j) = v;
    dm.d(j, i) = v;
  }
  return dm;
}

DistanceMatrix truth_matrix_from_labels(const Corpus& corpus, const LabeledPairs& labels) {
  const std::size_t m = corpus.size();
  DistanceMatrix dm;
  dm.ids = corpus.ids();
  dm.d = Mat(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double v = labels.at(dm.ids[i], dm.ids[j]);  // throws when missing
      dm.d(i, j) = v;
      dm.d(j, i) = v;
    }
  }
  return dm;
}

void save_train_log(const std::vector<TrainLogEntry>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("save_train_log: cannot open '" + path + "' for writing");
  for (const auto& e : log) {
    nlohmann::json j;
    j["epoch"] = e.epoch;
    j["loss"] = e.loss;
    j["full_loss"] = e.full_loss;
    if (std::isfinite(e.val_rho)) {
      j["val_rho"] = e.val_rho;
    } else {
      j["val_rho"] = nullptr;
    }
    out << j.dump() << '\n';
  }
  if (!out) throw DataError("save_train_log: write failure on '" + path + "'");
}

}  // namespace graphdist
