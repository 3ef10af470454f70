#include "graphdist/encoder.hpp"

#include <cmath>

#include "graphdist/errors.hpp"

namespace graphdist {

void EncoderConfig::validate() const {
  if (d_h == 0 || d_h % 2 != 0) {
    throw DataError("EncoderConfig: d_h must be positive and even, got " + std::to_string(d_h));
  }
  if (heads == 0 || d_h % heads != 0) {
    throw DataError("EncoderConfig: d_h " + std::to_string(d_h) + " not divisible by heads " +
                    std::to_string(heads));
  }
  if (intermediate_size == 0) throw DataError("EncoderConfig: intermediate_size must be positive");
  if (hidden_dropout < 0.0 || hidden_dropout >= 1.0 || attention_dropout < 0.0 ||
      attention_dropout >= 1.0) {
    throw DataError("EncoderConfig: dropout rates must lie in [0, 1)");
  }
}

std::string layer_param_name(std::size_t layer, const char* which) {
  return "enc.l" + std::to_string(layer) + "." + which;
}

DropoutPlan sample_dropout(Rng& rng, const EncoderConfig& config, std::size_t k_max) {
  DropoutPlan plan;
  plan.attention.resize(config.layers);
  plan.hidden.resize(config.layers);
  for (std::size_t l = 0; l < config.layers; ++l) {
    plan.attention[l].resize(config.heads);
    for (std::size_t h = 0; h < config.heads; ++h) {
      Mat m(k_max, k_max);
      const double keep = 1.0 - config.attention_dropout;
      for (double& v : m.a) v = rng.uniform() < keep ? 1.0 / keep : 0.0;
      plan.attention[l][h] = std::move(m);
    }
    Mat m(k_max, config.d_h);
    const double keep = 1.0 - config.hidden_dropout;
    for (double& v : m.a) v = rng.uniform() < keep ? 1.0 / keep : 0.0;
    plan.hidden[l] = std::move(m);
  }
  return plan;
}

ParameterStore build_model_parameters(const EncoderConfig& config, std::size_t d_x,
                                      std::size_t k_max, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  ParameterStore store;
  if (d_x > 0) store.add(kParamEmbedAttr, xavier_uniform(d_x, config.d_h, rng));
  store.add(kParamEmbedWeightVec, xavier_uniform(k_max, config.d_h, rng));
  for (std::size_t l = 0; l < config.layers; ++l) {
    store.add(layer_param_name(l, "wq"), xavier_uniform(config.d_h, config.d_h, rng));
    store.add(layer_param_name(l, "wk"), xavier_uniform(config.d_h, config.d_h, rng));
    store.add(layer_param_name(l, "wv"), xavier_uniform(config.d_h, config.d_h, rng));
  }
  store.add(kParamHeadFc1, xavier_uniform(config.d_h, config.intermediate_size, rng));
  store.add(kParamHeadFc2, xavier_uniform(config.intermediate_size, 1, rng));
  if (d_x > 0) store.add(kParamPretrainRecon, xavier_uniform(config.d_h, d_x, rng));
  return store;
}

Tape::NodeId initial_embeddings_on_tape(Tape& tape, const EncoderInputs& in,
                                        const ParamLeaves& leaves) {
  Tape::NodeId h = tape.matmul(tape.leaf(in.weight_rows), leaves.at(kParamEmbedWeightVec));
  h = tape.add(h, tape.leaf(in.positional));
  if (in.attrs.cols > 0) {
    h = tape.add(h, tape.matmul(tape.leaf(in.attrs), leaves.at(kParamEmbedAttr)));
  }
  return h;
}

namespace {

Mat pad_key_mask(std::size_t k, std::size_t valid) {
  Mat m(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = valid; j < k; ++j) m(i, j) = -1e30;
  }
  return m;
}

}  // namespace

Tape::NodeId g_transformer_layer_on_tape(Tape& tape, Tape::NodeId h_prev, Tape::NodeId wq,
                                         Tape::NodeId wk, Tape::NodeId wv,
                                         Tape::NodeId residual_source, const EncoderConfig& config,
                                         const DropoutPlan* dropout, std::size_t layer,
                                         std::size_t valid_count) {
  const std::size_t k = tape.value(h_prev).rows;
  const std::size_t d_head = config.d_h / config.heads;
  const Tape::NodeId q = tape.matmul(h_prev, wq);
  const Tape::NodeId kk = tape.matmul(h_prev, wk);
  const Tape::NodeId v = tape.matmul(h_prev, wv);
  std::vector<Tape::NodeId> heads;
  heads.reserve(config.heads);
  for (std::size_t h = 0; h < config.heads; ++h) {
    const std::size_t c0 = h * d_head;
    const std::size_t c1 = c0 + d_head;
    Tape::NodeId logits = tape.scale(tape.matmul_nt(tape.cols(q, c0, c1), tape.cols(kk, c0, c1)),
                                     1.0 / std::sqrt(static_cast<double>(d_head)));
    if (config.mask_pad_attention && valid_count > 0 && valid_count < k) {
      logits = tape.add_mask(logits, pad_key_mask(k, valid_count));
    }
    Tape::NodeId probs = tape.row_softmax(logits);
    if (dropout != nullptr) {
      probs = tape.mul_mask(probs, dropout->attention[layer][h]);
    }
    heads.push_back(tape.matmul(probs, tape.cols(v, c0, c1)));
  }
  Tape::NodeId out = config.heads == 1 ? heads[0] : tape.hcat(heads);
  if (dropout != nullptr) {
    out = tape.mul_mask(out, dropout->hidden[layer]);
  }
  if (residual_source >= 0) out = tape.add(out, residual_source);
  return out;
}

Tape::NodeId node_states_on_tape(Tape& tape, const EncoderInputs& in, const ParamLeaves& leaves,
                                 const EncoderConfig& config, const DropoutPlan* dropout) {
  config.validate();
  const Tape::NodeId h0 = initial_embeddings_on_tape(tape, in, leaves);
  Tape::NodeId h = h0;
  const Tape::NodeId residual = config.residual == EncoderConfig::Residual::raw ? h0 : -1;
  for (std::size_t l = 0; l < config.layers; ++l) {
    h = g_transformer_layer_on_tape(tape, h, leaves.at(layer_param_name(l, "wq")),
                                    leaves.at(layer_param_name(l, "wk")),
                                    leaves.at(layer_param_name(l, "wv")), residual, config, dropout,
                                    l, in.valid_count);
  }
  return h;
}

Tape::NodeId fuse_on_tape(Tape& tape, Tape::NodeId states, const EncoderConfig& config,
                          std::size_t valid_count) {
  Tape::NodeId z = tape.mean_rows(states);
  if (config.fusion_divide_by_valid && valid_count > 0) {
    const std::size_t k = tape.value(states).rows;
    z = tape.scale(z, static_cast<double>(k) / static_cast<double>(valid_count));
  }
  return z;
}

Tape::NodeId encode_on_tape(Tape& tape, const EncoderInputs& in, const ParamLeaves& leaves,
                            const EncoderConfig& config, const DropoutPlan* dropout) {
  return fuse_on_tape(tape, node_states_on_tape(tape, in, leaves, config, dropout),
                      config, in.valid_count);
}

Mat g_transformer_layer(const Mat& h_prev, const LayerWeights& weights,
                        const Mat* residual_source, const EncoderConfig& config) {
  Tape tape;
  const Tape::NodeId h = tape.leaf(h_prev);
  const Tape::NodeId res = residual_source != nullptr ? tape.leaf(*residual_source) : -1;
  const Tape::NodeId out = g_transformer_layer_on_tape(
      tape, h, tape.leaf(weights.wq), tape.leaf(weights.wk), tape.leaf(weights.wv), res, config,
      nullptr, 0, 0);
  return tape.value(out);
}

std::vector<double> encode_graph(const Mat& h0, const std::vector<LayerWeights>& layers,
                                 const EncoderConfig& config, std::size_t valid_count) {
  if (layers.size() != config.layers) {
    throw DataError("encode_graph: " + std::to_string(layers.size()) + " layer weights for " +
                    std::to_string(config.layers) + " configured layers");
  }
  Tape tape;
  const Tape::NodeId h0n = tape.leaf(h0);
  Tape::NodeId h = h0n;
  const Tape::NodeId residual = config.residual == EncoderConfig::Residual::raw ? h0n : -1;
  for (std::size_t l = 0; l < config.layers; ++l) {
    h = g_transformer_layer_on_tape(tape, h, tape.leaf(layers[l].wq), tape.leaf(layers[l].wk),
                                    tape.leaf(layers[l].wv), residual, config, nullptr, l,
                                    valid_count);
  }
  const Mat& z = tape.value(fuse_on_tape(tape, h, config, valid_count));
  return z.a;
}

std::vector<LayerWeights> layer_weights_from(const ParameterStore& params,
                                             const EncoderConfig& config) {
  std::vector<LayerWeights> out(config.layers);
  for (std::size_t l = 0; l < config.layers; ++l) {
    out[l].wq = params.value(layer_param_name(l, "wq"));
    out[l].wk = params.value(layer_param_name(l, "wk"));
    out[l].wv = params.value(layer_param_name(l, "wv"));
  }
  return out;
}

std::vector<double> encode_inputs(const EncoderInputs& in, const ParameterStore& params,
                                  const EncoderConfig& config) {
  Tape tape;
  const ParamLeaves leaves = stage_parameters(tape, params);
  const Mat& z = tape.value(encode_on_tape(tape, in, leaves, config, nullptr));
  return z.a;
}

Mat structure_recovery_targets(const GraphInstance& g, const WLCodeTable& wl, std::size_t k_max) {
  const std::vector<std::size_t> order = canonical_node_order(g, wl);
  Mat t(k_max, k_max);
  for (std::size_t p = 0; p < order.size(); ++p) {
    const double denom = std::max(1.0, g.weighted_degree(order[p]));
    for (std::size_t q = 0; q < order.size(); ++q) {
      t(p, q) = g.weight(order[p], order[q]) / denom;
    }
  }
  return t;
}

Tape::NodeId pretrain_loss_on_tape(Tape& tape, const EncoderInputs& in, const Mat& targets,
                                   const Mat& attr_targets, const ParamLeaves& leaves,
                                   const EncoderConfig& config, const DropoutPlan* dropout,
                                   std::size_t d_x) {
  const std::size_t k = in.positional.rows;
  const std::size_t valid = in.valid_count;
  const Tape::NodeId states = node_states_on_tape(tape, in, leaves, config, dropout);

  Tape::NodeId loss = -1;
  if (d_x > 0) {
    Mat row_mask(k, d_x);
    for (std::size_t i = 0; i < valid; ++i) {
      for (std::size_t j = 0; j < d_x; ++j) row_mask(i, j) = 1.0;
    }
    const Tape::NodeId recon = tape.matmul(states, leaves.at(kParamPretrainRecon));
    const Tape::NodeId err = tape.mul_mask(tape.sub(recon, tape.leaf(attr_targets)),
                                           std::move(row_mask));
    loss = tape.scale(tape.sum(tape.square(err)), 1.0 / static_cast<double>(valid * d_x));
  }
  if (valid >= 2) {
    const Tape::NodeId gram = tape.matmul_nt(states, states);
    const Tape::NodeId inv_norm = tape.recip(tape.sqrt(tape.add_const(tape.diag(gram), 1e-12)));
    const Tape::NodeId cosine = tape.hadamard(gram, tape.matmul_nt(inv_norm, inv_norm));
    Mat pair_mask(k, k);
    for (std::size_t i = 0; i < valid; ++i) {
      for (std::size_t j = 0; j < valid; ++j) {
        if (i != j) pair_mask(i, j) = 1.0;
      }
    }
    const Tape::NodeId err = tape.mul_mask(tape.sub(cosine, tape.leaf(targets)),
                                           std::move(pair_mask));
    const Tape::NodeId structure =
        tape.scale(tape.sum(tape.square(err)), 1.0 / static_cast<double>(valid * (valid - 1)));
    loss = loss < 0 ? structure : tape.add(loss, structure);
  }
  if (loss < 0) loss = tape.leaf(Mat::scalar(0.0));
  return loss;
}

double pretrain_losses(const Corpus& corpus, const std::vector<std::size_t>& batch,
                       const WLCodeTable& wl, const ParameterStore& params,
                       const EncoderConfig& config, std::size_t k_max) {
  if (batch.empty()) throw DataError("pretrain_losses: empty batch");
  Tape tape;
  const ParamLeaves leaves = stage_parameters(tape, params);
  double total = 0.0;
  for (std::size_t gi : batch) {
    const GraphInstance& g = corpus.graphs.at(gi);
    const EncoderInputs in = build_encoder_inputs(g, wl, config.d_h, corpus.d_x, k_max);
    const Mat targets = structure_recovery_targets(g, wl, k_max);
    const Tape::NodeId loss =
        pretrain_loss_on_tape(tape, in, targets, in.attrs, leaves, config, nullptr, corpus.d_x);
    total += tape.value(loss).scalar_value();
  }
  return total / static_cast<double>(batch.size());
}

}  // namespace graphdist
