#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphdist/graph.hpp"
#include "graphdist/matrix.hpp"
#include "graphdist/params.hpp"
#include "graphdist/rng.hpp"
#include "graphdist/tape.hpp"
#include "graphdist/wl.hpp"

namespace graphdist {

struct EncoderConfig {
  std::size_t d_h = 32;
  std::size_t heads = 2;
  std::size_t layers = 2;
  std::size_t intermediate_size = 32;
  double hidden_dropout = 0.5;
  double attention_dropout = 0.3;
  enum class Residual { raw, none };
  Residual residual = Residual::raw;
  bool fusion_divide_by_valid = false;  // Eq-literal fusion divides by k_max
  bool mask_pad_attention = false;      // pad rows attend by default
  void validate() const;
};

struct LayerWeights {
  Mat wq, wk, wv;  // d_h x d_h, column-partitioned across heads
};

/// Train-time Bernoulli masks with inverse scaling; sampled per encoded
/// graph in a fixed order so runs are reproducible.
struct DropoutPlan {
  std::vector<std::vector<Mat>> attention;  // [layer][head], k x k
  std::vector<Mat> hidden;                  // [layer], k x d_h
};

DropoutPlan sample_dropout(Rng& rng, const EncoderConfig& config, std::size_t k_max);

// Parameter names used by the full model.
inline const char* kParamEmbedAttr = "embed.attr";
inline const char* kParamEmbedWeightVec = "embed.wvec";
inline const char* kParamHeadFc1 = "head.fc1";
inline const char* kParamHeadFc2 = "head.fc2";
inline const char* kParamPretrainRecon = "pre.recon";
std::string layer_param_name(std::size_t layer, const char* which);  // enc.l<i>.<which>

/// Registers and initializes every trainable matrix of the model
/// (embeddings, per-layer attention weights, distance head, pre-training
/// reconstruction head) in a fixed order.
ParameterStore build_model_parameters(const EncoderConfig& config, std::size_t d_x,
                                      std::size_t k_max, std::uint64_t seed);

// --- differentiable path ----------------------------------------------------

Tape::NodeId initial_embeddings_on_tape(Tape& tape, const EncoderInputs& in,
                                        const ParamLeaves& leaves);

Tape::NodeId g_transformer_layer_on_tape(Tape& tape, Tape::NodeId h_prev, Tape::NodeId wq,
                                         Tape::NodeId wk, Tape::NodeId wv,
                                         Tape::NodeId residual_source, const EncoderConfig& config,
                                         const DropoutPlan* dropout, std::size_t layer,
                                         std::size_t valid_count);

/// Final node-state matrix H^(layers).
Tape::NodeId node_states_on_tape(Tape& tape, const EncoderInputs& in, const ParamLeaves& leaves,
                                 const EncoderConfig& config, const DropoutPlan* dropout);

Tape::NodeId fuse_on_tape(Tape& tape, Tape::NodeId states, const EncoderConfig& config,
                          std::size_t valid_count);

/// Graph representation z (1 x d_h node).
Tape::NodeId encode_on_tape(Tape& tape, const EncoderInputs& in, const ParamLeaves& leaves,
                            const EncoderConfig& config, const DropoutPlan* dropout);

// --- value path ---------------------------------------------------------------

/// Single layer on plain matrices; residual_source may be null (none).
Mat g_transformer_layer(const Mat& h_prev, const LayerWeights& weights,
                        const Mat* residual_source, const EncoderConfig& config);

/// Stack + fusion on a given H^(0); valid_count only matters for the
/// non-default fusion/masking flags (0 means "all rows real").
std::vector<double> encode_graph(const Mat& h0, const std::vector<LayerWeights>& layers,
                                 const EncoderConfig& config, std::size_t valid_count = 0);

std::vector<LayerWeights> layer_weights_from(const ParameterStore& params,
                                             const EncoderConfig& config);

/// Inputs-to-representation convenience used by prediction and evaluation.
std::vector<double> encode_inputs(const EncoderInputs& in, const ParameterStore& params,
                                  const EncoderConfig& config);

// --- pre-training -----------------------------------------------------------

/// Row-normalized structure-recovery target: entry (p, q) is
/// w(n_p, n_q) / max(1, weighted_degree(n_p)) over the canonical order,
/// zero on the diagonal and on pad rows/columns.
Mat structure_recovery_targets(const GraphInstance& g, const WLCodeTable& wl, std::size_t k_max);

/// Attribute-reconstruction MSE (skipped when d_x == 0) plus structure
/// recovery MSE between node-state cosine similarities and the targets.
Tape::NodeId pretrain_loss_on_tape(Tape& tape, const EncoderInputs& in, const Mat& targets,
                                   const Mat& attr_targets, const ParamLeaves& leaves,
                                   const EncoderConfig& config, const DropoutPlan* dropout,
                                   std::size_t d_x);

/// Mean pre-training loss over a batch of graphs, dropout off.
double pretrain_losses(const Corpus& corpus, const std::vector<std::size_t>& batch,
                       const WLCodeTable& wl, const ParameterStore& params,
                       const EncoderConfig& config, std::size_t k_max);

}  // namespace graphdist
