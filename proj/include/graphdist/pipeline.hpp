#pragma once

#include <string>

#include "graphdist/config.hpp"
#include "graphdist/eval.hpp"

namespace graphdist::pipeline {

/// Joins out_dir and name unless name is absolute.
std::string resolve(const std::string& out_dir, const std::string& name);

void run_synth(const RunConfig& cfg, const std::string& out_dir);

/// Labels for the configured pair set (all / train / train+val).
void run_ged(const RunConfig& cfg, const std::string& out_dir);

void run_pretrain(const RunConfig& cfg, const std::string& out_dir);

/// Trains, writes the validation-selected checkpoint and the epoch log. On
/// divergence the last good checkpoint is still written before rethrowing.
void run_train(const RunConfig& cfg, const std::string& out_dir);

void run_predict(const RunConfig& cfg, const std::string& out_dir);

struct FixSummary {
  std::size_t violations_before = 0;
  std::size_t violations_after = 0;
  std::size_t sweeps = 0;
  double frobenius_change = 0.0;
};

/// in_path empty means the configured dhat artifact.
FixSummary run_fix(const RunConfig& cfg, const std::string& out_dir,
                   const std::string& in_path = "");

/// pred_path empty means dfixed when present, dhat otherwise.
EvalReport run_eval(const RunConfig& cfg, const std::string& out_dir,
                    const std::string& pred_path = "");

struct QueryHit {
  std::string id;
  double distance = 0.0;
};

std::vector<QueryHit> run_query(const RunConfig& cfg, const std::string& out_dir,
                                const std::string& graph_id, std::size_t top,
                                const std::string& matrix_path = "");

/// synth -> ged -> (pretrain) -> train -> predict -> fix -> eval.
void run_all(const RunConfig& cfg, const std::string& out_dir);

}  // namespace graphdist::pipeline
