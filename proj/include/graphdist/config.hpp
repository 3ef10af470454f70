#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "graphdist/graph.hpp"
#include "graphdist/metric_fix.hpp"
#include "graphdist/train.hpp"

namespace graphdist {

/// One JSON document drives every pipeline stage; see README for the schema.
struct RunConfig {
  std::uint64_t seed = 1;

  SyntheticSpec synthetic;  // used by `synth`; seed is derived from the run seed
  std::array<double, 3> split_ratios{6.0, 2.0, 2.0};

  ModelConfig model;
  TrainConfig train;         // seed is derived from the run seed
  FixingOptions fix;

  std::size_t eval_k = 10;
  std::size_t ged_size_cap = 8;
  std::string ged_pairs = "all";  // all | train | train+val

  std::string init_checkpoint;  // optional pre-trained weights for `train`

  // Artifact file names, resolved against the --out directory.
  std::string corpus_file = "corpus.jsonl";
  std::string labels_file = "labels.csv";
  std::string checkpoint_file = "checkpoint.bin";
  std::string pretrained_file = "pretrained.bin";
  std::string dhat_file = "dhat.csv";
  std::string dfixed_file = "dfixed.csv";
  std::string train_log_file = "train_log.jsonl";
  std::string pretrain_log_file = "pretrain_log.jsonl";
  std::string eval_report_file = "eval.json";
  std::string fix_report_file = "fix_report.json";

  void validate() const;

  static RunConfig load(const std::string& path);
};

/// Seeds for the individual stages, derived from the run seed in a fixed
/// order so each stage is reproducible in isolation.
struct StageSeeds {
  std::uint64_t synth = 0;
  std::uint64_t split = 0;
  std::uint64_t train = 0;

  static StageSeeds derive(std::uint64_t run_seed);
};

}  // namespace graphdist
