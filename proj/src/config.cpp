#include "graphdist/config.hpp"

#include <fstream>

#include <json.hpp>

#include "graphdist/errors.hpp"
#include "graphdist/rng.hpp"

namespace graphdist {

void RunConfig::validate() const {
  model.encoder.validate();
  train.validate();
  if (fix.epsilon <= 0.0) throw DataError("config: fix.epsilon must be positive");
  if (eval_k == 0) throw DataError("config: eval.k must be positive");
  if (ged_pairs != "all" && ged_pairs != "train" && ged_pairs != "train+val") {
    throw DataError("config: ged.pairs must be one of all|train|train+val");
  }
}

namespace {

using nlohmann::json;

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("config: " + path + ": " + e.what());
  }
  RunConfig cfg;
  try {
    read(j, "seed", cfg.seed);
    if (j.contains("corpus")) {
      const json& c = j.at("corpus");
      read(c, "path", cfg.corpus_file);
      if (c.contains("synthetic")) {
        const json& s = c.at("synthetic");
        read(s, "count", cfg.synthetic.count);
        read(s, "size_min", cfg.synthetic.size_min);
        read(s, "size_max", cfg.synthetic.size_max);
        read(s, "edge_prob", cfg.synthetic.edge_prob);
        read(s, "attr_dim", cfg.synthetic.attr_dim);
      }
    }
    if (j.contains("split")) {
      const json& s = j.at("split");
      if (s.contains("ratios")) {
        const auto r = s.at("ratios").get<std::vector<double>>();
        if (r.size() != 3) throw DataError("config: split.ratios needs 3 entries");
        cfg.split_ratios = {r[0], r[1], r[2]};
      }
    }
    if (j.contains("wl")) read(j.at("wl"), "iterations", cfg.model.wl_iterations);
    if (j.contains("encoder")) {
      const json& e = j.at("encoder");
      EncoderConfig& enc = cfg.model.encoder;
      read(e, "d_h", enc.d_h);
      read(e, "heads", enc.heads);
      read(e, "layers", enc.layers);
      read(e, "intermediate_size", enc.intermediate_size);
      read(e, "hidden_dropout", enc.hidden_dropout);
      read(e, "attention_dropout", enc.attention_dropout);
      read(e, "fusion_divide_by_valid", enc.fusion_divide_by_valid);
      read(e, "mask_pad_attention", enc.mask_pad_attention);
      if (e.contains("residual")) {
        const std::string r = e.at("residual").get<std::string>();
        if (r == "raw") {
          enc.residual = EncoderConfig::Residual::raw;
        } else if (r == "none") {
          enc.residual = EncoderConfig::Residual::none;
        } else {
          throw DataError("config: encoder.residual must be raw|none, got '" + r + "'");
        }
      }
    }
    if (j.contains("head")) {
      read(j.at("head"), "alpha", cfg.train.alpha);
      read(j.at("head"), "beta", cfg.train.beta);
    }
    if (j.contains("train")) {
      const json& t = j.at("train");
      read(t, "epochs", cfg.train.epochs);
      read(t, "patience", cfg.train.patience);
      read(t, "batch_pairs", cfg.train.batch_pairs);
      read(t, "lr", cfg.train.lr);
      read(t, "weight_decay", cfg.train.weight_decay);
      read(t, "pretrain_epochs", cfg.train.pretrain_epochs);
      read(t, "pretrain_batch_graphs", cfg.train.pretrain_batch_graphs);
      read(t, "init_checkpoint", cfg.init_checkpoint);
    }
    if (j.contains("fix")) {
      const json& f = j.at("fix");
      read(f, "epsilon", cfg.fix.epsilon);
      read(f, "max_sweeps", cfg.fix.max_sweeps);
      if (f.contains("orientation")) {
        const std::string o = f.at("orientation").get<std::string>();
        if (o == "projection") {
          cfg.fix.orientation = FixingOptions::Orientation::projection;
        } else if (o == "verbatim") {
          cfg.fix.orientation = FixingOptions::Orientation::verbatim;
        } else {
          throw DataError("config: fix.orientation must be projection|verbatim, got '" + o + "'");
        }
      }
    }
    if (j.contains("eval")) read(j.at("eval"), "k", cfg.eval_k);
    if (j.contains("ged")) {
      read(j.at("ged"), "size_cap", cfg.ged_size_cap);
      read(j.at("ged"), "pairs", cfg.ged_pairs);
    }
    if (j.contains("paths")) {
      const json& p = j.at("paths");
      read(p, "corpus", cfg.corpus_file);
      read(p, "labels", cfg.labels_file);
      read(p, "checkpoint", cfg.checkpoint_file);
      read(p, "pretrained", cfg.pretrained_file);
      read(p, "dhat", cfg.dhat_file);
      read(p, "dfixed", cfg.dfixed_file);
      read(p, "train_log", cfg.train_log_file);
      read(p, "pretrain_log", cfg.pretrain_log_file);
      read(p, "eval_report", cfg.eval_report_file);
      read(p, "fix_report", cfg.fix_report_file);
    }
  } catch (const json::exception& e) {
    throw DataError("config: " + path + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

StageSeeds StageSeeds::derive(std::uint64_t run_seed) {
  Rng root(run_seed);
  StageSeeds seeds;
  seeds.synth = root.bits();
  seeds.split = root.bits();
  seeds.train = root.bits();
  return seeds;
}

}  // namespace graphdist
