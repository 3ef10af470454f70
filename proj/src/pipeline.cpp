#include "graphdist/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "graphdist/errors.hpp"
#include "graphdist/metric_fix.hpp"

namespace graphdist::pipeline {

namespace fs = std::filesystem;

std::string resolve(const std::string& out_dir, const std::string& name) {
  const fs::path p(name);
  if (p.is_absolute() || out_dir.empty()) return name;
  return (fs::path(out_dir) / p).string();
}

namespace {

Corpus load_corpus_artifact(const RunConfig& cfg, const std::string& out_dir) {
  return load_corpus(resolve(out_dir, cfg.corpus_file));
}

SplitAssignment derive_split(const RunConfig& cfg, const Corpus& corpus) {
  return split_corpus(corpus, cfg.split_ratios, StageSeeds::derive(cfg.seed).split);
}

TrainConfig derived_train_config(const RunConfig& cfg) {
  TrainConfig t = cfg.train;
  t.seed = StageSeeds::derive(cfg.seed).train;
  return t;
}

void ensure_out_dir(const std::string& out_dir) {
  if (!out_dir.empty()) fs::create_directories(out_dir);
}

}  // namespace

void run_synth(const RunConfig& cfg, const std::string& out_dir) {
  ensure_out_dir(out_dir);
  SyntheticSpec spec = cfg.synthetic;
  spec.seed = StageSeeds::derive(cfg.seed).synth;
  const Corpus corpus = generate_synthetic_corpus(spec);
  save_corpus(corpus, resolve(out_dir, cfg.corpus_file));
}

void run_ged(const RunConfig& cfg, const std::string& out_dir) {
  ensure_out_dir(out_dir);
  const Corpus corpus = load_corpus_artifact(cfg, out_dir);
  std::vector<std::pair<std::string, std::string>> pairs;
  if (cfg.ged_pairs == "all") {
    pairs = all_unordered_pairs(corpus);
  } else {
    const SplitAssignment splits = derive_split(cfg, corpus);
    pairs = train_train_pairs(splits);
    if (cfg.ged_pairs == "train+val") {
      const auto vt = validation_train_pairs(splits);
      pairs.insert(pairs.end(), vt.begin(), vt.end());
    }
  }
  const LabeledPairs labels = build_ground_truth_matrix(corpus, pairs, {}, cfg.ged_size_cap);
  labels.save(resolve(out_dir, cfg.labels_file));
}

void run_pretrain(const RunConfig& cfg, const std::string& out_dir) {
  ensure_out_dir(out_dir);
  const Corpus corpus = load_corpus_artifact(cfg, out_dir);
  const PretrainResult result = pretrain_encoder(corpus, cfg.model, derived_train_config(cfg));
  result.params.save(resolve(out_dir, cfg.pretrained_file));
  save_train_log(result.log, resolve(out_dir, cfg.pretrain_log_file));
}

void run_train(const RunConfig& cfg, const std::string& out_dir) {
  ensure_out_dir(out_dir);
  const Corpus corpus = load_corpus_artifact(cfg, out_dir);
  const SplitAssignment splits = derive_split(cfg, corpus);
  const LabeledPairs labels = LabeledPairs::load(resolve(out_dir, cfg.labels_file));
  ParameterStore init;
  const ParameterStore* init_ptr = nullptr;
  if (!cfg.init_checkpoint.empty()) {
    init = ParameterStore::load(resolve(out_dir, cfg.init_checkpoint));
    init_ptr = &init;
  }
  try {
    const TrainResult result = train_unconstrained(corpus, splits, labels, cfg.model,
                                                   derived_train_config(cfg), init_ptr);
    result.params.save(resolve(out_dir, cfg.checkpoint_file));
    save_train_log(result.log, resolve(out_dir, cfg.train_log_file));
  } catch (const TrainingDiverged& e) {
    e.last_good.save(resolve(out_dir, cfg.checkpoint_file));
    throw;
  }
}

void run_predict(const RunConfig& cfg, const std::string& out_dir) {
  ensure_out_dir(out_dir);
  const Corpus corpus = load_corpus_artifact(cfg, out_dir);
  const SplitAssignment splits = derive_split(cfg, corpus);
  const LabeledPairs labels = LabeledPairs::load(resolve(out_dir, cfg.labels_file));
  const ParameterStore params = ParameterStore::load(resolve(out_dir, cfg.checkpoint_file));
  const DistanceMatrix dhat =
      predict_distance_matrix(params, corpus, cfg.model, restrict_to_train(labels, splits));
  dhat.validate(true);
  dhat.save_csv(resolve(out_dir, cfg.dhat_file));
}

FixSummary run_fix(const RunConfig& cfg, const std::string& out_dir, const std::string& in_path) {
  ensure_out_dir(out_dir);
  const std::string src = in_path.empty() ? resolve(out_dir, cfg.dhat_file) : in_path;
  const DistanceMatrix dhat = DistanceMatrix::load_csv(src);
  dhat.validate(false);
  FixSummary summary;
  summary.violations_before = triangle_violations(dhat.d, cfg.fix.epsilon * 10.0).size();
  const FixingResult fixed = triangle_fixing(dhat.d, cfg.fix);
  summary.violations_after = triangle_violations(fixed.d, cfg.fix.epsilon * 10.0).size();
  summary.sweeps = fixed.sweeps;
  summary.frobenius_change = frobenius_diff(fixed.d, dhat.d);

  DistanceMatrix out;
  out.ids = dhat.ids;
  out.d = fixed.d;
  out.save_csv(resolve(out_dir, cfg.dfixed_file));

  nlohmann::json j;
  j["violations_before"] = summary.violations_before;
  j["violations_after"] = summary.violations_after;
  j["sweeps"] = summary.sweeps;
  j["epsilon"] = cfg.fix.epsilon;
  j["frobenius_change"] = summary.frobenius_change;
  std::ofstream rep(resolve(out_dir, cfg.fix_report_file));
  if (!rep) throw DataError("run_fix: cannot write fix report");
  rep << j.dump(2) << '\n';
  return summary;
}

EvalReport run_eval(const RunConfig& cfg, const std::string& out_dir,
                    const std::string& pred_path) {
  ensure_out_dir(out_dir);
  const Corpus corpus = load_corpus_artifact(cfg, out_dir);
  const SplitAssignment splits = derive_split(cfg, corpus);
  const LabeledPairs labels = LabeledPairs::load(resolve(out_dir, cfg.labels_file));
  std::string src = pred_path;
  if (src.empty()) {
    const std::string dfixed = resolve(out_dir, cfg.dfixed_file);
    src = fs::exists(dfixed) ? dfixed : resolve(out_dir, cfg.dhat_file);
  }
  const DistanceMatrix pred = DistanceMatrix::load_csv(src);
  const DistanceMatrix truth = truth_matrix_from_labels(corpus, labels);
  const std::size_t k = std::min(cfg.eval_k, corpus.size() - 1);
  const EvalReport report = evaluate(pred, truth, splits, k);
  save_report(report, resolve(out_dir, cfg.eval_report_file));
  return report;
}

std::vector<QueryHit> run_query(const RunConfig& cfg, const std::string& out_dir,
                                const std::string& graph_id, std::size_t top,
                                const std::string& matrix_path) {
  std::string src = matrix_path;
  if (src.empty()) {
    const std::string dfixed = resolve(out_dir, cfg.dfixed_file);
    src = fs::exists(dfixed) ? dfixed : resolve(out_dir, cfg.dhat_file);
  }
  const DistanceMatrix dm = DistanceMatrix::load_csv(src);
  const auto it = std::find(dm.ids.begin(), dm.ids.end(), graph_id);
  if (it == dm.ids.end()) {
    throw DataError("query: graph id '" + graph_id + "' not in matrix '" + src + "'");
  }
  const std::size_t q = static_cast<std::size_t>(it - dm.ids.begin());
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < dm.ids.size(); ++j) {
    if (j != q) order.push_back(j);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dm.d(q, a) < dm.d(q, b); });
  if (top < order.size()) order.resize(top);
  std::vector<QueryHit> hits;
  for (std::size_t j : order) hits.push_back({dm.ids[j], dm.d(q, j)});
  return hits;
}

void run_all(const RunConfig& cfg, const std::string& out_dir) {
  run_synth(cfg, out_dir);
  run_ged(cfg, out_dir);
  RunConfig train_cfg = cfg;
  if (cfg.train.pretrain_epochs > 0) {
    run_pretrain(cfg, out_dir);
    train_cfg.init_checkpoint = cfg.pretrained_file;
  }
  run_train(train_cfg, out_dir);
  run_predict(cfg, out_dir);
  run_fix(cfg, out_dir);
  run_eval(cfg, out_dir);
}

}  // namespace graphdist::pipeline
