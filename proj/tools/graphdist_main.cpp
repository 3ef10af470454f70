#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "graphdist/errors.hpp"
#include "graphdist/pipeline.hpp"

namespace {

using graphdist::RunConfig;

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config_path, "run-config JSON file");
  cmd->add_option("--out", common.out_dir, "artifact directory")->capture_default_str();
  cmd->add_option("--seed", common.seed, "override the run seed")
      ->each([&common](const std::string&) { common.seed_set = true; });
}

RunConfig load_config(const Common& common) {
  RunConfig cfg =
      common.config_path.empty() ? RunConfig{} : RunConfig::load(common.config_path);
  if (common.seed_set) cfg.seed = common.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph distance metric learning pipeline"};
  app.require_subcommand(1);

  Common common;

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  add_common(synth, common);
  std::size_t count = 0, size_min = 0, size_max = 0, attr_dim = 0;
  double edge_prob = -1.0;
  synth->add_option("--count", count, "number of graphs");
  synth->add_option("--min", size_min, "minimum node count");
  synth->add_option("--max", size_max, "maximum node count");
  synth->add_option("--edge-prob", edge_prob, "edge probability");
  synth->add_option("--attr-dim", attr_dim, "attribute dimension (0 = none)");

  auto* ged = app.add_subcommand("ged", "compute ground-truth labels");
  add_common(ged, common);
  std::string pairs_mode;
  std::size_t size_cap = 0;
  ged->add_option("--pairs", pairs_mode, "pair set: all|train|train+val");
  ged->add_option("--size-cap", size_cap, "exact-search node cap");

  auto* pretrain = app.add_subcommand("pretrain", "unsupervised encoder pre-training");
  add_common(pretrain, common);
  std::size_t pretrain_epochs = 0;
  pretrain->add_option("--epochs", pretrain_epochs, "pre-training epochs");

  auto* train = app.add_subcommand("train", "train encoder + distance head");
  add_common(train, common);
  std::string init_checkpoint;
  std::size_t train_epochs = 0;
  train->add_option("--init", init_checkpoint, "initial checkpoint (e.g. pretrained.bin)");
  train->add_option("--epochs", train_epochs, "training epochs");

  auto* predict = app.add_subcommand("predict", "emit the learned distance matrix");
  add_common(predict, common);

  auto* fix = app.add_subcommand("fix", "repair triangle-inequality violations");
  add_common(fix, common);
  std::string fix_in;
  double fix_epsilon = 0.0;
  std::string orientation;
  fix->add_option("--in", fix_in, "input distance matrix CSV");
  fix->add_option("--epsilon", fix_epsilon, "convergence threshold");
  fix->add_option("--orientation", orientation, "projection|verbatim");

  auto* eval = app.add_subcommand("eval", "rank-correlation evaluation");
  add_common(eval, common);
  std::string pred_path;
  std::size_t eval_k = 0;
  eval->add_option("--pred", pred_path, "predicted matrix CSV (default: fixed, then dhat)");
  eval->add_option("--k", eval_k, "precision@k cutoff");

  auto* query = app.add_subcommand("query", "nearest graphs to a query graph");
  add_common(query, common);
  std::string query_id;
  std::size_t top = 10;
  std::string matrix_path;
  query->add_option("id", query_id, "query graph id")->required();
  query->add_option("--top", top, "number of results")->capture_default_str();
  query->add_option("--matrix", matrix_path, "distance matrix CSV");

  auto* run = app.add_subcommand("run", "full pipeline: synth ged [pretrain] train predict fix eval");
  add_common(run, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = load_config(common);
    if (synth->parsed()) {
      if (count > 0) cfg.synthetic.count = count;
      if (size_min > 0) cfg.synthetic.size_min = size_min;
      if (size_max > 0) cfg.synthetic.size_max = size_max;
      if (edge_prob >= 0.0) cfg.synthetic.edge_prob = edge_prob;
      if (attr_dim > 0) cfg.synthetic.attr_dim = attr_dim;
      graphdist::pipeline::run_synth(cfg, common.out_dir);
      std::printf("corpus: %s (%zu graphs)\n",
                  graphdist::pipeline::resolve(common.out_dir, cfg.corpus_file).c_str(),
                  cfg.synthetic.count);
    } else if (ged->parsed()) {
      if (!pairs_mode.empty()) cfg.ged_pairs = pairs_mode;
      if (size_cap > 0) cfg.ged_size_cap = size_cap;
      cfg.validate();
      graphdist::pipeline::run_ged(cfg, common.out_dir);
      std::printf("labels: %s\n",
                  graphdist::pipeline::resolve(common.out_dir, cfg.labels_file).c_str());
    } else if (pretrain->parsed()) {
      if (pretrain_epochs > 0) cfg.train.pretrain_epochs = pretrain_epochs;
      if (cfg.train.pretrain_epochs == 0) cfg.train.pretrain_epochs = 50;
      graphdist::pipeline::run_pretrain(cfg, common.out_dir);
      std::printf("pretrained checkpoint: %s\n",
                  graphdist::pipeline::resolve(common.out_dir, cfg.pretrained_file).c_str());
    } else if (train->parsed()) {
      if (!init_checkpoint.empty()) cfg.init_checkpoint = init_checkpoint;
      if (train_epochs > 0) cfg.train.epochs = train_epochs;
      graphdist::pipeline::run_train(cfg, common.out_dir);
      std::printf("checkpoint: %s\n",
                  graphdist::pipeline::resolve(common.out_dir, cfg.checkpoint_file).c_str());
    } else if (predict->parsed()) {
      graphdist::pipeline::run_predict(cfg, common.out_dir);
      std::printf("distance matrix: %s\n",
                  graphdist::pipeline::resolve(common.out_dir, cfg.dhat_file).c_str());
    } else if (fix->parsed()) {
      if (fix_epsilon > 0.0) cfg.fix.epsilon = fix_epsilon;
      if (orientation == "verbatim") {
        cfg.fix.orientation = graphdist::FixingOptions::Orientation::verbatim;
      } else if (orientation == "projection") {
        cfg.fix.orientation = graphdist::FixingOptions::Orientation::projection;
      } else if (!orientation.empty()) {
        throw graphdist::DataError("fix: unknown orientation '" + orientation + "'");
      }
      const auto summary = graphdist::pipeline::run_fix(cfg, common.out_dir, fix_in);
      std::printf("violations: %zu before, %zu after; sweeps: %zu; |change|_F = %.6g\n",
                  summary.violations_before, summary.violations_after, summary.sweeps,
                  summary.frobenius_change);
    } else if (eval->parsed()) {
      if (eval_k > 0) cfg.eval_k = eval_k;
      const auto report = graphdist::pipeline::run_eval(cfg, common.out_dir, pred_path);
      std::printf("queries: %zu  rho: %.4f  tau: %.4f  p@%zu: %.4f\n", report.per_query.size(),
                  report.rho, report.tau, report.k, report.p_at_k);
    } else if (query->parsed()) {
      const auto hits =
          graphdist::pipeline::run_query(cfg, common.out_dir, query_id, top, matrix_path);
      std::printf("%-6s %-12s %s\n", "rank", "id", "distance");
      for (std::size_t r = 0; r < hits.size(); ++r) {
        std::printf("%-6zu %-12s %.6f\n", r + 1, hits[r].id.c_str(), hits[r].distance);
      }
    } else if (run->parsed()) {
      graphdist::pipeline::run_all(cfg, common.out_dir);
      std::printf("pipeline artifacts in %s\n", common.out_dir.c_str());
    }
  } catch (const graphdist::NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const graphdist::DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
