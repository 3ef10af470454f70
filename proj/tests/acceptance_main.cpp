// Acceptance suite: every check the toolkit must pass at desk scale, one
// pass/fail line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "graphdist/distance.hpp"
#include "graphdist/encoder.hpp"
#include "graphdist/eval.hpp"
#include "graphdist/ged.hpp"
#include "graphdist/metric_fix.hpp"
#include "graphdist/pipeline.hpp"
#include "graphdist/train.hpp"
#include "oracles.hpp"

using namespace graphdist;

namespace {

int g_failures = 0;
int g_index = 0;

void criterion(const std::string& name, const std::function<bool(std::string&)>& body) {
  ++g_index;
  std::string detail;
  bool ok = false;
  const auto start = std::chrono::steady_clock::now();
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("[%d/9] %-34s %s  (%.1fs)%s%s\n", g_index, name.c_str(), ok ? "PASS" : "FAIL",
              secs, detail.empty() ? "" : "  -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

Mat random_mat(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
  Mat m(r, c);
  for (double& v : m.a) v = rng.uniform(lo, hi);
  return m;
}

// Shared state between the end-to-end criterion and the fixing follow-up.
struct EndToEnd {
  std::vector<DistanceMatrix> dhat;   // per seed
  std::vector<DistanceMatrix> truth;  // per seed
  std::vector<SplitAssignment> splits;
  std::vector<double> rho;
};
EndToEnd g_e2e;

const EncoderConfig kDefaultEncoder{};  // d_h 32, heads 2, layers 2, dropout 0.5/0.3

bool metric_axioms(std::string& detail) {
  Rng rng(2024);
  HeadWeights head;
  head.fc1 = random_mat(rng, 32, 32);
  head.fc2 = random_mat(rng, 32, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> a(32), b(32);
    for (double& v : a) v = rng.uniform(-3, 3);
    for (double& v : b) v = rng.uniform(-3, 3);
    const double dab = pair_distance(a, b, head);
    if (dab != pair_distance(b, a, head)) return false;
    if (!(dab >= 0.0 && dab < 1.0)) return false;
    if (pair_distance(a, a, head) != 0.0) return false;
  }
  SyntheticSpec spec;
  spec.count = 20;
  spec.size_min = 5;
  spec.size_max = 8;
  spec.seed = 11;
  const Corpus corpus = generate_synthetic_corpus(spec);
  ModelConfig model;
  model.encoder = kDefaultEncoder;
  const EncodingContext ctx = EncodingContext::build(corpus, model);
  const ParameterStore params = build_model_parameters(model.encoder, 0, ctx.k_max, 3);
  const HeadWeights learned_head = head_weights_from(params);
  std::vector<std::vector<double>> z;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    z.push_back(encode_inputs(ctx.inputs[i], params, model.encoder));
  }
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (pair_distance(z[i], z[i], learned_head) != 0.0) return false;
    for (std::size_t j = i + 1; j < z.size(); ++j) {
      const double d = pair_distance(z[i], z[j], learned_head);
      if (d != pair_distance(z[j], z[i], learned_head)) return false;
      if (!(d >= 0.0 && d < 1.0)) return false;
    }
  }
  detail = "200 representation pairs + 20 graphs";
  return true;
}

bool permutation_invariance(std::string& detail) {
  SyntheticSpec spec;
  spec.count = 20;
  spec.size_min = 5;
  spec.size_max = 8;
  spec.seed = 21;
  const Corpus corpus = generate_synthetic_corpus(spec);
  ModelConfig model;
  model.encoder = kDefaultEncoder;
  const EncodingContext ctx = EncodingContext::build(corpus, model);
  const ParameterStore params = build_model_parameters(model.encoder, 0, ctx.k_max, 5);
  Rng rng(31);
  double worst = 0.0;
  for (std::size_t gi = 0; gi < corpus.size(); ++gi) {
    const auto base = encode_inputs(ctx.inputs[gi], params, model.encoder);
    for (int t = 0; t < 20; ++t) {
      std::vector<std::size_t> perm(corpus.graphs[gi].size());
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      Corpus pc = corpus;
      pc.graphs[gi] = corpus.graphs[gi].permuted(perm);
      const auto wl = compute_wl_codes(pc, model.wl_iterations);
      const auto in = build_encoder_inputs(pc.graphs[gi], wl, model.encoder.d_h, 0, ctx.k_max);
      const auto zp = encode_inputs(in, params, model.encoder);
      for (std::size_t c = 0; c < zp.size(); ++c) {
        worst = std::max(worst, std::fabs(zp[c] - base[c]));
      }
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max |dz| = %.3g", worst);
  detail = buf;
  return worst <= 1e-9;
}

bool gradient_correctness(std::string& detail) {
  double worst = 0.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SyntheticSpec spec;
    spec.count = 8;
    spec.size_min = 4;
    spec.size_max = 6;
    spec.seed = 100 + seed;
    spec.attr_dim = seed == 3 ? 2 : 0;  // cover the attributed path too
    const Corpus corpus = generate_synthetic_corpus(spec);
    ModelConfig model;
    model.encoder = kDefaultEncoder;
    const EncodingContext ctx = EncodingContext::build(corpus, model);
    ParameterStore params = build_model_parameters(model.encoder, corpus.d_x, ctx.k_max, seed);

    auto build = [&](Tape& tape, const ParamLeaves& leaves) {
      std::vector<Tape::NodeId> ds;
      for (std::size_t i = 0; i + 1 < corpus.size(); ++i) {
        const auto zi = encode_on_tape(tape, ctx.inputs[i], leaves, model.encoder, nullptr);
        const auto zj = encode_on_tape(tape, ctx.inputs[i + 1], leaves, model.encoder, nullptr);
        ds.push_back(pair_distance_on_tape(tape, zi, zj, leaves.at(kParamHeadFc1),
                                           leaves.at(kParamHeadFc2)));
      }
      Mat targets(ds.size(), 1, 0.5);
      Mat weights(ds.size(), 1, 1.0);
      weights.a.back() = 0.1;
      const auto res = tape.mul_mask(tape.sub(tape.stack_scalars(ds), tape.leaf(targets)),
                                     std::move(weights));
      return tape.sqrt(tape.sum(tape.square(res)));
    };
    auto loss_value = [&](const ParameterStore& p) {
      Tape tape;
      const ParamLeaves leaves = stage_parameters(tape, p);
      return tape.value(build(tape, leaves)).scalar_value();
    };
    {
      Tape tape;
      const ParamLeaves leaves = stage_parameters(tape, params);
      const auto loss = build(tape, leaves);
      tape.backward(loss);
      params.zero_grad();
      accumulate_gradients(tape, leaves, params);
    }
    Rng rng(900 + seed);
    const auto report = finite_difference_check(loss_value, params, 1e-5, 250, rng);
    worst = std::max(worst, report.max_rel_error);
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max rel err = %.3g over 3 seeds", worst);
  detail = buf;
  return worst <= 1e-4;
}

bool triangle_fixing_correctness(std::string& detail) {
  // (a) closed-form projection of the single-violation instance
  Mat d3(3, 3);
  d3(0, 1) = d3(1, 0) = 1.0;
  d3(0, 2) = d3(2, 0) = 0.2;
  d3(1, 2) = d3(2, 1) = 0.3;
  const FixingResult f3 = triangle_fixing(d3, {});
  if (std::fabs(f3.d(0, 1) - (1.0 - 0.5 / 3.0)) > 1e-6) return false;
  if (std::fabs(f3.d(0, 2) - (0.2 + 0.5 / 3.0)) > 1e-6) return false;
  if (std::fabs(f3.d(1, 2) - (0.3 + 0.5 / 3.0)) > 1e-6) return false;

  // (b) 50 random instances: feasibility at tol 1e-6 and near-optimality
  // against the shortest-path repair; (c) idempotence
  Rng rng(404);
  FixingOptions opts;  // epsilon 1e-7
  for (int t = 0; t < 50; ++t) {
    const Mat d = oracle::random_symmetric(rng, 10);
    const FixingResult fixed = triangle_fixing(d, opts);
    if (!triangle_violations(fixed.d, 1e-6).empty()) return false;
    const Mat apsp = apsp_metric_repair(d);
    if (frobenius_diff(fixed.d, d) > frobenius_diff(apsp, d) + 1e-9) return false;
    const FixingResult twice = triangle_fixing(fixed.d, opts);
    if (max_abs_diff(twice.d, fixed.d) > 10.0 * opts.epsilon) return false;
  }
  detail = "closed form + 50 random 10x10 + idempotence";
  return true;
}

bool ged_oracle(std::string& detail) {
  // hand cases
  const GraphInstance p2("p2", {"a", "b"}, {{"a", "b", 1.0}});
  const GraphInstance p3("p3", {"a", "b", "c"}, {{"a", "b", 1.0}, {"b", "c", 1.0}});
  const GraphInstance tri("tri", {"a", "b", "c"},
                          {{"a", "b", 1.0}, {"b", "c", 1.0}, {"a", "c", 1.0}});
  if (exact_ged(p2, p3) != 2.0) return false;
  if (exact_ged(tri, p3) != 1.0) return false;

  // isomorphic pairs go to zero, verified against brute-force isomorphism
  SyntheticSpec iso_spec;
  iso_spec.count = 10;
  iso_spec.size_min = 4;
  iso_spec.size_max = 6;
  iso_spec.seed = 52;
  const Corpus iso = generate_synthetic_corpus(iso_spec);
  Rng rng(53);
  for (const auto& g : iso.graphs) {
    std::vector<std::size_t> perm(g.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    const GraphInstance shuffled = g.permuted(perm);
    if (!oracle::isomorphic(g, shuffled)) return false;
    if (exact_ged(g, shuffled) != 0.0) return false;
  }

  // acceptance corpus: symmetry spot checks and the triangle inequality on
  // every triple of raw edit distances
  SyntheticSpec spec;
  spec.count = 60;
  spec.size_min = 5;
  spec.size_max = 8;
  spec.seed = 1001;
  const Corpus corpus = generate_synthetic_corpus(spec);
  const std::size_t m = corpus.size();
  std::vector<std::vector<double>> d(m, std::vector<double>(m, 0.0));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> vals(pairs.size());
  const long long np = static_cast<long long>(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (long long p = 0; p < np; ++p) {
    const auto& [i, j] = pairs[static_cast<std::size_t>(p)];
    vals[static_cast<std::size_t>(p)] = exact_ged(corpus.graphs[i], corpus.graphs[j]);
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    d[pairs[p].first][pairs[p].second] = vals[p];
    d[pairs[p].second][pairs[p].first] = vals[p];
  }
  Rng srng(54);
  for (int t = 0; t < 30; ++t) {
    const std::size_t i = srng.index(m);
    const std::size_t j = srng.index(m);
    if (i == j) continue;
    if (exact_ged(corpus.graphs[i], corpus.graphs[j]) !=
        exact_ged(corpus.graphs[j], corpus.graphs[i])) {
      return false;
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k < m; ++k) {
        if (d[i][j] > d[i][k] + d[k][j] + 1e-12) return false;
      }
    }
  }
  detail = "hand cases, isomorphic zeros, all 60-corpus triples";
  return true;
}

bool end_to_end(std::string& detail) {
  double rho_sum = 0.0;
  std::string per_seed;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SyntheticSpec spec;
    spec.count = 60;
    spec.size_min = 5;
    spec.size_max = 8;
    spec.seed = 1000 + seed;
    const Corpus corpus = generate_synthetic_corpus(spec);
    const LabeledPairs labels = build_ground_truth_matrix(corpus, all_unordered_pairs(corpus));
    const SplitAssignment splits = split_corpus(corpus, {6, 2, 2}, 2000 + seed);

    ModelConfig model;  // defaults: d_h 32, heads 2, layers 2, wl 2
    TrainConfig config;  // defaults: lr 0.001, wd 5e-4, alpha 0.1, beta 1000
    config.epochs = 1000;
    config.patience = 50;
    config.batch_pairs = 64;
    config.seed = 3000 + seed;

    const TrainResult trained = train_unconstrained(corpus, splits, labels, model, config);
    const DistanceMatrix dhat = predict_distance_matrix(trained.params, corpus, model,
                                                        restrict_to_train(labels, splits));
    const DistanceMatrix truth = truth_matrix_from_labels(corpus, labels);
    const EvalReport report = evaluate(dhat, truth, splits, 10);
    rho_sum += report.rho;
    per_seed += (per_seed.empty() ? "" : ", ") + std::to_string(report.rho).substr(0, 5);

    g_e2e.dhat.push_back(dhat);
    g_e2e.truth.push_back(truth);
    g_e2e.splits.push_back(splits);
    g_e2e.rho.push_back(report.rho);
  }
  const double mean = rho_sum / 3.0;
  detail = "test rho per seed: " + per_seed + "; mean = " + std::to_string(mean).substr(0, 5);
  return mean >= 0.4;
}

bool fixing_non_degradation(std::string& detail) {
  if (g_e2e.dhat.size() != 3) {
    detail = "end-to-end criterion did not run";
    return false;
  }
  FixingOptions opts;
  std::string deltas;
  for (std::size_t s = 0; s < 3; ++s) {
    const FixingResult fixed = triangle_fixing(g_e2e.dhat[s].d, opts);
    if (!triangle_violations(fixed.d, 10.0 * opts.epsilon).empty()) {
      detail = "violations survived fixing";
      return false;
    }
    DistanceMatrix dm;
    dm.ids = g_e2e.dhat[s].ids;
    dm.d = fixed.d;
    const EvalReport report = evaluate(dm, g_e2e.truth[s], g_e2e.splits[s], 10);
    const double delta = report.rho - g_e2e.rho[s];
    deltas += (deltas.empty() ? "" : ", ") + std::to_string(delta).substr(0, 7);
    if (std::fabs(delta) > 0.05) {
      detail = "rho moved by " + std::to_string(delta);
      return false;
    }
  }
  detail = "zero violations; delta rho per seed: " + deltas;
  return true;
}

bool rank_metric_oracles(std::string& detail) {
  Rng rng(777);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> a(10), b(10);
    const bool ties = t % 2 == 0;
    for (double& v : a) v = ties ? static_cast<double>(rng.index(4)) : rng.uniform();
    for (double& v : b) v = ties ? static_cast<double>(rng.index(4)) : rng.uniform();
    auto constant = [](const std::vector<double>& v) {
      for (double x : v) {
        if (x != v[0]) return false;
      }
      return true;
    };
    if (constant(a)) a[0] += 1.0;
    if (constant(b)) b[0] += 1.0;
    worst = std::max(worst, std::fabs(spearman_rho(a, b) - oracle::spearman(a, b)));
    worst = std::max(worst, std::fabs(kendall_tau(a, b) - oracle::kendall(a, b)));
  }
  char buf[48];
  std::snprintf(buf, sizeof(buf), "max |diff| = %.3g", worst);
  detail = buf;
  return worst <= 1e-12;
}

bool determinism(std::string& detail) {
  RunConfig cfg;
  cfg.seed = 424242;
  cfg.synthetic.count = 14;
  cfg.synthetic.size_min = 4;
  cfg.synthetic.size_max = 6;
  cfg.model.encoder.d_h = 16;
  cfg.model.encoder.intermediate_size = 16;
  cfg.train.epochs = 8;
  cfg.train.patience = 0;
  cfg.train.batch_pairs = 16;
  cfg.train.pretrain_epochs = 4;
  cfg.eval_k = 5;

  const std::string dir_a = "/tmp/graphdist_acceptance_a";
  const std::string dir_b = "/tmp/graphdist_acceptance_b";
  for (const auto& dir : {dir_a, dir_b}) {
    std::filesystem::remove_all(dir);
    pipeline::run_all(cfg, dir);
  }
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::string("<missing ") + p + ">";
    return std::string((std::istreambuf_iterator<char>(in)), {});
  };
  for (const char* name :
       {"corpus.jsonl", "labels.csv", "pretrained.bin", "checkpoint.bin", "dhat.csv",
        "dfixed.csv", "eval.json", "train_log.jsonl", "pretrain_log.jsonl", "fix_report.json"}) {
    if (slurp(dir_a + "/" + name) != slurp(dir_b + "/" + name)) {
      detail = std::string(name) + " differs";
      return false;
    }
  }
  detail = "10 artifacts byte-identical across reruns";
  return true;
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion("metric-axioms", metric_axioms);
  criterion("permutation-invariance", permutation_invariance);
  criterion("gradient-correctness", gradient_correctness);
  criterion("triangle-fixing", triangle_fixing_correctness);
  criterion("ged-oracle", ged_oracle);
  criterion("end-to-end-learning", end_to_end);
  criterion("fixing-non-degradation", fixing_non_degradation);
  criterion("rank-metric-oracles", rank_metric_oracles);
  criterion("determinism", determinism);
  if (g_failures > 0) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
