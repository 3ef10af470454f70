#include "graphdist/eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "graphdist/errors.hpp"
#include "graphdist/kernels.hpp"

namespace graphdist {

namespace {

void check_pair(const std::vector<double>& a, const std::vector<double>& b, const char* op) {
  if (a.size() != b.size()) {
    throw DataError(std::string(op) + ": lengths " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
  if (a.size() < 2) throw DataError(std::string(op) + ": need at least 2 observations");
}

bool constant(const std::vector<double>& v) {
  for (double x : v) {
    if (x != v[0]) return false;
  }
  return true;
}

std::vector<double> fractional_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_rho(const std::vector<double>& a, const std::vector<double>& b) {
  check_pair(a, b, "spearman_rho");
  if (constant(a) || constant(b)) {
    throw DataError("spearman_rho: rank correlation undefined for a constant sequence");
  }
  const std::vector<double> ra = fractional_ranks(a);
  const std::vector<double> rb = fractional_ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = ra[i] - ma;
    const double db = rb[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  return cov / std::sqrt(va * vb);
}

double kendall_tau(const std::vector<double>& a, const std::vector<double>& b) {
  check_pair(a, b, "kendall_tau");
  if (constant(a) || constant(b)) {
    throw DataError("kendall_tau: rank correlation undefined for a constant sequence");
  }
  double concordant = 0.0, discordant = 0.0, tie_a = 0.0, tie_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double dx = a[i] - a[j];
      const double dy = b[i] - b[j];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) {
        tie_a += 1.0;
      } else if (dy == 0.0) {
        tie_b += 1.0;
      } else if (dx * dy > 0.0) {
        concordant += 1.0;
      } else {
        discordant += 1.0;
      }
    }
  }
  const double denom =
      std::sqrt((concordant + discordant + tie_a) * (concordant + discordant + tie_b));
  return (concordant - discordant) / denom;
}

double precision_at_k(const std::vector<double>& pred_scores,
                      const std::vector<double>& true_scores, std::size_t k) {
  if (k == 0) throw DataError("precision_at_k: k must be positive");
  if (pred_scores.size() != true_scores.size()) {
    throw DataError("precision_at_k: lengths " + std::to_string(pred_scores.size()) + " vs " +
                    std::to_string(true_scores.size()));
  }
  if (k > pred_scores.size()) {
    throw DataError("precision_at_k: k " + std::to_string(k) + " exceeds list length " +
                    std::to_string(pred_scores.size()));
  }
  auto top_k = [&](const std::vector<double>& scores) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t x, std::size_t y) { return scores[x] < scores[y]; });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
  };
  const auto tp = top_k(pred_scores);
  const auto tt = top_k(true_scores);
  std::vector<std::size_t> common;
  std::set_intersection(tp.begin(), tp.end(), tt.begin(), tt.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(k);
}

EvalReport evaluate(const DistanceMatrix& pred, const DistanceMatrix& truth,
                    const SplitAssignment& splits, std::size_t k) {
  if (pred.ids != truth.ids) {
    throw DataError("evaluate: prediction and truth matrices cover different ids");
  }
  if (splits.test_ids.empty()) throw DataError("evaluate: empty test set");
  const std::size_t m = pred.ids.size();
  if (m < 2) throw DataError("evaluate: need at least 2 graphs");
  if (k > m - 1) {
    throw DataError("evaluate: k " + std::to_string(k) + " exceeds ranking length " +
                    std::to_string(m - 1));
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < m; ++i) index[pred.ids[i]] = i;

  EvalReport report;
  report.k = k;
  report.per_query.resize(splits.test_ids.size());
  std::vector<std::exception_ptr> errors(splits.test_ids.size());
  const long long nq = static_cast<long long>(splits.test_ids.size());
#pragma omp parallel for schedule(dynamic) if (kernels::parallel_enabled())
  for (long long qi = 0; qi < nq; ++qi) {
    try {
      const std::string& id = splits.test_ids[static_cast<std::size_t>(qi)];
      auto it = index.find(id);
      if (it == index.end()) {
        throw DataError("evaluate: test id '" + id + "' not in the matrices");
      }
      const std::size_t q = it->second;
      std::vector<double> p, t;
      p.reserve(m - 1);
      t.reserve(m - 1);
      for (std::size_t j = 0; j < m; ++j) {
        if (j == q) continue;  // self-distance excluded from the ranking
        p.push_back(pred.d(q, j));
        t.push_back(truth.d(q, j));
      }
      QueryMetrics& qm = report.per_query[static_cast<std::size_t>(qi)];
      qm.id = id;
      qm.rho = spearman_rho(p, t);
      qm.tau = kendall_tau(p, t);
      qm.p_at_k = precision_at_k(p, t, k);
    } catch (...) {
      errors[static_cast<std::size_t>(qi)] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  for (std::size_t qi = 0; qi < splits.test_ids.size(); ++qi) {
    report.rho += report.per_query[qi].rho;
    report.tau += report.per_query[qi].tau;
    report.p_at_k += report.per_query[qi].p_at_k;
  }
  const double nqd = static_cast<double>(splits.test_ids.size());
  report.rho /= nqd;
  report.tau /= nqd;
  report.p_at_k /= nqd;
  return report;
}

void save_report(const EvalReport& report, const std::string& path) {
  nlohmann::json j;
  j["aggregate"] = {{"rho", report.rho},
                    {"tau", report.tau},
                    {"p_at_k", report.p_at_k},
                    {"k", report.k},
                    {"queries", report.per_query.size()}};
  auto per_query = nlohmann::json::array();
  for (const auto& q : report.per_query) {
    per_query.push_back({{"id", q.id}, {"rho", q.rho}, {"tau", q.tau}, {"p_at_k", q.p_at_k}});
  }
  j["per_query"] = per_query;
  std::ofstream out(path);
  if (!out) throw DataError("save_report: cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw DataError("save_report: write failure on '" + path + "'");
}

}  // namespace graphdist
