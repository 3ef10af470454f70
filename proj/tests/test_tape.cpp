#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "graphdist/errors.hpp"
#include "graphdist/params.hpp"
#include "graphdist/tape.hpp"
#include "oracles.hpp"

using namespace graphdist;

namespace {

Mat random_mat(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
  Mat m(r, c);
  for (double& v : m.a) v = rng.uniform(lo, hi);
  return m;
}

/// FD oracle over all coordinates of a single leaf feeding `build`.
double max_rel_error_vs_fd(const Mat& x0,
                           const std::function<Tape::NodeId(Tape&, Tape::NodeId)>& build,
                           double eps = 1e-6) {
  Tape tape;
  const Tape::NodeId x = tape.leaf(x0);
  const Tape::NodeId loss = build(tape, x);
  tape.backward(loss);
  const Mat analytic = tape.grad(x);

  double worst = 0.0;
  for (std::size_t i = 0; i < x0.a.size(); ++i) {
    auto eval = [&](double delta) {
      Mat xp = x0;
      xp.a[i] += delta;
      Tape t2;
      return t2.value(build(t2, t2.leaf(xp))).scalar_value();
    };
    const double fd = (eval(eps) - eval(-eps)) / (2.0 * eps);
    const double an = analytic.a[i];
    const double denom = std::max({std::fabs(fd), std::fabs(an), 1e-6});
    worst = std::max(worst, std::fabs(fd - an) / denom);
  }
  return worst;
}

}  // namespace

TEST_SUITE_BEGIN("tape");

TEST_CASE("primitive forward values") {
  Tape tape;
  // row softmax of a uniform row
  const auto sm = tape.row_softmax(tape.leaf(Mat(1, 5, 2.0)));
  for (double v : tape.value(sm).a) CHECK(v == doctest::Approx(0.2).epsilon(1e-15));

  Mat r(1, 2);
  r(0, 0) = -1.0;
  r(0, 1) = 2.0;
  const auto re = tape.relu(tape.leaf(r));
  CHECK(tape.value(re)(0, 0) == 0.0);
  CHECK(tape.value(re)(0, 1) == 2.0);

  Mat a(2, 2);
  a(0, 0) = 1;
  a(0, 1) = 2;
  a(1, 0) = 3;
  a(1, 1) = 4;
  Mat eye(2, 2);
  eye(0, 0) = eye(1, 1) = 1.0;
  const auto mm = tape.matmul(tape.leaf(a), tape.leaf(eye));
  CHECK(bitwise_equal(tape.value(mm), a));
}

TEST_CASE("backward on simple scalars") {
  {
    // loss = sum(x^2) at x = 3 -> grad 6
    Tape tape;
    const auto x = tape.leaf(Mat::scalar(3.0));
    const auto loss = tape.sum(tape.square(x));
    tape.backward(loss);
    CHECK(tape.grad(x).a[0] == doctest::Approx(6.0).epsilon(1e-15));
  }
  {
    // loss = exp(x) at x = 0 -> grad 1
    Tape tape;
    const auto x = tape.leaf(Mat::scalar(0.0));
    const auto loss = tape.sum(tape.exp(x));
    tape.backward(loss);
    CHECK(tape.grad(x).a[0] == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("backward twice is an error") {
  Tape tape;
  const auto x = tape.leaf(Mat::scalar(1.0));
  const auto loss = tape.sum(tape.square(x));
  tape.backward(loss);
  CHECK_THROWS_AS(tape.backward(loss), DataError);
}

TEST_CASE("every primitive passes a finite-difference check") {
  Rng rng(101);
  const Mat x44 = random_mat(rng, 4, 4, 0.2, 1.5);  // positive: sqrt/recip-safe
  const Mat x43 = random_mat(rng, 4, 3);
  const Mat w34 = random_mat(rng, 3, 4);
  const Mat mask = random_mat(rng, 4, 3, 0.0, 2.0);

  // touches matmul, matmul_nt, softmax, diag, recip, sqrt, hadamard, cols,
  // hcat, relu, sub, add, mean_rows, abs, exp, scale, square, sum
  auto composite = [&](Tape& t, Tape::NodeId x) {
    const auto y = t.matmul(x, t.leaf(w34));             // 4x4
    const auto sm = t.row_softmax(t.scale(y, 0.7));      // 4x4
    const auto g = t.matmul_nt(sm, sm);                  // 4x4
    const auto dv = t.diag(g);                           // 4x1
    const auto rn = t.recip(t.sqrt(t.add_const(dv, 1e-6)));
    const auto outer = t.matmul_nt(rn, rn);              // 4x4
    const auto cos = t.hadamard(g, outer);
    const auto sl = t.hcat({t.cols(cos, 0, 2), t.cols(cos, 2, 4)});
    const auto mr = t.mean_rows(t.relu(t.sub(sl, t.leaf(Mat(4, 4, 0.05)))));
    const auto ab = t.abs(t.add(mr, t.leaf(Mat(1, 4, -0.1))));
    const auto ex = t.exp(t.scale(ab, -1.0));
    return t.sum(t.square(ex));
  };
  CHECK(max_rel_error_vs_fd(x43, composite) < 1e-6);

  // masked ops and stacking
  auto masked = [&](Tape& t, Tape::NodeId x) {
    const auto mm = t.mul_mask(x, mask);
    const auto am = t.add_mask(mm, Mat(4, 3, 0.25));
    const auto s1 = t.sum(am);
    const auto s2 = t.sum(t.square(x));
    const auto st = t.stack_scalars({s1, s2});
    return t.sum(t.hadamard(st, st));
  };
  CHECK(max_rel_error_vs_fd(x43, masked) < 1e-6);

  // sqrt of sum of squares (the training loss shape)
  auto norm_loss = [&](Tape& t, Tape::NodeId x) { return t.sqrt(t.sum(t.square(x))); };
  CHECK(max_rel_error_vs_fd(x44, norm_loss) < 1e-6);
}

TEST_CASE("softmax backward rows sum to zero under constant upstream") {
  Rng rng(7);
  Tape tape;
  const auto x = tape.leaf(random_mat(rng, 5, 6));
  const auto sm = tape.row_softmax(x);
  const auto loss = tape.sum(sm);  // constant upstream gradient of 1 per entry
  tape.backward(loss);
  const Mat& g = tape.grad(x);
  for (std::size_t i = 0; i < g.rows; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < g.cols; ++j) row += g(i, j);
    CHECK(row == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("finite_difference_check: quadratic is exact, corrupted gradient is caught") {
  ParameterStore params;
  Rng rng(3);
  params.add("theta", random_mat(rng, 3, 3));
  auto loss = [](const ParameterStore& p) {
    double s = 0.0;
    for (double v : p.value("theta").a) s += v * v;
    return s;
  };
  // analytic gradient of sum(theta^2)
  for (std::size_t i = 0; i < 9; ++i) {
    params.grad("theta").a[i] = 2.0 * params.value("theta").a[i];
  }
  Rng crng(5);
  const auto good = finite_difference_check(loss, params, 1e-5, 100, crng);
  CHECK(good.coords_checked == 9);
  CHECK(good.max_rel_error < 1e-9);

  params.grad("theta").a[4] += 0.5;  // negative control
  Rng crng2(5);
  const auto bad = finite_difference_check(loss, params, 1e-5, 100, crng2);
  CHECK(bad.max_rel_error > 1e-2);
}

TEST_CASE("optimizer: pure weight decay scales parameters") {
  ParameterStore params;
  Rng rng(9);
  const Mat init = random_mat(rng, 2, 3);
  params.add("w", init);
  OptimConfig cfg;
  cfg.lr = 0.01;
  cfg.weight_decay = 0.1;
  params.zero_grad();
  params.step(cfg);
  for (std::size_t i = 0; i < init.a.size(); ++i) {
    const double expected = init.a[i] - cfg.lr * cfg.weight_decay * init.a[i];
    CHECK(params.value("w").a[i] == expected);
  }
}

TEST_CASE("optimizer: converges on a quadratic bowl") {
  ParameterStore params;
  params.add("theta", Mat(4, 1, 1.0));
  OptimConfig cfg;
  cfg.lr = 0.02;
  cfg.weight_decay = 0.0;
  for (int step = 0; step < 200; ++step) {
    for (std::size_t i = 0; i < 4; ++i) {
      params.grad("theta").a[i] = 2.0 * params.value("theta").a[i];
    }
    params.step(cfg);
  }
  double norm = 0.0;
  for (double v : params.value("theta").a) norm += v * v;
  CHECK(std::sqrt(norm) < 1e-2);
}

TEST_CASE("optimizer: identical runs are bitwise identical, non-finite grads rejected") {
  auto run = [] {
    ParameterStore p;
    Rng rng(33);
    p.add("w", Mat(3, 3, 0.5));
    OptimConfig cfg;
    for (int s = 0; s < 50; ++s) {
      for (std::size_t i = 0; i < 9; ++i) p.grad("w").a[i] = rng.uniform(-1, 1);
      p.step(cfg);
    }
    return p.value("w");
  };
  CHECK(bitwise_equal(run(), run()));

  ParameterStore p;
  p.add("w", Mat(1, 1, 1.0));
  p.grad("w").a[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(p.step(OptimConfig{}), NumericError);
}

TEST_CASE("checkpoint round trip is bit exact") {
  ParameterStore params;
  Rng rng(77);
  params.add("a.b", random_mat(rng, 5, 7));
  params.add("c", random_mat(rng, 1, 1));
  params.add("d.e.f", random_mat(rng, 3, 2));
  const std::string path = "/tmp/graphdist_test_ckpt.bin";
  params.save(path);
  const ParameterStore loaded = ParameterStore::load(path);
  REQUIRE(loaded.names() == params.names());
  for (const auto& name : params.names()) {
    CHECK(bitwise_equal(loaded.value(name), params.value(name)));
  }

  // two saves of the same store are byte identical
  const std::string path2 = "/tmp/graphdist_test_ckpt2.bin";
  loaded.save(path2);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), {});
  const std::string b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
}

TEST_SUITE_END();
