#include <doctest.h>

#include <cmath>
#include <fstream>

#include "graphdist/errors.hpp"
#include "graphdist/distance.hpp"
#include "graphdist/encoder.hpp"
#include "oracles.hpp"

using namespace graphdist;

namespace {

HeadWeights random_head(Rng& rng, std::size_t d_h, std::size_t inter) {
  HeadWeights h;
  h.fc1 = Mat(d_h, inter);
  h.fc2 = Mat(inter, 1);
  for (double& v : h.fc1.a) v = rng.uniform(-1, 1);
  for (double& v : h.fc2.a) v = rng.uniform(-1, 1);
  return h;
}

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2, 2);
  return v;
}

}  // namespace

TEST_SUITE_BEGIN("distance");

TEST_CASE("metric axioms of the pair head") {
  Rng rng(1);
  const HeadWeights head = random_head(rng, 8, 6);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_vec(rng, 8);
    const auto b = random_vec(rng, 8);
    const double dab = pair_distance(a, b, head);
    const double dba = pair_distance(b, a, head);
    CHECK(dab == dba);  // bitwise symmetric
    CHECK(dab >= 0.0);
    CHECK(dab < 1.0);
    CHECK(pair_distance(a, a, head) == 0.0);  // exact identity of indiscernibles
  }
}

TEST_CASE("head output ln 2 gives distance one half") {
  HeadWeights head;
  head.fc1 = Mat(2, 1);
  head.fc1(0, 0) = 1.0;
  head.fc2 = Mat(1, 1);
  head.fc2(0, 0) = std::log(2.0);
  // (z_i - z_j)^2 = [1, 0] -> hidden relu(1) = 1 -> t = ln 2
  const double d = pair_distance({1.0, 0.5}, {0.0, 0.5}, head);
  CHECK(d == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("non-finite representations are rejected") {
  Rng rng(2);
  const HeadWeights head = random_head(rng, 2, 2);
  CHECK_THROWS_AS(pair_distance({std::nan(""), 0.0}, {0.0, 0.0}, head), NumericError);
}

TEST_CASE("mask matrix layout") {
  const auto mask = build_mask(6, {{2, 5}, {0, 1}}, 0.1, 1000.0);
  for (std::size_t i = 0; i < 6; ++i) CHECK(mask.m(i, i) == 1000.0);
  CHECK(mask.m(2, 5) == 1.0);
  CHECK(mask.m(5, 2) == 1.0);
  CHECK(mask.m(0, 1) == 1.0);
  CHECK(mask.m(3, 4) == 0.1);
  CHECK(mask.m(4, 3) == 0.1);
  CHECK_THROWS_AS(build_mask(3, {{0, 7}}, 0.1, 1000.0), DataError);
  CHECK_THROWS_AS(build_mask(3, {}, -0.5, 1000.0), DataError);
}

TEST_CASE("masked loss: zero residual, Frobenius reduction, hand value") {
  Rng rng(3);
  Mat d = oracle::random_symmetric(rng, 4);
  CHECK(masked_loss(d, d, Mat(4, 4, 1.0), 2.0) == 0.0);

  Mat dbar = oracle::random_symmetric(rng, 4);
  const double frob = frobenius_diff(d, dbar);
  CHECK(masked_loss(d, dbar, Mat(4, 4, 1.0), 2.0) == doctest::Approx(frob).epsilon(1e-12));

  // m=2, |residual| 0.3 off-diagonal, mask [[beta,1],[1,beta]], p=2
  Mat d2(2, 2), dbar2(2, 2), m2(2, 2);
  d2(0, 1) = d2(1, 0) = 0.3;
  m2(0, 0) = m2(1, 1) = 1000.0;
  m2(0, 1) = m2(1, 0) = 1.0;
  CHECK(masked_loss(d2, dbar2, m2, 2.0) ==
        doctest::Approx(std::sqrt(2.0 * 0.09)).epsilon(1e-15));
}

TEST_CASE("alpha = 0 reduces the loss to labeled plus diagonal terms") {
  Rng rng(4);
  const Mat d = oracle::random_symmetric(rng, 5);
  const Mat dbar = oracle::random_symmetric(rng, 5);
  const std::vector<std::pair<std::size_t, std::size_t>> labeled{{0, 1}, {2, 3}};
  const auto mask = build_mask(5, labeled, 0.0, 7.0);
  double expected_sq = 0.0;
  for (const auto& [i, j] : labeled) {
    const double r = d(i, j) - dbar(i, j);
    expected_sq += 2.0 * r * r;  // both orientations
  }
  for (std::size_t i = 0; i < 5; ++i) {
    const double r = 7.0 * (d(i, i) - dbar(i, i));
    expected_sq += r * r;
  }
  CHECK(masked_loss(d, dbar, mask.m, 2.0) ==
        doctest::Approx(std::sqrt(expected_sq)).epsilon(1e-12));
}

TEST_CASE("masked loss is monotone in each residual magnitude") {
  Rng rng(5);
  const Mat d = oracle::random_symmetric(rng, 4);
  const Mat dbar = oracle::random_symmetric(rng, 4);
  const auto mask = build_mask(4, {{0, 1}}, 0.3, 10.0);
  const double base = masked_loss(d, dbar, mask.m, 2.0);
  for (int t = 0; t < 10; ++t) {
    Mat worse = d;
    const std::size_t i = rng.index(4);
    const std::size_t j = rng.index(4);
    const double sign = worse(i, j) >= dbar(i, j) ? 1.0 : -1.0;
    worse(i, j) += sign * 0.2;
    worse(j, i) = worse(i, j);
    CHECK(masked_loss(worse, dbar, mask.m, 2.0) >= base - 1e-12);
  }
}

TEST_CASE("distance matrix csv round trip is value exact") {
  Rng rng(6);
  DistanceMatrix dm;
  dm.ids = {"g0", "g1", "g2"};
  dm.d = oracle::random_symmetric(rng, 3);
  dm.validate(true);
  const std::string path = "/tmp/graphdist_test_dm.csv";
  dm.save_csv(path);
  const DistanceMatrix back = DistanceMatrix::load_csv(path);
  CHECK(back.ids == dm.ids);
  CHECK(bitwise_equal(back.d, dm.d));

  // rewriting the loaded matrix produces identical bytes
  const std::string path2 = "/tmp/graphdist_test_dm2.csv";
  back.save_csv(path2);
  std::ifstream f1(path), f2(path2);
  const std::string b1((std::istreambuf_iterator<char>(f1)), {});
  const std::string b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
}

TEST_CASE("distance matrix validation catches asymmetry and diagonal") {
  DistanceMatrix dm;
  dm.ids = {"a", "b"};
  dm.d = Mat(2, 2);
  dm.d(0, 1) = 0.5;
  dm.d(1, 0) = 0.4;
  CHECK_THROWS_AS(dm.validate(false), DataError);
  dm.d(1, 0) = 0.5;
  dm.d(0, 0) = 0.1;
  CHECK_THROWS_AS(dm.validate(false), DataError);
  dm.d(0, 0) = 0.0;
  CHECK_NOTHROW(dm.validate(true));
  dm.d(0, 1) = dm.d(1, 0) = 1.5;
  CHECK_THROWS_AS(dm.validate(true), DataError);
  CHECK_NOTHROW(dm.validate(false));
}

TEST_SUITE_END();
