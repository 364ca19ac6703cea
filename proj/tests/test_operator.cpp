#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "rib/operator.hpp"
#include "rib/rng.hpp"
#include "rib/space.hpp"

using Catch::Approx;
using namespace rib;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

Operator random_operator(int n, rng::Stream& stream) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = stream.uniform(-1.0, 1.0);
  return Operator(m);
}
}  // namespace

TEST_CASE("diagonal delta") {
  CHECK(diagonal_delta(Operator(mat2(1, 5, 0.2, -2))) == 1.0);
  CHECK(diagonal_delta(Operator::identity(4)) == 1.0);
  CHECK(diagonal_delta(Operator(mat2(0, 1, 1, 0))) == 0.0);
}

TEST_CASE("diagonal part and its inverse") {
  const auto d = diagonal_part(Operator(mat2(2, 7, 0, -3)));
  CHECK(d.entry(0, 0) == 2.0);
  CHECK(d.entry(1, 1) == -3.0);
  CHECK(d.entry(0, 1) == 0.0);
  const auto dinv = diagonal_inverse(d);
  CHECK(dinv.entry(0, 0) == 0.5);
  CHECK(dinv.entry(1, 1) == Approx(-1.0 / 3.0));
  CHECK_THROWS_AS(diagonal_inverse(Operator(mat2(0, 1, 1, 1))),
                  std::invalid_argument);
}

TEST_CASE("multiplier flips signs onto the diagonal") {
  const auto m = multiplier(Operator(mat2(-1, 0, 0, 2)));
  CHECK(m.entry(0, 0) == -1.0);
  CHECK(m.entry(1, 1) == 1.0);
  const auto id = multiplier(Operator::identity(3));
  CHECK(id.matrix().isApprox(Eigen::MatrixXd::Identity(3, 3)));
  const auto tt = with_positive_diagonal(Operator(mat2(-2, 1, 0, -3)));
  CHECK(tt.entry(0, 0) == 2.0);
  CHECK(tt.entry(1, 1) == 3.0);
  CHECK_THROWS_AS(multiplier(Operator(mat2(0, 1, 1, 0))),
                  std::invalid_argument);
}

TEST_CASE("multiplier preserves norms and delta") {
  rng::Stream stream(5, 0);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd m(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        m(i, j) = (i == j) ? (stream.bernoulli(0.5) ? 1 : -1) *
                                 stream.uniform(0.5, 2.0)
                           : stream.uniform(-1.0, 1.0);
    const Operator t(m);
    const Operator tt = with_positive_diagonal(t);
    CHECK(signed_diagonal_min(tt) == Approx(diagonal_delta(t)));
    const auto mult = multiplier(t);
    std::vector<double> x(6), mx(6);
    for (int i = 0; i < 6; ++i) x[i] = stream.uniform(-1.0, 1.0);
    for (int i = 0; i < 6; ++i) mx[i] = mult.entry(i, i) * x[i];
    for (const auto& s :
         {SpaceSpec::lp(1, 6), SpaceSpec::lp(2, 6), SpaceSpec::lp(kInf, 6),
          SpaceSpec::lorentz({1, 0.5, 1.0 / 3, 0.25, 0.2, 1.0 / 6})})
      CHECK(norm(s, x) == norm(s, mx));
  }
}

TEST_CASE("operator norm closed forms") {
  const Operator t(mat2(1, 2, 3, 4));
  CHECK(op_norm(SpaceSpec::lp(1, 2), t, NormMode::exact) == 6.0);
  CHECK(op_norm(SpaceSpec::lp(kInf, 2), t, NormMode::exact) == 7.0);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d.diagonal() << 3, 4;
  CHECK(op_norm(SpaceSpec::lp(2, 2), Operator(d), NormMode::exact) ==
        Approx(4.0));
}

TEST_CASE("spectral norm against an SVD oracle") {
  rng::Stream stream(17, 0);
  for (int n : {2, 5, 16, 40}) {
    const auto s = SpaceSpec::lp(2, n);
    const Operator t = random_operator(n, stream);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(t.matrix());
    const double oracle = svd.singularValues()(0);
    CHECK(op_norm(s, t, NormMode::exact) == Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("spectral norm dominates random Rayleigh quotients") {
  rng::Stream stream(23, 0);
  const int n = 2;  // random directions saturate the top singular vector
  const auto s = SpaceSpec::lp(2, n);
  const Operator t = random_operator(n, stream);
  const double exact = op_norm(s, t, NormMode::exact);
  double brute = 0.0;
  for (int rep = 0; rep < 10000; ++rep) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = stream.uniform(-1.0, 1.0);
    if (v.norm() == 0.0) continue;
    brute = std::max(brute, (t.matrix() * v).norm() / v.norm());
  }
  CHECK(exact >= brute);
  CHECK(exact <= brute * 1.0001);
  // at larger n random sampling only gives the sound one-sided comparison
  const Operator t16 = random_operator(16, stream);
  const double exact16 = op_norm(SpaceSpec::lp(2, 16), t16, NormMode::exact);
  for (int rep = 0; rep < 1000; ++rep) {
    Eigen::VectorXd v(16);
    for (int i = 0; i < 16; ++i) v[i] = stream.uniform(-1.0, 1.0);
    CHECK((t16.matrix() * v).norm() <= exact16 * v.norm() * (1 + 1e-9));
  }
}

TEST_CASE("upper mode dominates exact mode") {
  rng::Stream stream(29, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const Operator t = random_operator(8, stream);
    for (double p : {1.0, 2.0, kInf}) {
      const auto s = SpaceSpec::lp(p, 8);
      CHECK(op_norm(s, t, NormMode::upper) >=
            op_norm(s, t, NormMode::exact) * (1 - 1e-12));
    }
  }
}

TEST_CASE("lorentz operator norm by extreme points") {
  const auto s = SpaceSpec::lorentz({1, 0.5});
  // identity has norm 1 on any of these balls
  CHECK(op_norm(s, Operator::identity(2), NormMode::upper) == Approx(1.0));
  // rank-one: x -> (x1+x2, 0); maximized at (1,1)/W2 giving 2/1.5
  const Operator t(mat2(1, 1, 0, 0));
  CHECK(op_norm(s, t, NormMode::upper) == Approx(4.0 / 3.0));
  CHECK_THROWS_AS(op_norm(s, t, NormMode::exact), std::invalid_argument);
  const auto s7 = SpaceSpec::lorentz({1, 1, 1, 1, 1, 1, 1});
  CHECK_THROWS_AS(op_norm(s7, Operator::identity(7), NormMode::upper),
                  std::invalid_argument);
}

TEST_CASE("interpolation upper bound for intermediate p") {
  const Operator t(mat2(1, 2, 3, 4));
  const auto s = SpaceSpec::lp(3, 2);
  CHECK_THROWS_AS(op_norm(s, t, NormMode::exact), std::invalid_argument);
  CHECK(op_norm(s, t, NormMode::upper) ==
        Approx(std::pow(6.0, 1.0 / 3.0) * std::pow(7.0, 2.0 / 3.0)));
}

TEST_CASE("bilinear pairing") {
  CHECK(bilinear(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
  CHECK(bilinear(std::vector<double>{0, 1}, std::vector<double>{0, 1}) == 1.0);
  CHECK(bilinear(std::vector<double>{1, 2}, std::vector<double>{3, -1}) ==
        1.0);
  CHECK_THROWS_AS(
      bilinear(std::vector<double>{1}, std::vector<double>{1, 2}),
      std::invalid_argument);
}

TEST_CASE("operator validation") {
  CHECK_THROWS_AS(Operator(Eigen::MatrixXd::Zero(2, 3)),
                  std::invalid_argument);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(Operator(bad), std::invalid_argument);
}
