#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "gbc/gaussian.hpp"
#include "gbc/numerics.hpp"
#include "gbc/parallel.hpp"

using namespace gbc;

namespace {

std::vector<std::vector<Eigen::VectorXd>> random_vector_array(int r, int dim,
                                                              RngStream& rng) {
  std::vector<std::vector<Eigen::VectorXd>> u(r, std::vector<Eigen::VectorXd>(r));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      Eigen::VectorXd v(dim);
      for (int k = 0; k < dim; ++k) v(k) = rng.next_normal();
      u[i][j] = v;
    }
  return u;
}

// Monte Carlo oracle for E det(u_ij . tau).
struct DetMc {
  double mean = 0.0;
  double stderr_ = 0.0;
};

DetMc mc_det_average(const std::vector<std::vector<Eigen::VectorXd>>& u,
                     int draws, RngStream base) {
  const int r = static_cast<int>(u.size());
  const int dim = static_cast<int>(u[0][0].size());
  std::vector<double> vals(draws);
  parallel_for(draws, 2, [&](std::size_t d) {
    RngStream rng = base.substream(d);
    Eigen::VectorXd tau(dim);
    for (int k = 0; k < dim; ++k) tau(k) = rng.next_normal();
    Eigen::MatrixXd a(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) a(i, j) = u[i][j].dot(tau);
    vals[d] = a.determinant();
  });
  DetMc out;
  out.mean = pairwise_sum(vals) / draws;
  std::vector<double> sq(draws);
  for (int d = 0; d < draws; ++d) sq[d] = (vals[d] - out.mean) * (vals[d] - out.mean);
  out.stderr_ = std::sqrt(pairwise_sum(sq) / draws / draws);
  return out;
}

}  // namespace

TEST_CASE("sampling is reproducible for a fixed stream") {
  auto g = GaussianMeasure::standard(3);
  RngStream a(11, 0), b(11, 0);
  CHECK(g.sample(a) == g.sample(b));
}

TEST_CASE("zero covariance always samples the zero vector") {
  auto g = GaussianMeasure::from_covariance(Eigen::MatrixXd::Zero(4, 4));
  RngStream rng(3, 0);
  for (int i = 0; i < 5; ++i) CHECK(g.sample(rng).norm() == 0.0);
  CHECK_FALSE(g.nondegenerate());
}

TEST_CASE("empirical covariance matches diag(4,1)") {
  Eigen::MatrixXd t(2, 2);
  t << 4.0, 0.0, 0.0, 1.0;
  auto g = GaussianMeasure::from_covariance(t);
  RngStream rng(2025, 1);
  const int n = 100000;
  double s11 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = g.sample(rng);
    s11 += x(0) * x(0);
  }
  s11 /= n;
  // var of x^2 for N(0,4) is 2*16; allow 3 standard errors.
  CHECK(std::abs(s11 - 4.0) < 3.0 * std::sqrt(32.0 / n));
}

TEST_CASE("pushforward covariance is L T L^T") {
  RngStream rng(8, 8);
  Eigen::MatrixXd t = Eigen::MatrixXd::Random(5, 5);
  t = (t * t.transpose()).eval();
  auto g = GaussianMeasure::from_covariance(t);

  SECTION("identity map") {
    auto p = g.pushforward(Eigen::MatrixXd::Identity(5, 5));
    CHECK((p.covariance() - t).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("row-vector projection has variance |e|^2 under identity covariance") {
    auto id = GaussianMeasure::standard(5);
    Eigen::MatrixXd e(1, 5);
    e << 1, 2, 3, 4, 5;
    auto p = id.pushforward(e);
    CHECK(p.covariance()(0, 0) == Catch::Approx(e.squaredNorm()).epsilon(1e-14));
  }
  SECTION("empirical check of a random pushforward") {
    Eigen::MatrixXd l = Eigen::MatrixXd::Random(3, 5);
    auto p = g.pushforward(l);
    const Eigen::MatrixXd expected = l * t * l.transpose();
    const int n = 100000;
    Eigen::MatrixXd emp = Eigen::MatrixXd::Zero(3, 3);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd x = p.sample(rng);
      emp += x * x.transpose();
    }
    emp /= n;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double var = expected(a, a) * expected(b, b) +
                           expected(a, b) * expected(a, b);
        REQUIRE(std::abs(emp(a, b) - expected(a, b)) <
                5.0 * std::sqrt(var / n) + 1e-12);
      }
  }
}

TEST_CASE("r=2 determinant average has the closed form") {
  RngStream rng(31, 0);
  auto u = random_vector_array(2, 6, rng);
  const double expected = u[0][0].dot(u[1][1]) - u[0][1].dot(u[1][0]);
  CHECK(gaussian_det_average(u) == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("diagonal array returns (2h-1)!! exactly and Q returns (2h)!") {
  for (int r : {2, 4}) {
    const int dim = 7;
    std::vector<std::vector<Eigen::VectorXd>> u(
        r, std::vector<Eigen::VectorXd>(r, Eigen::VectorXd::Zero(dim)));
    for (int i = 0; i < r; ++i) u[i][i](dim - 1) = 1.0;
    const int h = r / 2;
    CHECK(gaussian_det_average(u) == double_factorial_odd(h));
    CHECK(gaussian_det_q(u) == factorial(r));
  }
}

TEST_CASE("closed form matches the Monte Carlo oracle") {
  RngStream rng(4242, 0);
  for (int r : {2, 4}) {
    for (int trial = 0; trial < 3; ++trial) {
      auto u = random_vector_array(r, r + 3, rng);
      const double formula = gaussian_det_average(u);
      const auto mc = mc_det_average(u, 100000, RngStream(99, 1000 + trial));
      REQUIRE(std::abs(formula - mc.mean) < 5.0 * mc.stderr_);
    }
  }
}

TEST_CASE("orthogonal invariance of the determinant average") {
  RngStream rng(17, 4);
  for (int r : {2, 4}) {
    const int dim = r + 4;
    auto u = random_vector_array(r, dim, rng);
    Eigen::MatrixXd m = Eigen::MatrixXd::Random(dim, dim);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    const Eigen::MatrixXd q = qr.householderQ();
    auto v = u;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) v[i][j] = q * u[i][j];
    const double a = gaussian_det_average(u);
    const double b = gaussian_det_average(v);
    REQUIRE(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("bridge to the pair-expanded Pfaffian") {
  RngStream rng(23, 9);
  for (int r : {2, 4}) {
    for (int trial = 0; trial < 5; ++trial) {
      auto u = random_vector_array(r, r + 2, rng);
      const double mu = gaussian_det_average(u);
      const double pf = pfaffian_pair_sum(curvature_bridge(u));
      REQUIRE(std::abs(mu - pf) <= 1e-9 * std::max(1.0, std::abs(mu)));
    }
  }
}

TEST_CASE("mu = Z * Q with Z = 1/(2^h h!)") {
  RngStream rng(55, 2);
  for (int r : {2, 4}) {
    auto u = random_vector_array(r, r + 1, rng);
    const int h = r / 2;
    const double z = 1.0 / (std::pow(2.0, h) * factorial(h));
    CHECK(gaussian_det_average(u) ==
          Catch::Approx(z * gaussian_det_q(u)).epsilon(1e-11));
  }
}

TEST_CASE("odd rank is rejected") {
  std::vector<std::vector<Eigen::VectorXd>> u(
      3, std::vector<Eigen::VectorXd>(3, Eigen::VectorXd::Zero(2)));
  CHECK_THROWS_AS(gaussian_det_average(u), UnsupportedRankError);
}
