#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "gbc/pfaffian.hpp"
#include "gbc/rng.hpp"

using namespace gbc;

namespace {

Eigen::MatrixXd random_skew(int r, RngStream& rng) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) {
      a(i, j) = rng.next_normal();
      a(j, i) = -a(i, j);
    }
  return a;
}

Eigen::MatrixXd canonical_symplectic(int r) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(r, r);
  for (int i = 0; i < r; i += 2) {
    a(i, i + 1) = 1.0;
    a(i + 1, i) = -1.0;
  }
  return a;
}

}  // namespace

TEST_CASE("pfaffian of 2x2 collapses to the off-diagonal entry") {
  Eigen::MatrixXd a(2, 2);
  a << 0.0, 3.25, -3.25, 0.0;
  CHECK(pfaffian_sum(a) == 3.25);
}

TEST_CASE("pfaffian of the canonical symplectic matrix is exactly one") {
  for (int r : {2, 4, 6, 8}) CHECK(pfaffian_sum(canonical_symplectic(r)) == 1.0);
}

TEST_CASE("pfaffian squared equals the determinant") {
  RngStream rng(2024, 0);
  for (int r : {2, 4, 6, 8}) {
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::MatrixXd a = random_skew(r, rng);
      const double pf = pfaffian_sum(a);
      const double det = a.determinant();
      REQUIRE(std::abs(pf * pf - det) <= 1e-10 * std::max(std::abs(det), 1.0));
    }
  }
}

TEST_CASE("pfaffian transforms with det(G) under congruence") {
  RngStream rng(77, 1);
  for (int r : {2, 4, 6}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::MatrixXd a = random_skew(r, rng);
      Eigen::MatrixXd g(r, r);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) g(i, j) = rng.next_normal();
      const double lhs = pfaffian_sum(g.transpose() * a * g);
      const double rhs = g.determinant() * pfaffian_sum(a);
      REQUIRE(std::abs(lhs - rhs) <= 1e-8 * std::max(std::abs(rhs), 1.0));
    }
  }
}

TEST_CASE("odd or oversized ranks are rejected") {
  CHECK_THROWS_AS(pfaffian_sum(Eigen::MatrixXd::Zero(3, 3)), UnsupportedRankError);
  CHECK_THROWS_AS(pfaffian_sum(Eigen::MatrixXd::Zero(10, 10)), UnsupportedRankError);
}

TEST_CASE("euler density vanishes for flat curvature") {
  SkewFormMatrix F(2, 2);
  CHECK(euler_density(F, 1.0) == 0.0);
}

TEST_CASE("euler density of a constant-curvature surface block") {
  // F_{12|12} = sin(theta) against sqrt(det g) = sin(theta): the round
  // 2-sphere density 1/(2*pi), independent of theta.
  for (double theta : {0.3, 1.0, 2.5}) {
    SkewFormMatrix F(2, 2);
    Eigen::MatrixXd block(2, 2);
    block << 0.0, std::sin(theta), -std::sin(theta), 0.0;
    F.set(0, 1, block);
    CHECK(euler_density(F, std::sin(theta)) ==
          Catch::Approx(1.0 / kTwoPi).epsilon(1e-14));
  }
}

TEST_CASE("euler density is invariant under oriented orthonormal frame change") {
  RngStream rng(5, 5);
  const int r = 4;
  for (int trial = 0; trial < 10; ++trial) {
    SkewFormMatrix F(r, r);
    for (int a = 0; a < r; ++a)
      for (int b = a + 1; b < r; ++b) {
        Eigen::MatrixXd block(r, r);
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < r; ++j) block(i, j) = rng.next_normal();
        F.set(a, b, block);
      }

    // Random special-orthogonal frame rotation acting on the bundle indices.
    Eigen::MatrixXd m(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) m(i, j) = rng.next_normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ();
    if (q.determinant() < 0) q.col(0) *= -1.0;

    SkewFormMatrix G(r, r);
    for (int a = 0; a < r; ++a)
      for (int b = a + 1; b < r; ++b) {
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(r, r);
        for (int c = 0; c < r; ++c)
          for (int d = 0; d < r; ++d)
            block += q(c, a) * q(d, b) * F.coeff(c, d);
        G.set(a, b, block);
      }

    const double d1 = euler_density(F, 1.0);
    const double d2 = euler_density(G, 1.0);
    REQUIRE(std::abs(d1 - d2) <= 1e-10 * std::max(1.0, std::abs(d1)));
  }
}

TEST_CASE("skew form matrix enforces both antisymmetries") {
  RngStream rng(1, 1);
  SkewFormMatrix F(4, 3);
  Eigen::MatrixXd block(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) block(i, j) = rng.next_normal();
  F.set(1, 2, block);
  F.set(0, 3, block.transpose());
  CHECK(F.max_antisymmetry_defect() == 0.0);
  CHECK_THROWS_AS(pfaffian_pair_sum(F), DimensionMismatchError);
}
