#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gbc/numerics.hpp"
#include "gbc/rng.hpp"

using namespace gbc;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Reference vectors from the Random123 test suite.
  auto out = Philox4x32::generate(0, 0, 0);
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);

  out = Philox4x32::generate(0xffffffffffffffffull, 0xffffffffffffffffull,
                             0xffffffffffffffffull);
  CHECK(out[0] == 0x408f276du);
  CHECK(out[1] == 0x41c83b0eu);
  CHECK(out[2] == 0xa20bc7c6u);
  CHECK(out[3] == 0x6d5451fdu);

  // counter = (243f6a88, 85a308d3), stream = (13198a2e, 03707344),
  // key = (a4093822, 299f31d0)
  out = Philox4x32::generate(0x299f31d0a4093822ull, 0x0370734413198a2eull,
                             0x85a308d3243f6a88ull);
  CHECK(out[0] == 0xd16cfe09u);
  CHECK(out[1] == 0x94fdccebu);
  CHECK(out[2] == 0x5001e420u);
  CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("streams are reproducible and independent of interleaving") {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

  // Substreams depend only on (seed, parent stream, index).
  RngStream s1 = RngStream(42, 0).substream(5);
  RngStream s2 = RngStream(42, 0).substream(5);
  RngStream other = RngStream(42, 0).substream(6);
  CHECK(s1.next_u64() == s2.next_u64());
  CHECK(s1.next_u64() != other.next_u64());
}

TEST_CASE("uniforms land in (0,1) with the right first moments") {
  RngStream rng(123, 0);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sumsq += u * u;
  }
  CHECK(std::abs(sum / n - 0.5) < 5.0 / std::sqrt(12.0 * n));
  CHECK(std::abs(sumsq / n - 1.0 / 3.0) < 0.005);
}

TEST_CASE("normals have unit variance and vanishing skew") {
  RngStream rng(9, 3);
  const int n = 200000;
  double m1 = 0.0, m2 = 0.0, m3 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_normal();
    m1 += z;
    m2 += z * z;
    m3 += z * z * z;
  }
  m1 /= n;
  m2 /= n;
  m3 /= n;
  CHECK(std::abs(m1) < 5.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(m2 - 1.0) < 0.02);
  CHECK(std::abs(m3) < 0.05);
}

TEST_CASE("pairwise sum is exact on adversarial orderings") {
  std::vector<double> v(1000);
  for (int i = 0; i < 1000; ++i) v[i] = (i % 2 ? 1.0 : -1.0) * 1e-3 * (i + 1);
  const double s1 = pairwise_sum(v);
  const double s2 = pairwise_sum(v);  // identical buffer, identical tree
  CHECK(s1 == s2);
  double ref = 0.0;
  for (double x : v) ref += x;
  CHECK(std::abs(s1 - ref) < 1e-12);
}
