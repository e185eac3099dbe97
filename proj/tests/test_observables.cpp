#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>

#include "skqd/errors.hpp"
#include "skqd/krylov.hpp"
#include "skqd/observables.hpp"

using namespace skqd;

TEST_CASE("total charge vanishes exactly on half-filled strings") {
  const int n = 6;
  for (Bits b = 0; b < (Bits{1} << n); ++b) {
    const int q = total_charge(b, n);
    CHECK(q >= -n / 2);
    CHECK(q <= n / 2);
    if (std::popcount(b) == n / 2) {
      CHECK(q == 0);
    } else {
      CHECK(q != 0);
    }
  }
  CHECK(total_charge(parse_bitstring("000000", 6), 6) == 3);
  CHECK(total_charge(parse_bitstring("111111", 6), 6) == -3);
  CHECK(total_charge(parse_bitstring("001111", 6), 6) == -1);
  CHECK(total_charge(parse_bitstring("000011", 6), 6) == 1);
}

TEST_CASE("particle number counts deviations from the staggered vacuum") {
  CHECK(particle_number_of(parse_bitstring("0101", 4), 4) == 0);
  CHECK(particle_number_of(parse_bitstring("1010", 4), 4) == 4);
  CHECK(particle_number_of(parse_bitstring("0110", 4), 4) == 2);  // one pair
  CHECK(particle_number_of(parse_bitstring("1001", 4), 4) == 2);
  CHECK(particle_number_of(parse_bitstring("010101", 6), 6) == 0);
  CHECK(particle_number_of(parse_bitstring("101010", 6), 6) == 6);

  // even on every zero-charge string, and in [0, N]
  const int n = 8;
  for (Bits b = 0; b < (Bits{1} << n); ++b) {
    if (std::popcount(b) != n / 2) continue;
    const int p = particle_number_of(b, n);
    CHECK(p >= 0);
    CHECK(p <= n);
    CHECK(p % 2 == 0);
  }
}

TEST_CASE("flipping one adjacent 01 pair changes particle number by two") {
  const int n = 8;
  for (Bits b = 0; b < (Bits{1} << n); ++b) {
    if (std::popcount(b) != n / 2) continue;
    for (int site = 0; site + 1 < n; ++site) {
      const int lo = static_cast<int>((b >> site) & 1);
      const int hi = static_cast<int>((b >> (site + 1)) & 1);
      if (lo == hi) continue;
      const Bits flipped = b ^ (Bits{0b11} << site);
      const int diff =
          particle_number_of(flipped, n) - particle_number_of(b, n);
      CHECK(std::abs(diff) == 2);
    }
  }
}

TEST_CASE("expectation values weight strings by squared amplitude") {
  SubspaceBasis basis(4);
  basis.add(parse_bitstring("0101", 4), 1);  // P = 0
  basis.add(parse_bitstring("0110", 4), 1);  // P = 2
  basis.add(parse_bitstring("1010", 4), 1);  // P = 4

  Eigen::VectorXd unit = Eigen::VectorXd::Zero(3);
  unit[2] = 1.0;
  CHECK(expected_particle_number(basis, unit) == 4.0);

  Eigen::VectorXd mixed(3);
  mixed << std::sqrt(0.5), std::sqrt(0.3), std::sqrt(0.2);
  CHECK(expected_particle_number(basis, mixed) ==
        doctest::Approx(0.5 * 0.0 + 0.3 * 2.0 + 0.2 * 4.0).epsilon(1e-14));

  // sign of an amplitude cannot matter
  Eigen::VectorXd signed_mixed = mixed;
  signed_mixed[1] = -signed_mixed[1];
  CHECK(expected_particle_number(basis, signed_mixed) ==
        expected_particle_number(basis, mixed));

  Eigen::VectorXd wrong_length = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(expected_particle_number(basis, wrong_length), ConfigError);
}

TEST_CASE("a uniform superposition averages the sector particle numbers") {
  const int n = 6;
  const SubspaceBasis basis = full_sector_basis(n);
  const auto d = static_cast<Eigen::Index>(basis.dim());
  const Eigen::VectorXd uniform =
      Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  double mean = 0.0;
  for (const Bits b : basis.bitstrings()) {
    mean += particle_number_of(b, n);
  }
  mean /= static_cast<double>(d);
  CHECK(expected_particle_number(basis, uniform) ==
        doctest::Approx(mean).epsilon(1e-13));
  // half filling on average: the sector mean sits at N/2
  CHECK(mean == doctest::Approx(n / 2.0).epsilon(1e-14));
}
