#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <random>

#include "oracles.hpp"
#include "skqd/errors.hpp"
#include "skqd/hamiltonian.hpp"

using namespace skqd;

namespace {

SchwingerParams paper_n4() {
  SchwingerParams p = SchwingerParams::with_volume(4);
  p.mass_ratio = 10.0;
  p.penalty = 100.0;
  return p;
}

double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXd& b) {
  return (a - b.cast<oracles::Cplx>()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("display string is the binary rendering, site 0 rightmost") {
  CHECK(to_display_string(0b0101, 4) == "0101");
  CHECK(to_display_string(0b0011, 4) == "0011");
  CHECK(to_display_string(0, 4) == "0000");
  CHECK(to_display_string(0b101011, 6) == "101011");
  CHECK(parse_bitstring("0101", 4) == 0b0101);
  CHECK(parse_bitstring("1001", 4) == 0b1001);
  for (Bits b = 0; b < 64; ++b)
    CHECK(parse_bitstring(to_display_string(b, 6), 6) == b);
  CHECK_THROWS_AS(parse_bitstring("01x1", 4), ConfigError);
  CHECK_THROWS_AS(parse_bitstring("011", 4), ConfigError);
}

TEST_CASE("z_value convention: set bit means Z = -1") {
  CHECK(z_value(0b0001, 0) == -1);
  CHECK(z_value(0b0001, 1) == +1);
  CHECK(z_value(0b1000, 3) == -1);
}

TEST_CASE("fixed-volume construction and parameter validation") {
  const auto p = SchwingerParams::with_volume(14);
  CHECK(p.x == (14.0 / 30.0) * (14.0 / 30.0));
  CHECK(SchwingerParams::with_volume(4).x == (4.0 / 30.0) * (4.0 / 30.0));

  SchwingerParams bad;
  bad.n_sites = 5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.n_sites = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = SchwingerParams{};
  bad.x = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = SchwingerParams{};
  bad.penalty = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("constant Pauli term at N=4, l0=0, lambda=0 is N^2/8 = 2") {
  SchwingerParams p = paper_n4();
  p.l0 = 0.0;
  p.penalty = 0.0;
  const auto terms = build_pauli_terms(p);
  double constant = 0.0;
  int n_constant_terms = 0;
  for (const auto& t : terms)
    if (t.factors.empty()) {
      constant = t.coefficient;
      ++n_constant_terms;
    }
  CHECK(n_constant_terms == 1);
  CHECK(constant == 2.0);
}

TEST_CASE("N=2 has exactly one hopping pair with coefficient x/2") {
  SchwingerParams p;
  p.n_sites = 2;
  p.x = 0.37;
  const auto terms = build_pauli_terms(p);
  int n_xx = 0, n_yy = 0;
  for (const auto& t : terms) {
    if (t.factors.size() == 2 && t.factors[0].second == Pauli::X) {
      CHECK(t.factors[0].first == 0);
      CHECK(t.factors[1].first == 1);
      CHECK(t.coefficient == p.x / 2.0);
      ++n_xx;
    }
    if (t.factors.size() == 2 && t.factors[0].second == Pauli::Y) {
      CHECK(t.coefficient == p.x / 2.0);
      ++n_yy;
    }
  }
  CHECK(n_xx == 1);
  CHECK(n_yy == 1);
}

TEST_CASE("Pauli term structure: sites increasing, zero coefficients dropped") {
  SchwingerParams p = paper_n4();
  p.penalty = 0.0;  // makes the (n, N-1) ZZ electric weight vanish exactly
  const auto terms = build_pauli_terms(p);
  bool saw_zz_with_last_site = false;
  for (const auto& t : terms) {
    CHECK(t.coefficient != 0.0);
    for (std::size_t i = 1; i < t.factors.size(); ++i)
      CHECK(t.factors[i - 1].first < t.factors[i].first);
    if (t.factors.size() == 2 && t.factors[0].second == Pauli::Z &&
        t.factors[1].first == p.n_sites - 1)
      saw_zz_with_last_site = true;
  }
  CHECK_FALSE(saw_zz_with_last_site);

  p.penalty = 100.0;  // now every ZZ pair carries at least lambda/2
  int n_zz = 0;
  for (const auto& t : build_pauli_terms(p))
    if (t.factors.size() == 2 && t.factors[0].second == Pauli::Z) ++n_zz;
  CHECK(n_zz == 6);  // all pairs of 4 sites
}

TEST_CASE("build_pauli_terms rejects invalid parameters") {
  SchwingerParams p;
  p.n_sites = 3;
  CHECK_THROWS_AS(build_pauli_terms(p), ConfigError);
  p = SchwingerParams{};
  p.x = -1.0;
  CHECK_THROWS_AS(build_pauli_terms(p), ConfigError);
}

TEST_CASE("diagonal energy of the N=4 vacuum is -16/3") {
  SchwingerParams p = paper_n4();
  p.l0 = 0.0;
  CHECK(diagonal_energy(0b0101, p) == doctest::Approx(-16.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("diagonal energy of the N=4 flux pair at l0=0 is exactly 1") {
  SchwingerParams p = paper_n4();
  p.l0 = 0.0;
  // mass sum vanishes; cumulative charges (0,-1,0) give electric energy 1.
  CHECK(diagonal_energy(0b0011, p) == 1.0);
}

TEST_CASE("charge penalty contributes lambda * C_total^2") {
  SchwingerParams p = paper_n4();
  p.l0 = 0.0;
  SchwingerParams p0 = p;
  p0.penalty = 0.0;
  // |1011> has total charge -1.
  CHECK(diagonal_energy(0b1011, p) - diagonal_energy(0b1011, p0) == 100.0);
  // Strict linear growth in lambda for every out-of-sector string.
  for (Bits b = 0; b < 16; ++b) {
    if (std::popcount(b) == 2) continue;
    SchwingerParams p1 = p0, p2 = p0;
    p1.penalty = 3.0;
    p2.penalty = 7.0;
    const double d1 = diagonal_energy(b, p1) - diagonal_energy(b, p0);
    const double d2 = diagonal_energy(b, p2) - diagonal_energy(b, p0);
    CHECK(d1 > 0.0);
    CHECK(d2 == doctest::Approx(d1 * 7.0 / 3.0).epsilon(1e-14));
  }
}

TEST_CASE("l0-affine diagonal decomposition matches direct evaluation") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    SchwingerParams p = SchwingerParams::with_volume(8);
    p.mass_ratio = 10.0;
    p.penalty = 100.0;
    p.l0 = -1.0 + 4.0 * (gen() >> 11) * 0x1.0p-53;
    const Bits b = gen() & 0xffu;
    const auto c = diagonal_coeffs(b, p);
    CHECK(diagonal_energy(b, p) == diagonal_energy_at(c, p.l0, p.n_sites));
  }
}

TEST_CASE("hopping neighbors of |0011> and |0101>") {
  SchwingerParams p = paper_n4();
  const auto nb1 = hopping_neighbors(0b0011, p);
  REQUIRE(nb1.size() == 1);
  CHECK(nb1[0].first == 0b0101);
  CHECK(nb1[0].second == p.x);

  // the four-string support seen in the N=4 run: |0101> touches the rest
  const auto nb2 = hopping_neighbors(0b0101, p);
  REQUIRE(nb2.size() == 3);
  CHECK(nb2[0].first == 0b0110);
  CHECK(nb2[1].first == 0b0011);
  CHECK(nb2[2].first == 0b1001);
  for (const auto& [b, elem] : nb2) {
    CHECK(elem == p.x);
    CHECK(std::popcount(b) == 2);
  }
}

TEST_CASE("single-domain-wall strings have exactly one neighbor") {
  SchwingerParams p = SchwingerParams::with_volume(6);
  for (int wall = 1; wall < 6; ++wall) {
    // |1..10..0>: the top `wall` sites set.
    Bits b = ((Bits{1} << wall) - 1) << (6 - wall);
    CHECK(hopping_neighbors(b, p).size() == 1);
  }
}

TEST_CASE("dense matrix from Pauli terms equals charge-form assembly") {
  std::mt19937_64 gen(42);
  auto uniform = [&gen](double lo, double hi) {
    return lo + (hi - lo) * ((gen() >> 11) * 0x1.0p-53);
  };
  for (int n : {2, 4, 6, 8}) {
    for (int trial = 0; trial < 5; ++trial) {
      SchwingerParams p = SchwingerParams::with_volume(n);
      p.l0 = uniform(-1.0, 3.0);
      p.penalty = uniform(0.0, 200.0);
      p.mass_ratio = uniform(0.0, 20.0);
      const auto pauli =
          oracles::dense_from_pauli_terms(build_pauli_terms(p), n);
      const auto charge = oracles::dense_from_charge_form(p);
      CHECK(max_abs_diff(pauli, charge) <= 1e-12);
      // real symmetric
      CHECK(pauli.imag().cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((charge - charge.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("matrix elements vanish between different Hamming weights") {
  SchwingerParams p = paper_n4();
  const auto h = oracles::dense_from_charge_form(p);
  for (long i = 0; i < h.rows(); ++i)
    for (long j = 0; j < h.cols(); ++j)
      if (std::popcount(static_cast<Bits>(i)) !=
          std::popcount(static_cast<Bits>(j)))
        CHECK(h(i, j) == 0.0);
}

TEST_CASE("bit convention self-consistency: mass-term extremizers") {
  for (int n : {4, 6, 10}) {
    SchwingerParams p = SchwingerParams::with_volume(n);
    p.l0 = 0.0;
    p.penalty = 0.0;
    const Bits vacuum = 0x5555555555555555ull & ((Bits{1} << n) - 1);
    const Bits flipped = 0xaaaaaaaaaaaaaaaaull & ((Bits{1} << n) - 1);
    double lowest_mass = 1e300, highest_mass = -1e300;
    SchwingerParams mass_only = p;
    mass_only.mass_ratio = 10.0;
    SchwingerParams no_mass = p;
    no_mass.mass_ratio = 0.0;
    Bits argmin = 0, argmax = 0;
    for (Bits b = 0; b < (Bits{1} << n); ++b) {
      const double m = diagonal_energy(b, mass_only) - diagonal_energy(b, no_mass);
      if (m < lowest_mass) lowest_mass = m, argmin = b;
      if (m > highest_mass) highest_mass = m, argmax = b;
    }
    CHECK(argmin == vacuum);
    CHECK(argmax == flipped);
  }
}
