#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "oracles.hpp"
#include "skqd/errors.hpp"
#include "skqd/evolution.hpp"

using namespace skqd;

namespace {

std::shared_ptr<const SectorBasis> half_filling(int n) {
  return std::make_shared<SectorBasis>(n, n / 2);
}

// Deterministic normalized random state over a sector basis.
SectorState random_state(std::shared_ptr<const SectorBasis> basis,
                         std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  SectorState state;
  state.basis = basis;
  state.amplitudes.resize(basis->dim());
  double norm_sq = 0.0;
  for (auto& a : state.amplitudes) {
    a = {normal(gen), normal(gen)};
    norm_sq += std::norm(a);
  }
  for (auto& a : state.amplitudes) a /= std::sqrt(norm_sq);
  return state;
}

// Embeds a sector state into the full 2^N amplitude vector.
Eigen::VectorXcd embed(const SectorState& state) {
  const int n = state.basis->n_sites();
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(1l << n);
  for (std::size_t i = 0; i < state.dim(); ++i) {
    v(static_cast<long>(state.basis->unrank(i))) = state.amplitudes[i];
  }
  return v;
}

}  // namespace

TEST_CASE("sector basis enumerates fixed-weight strings ascending") {
  for (int n : {2, 4, 6, 8}) {
    for (int w = 0; w <= n; ++w) {
      SectorBasis basis(n, w);
      const auto expect = oracles::enumerate_weight(n, w);
      REQUIRE(basis.dim() == expect.size());
      for (std::size_t i = 0; i < expect.size(); ++i) {
        CHECK(basis.unrank(i) == expect[i]);
      }
    }
  }
  CHECK(SectorBasis(4, 2).dim() == 6);
  CHECK(SectorBasis(14, 7).dim() == 3432);
  CHECK(SectorBasis(16, 8).dim() == 12870);
}

TEST_CASE("combinadic rank inverts unrank on every state") {
  SectorBasis basis(10, 5);
  for (std::size_t i = 0; i < basis.dim(); ++i) {
    CHECK(basis.rank(basis.unrank(i)) == i);
  }
}

TEST_CASE("sector basis memory guard refuses oversized requests") {
  CHECK_THROWS_AS(SectorBasis(30, 15, 1024), InfeasibleError);
}

TEST_CASE("reference states sit on the advertised bitstrings") {
  auto basis = half_filling(6);

  const SectorState alt = reference_state(ReferenceKind::Alternating10, 6,
                                          0, basis);
  const SectorState mass = reference_state(ReferenceKind::MassGround, 6,
                                           0, basis);
  REQUIRE(alt.dim() == basis->dim());
  int nonzero = 0;
  for (std::size_t i = 0; i < alt.dim(); ++i) {
    if (std::norm(alt.amplitudes[i]) > 0) {
      ++nonzero;
      CHECK(basis->unrank(i) == parse_bitstring("101010", 6));
      CHECK(alt.amplitudes[i] == std::complex<double>(1.0, 0.0));
    }
  }
  CHECK(nonzero == 1);
  for (std::size_t i = 0; i < mass.dim(); ++i) {
    if (std::norm(mass.amplitudes[i]) > 0) {
      CHECK(basis->unrank(i) == parse_bitstring("010101", 6));
    }
  }

  const SectorState custom = reference_state(
      ReferenceKind::Custom, 6, parse_bitstring("011010", 6), basis);
  CHECK(std::norm(custom.amplitudes[basis->rank(
            parse_bitstring("011010", 6))]) == 1.0);

  // weight != N/2 lies outside the zero-charge sector
  CHECK_THROWS_AS(
      reference_state(ReferenceKind::Custom, 6, parse_bitstring("000001", 6)),
      ConfigError);
}

TEST_CASE("one Trotter step matches the full-space oracle gate sequence") {
  for (int n : {4, 6, 8}) {
    auto basis = half_filling(n);
    for (double dt : {0.2, 0.77, -0.3}) {
      const SectorState before = random_state(basis, 91u + n);
      const SectorState after = apply_trotter_step(before, dt);
      const Eigen::VectorXcd expect =
          oracles::full_trotter_step(embed(before), n, dt);
      const Eigen::VectorXcd got = embed(after);
      CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-14);
    }
  }
}

TEST_CASE("Trotter step is unitary on the sector and dt=0 is the identity") {
  auto basis = half_filling(8);
  const SectorState before = random_state(basis, 5);
  SectorState after = apply_trotter_step(before, 0.37);
  CHECK(after.norm_sq() == doctest::Approx(1.0).epsilon(1e-13));
  after = apply_trotter_step(before, 0.0);
  for (std::size_t i = 0; i < before.dim(); ++i) {
    CHECK(after.amplitudes[i] == before.amplitudes[i]);
  }
}

TEST_CASE("parallel and serial kernels produce identical amplitudes") {
  auto basis = half_filling(12);
  SectorState a = random_state(basis, 17);
  SectorState b = a;
  apply_trotter_step_inplace(a, 0.23);
  apply_trotter_step_inplace_serial(b, 0.23);
  for (std::size_t i = 0; i < a.dim(); ++i) {
    CHECK(a.amplitudes[i] == b.amplitudes[i]);
  }
}

TEST_CASE("evolve composes k identical steps") {
  auto basis = half_filling(6);
  const SectorState psi0 = random_state(basis, 3);

  SectorState expected = psi0;
  for (int i = 0; i < 4; ++i) {
    expected = apply_trotter_step(expected, 0.2);
  }
  const SectorState got = evolve(psi0, 0.2, 4);
  for (std::size_t i = 0; i < got.dim(); ++i) {
    CHECK(got.amplitudes[i] == expected.amplitudes[i]);
  }

  const SectorState same = evolve(psi0, 0.2, 0);
  for (std::size_t i = 0; i < same.dim(); ++i) {
    CHECK(same.amplitudes[i] == psi0.amplitudes[i]);
  }
}

TEST_CASE("single-step probabilities from |1010> at dt = 0.77") {
  auto basis = half_filling(4);
  const SectorState psi0 =
      reference_state(ReferenceKind::Alternating10, 4, 0, basis);
  const SectorState psi1 = apply_trotter_step(psi0, 0.77);

  auto prob = [&](const char* s) {
    return std::norm(psi1.amplitudes[basis->rank(parse_bitstring(s, 4))]);
  };
  CHECK(prob("1010") == doctest::Approx(0.633740911346).epsilon(1e-10));
  CHECK(prob("1001") == doctest::Approx(0.121151067615).epsilon(1e-10));
  CHECK(prob("1100") == doctest::Approx(0.121151067615).epsilon(1e-10));
  CHECK(prob("0110") == doctest::Approx(0.104063355845).epsilon(1e-10));
  CHECK(prob("0101") == doctest::Approx(0.019893597580).epsilon(1e-10));
  // |0011> needs two pair exchanges; one sequential sweep cannot produce it
  // because the (0,1) gate acts before any amplitude reaches |0110>.
  CHECK(prob("0011") == 0.0);
}

TEST_CASE("kinetic evolution never leaves the zero-charge sector") {
  // Norm within the sector stays 1 step after step: nothing leaks out.
  auto basis = half_filling(8);
  SectorState state = reference_state(ReferenceKind::Alternating10, 8, 0,
                                      basis);
  for (int k = 0; k < 10; ++k) {
    apply_trotter_step_inplace(state, 0.3);
    CHECK(state.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("sequential sweep differs from the exact kinetic exponential") {
  // The splitting error is what the adaptive loop feeds on; make sure the
  // step is genuinely a first-order splitting, not the exact exponential.
  auto basis = half_filling(4);
  const SectorState psi0 =
      reference_state(ReferenceKind::Alternating10, 4, 0, basis);
  const SectorState stepped = apply_trotter_step(psi0, 0.77);
  const Eigen::MatrixXcd u = oracles::dense_kinetic_exponential(4, 0.77);
  const Eigen::VectorXcd exact = u * embed(psi0);
  const double diff = (embed(stepped) - exact).cwiseAbs().maxCoeff();
  CHECK(diff > 1e-3);   // visibly split
  CHECK(diff < 0.2);    // but still close at this dt
}
