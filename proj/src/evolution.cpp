#include "skqd/evolution.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "skqd/errors.hpp"

namespace skqd {

SectorBasis::SectorBasis(int n_sites, int weight, std::size_t max_bytes)
    : n_sites_(n_sites), weight_(weight) {
  if (n_sites < 1 || n_sites > 62)
    throw ConfigError("sector basis needs 1 <= n_sites <= 62");
  if (weight < 0 || weight > n_sites)
    throw ConfigError("sector weight outside [0, n_sites]");

  binom_.assign(static_cast<std::size_t>(n_sites) + 1,
                std::vector<std::size_t>(static_cast<std::size_t>(n_sites) + 1,
                                         0));
  for (int n = 0; n <= n_sites; ++n) {
    binom_[static_cast<std::size_t>(n)][0] = 1;
    for (int k = 1; k <= n; ++k)
      binom_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] =
          binom_[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(k - 1)] +
          binom_[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(k)];
  }

  const std::size_t dim = binomial(n_sites, weight);
  const std::size_t bytes = dim * (sizeof(Bits) + sizeof(std::complex<double>));
  if (bytes > max_bytes)
    throw InfeasibleError(
        "sector basis for N=" + std::to_string(n_sites) + ", weight " +
            std::to_string(weight) + " needs ~" + std::to_string(bytes >> 20) +
            " MiB (limit " + std::to_string(max_bytes >> 20) + " MiB)",
        bytes);

  states_.reserve(dim);
  if (weight == 0) {
    states_.push_back(0);
  } else {
    Bits b = (Bits{1} << weight) - 1;  // smallest weight-w value
    const Bits limit = Bits{1} << n_sites;
    while (b < limit) {
      states_.push_back(b);
      // Gosper's hack: next integer with the same popcount.
      const Bits c = b & (~b + 1);
      const Bits r = b + c;
      b = (((r ^ b) >> 2) / c) | r;
    }
  }
}

std::size_t SectorBasis::rank(Bits b) const {
  std::size_t r = 0;
  int i = 1;
  while (b) {
    const int p = std::countr_zero(b);
    r += binomial(p, i++);
    b &= b - 1;
  }
  return r;
}

double SectorState::norm_sq() const {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return s;
}

SectorState reference_state(ReferenceKind kind, int n_sites, Bits custom_bits,
                            std::shared_ptr<const SectorBasis> basis) {
  Bits b = 0;
  const Bits mask = (Bits{1} << n_sites) - 1;
  switch (kind) {
    case ReferenceKind::Custom:
      b = custom_bits;
      break;
    case ReferenceKind::Alternating10:
      b = 0xaaaaaaaaaaaaaaaaull & mask;
      break;
    case ReferenceKind::MassGround:
      b = 0x5555555555555555ull & mask;
      break;
  }
  if (std::popcount(b) != n_sites / 2)
    throw ConfigError("reference bitstring " + to_display_string(b, n_sites) +
                      " is outside the zero-charge sector");
  if (!basis) basis = std::make_shared<SectorBasis>(n_sites, n_sites / 2);
  SectorState state;
  state.basis = std::move(basis);
  state.amplitudes.assign(state.basis->dim(), {0.0, 0.0});
  state.amplitudes[state.basis->rank(b)] = {1.0, 0.0};
  return state;
}

namespace {

// Applies the two-qubit gate on sites (n, n+1) to every basis pair. Each
// index with bit pattern 01 at (n, n+1) owns its partner's update too, so
// iterations touch disjoint amplitude pairs and the loop parallelizes
// race-free with identical per-element arithmetic in any schedule.
void gate_pass(const SectorBasis& basis, std::vector<std::complex<double>>& amp,
               int n, double cos_half, double sin_half) {
  const auto& states = basis.states();
  const std::int64_t dim = static_cast<std::int64_t>(states.size());
  const std::complex<double> is(0.0, sin_half);
#pragma omp parallel for schedule(static)
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    const Bits b = states[static_cast<std::size_t>(idx)];
    if (((b >> n) & 3u) != 1u) continue;
    const std::size_t partner = basis.rank(b ^ (Bits{3} << n));
    const std::complex<double> a01 = amp[static_cast<std::size_t>(idx)];
    const std::complex<double> a10 = amp[partner];
    amp[static_cast<std::size_t>(idx)] = cos_half * a01 + is * a10;
    amp[partner] = is * a01 + cos_half * a10;
  }
}

// Plain single-threaded reference kernel; per-element arithmetic matches
// gate_pass exactly, so the two must agree bit-for-bit.
void gate_pass_serial(const SectorBasis& basis,
                      std::vector<std::complex<double>>& amp, int n,
                      double cos_half, double sin_half) {
  const auto& states = basis.states();
  const std::complex<double> is(0.0, sin_half);
  for (std::size_t idx = 0; idx < states.size(); ++idx) {
    const Bits b = states[idx];
    if (((b >> n) & 3u) != 1u) continue;
    const std::size_t partner = basis.rank(b ^ (Bits{3} << n));
    const std::complex<double> a01 = amp[idx];
    const std::complex<double> a10 = amp[partner];
    amp[idx] = cos_half * a01 + is * a10;
    amp[partner] = is * a01 + cos_half * a10;
  }
}

}  // namespace

void apply_trotter_step_inplace(SectorState& state, double dt) {
  const double c = std::cos(dt / 2), s = std::sin(dt / 2);
  for (int n = 0; n + 1 < state.basis->n_sites(); ++n)
    gate_pass(*state.basis, state.amplitudes, n, c, s);
}

void apply_trotter_step_inplace_serial(SectorState& state, double dt) {
  const double c = std::cos(dt / 2), s = std::sin(dt / 2);
  for (int n = 0; n + 1 < state.basis->n_sites(); ++n)
    gate_pass_serial(*state.basis, state.amplitudes, n, c, s);
}

SectorState apply_trotter_step(const SectorState& state, double dt) {
  SectorState out = state;
  apply_trotter_step_inplace(out, dt);
  return out;
}

SectorState evolve(const SectorState& psi0, double dt, int k) {
  if (k < 0) throw ConfigError("Trotter step count must be non-negative");
  SectorState out = psi0;
  for (int i = 0; i < k; ++i) apply_trotter_step_inplace(out, dt);
  return out;
}

}  // namespace skqd
