#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "skqd/hamiltonian.hpp"

namespace skqd {

// Basis of all N-bit strings with fixed Hamming weight w, sorted ascending by
// integer value, with O(w) combinadic rank/unrank between strings and their
// positions. rank(b) = sum_i binom(p_i, i+1) over the set bit positions
// p_0 < p_1 < ... of b.
class SectorBasis {
public:
  // Throws InfeasibleError when the materialized basis plus one amplitude
  // vector would exceed max_bytes.
  SectorBasis(int n_sites, int weight,
              std::size_t max_bytes = std::size_t{8} << 30);

  int n_sites() const { return n_sites_; }
  int weight() const { return weight_; }
  std::size_t dim() const { return states_.size(); }
  const std::vector<Bits>& states() const { return states_; }

  std::size_t rank(Bits b) const;
  Bits unrank(std::size_t idx) const { return states_[idx]; }

  std::size_t binomial(int n, int k) const {
    return (k < 0 || k > n) ? 0 : binom_[static_cast<std::size_t>(n)]
                                        [static_cast<std::size_t>(k)];
  }

private:
  int n_sites_;
  int weight_;
  std::vector<std::vector<std::size_t>> binom_;
  std::vector<Bits> states_;
};

// Normalized amplitude vector over a fixed-weight SectorBasis. The basis is
// shared read-only between states (and with samplers).
struct SectorState {
  std::shared_ptr<const SectorBasis> basis;
  std::vector<std::complex<double>> amplitudes;

  std::size_t dim() const { return amplitudes.size(); }
  double norm_sq() const;
};

enum class ReferenceKind {
  Custom,        // caller-provided weight-N/2 bitstring
  Alternating10, // |10...10>: every odd site occupied, particle number N
  MassGround     // |01...01>: the mass-term ground state, particle number 0
};

// Computational-basis state with amplitude 1 on the requested bitstring.
// Throws ConfigError when the bitstring is outside the zero-charge sector.
SectorState reference_state(ReferenceKind kind, int n_sites,
                            Bits custom_bits = 0,
                            std::shared_ptr<const SectorBasis> basis = nullptr);

// One first-order Trotter step of the kinetic term: the two-qubit gate
// exp(i (dt/4)(X_n X_{n+1} + Y_n Y_{n+1})) applied for n = 0, 1, ..., N-2 in
// that order. Each gate is the identity on |00>,|11> and mixes the pair
// amplitudes as [[cos(dt/2), i sin(dt/2)], [i sin(dt/2), cos(dt/2)]] on
// span{|01>,|10>}. Contains no l0, lambda, or x dependence.
void apply_trotter_step_inplace(SectorState& state, double dt);
SectorState apply_trotter_step(const SectorState& state, double dt);

// Serial reference implementation of the same kernel (identical arithmetic,
// no worker threads); kept for bit-exactness testing and benchmarking.
void apply_trotter_step_inplace_serial(SectorState& state, double dt);

// [U(dt)]^k |psi0>; k = 0 returns psi0 unchanged.
SectorState evolve(const SectorState& psi0, double dt, int k);

}  // namespace skqd
