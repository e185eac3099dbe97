#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace skqd {

// An N-site basis label packed into a 64-bit word.
//
// Conventions (used uniformly across the library):
//   * bit index n <-> lattice site n;
//   * bit value 1 <-> qubit |1> <-> Z eigenvalue -1, bit 0 <-> |0> <-> Z = +1;
//   * the display string is q_{N-1}...q_0, i.e. the plain binary rendering of
//     the integer, so site 0 is the rightmost character.
using Bits = std::uint64_t;

// Z eigenvalue (+1 or -1) of site n.
inline int z_value(Bits b, int n) { return ((b >> n) & 1u) ? -1 : +1; }

std::string to_display_string(Bits b, int n_sites);

// Parses a display-order string of '0'/'1' characters. Throws ConfigError on
// any other character or on an empty string.
Bits parse_bitstring(const std::string& s, int n_sites);

// Model constants of the penalized lattice Schwinger Hamiltonian
//
//   W = (x/2) sum_n (X_n X_{n+1} + Y_n Y_{n+1})
//     + (m/g) sqrt(x) sum_n (-1)^n Z_n
//     + sum_{n<=N-2} (l0 + C_n)^2  +  penalty * C_{N-1}^2,
//
// where Q_k = (Z_k + (-1)^k)/2 is the staggered charge and C_n = sum_{k<=n} Q_k
// its cumulative sum.
struct SchwingerParams {
  int n_sites = 4;        // N, even and >= 2
  double x = 1.0;         // inverse lattice spacing squared, 1/(a g)^2
  double mass_ratio = 10.0;  // m_lat / g
  double l0 = 0.0;        // background field theta / 2 pi
  double penalty = 100.0; // lambda, weight of the total-charge penalty

  // Fixed-volume construction: x = (N / volume)^2.
  static SchwingerParams with_volume(int n_sites, double volume = 30.0);

  SchwingerParams with_l0(double new_l0) const {
    SchwingerParams p = *this;
    p.l0 = new_l0;
    return p;
  }

  // Throws ConfigError when invariants are violated (odd or small N, x <= 0,
  // penalty < 0).
  void validate() const;
};

// One real-coefficient Pauli product; factors are (site, axis) with strictly
// increasing sites. An empty factor list denotes the identity term.
enum class Pauli : char { X = 'X', Y = 'Y', Z = 'Z' };

struct PauliTerm {
  double coefficient = 0.0;
  std::vector<std::pair<int, Pauli>> factors;
};

// Complete Pauli expansion of W plus the charge penalty:
// hopping (x/2)(XX+YY), mass Z terms, merged electric+penalty ZZ weights
// (N-k-1+lambda)/2, electric single-Z weights, and the constant
// l0^2(N-1) + l0 N/2 + N^2/8 + lambda N/4. Zero-coefficient terms are
// omitted. Kept as the slow reference build; fast matrix-element access
// goes through diagonal_energy / hopping_neighbors.
std::vector<PauliTerm> build_pauli_terms(const SchwingerParams& params);

// l0-affine decomposition of the diagonal matrix element:
//   <b|W|b> = constant + linear * l0 + (N-1) * l0^2.
// Both coefficients come from exact integer charge sums, so re-evaluating at
// a new l0 is O(1) and bit-identical to diagonal_energy.
struct DiagonalCoeffs {
  double constant = 0.0;  // mass + sum C_n^2 + lambda C_{N-1}^2
  double linear = 0.0;    // 2 * sum_{n<=N-2} C_n
};

DiagonalCoeffs diagonal_coeffs(Bits b, const SchwingerParams& params);

// O(N) diagonal element via the cumulative-charge form (no Pauli expansion).
double diagonal_energy(Bits b, const SchwingerParams& params);

inline double diagonal_energy_at(const DiagonalCoeffs& c, double l0,
                                 int n_sites) {
  return c.constant + c.linear * l0 + (n_sites - 1) * l0 * l0;
}

// All b' != b with <b'|W|b> != 0: adjacent-pair exchanges 01 <-> 10, each
// with matrix element +x. Hamming weight is preserved; at most N-1 entries,
// emitted in ascending pair position.
std::vector<std::pair<Bits, double>> hopping_neighbors(
    Bits b, const SchwingerParams& params);

}  // namespace skqd
