#include "skqd/hamiltonian.hpp"

#include <cmath>
#include <cstdlib>

#include "skqd/errors.hpp"

namespace skqd {

std::string to_display_string(Bits b, int n_sites) {
  std::string s(static_cast<std::size_t>(n_sites), '0');
  for (int n = 0; n < n_sites; ++n)
    if ((b >> n) & 1u) s[static_cast<std::size_t>(n_sites - 1 - n)] = '1';
  return s;
}

Bits parse_bitstring(const std::string& s, int n_sites) {
  if (static_cast<int>(s.size()) != n_sites)
    throw ConfigError("bitstring '" + s + "' has width " +
                      std::to_string(s.size()) + ", expected " +
                      std::to_string(n_sites));
  Bits b = 0;
  for (int i = 0; i < n_sites; ++i) {
    char c = s[static_cast<std::size_t>(i)];
    if (c != '0' && c != '1')
      throw ConfigError("bitstring '" + s + "' contains non-binary character");
    if (c == '1') b |= Bits{1} << (n_sites - 1 - i);
  }
  return b;
}

SchwingerParams SchwingerParams::with_volume(int n_sites, double volume) {
  if (volume <= 0.0) throw ConfigError("volume must be positive");
  SchwingerParams p;
  p.n_sites = n_sites;
  p.x = (n_sites / volume) * (n_sites / volume);
  p.validate();
  return p;
}

void SchwingerParams::validate() const {
  if (n_sites < 2 || n_sites % 2 != 0)
    throw ConfigError("n_sites must be even and >= 2, got " +
                      std::to_string(n_sites));
  if (n_sites > 62)
    throw ConfigError("n_sites must fit a 64-bit label, got " +
                      std::to_string(n_sites));
  if (!(x > 0.0)) throw ConfigError("x must be positive");
  if (penalty < 0.0) throw ConfigError("penalty must be non-negative");
}

std::vector<PauliTerm> build_pauli_terms(const SchwingerParams& params) {
  params.validate();
  const int N = params.n_sites;
  const double x = params.x;
  const double mass = params.mass_ratio * std::sqrt(x);
  const double l0 = params.l0;
  const double lambda = params.penalty;

  std::vector<PauliTerm> terms;
  auto push = [&terms](double coef, std::vector<std::pair<int, Pauli>> f) {
    if (coef != 0.0) terms.push_back({coef, std::move(f)});
  };

  for (int n = 0; n + 1 < N; ++n) {
    push(x / 2.0, {{n, Pauli::X}, {n + 1, Pauli::X}});
    push(x / 2.0, {{n, Pauli::Y}, {n + 1, Pauli::Y}});
  }
  for (int n = 0; n < N; ++n) push((n % 2 ? -mass : mass), {{n, Pauli::Z}});
  // Electric-field and penalty ZZ couplings share every pair; the penalty's
  // single-Z pieces cancel exactly for even N.
  for (int n = 0; n + 1 < N; ++n)
    for (int k = n + 1; k < N; ++k)
      push(0.5 * (N - k - 1 + lambda), {{n, Pauli::Z}, {k, Pauli::Z}});
  for (int n = 0; n + 1 < N; ++n)
    push(N / 4.0 - 0.5 * ((n + 1) / 2) + l0 * (N - n - 1), {{n, Pauli::Z}});
  push(l0 * l0 * (N - 1) + 0.5 * l0 * N + N * N / 8.0 + lambda * N / 4.0, {});
  return terms;
}

DiagonalCoeffs diagonal_coeffs(Bits b, const SchwingerParams& params) {
  const int N = params.n_sites;
  int mass_sum = 0;   // sum (-1)^n z_n
  long long cum = 0;  // C_n, integer-exact
  long long sum_c = 0, sum_c2 = 0;
  for (int n = 0; n < N; ++n) {
    const int z = z_value(b, n);
    const int sign = (n % 2 ? -1 : 1);
    mass_sum += sign * z;
    cum += (z + sign) / 2;  // staggered charge Q_n
    if (n < N - 1) {
      sum_c += cum;
      sum_c2 += cum * cum;
    }
  }
  DiagonalCoeffs c;
  c.constant = params.mass_ratio * std::sqrt(params.x) * mass_sum +
               static_cast<double>(sum_c2) +
               params.penalty * static_cast<double>(cum * cum);
  c.linear = 2.0 * static_cast<double>(sum_c);
  return c;
}

double diagonal_energy(Bits b, const SchwingerParams& params) {
  return diagonal_energy_at(diagonal_coeffs(b, params), params.l0,
                            params.n_sites);
}

std::vector<std::pair<Bits, double>> hopping_neighbors(
    Bits b, const SchwingerParams& params) {
  std::vector<std::pair<Bits, double>> out;
  out.reserve(static_cast<std::size_t>(params.n_sites - 1));
  for (int n = 0; n + 1 < params.n_sites; ++n) {
    const unsigned pair = (b >> n) & 3u;
    if (pair == 1u || pair == 2u) out.emplace_back(b ^ (Bits{3} << n), params.x);
  }
  return out;
}

}  // namespace skqd
