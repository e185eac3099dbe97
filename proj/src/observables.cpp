#include "skqd/observables.hpp"

#include "skqd/errors.hpp"

namespace skqd {

int total_charge(Bits b, int n_sites) {
  int sum = 0;
  for (int n = 0; n < n_sites; ++n) {
    const int sign = (n % 2 == 0) ? 1 : -1;
    sum += (z_value(b, n) + sign) / 2;
  }
  return sum;
}

int particle_number_of(Bits b, int n_sites) {
  int staggered = 0;
  for (int n = 0; n < n_sites; ++n) {
    const int z = z_value(b, n);
    staggered += (n % 2 == 0) ? z : -z;
  }
  // n_sites + staggered is even, so the division is exact.
  return (n_sites + staggered) / 2;
}

double expected_particle_number(const SubspaceBasis& basis,
                                const Eigen::VectorXd& vec) {
  if (static_cast<std::size_t>(vec.size()) != basis.dim()) {
    throw ConfigError("vector length " + std::to_string(vec.size()) +
                      " does not match basis dimension " +
                      std::to_string(basis.dim()));
  }
  const auto& strings = basis.bitstrings();
  double acc = 0.0;
  for (std::size_t i = 0; i < strings.size(); ++i) {
    const double w = vec[static_cast<Eigen::Index>(i)];
    acc += w * w * particle_number_of(strings[i], basis.n_sites());
  }
  return acc;
}

}  // namespace skqd
