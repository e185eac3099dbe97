#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "skqd/hamiltonian.hpp"
#include "skqd/krylov.hpp"

namespace skqd {

// Staggered charge sum: sum_n (z_n + (-1)^n)/2, an integer in [-N/2, N/2].
// Zero exactly on the Hamming-weight-N/2 strings.
int total_charge(Bits b, int n_sites);

// Particle number N/2 + (1/2) sum_n (-1)^n z_n: 0 for the |...0101> vacuum
// pattern, N for the fully flipped |10...10> pattern, an even integer on any
// zero-charge string.
int particle_number_of(Bits b, int n_sites);

// <P> of a normalized vector over a subspace basis; P is diagonal in the
// computational basis, so this is sum_i vec_i^2 * P(b_i).
double expected_particle_number(const SubspaceBasis& basis,
                                const Eigen::VectorXd& vec);

// One row of a scan: everything measured at a single l0.
struct ObservableRecord {
  double l0 = 0.0;
  double e0 = 0.0;
  double particle_number = 0.0;
  std::size_t dim_subspace = 0;
  std::size_t dim_sector = 0;
};

}  // namespace skqd
