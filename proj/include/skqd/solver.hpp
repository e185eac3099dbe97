#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>

namespace skqd {

struct SolveOptions {
  // Dense symmetric eigendecomposition below this dimension, Lanczos above.
  int dense_threshold = 2048;
  // Convergence contract: ||H v - E0 v|| <= residual_tol * max(1, |E0|).
  double residual_tol = 1e-10;
  // Total matrix applications allowed across restarts before giving up.
  int max_matvecs = 20000;
  // Lanczos vectors kept per cycle (memory cap: restart_dim * dim doubles).
  int restart_dim = 150;
  // Ground state flagged degenerate when the spectral gap is below this.
  double degeneracy_gap = 1e-8;
  // Seed of the deterministic random start vector.
  std::uint64_t start_seed = 0x736b7164u;
};

struct GroundStateResult {
  double e0 = 0.0;
  Eigen::VectorXd vec;
  double gap = std::numeric_limits<double>::infinity();  // E1 - E0 estimate
  bool degenerate = false;
  int matvecs = 0;
  double residual = 0.0;
};

// Sign convention for reproducible serialization: first component with
// magnitude above 1e-12 is made positive.
void fix_sign(Eigen::VectorXd& v);

GroundStateResult dense_ground_state(const Eigen::MatrixXd& h,
                                     const SolveOptions& opts = {});

// Lanczos with full (twice-repeated) reorthogonalization and thick restarts
// from the best Ritz vector. `apply` must implement y = H x for a symmetric H.
// A warm start, when given, is blended with a small deterministic random
// component so a start vector orthogonal to the target eigenvector cannot
// stall convergence. Throws SolverError when max_matvecs is exhausted.
GroundStateResult lanczos_ground_state(
    std::size_t dim,
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
    const SolveOptions& opts = {}, const Eigen::VectorXd* warm_start = nullptr);

}  // namespace skqd
