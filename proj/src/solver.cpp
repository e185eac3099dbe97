#include "skqd/solver.hpp"

#include <algorithm>
#include <cmath>

#include "skqd/errors.hpp"
#include "skqd/rng.hpp"

namespace skqd {

void fix_sign(Eigen::VectorXd& v) {
  for (long i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

GroundStateResult dense_ground_state(const Eigen::MatrixXd& h,
                                     const SolveOptions& opts) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success)
    throw SolverError("dense symmetric eigendecomposition failed",
                      std::numeric_limits<double>::quiet_NaN());
  GroundStateResult r;
  r.e0 = es.eigenvalues()(0);
  r.vec = es.eigenvectors().col(0);
  fix_sign(r.vec);
  if (h.rows() > 1) {
    r.gap = es.eigenvalues()(1) - es.eigenvalues()(0);
    r.degenerate = r.gap < opts.degeneracy_gap;
  }
  r.residual = (h * r.vec - r.e0 * r.vec).norm();
  return r;
}

namespace {

Eigen::VectorXd deterministic_start(std::size_t dim, std::uint64_t seed) {
  Eigen::VectorXd v(static_cast<long>(dim));
  std::uint64_t s = seed;
  for (long i = 0; i < v.size(); ++i)
    v(i) = static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53 - 0.5;
  const double n = v.norm();
  return n > 0 ? Eigen::VectorXd(v / n) : Eigen::VectorXd::Unit(static_cast<long>(dim), 0);
}

}  // namespace

GroundStateResult lanczos_ground_state(
    std::size_t dim,
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
    const SolveOptions& opts, const Eigen::VectorXd* warm_start) {
  const long n = static_cast<long>(dim);
  if (n < 1) throw SolverError("empty operator", 0.0);

  // Tiny problems: materialize densely by applying to unit vectors.
  if (n <= 8) {
    Eigen::MatrixXd h(n, n);
    Eigen::VectorXd col(n);
    for (long j = 0; j < n; ++j) {
      apply(Eigen::VectorXd::Unit(n, j), col);
      h.col(j) = col;
    }
    auto r = dense_ground_state(h, opts);
    r.matvecs = static_cast<int>(n);
    return r;
  }

  Eigen::VectorXd v0 = deterministic_start(dim, opts.start_seed);
  if (warm_start && warm_start->size() == n && warm_start->norm() > 0) {
    v0 = *warm_start + 1e-6 * v0;
    v0.normalize();
  }

  const int m = std::min<long>(opts.restart_dim, n);
  Eigen::MatrixXd basis(n, m);
  Eigen::VectorXd alpha(m), beta(m);
  Eigen::VectorXd w(n), ritz(n);

  GroundStateResult best;
  best.residual = std::numeric_limits<double>::infinity();
  int matvecs = 0;

  while (matvecs < opts.max_matvecs) {
    basis.col(0) = v0;
    double prev_beta = 0.0;
    int j = 0;
    bool invariant = false;
    for (; j < m && matvecs < opts.max_matvecs; ++j) {
      apply(basis.col(j), w);
      ++matvecs;
      if (j > 0) w -= prev_beta * basis.col(j - 1);
      alpha(j) = basis.col(j).dot(w);
      w -= alpha(j) * basis.col(j);
      // full reorthogonalization, two classical Gram-Schmidt sweeps
      for (int sweep = 0; sweep < 2; ++sweep) {
        const Eigen::VectorXd proj =
            basis.leftCols(j + 1).transpose() * w;
        w -= basis.leftCols(j + 1) * proj;
      }
      prev_beta = w.norm();

      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tsolve;
      tsolve.computeFromTridiagonal(alpha.head(j + 1), beta.head(j),
                                    Eigen::ComputeEigenvectors);
      const double theta = tsolve.eigenvalues()(0);
      const Eigen::VectorXd s = tsolve.eigenvectors().col(0);
      const double target = opts.residual_tol * std::max(1.0, std::abs(theta));
      const double estimate = prev_beta * std::abs(s(j));

      invariant = prev_beta < 1e-13 * std::max(1.0, std::abs(theta));
      if (estimate <= target || invariant || j + 1 == m) {
        ritz = basis.leftCols(j + 1) * s;
        ritz.normalize();
        apply(ritz, w);
        ++matvecs;
        const double e0 = ritz.dot(w);
        const double resid = (w - e0 * ritz).norm();
        if (resid < best.residual) {
          best.e0 = e0;
          best.vec = ritz;
          best.residual = resid;
          best.gap = j >= 1 ? tsolve.eigenvalues()(1) - theta
                            : std::numeric_limits<double>::infinity();
        }
        if (resid <= opts.residual_tol * std::max(1.0, std::abs(e0))) {
          best.matvecs = matvecs;
          best.degenerate = best.gap < opts.degeneracy_gap;
          fix_sign(best.vec);
          return best;
        }
        if (invariant || j + 1 == m) break;  // restart from the Ritz vector
      }
      if (j + 1 < m) {
        beta(j) = prev_beta;
        basis.col(j + 1) = w / prev_beta;
      }
    }
    if (invariant &&
        best.residual > opts.residual_tol * std::max(1.0, std::abs(best.e0))) {
      // The Krylov space closed on an invariant subspace that does not reach
      // the requested accuracy; re-seed with a fresh deterministic direction.
      v0 = best.vec + deterministic_start(dim, opts.start_seed + matvecs);
      v0.normalize();
    } else {
      v0 = best.vec;
    }
  }
  throw SolverError("Lanczos did not reach the requested residual within " +
                        std::to_string(opts.max_matvecs) + " matrix applications",
                    best.residual);
}

}  // namespace skqd
