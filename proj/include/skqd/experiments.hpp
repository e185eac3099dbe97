#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "skqd/errors.hpp"
#include "skqd/krylov.hpp"
#include "skqd/observables.hpp"

namespace skqd {

// A scan whose <P> sequence does not admit a transition readout (no crossing,
// multiple crossings, or failed points). A configuration problem from the
// caller's point of view, hence the ConfigError lineage (CLI exit code 2).
class DetectionError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

enum class ScanMethod { Exact, Skqd };

// Uniform grid of `count` points from start to stop inclusive (count >= 2),
// or the single point {start} when count == 1 and start == stop.
std::vector<double> linear_grid(double start, double stop, int count);

// Solver settings tuned for l0 sweeps: dense diagonalization is only worth it
// for small subspaces, because above a few hundred dimensions a warm-started
// Lanczos chain beats repeated O(dim^3) factorizations.
inline SolveOptions scan_solver_defaults() {
  SolveOptions opts;
  opts.dense_threshold = 400;
  return opts;
}

struct ScanConfig {
  SchwingerParams params;  // l0 is taken from the grid, not from here
  ScanMethod method = ScanMethod::Exact;
  SkqdOptions skqd;  // sampling run settings (Skqd method)
  // Sampled scans run the acceptance loop independently at every grid point
  // by default (one shared sample stream; per-point stopping and basis).
  // shared_basis instead solves every point over the full basis accumulated
  // up to the run's own stopping step.
  bool shared_basis = false;
  bool with_exact_overlay = false;  // fill e0_exact/rel_dev on Skqd scans
  SolveOptions solve = scan_solver_defaults();
  std::size_t memory_budget = std::size_t{4} << 30;
};

struct ScanPoint {
  ObservableRecord record;
  int k_used = 0;  // Trotter steps behind this point's estimate (0 = exact)
  double e0_exact = std::numeric_limits<double>::quiet_NaN();
  double rel_dev = std::numeric_limits<double>::quiet_NaN();
  bool has_exact = false;
  bool degenerate = false;  // spectral gap below the solver's degeneracy_gap
  bool failed = false;      // solver failure at this point; scan continued
  std::string error;
};

struct ScanResult {
  SchwingerParams params;
  ScanMethod method = ScanMethod::Exact;
  int k_used = 0;          // Trotter steps sampled in total (0 for exact)
  std::uint64_t seed = 0;  // sampling seed (0 for exact)
  std::vector<ScanPoint> points;

  std::vector<double> grid() const;
  std::vector<double> particle_numbers() const;
};

// Re-solves the ground state of a fixed subspace across l0 values. Only the
// diagonal depends on l0 (affinely in l0 plus a shared quadratic), so the
// hopping structure is projected once and each solve warm-starts from the
// previous point's eigenvector.
class ScanEngine {
public:
  ScanEngine(const SchwingerParams& params, SubspaceBasis basis,
             const SolveOptions& solve = scan_solver_defaults());

  const SubspaceBasis& basis() const { return basis_; }
  std::size_t dim() const { return basis_.dim(); }

  struct PointSolution {
    double e0 = 0.0;
    double particle_number = 0.0;
    double gap = 0.0;
    bool degenerate = false;
  };
  // Throws SolverError when the eigensolve at this l0 fails; the engine
  // stays usable for later points.
  PointSolution solve_at(double l0);

private:
  SchwingerParams params_;
  SubspaceBasis basis_;
  SolveOptions solve_;
  ProjectedHamiltonian hp_;  // diagonal rewritten in place per l0
  std::vector<DiagonalCoeffs> coeffs_;
  Eigen::VectorXd last_vec_;
  bool have_last_ = false;
};

// The subspace a scan method works over: the full zero-charge sector for
// Exact, the accumulated sampled basis (with its adaptive-run metadata) for
// Skqd.
struct PreparedScan {
  SubspaceBasis basis;
  ScanMethod method = ScanMethod::Exact;
  int k_used = 0;
  std::uint64_t seed = 0;
  SkqdResult skqd;  // populated only for the Skqd method
  bool has_skqd = false;
};

PreparedScan prepare_scan_basis(const ScanConfig& config);

// Grid scan. Evolution/sampling happens once (it is l0-independent). In the
// default sampled mode each grid point runs its own acceptance loop over the
// shared sample stream; in shared-basis (and exact) mode each point re-solves
// over one fixed basis. Solver failures are flagged per point and the scan
// continues.
ScanResult scan_l0(const ScanConfig& config, const std::vector<double>& grid);

// The sweep core of the fixed-basis modes, over a caller-built basis (e.g. a
// hardware replay run's accumulated basis).
ScanResult scan_over_basis(const SchwingerParams& params, SubspaceBasis basis,
                           const std::vector<double>& grid,
                           const SolveOptions& solve, ScanMethod method,
                           int k_used, std::uint64_t seed,
                           bool with_exact_overlay = false,
                           std::size_t memory_budget = std::size_t{4} << 30);

// The assembly core of the per-point mode: turns the per-l0 acceptance
// records of a multi run (simulated or replayed) into scan points, one per
// grid value. multi.per_l0 must be parallel to `grid`.
ScanResult scan_per_l0(const SchwingerParams& params,
                       const SkqdMultiResult& multi,
                       const std::vector<double>& grid, std::uint64_t seed,
                       bool with_exact_overlay = false,
                       const SolveOptions& solve = scan_solver_defaults(),
                       std::size_t memory_budget = std::size_t{4} << 30);

struct DetectionResult {
  double l0c = 0.0;
  double sigma = 0.0;
  std::size_t interval_index = 0;  // grid interval [i, i+1] of the crossing
};

// Transition readout: <P> crosses the threshold 1 (midpoint of the 0 -> 2
// jump) exactly once, upward; l0c is the midpoint of the bracketing grid
// interval and sigma half its width. Throws DetectionError otherwise.
DetectionResult detect_l0c(const ScanResult& scan);

// Bisects the detected bracketing interval `rounds` more times using fresh
// <P> evaluations at off-grid l0 values, shrinking sigma by 2^rounds.
DetectionResult refine_l0c(const std::function<double(double)>& particle_at,
                           const ScanResult& scan, int rounds = 3);

struct TransitionPoint {
  int n_sites = 0;
  double l0c = 0.0;
  double sigma = 0.0;
};

// Full per-N pipeline: prepare basis, scan the grid, detect, refine.
TransitionPoint locate_transition(const ScanConfig& config,
                                  const std::vector<double>& grid,
                                  int refine_rounds = 3);

struct FitResult {
  double a = 0.0, b = 0.0, c = 0.0;
  double sigma_a = 0.0, sigma_b = 0.0, sigma_c = 0.0;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  double residual_norm = 0.0;  // weighted residual 2-norm
  std::vector<TransitionPoint> points;
  double mass_ratio = 0.0;
};

// The finite-size model for the transition point:
//   l0c(N) = (1/15) (m/g + MS(N)) / (1 - 1/N) + 1/2,
//   MS(N)  = a/sqrt(N) + b/N + c/N^2.
double l0c_model(int n_sites, double a, double b, double c, double mass_ratio);

// Weighted linear least squares for (a, b, c): dividing out the known
// prefactor turns each point into y = MS(N), linear in the parameters.
// Uncertainties come from the residual-scaled covariance, solved via
// column-pivoted QR. Throws ConfigError on < 4 points, invalid N or sigma,
// or a rank-deficient design (e.g. all N equal).
FitResult fit_l0c_model(const std::vector<TransitionPoint>& points,
                        double mass_ratio);

std::string format_fit_report(const FitResult& fit);

struct Table1Config {
  SchwingerParams params;
  SkqdOptions skqd;
  int grid_points = 21;  // uniform l0 grid on [0, 2] for the deviation mean
  bool endpoints_only = false;  // average over just {0, 2} instead
  bool shared_basis = false;    // scan mode, as in ScanConfig
  SolveOptions solve = scan_solver_defaults();
  std::size_t memory_budget = std::size_t{4} << 30;
};

struct Table1Row {
  int n_sites = 0;
  double dt = 0.0;
  long long shots = 0;
  std::uint64_t seed = 0;
  int k_max = 0;
  std::size_t dim_subspace = 0;
  std::size_t dim_sector = 0;
  double ratio = 0.0;
  double mean_rel_dev = 0.0;
  double max_rel_dev = 0.0;
};

// One sampled run, then mean/max relative deviation against the exact
// sector ground state over the l0 grid, plus the dimension ratio. k_max is
// the last Trotter step sampled (in the default mode, the latest stopping
// step across the grid) and dim_subspace counts every string accumulated up
// to that step.
Table1Row table1_row(const Table1Config& config);

std::string format_table1(const std::vector<Table1Row>& rows);

}  // namespace skqd
