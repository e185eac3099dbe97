#include "skqd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <utility>

#include "skqd/errors.hpp"

namespace skqd {

std::vector<double> linear_grid(double start, double stop, int count) {
  if (count < 1) throw ConfigError("grid needs at least one point");
  if (!std::isfinite(start) || !std::isfinite(stop)) {
    throw ConfigError("grid endpoints must be finite");
  }
  if (count == 1) {
    if (start != stop) {
      throw ConfigError("a single-point grid needs start == stop");
    }
    return {start};
  }
  if (!(start < stop)) {
    throw ConfigError("grid start must be strictly below stop");
  }
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    grid[static_cast<std::size_t>(i)] =
        start + (stop - start) * i / (count - 1);
  }
  grid.back() = stop;
  return grid;
}

namespace {

void validate_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw ConfigError("grid must be nonempty");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (!(grid[i] < grid[i + 1])) {
      throw ConfigError("grid must be strictly increasing");
    }
  }
}

}  // namespace

std::vector<double> ScanResult::grid() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.record.l0);
  return out;
}

std::vector<double> ScanResult::particle_numbers() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.record.particle_number);
  return out;
}

ScanEngine::ScanEngine(const SchwingerParams& params, SubspaceBasis basis,
                       const SolveOptions& solve)
    : params_(params), basis_(std::move(basis)), solve_(solve) {
  params_.validate();
  if (basis_.dim() == 0) {
    throw ConfigError("scan engine needs a nonempty basis");
  }
  if (basis_.n_sites() != params_.n_sites) {
    throw ConfigError("basis has " + std::to_string(basis_.n_sites()) +
                      " sites, parameters expect " +
                      std::to_string(params_.n_sites));
  }
  params_.l0 = 0.0;
  hp_ = project(params_, basis_);
  coeffs_.reserve(basis_.dim());
  for (Bits b : basis_.bitstrings()) {
    coeffs_.push_back(diagonal_coeffs(b, params_));
  }
}

ScanEngine::PointSolution ScanEngine::solve_at(double l0) {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    hp_.diagonal[i] = diagonal_energy_at(coeffs_[i], l0, params_.n_sites);
  }
  GroundStateResult gs =
      ground_state(hp_, solve_, have_last_ ? &last_vec_ : nullptr);
  last_vec_ = gs.vec;
  have_last_ = true;
  PointSolution out;
  out.e0 = gs.e0;
  out.gap = gs.gap;
  out.degenerate = gs.degenerate;
  out.particle_number = expected_particle_number(basis_, gs.vec);
  return out;
}

PreparedScan prepare_scan_basis(const ScanConfig& config) {
  config.params.validate();
  PreparedScan out;
  out.method = config.method;
  if (config.method == ScanMethod::Exact) {
    const std::size_t estimate =
        exact_memory_estimate(config.params.n_sites, config.solve);
    if (estimate > config.memory_budget) {
      throw InfeasibleError(
          "full-sector scan for n_sites=" +
              std::to_string(config.params.n_sites) + " needs about " +
              std::to_string(estimate) + " bytes, over the budget of " +
              std::to_string(config.memory_budget),
          estimate);
    }
    out.basis = full_sector_basis(config.params.n_sites);
    return out;
  }
  out.skqd = run_skqd(config.params, config.skqd);
  out.basis = out.skqd.basis;
  out.k_used = out.skqd.k_max;
  out.seed = config.skqd.seed;
  out.has_skqd = true;
  return out;
}

namespace {

std::vector<ScanPoint> sweep(ScanEngine& engine,
                             const std::vector<double>& grid,
                             std::size_t dim_sector) {
  std::vector<ScanPoint> points;
  points.reserve(grid.size());
  for (double l0 : grid) {
    ScanPoint p;
    p.record.l0 = l0;
    p.record.dim_subspace = engine.dim();
    p.record.dim_sector = dim_sector;
    try {
      auto s = engine.solve_at(l0);
      p.record.e0 = s.e0;
      p.record.particle_number = s.particle_number;
      p.degenerate = s.degenerate;
    } catch (const SolverError& e) {
      p.failed = true;
      p.error = e.what();
      p.record.e0 = std::numeric_limits<double>::quiet_NaN();
      p.record.particle_number = std::numeric_limits<double>::quiet_NaN();
    }
    points.push_back(std::move(p));
  }
  return points;
}

void apply_exact_overlay(ScanResult& result, const SchwingerParams& params,
                         const SolveOptions& solve,
                         std::size_t memory_budget) {
  const std::size_t estimate = exact_memory_estimate(params.n_sites, solve);
  if (estimate > memory_budget) {
    throw InfeasibleError(
        "exact overlay for n_sites=" + std::to_string(params.n_sites) +
            " needs about " + std::to_string(estimate) +
            " bytes, over the budget of " + std::to_string(memory_budget),
        estimate);
  }
  ScanEngine exact(params, full_sector_basis(params.n_sites), solve);
  for (auto& p : result.points) {
    try {
      auto s = exact.solve_at(p.record.l0);
      p.e0_exact = s.e0;
      p.has_exact = true;
      const double denom = std::abs(s.e0);
      p.rel_dev = denom > 0.0 ? std::abs(p.record.e0 - s.e0) / denom
                              : std::numeric_limits<double>::infinity();
    } catch (const SolverError& e) {
      p.failed = true;
      if (!p.error.empty()) p.error += "; ";
      p.error += e.what();
    }
  }
}

}  // namespace

ScanResult scan_over_basis(const SchwingerParams& params, SubspaceBasis basis,
                           const std::vector<double>& grid,
                           const SolveOptions& solve, ScanMethod method,
                           int k_used, std::uint64_t seed,
                           bool with_exact_overlay,
                           std::size_t memory_budget) {
  validate_grid(grid);

  ScanResult result;
  result.params = params;
  result.method = method;
  result.k_used = k_used;
  result.seed = seed;

  ScanEngine engine(params, std::move(basis), solve);
  const std::size_t dim_sector = sector_dimension(params.n_sites);
  result.points = sweep(engine, grid, dim_sector);
  for (auto& p : result.points) p.k_used = k_used;

  if (with_exact_overlay) {
    apply_exact_overlay(result, params, solve, memory_budget);
  }
  return result;
}

ScanResult scan_per_l0(const SchwingerParams& params,
                       const SkqdMultiResult& multi,
                       const std::vector<double>& grid, std::uint64_t seed,
                       bool with_exact_overlay, const SolveOptions& solve,
                       std::size_t memory_budget) {
  validate_grid(grid);
  if (multi.per_l0.size() != grid.size()) {
    throw ConfigError("per-l0 records do not match the grid (" +
                      std::to_string(multi.per_l0.size()) + " vs " +
                      std::to_string(grid.size()) + " points)");
  }

  ScanResult result;
  result.params = params;
  result.method = ScanMethod::Skqd;
  result.k_used = multi.k_stop;
  result.seed = seed;
  result.points.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const PerL0Record& r = multi.per_l0[i];
    ScanPoint p;
    p.record.l0 = grid[i];
    p.record.dim_sector = multi.dim_sector;
    p.k_used = r.k_stop;
    if (r.failed) {
      p.failed = true;
      p.error = r.error;
      p.record.e0 = std::numeric_limits<double>::quiet_NaN();
      p.record.particle_number = std::numeric_limits<double>::quiet_NaN();
    } else {
      p.record.e0 = r.e0;
      p.record.dim_subspace = r.accepted_dim;
      p.record.particle_number = expected_particle_number(
          multi.basis.prefix(r.accepted_dim), r.eigvec);
      p.degenerate = r.degenerate;
    }
    result.points.push_back(std::move(p));
  }

  if (with_exact_overlay) {
    apply_exact_overlay(result, params, solve, memory_budget);
  }
  return result;
}

ScanResult scan_l0(const ScanConfig& config, const std::vector<double>& grid) {
  validate_grid(grid);
  if (config.method == ScanMethod::Skqd && !config.shared_basis) {
    SkqdMultiResult multi = run_skqd_multi(config.params, config.skqd, grid);
    return scan_per_l0(config.params, multi, grid, config.skqd.seed,
                       config.with_exact_overlay, config.solve,
                       config.memory_budget);
  }
  PreparedScan prepared = prepare_scan_basis(config);
  return scan_over_basis(
      config.params, std::move(prepared.basis), grid, config.solve,
      config.method, prepared.k_used, prepared.seed,
      config.method == ScanMethod::Skqd && config.with_exact_overlay,
      config.memory_budget);
}

DetectionResult detect_l0c(const ScanResult& scan) {
  const auto& pts = scan.points;
  if (pts.size() < 2) {
    throw DetectionError("transition detection needs at least two points");
  }
  for (const auto& p : pts) {
    if (p.failed) {
      throw DetectionError("scan contains failed points at l0=" +
                           std::to_string(p.record.l0));
    }
  }
  constexpr double threshold = 1.0;
  std::size_t upward = 0;
  std::size_t downward = 0;
  std::size_t idx = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const bool below_i = pts[i].record.particle_number < threshold;
    const bool below_next = pts[i + 1].record.particle_number < threshold;
    if (below_i && !below_next) {
      ++upward;
      idx = i;
    } else if (!below_i && below_next) {
      ++downward;
    }
  }
  if (upward == 0 && downward == 0) {
    throw DetectionError("particle number never crosses 1 on the grid");
  }
  if (upward + downward > 1) {
    throw DetectionError("particle number crosses 1 more than once");
  }
  if (downward > 0) {
    throw DetectionError("particle number only crosses 1 downward");
  }
  const double a = pts[idx].record.l0;
  const double b = pts[idx + 1].record.l0;
  return DetectionResult{0.5 * (a + b), 0.5 * (b - a), idx};
}

DetectionResult refine_l0c(const std::function<double(double)>& particle_at,
                           const ScanResult& scan, int rounds) {
  if (rounds < 0) throw ConfigError("refinement rounds must be >= 0");
  DetectionResult d = detect_l0c(scan);
  double lo = scan.points[d.interval_index].record.l0;
  double hi = scan.points[d.interval_index + 1].record.l0;
  for (int r = 0; r < rounds; ++r) {
    const double mid = 0.5 * (lo + hi);
    if (particle_at(mid) < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return DetectionResult{0.5 * (lo + hi), 0.5 * (hi - lo), d.interval_index};
}

TransitionPoint locate_transition(const ScanConfig& config,
                                  const std::vector<double>& grid,
                                  int refine_rounds) {
  validate_grid(grid);

  if (config.method == ScanMethod::Skqd && !config.shared_basis) {
    SkqdMultiResult multi = run_skqd_multi(config.params, config.skqd, grid);
    ScanResult scan = scan_per_l0(config.params, multi, grid,
                                  config.skqd.seed);
    // Off-grid refinement points rerun the acceptance loop over the recorded
    // per-step basis growth, so they stop exactly as an on-grid point would.
    auto particle_at = [&config, &multi](double l0) {
      PerL0Record r = replay_acceptance(config.params, multi.basis,
                                        multi.step_dims, l0, config.skqd);
      if (r.failed) {
        throw DetectionError("refinement solve failed at l0=" +
                             std::to_string(l0) + ": " + r.error);
      }
      return expected_particle_number(multi.basis.prefix(r.accepted_dim),
                                      r.eigvec);
    };
    DetectionResult refined = refine_l0c(particle_at, scan, refine_rounds);
    return TransitionPoint{config.params.n_sites, refined.l0c, refined.sigma};
  }

  PreparedScan prepared = prepare_scan_basis(config);

  ScanResult scan;
  scan.params = config.params;
  scan.method = config.method;
  scan.k_used = prepared.k_used;
  scan.seed = prepared.seed;

  ScanEngine engine(config.params, std::move(prepared.basis), config.solve);
  scan.points = sweep(engine, grid, sector_dimension(config.params.n_sites));
  for (auto& p : scan.points) p.k_used = prepared.k_used;

  auto particle_at = [&engine](double l0) {
    return engine.solve_at(l0).particle_number;
  };
  DetectionResult refined = refine_l0c(particle_at, scan, refine_rounds);
  return TransitionPoint{config.params.n_sites, refined.l0c, refined.sigma};
}

double l0c_model(int n_sites, double a, double b, double c,
                 double mass_ratio) {
  const double n = static_cast<double>(n_sites);
  const double ms = a / std::sqrt(n) + b / n + c / (n * n);
  return (mass_ratio + ms) / (15.0 * (1.0 - 1.0 / n)) + 0.5;
}

FitResult fit_l0c_model(const std::vector<TransitionPoint>& points,
                        double mass_ratio) {
  const std::size_t n = points.size();
  if (n < 4) {
    throw ConfigError(
        "fit needs at least 4 points (3 parameters + 1 degree of freedom), "
        "got " +
        std::to_string(n));
  }
  for (const auto& p : points) {
    if (p.n_sites <= 1 || p.n_sites % 2 != 0) {
      throw ConfigError("fit points need even n_sites > 1");
    }
    if (!(p.sigma > 0.0) || !std::isfinite(p.l0c)) {
      throw ConfigError("fit points need finite l0c and sigma > 0");
    }
  }

  // Divide out the known prefactor: y = 15 (l0c - 1/2)(1 - 1/N) - m/g equals
  // MS(N) = a/sqrt(N) + b/N + c/N^2, linear in (a, b, c). The same scaling
  // maps sigma onto y.
  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), 3);
  Eigen::VectorXd target(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double nn = static_cast<double>(points[i].n_sites);
    const double scale = 15.0 * (1.0 - 1.0 / nn);
    const double y = scale * (points[i].l0c - 0.5) - mass_ratio;
    const double sigma_y = scale * points[i].sigma;
    const double w = 1.0 / sigma_y;
    const auto row = static_cast<Eigen::Index>(i);
    design(row, 0) = w / std::sqrt(nn);
    design(row, 1) = w / nn;
    design(row, 2) = w / (nn * nn);
    target(row) = w * y;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) {
    throw ConfigError(
        "design matrix is rank-deficient (the N values do not distinguish "
        "the three model terms)");
  }
  const Eigen::Vector3d beta = qr.solve(target);
  const Eigen::VectorXd residual = design * beta - target;
  const double residual_norm = residual.norm();
  const double dof = static_cast<double>(n - 3);
  const double s2 = residual.squaredNorm() / dof;

  // With A P = Q R, (A^T A)^-1 = P (R^T R)^-1 P^T.
  Eigen::Matrix3d r_upper =
      qr.matrixR().topLeftCorner(3, 3).triangularView<Eigen::Upper>();
  const Eigen::Matrix3d r_inv = r_upper.inverse();
  const Eigen::Matrix3d unscaled =
      qr.colsPermutation() * (r_inv * r_inv.transpose()) *
      qr.colsPermutation().transpose();

  FitResult fit;
  fit.a = beta(0);
  fit.b = beta(1);
  fit.c = beta(2);
  fit.covariance = unscaled * s2;
  fit.sigma_a = std::sqrt(std::max(0.0, fit.covariance(0, 0)));
  fit.sigma_b = std::sqrt(std::max(0.0, fit.covariance(1, 1)));
  fit.sigma_c = std::sqrt(std::max(0.0, fit.covariance(2, 2)));
  fit.residual_norm = residual_norm;
  fit.points = points;
  fit.mass_ratio = mass_ratio;
  return fit;
}

std::string format_fit_report(const FitResult& fit) {
  std::ostringstream out;
  out << "model: l0c(N) = (1/15) (m/g + MS(N)) / (1 - 1/N) + 1/2\n";
  out << "       MS(N)  = a/sqrt(N) + b/N + c/N^2\n";
  out << std::setprecision(10);
  out << "mass_ratio: " << fit.mass_ratio << "\n";
  out << "points: " << fit.points.size() << "\n";
  for (const auto& p : fit.points) {
    out << "  N=" << p.n_sites << "  l0c=" << p.l0c << "  sigma=" << p.sigma
        << "\n";
  }
  out << "a = " << fit.a << " +/- " << fit.sigma_a << "\n";
  out << "b = " << fit.b << " +/- " << fit.sigma_b << "\n";
  out << "c = " << fit.c << " +/- " << fit.sigma_c << "\n";
  out << "weighted_residual_norm = " << fit.residual_norm << "\n";
  out << "covariance:\n";
  for (int i = 0; i < 3; ++i) {
    out << " ";
    for (int j = 0; j < 3; ++j) out << " " << fit.covariance(i, j);
    out << "\n";
  }
  return out.str();
}

Table1Row table1_row(const Table1Config& config) {
  config.params.validate();
  if (!config.endpoints_only && config.grid_points < 2) {
    throw ConfigError("deviation grid needs at least 2 points");
  }
  const std::size_t estimate =
      exact_memory_estimate(config.params.n_sites, config.solve);
  if (estimate > config.memory_budget) {
    throw InfeasibleError(
        "the exact reference for n_sites=" +
            std::to_string(config.params.n_sites) + " needs about " +
            std::to_string(estimate) + " bytes, over the budget of " +
            std::to_string(config.memory_budget),
        estimate);
  }

  const std::vector<double> grid =
      config.endpoints_only ? std::vector<double>{0.0, 2.0}
                            : linear_grid(0.0, 2.0, config.grid_points);

  Table1Row row;
  row.n_sites = config.params.n_sites;
  row.dt = config.skqd.dt;
  row.shots = config.skqd.shots;
  row.seed = config.skqd.seed;

  // Per-point subspace energies, from either scan mode.
  std::vector<double> e_sub(grid.size());
  if (config.shared_basis) {
    SkqdResult run = run_skqd(config.params, config.skqd);
    row.k_max = run.k_max;
    row.dim_subspace = run.basis.dim();
    row.dim_sector = run.dim_sector;
    ScanEngine subspace(config.params, std::move(run.basis), config.solve);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      e_sub[i] = subspace.solve_at(grid[i]).e0;
    }
  } else {
    SkqdMultiResult multi = run_skqd_multi(config.params, config.skqd, grid);
    row.k_max = multi.k_stop;
    row.dim_subspace = multi.basis.dim();
    row.dim_sector = multi.dim_sector;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const PerL0Record& r = multi.per_l0[i];
      if (r.failed) {
        throw SolverError("convergence summary solve failed at l0=" +
                              std::to_string(grid[i]) + ": " + r.error,
                          0.0);
      }
      e_sub[i] = r.e0;
    }
  }
  row.ratio = static_cast<double>(row.dim_subspace) /
              static_cast<double>(row.dim_sector);

  ScanEngine exact(config.params, full_sector_basis(config.params.n_sites),
                   config.solve);
  double sum = 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double e_exact = exact.solve_at(grid[i]).e0;
    const double rel = std::abs(e_sub[i] - e_exact) / std::abs(e_exact);
    sum += rel;
    worst = std::max(worst, rel);
  }
  row.mean_rel_dev = sum / static_cast<double>(grid.size());
  row.max_rel_dev = worst;
  return row;
}

std::string format_table1(const std::vector<Table1Row>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(4) << "N" << std::setw(6) << "dt"
      << std::setw(8) << "shots" << std::setw(7) << "k_max" << std::setw(8)
      << "dimK" << std::setw(9) << "dimH" << std::setw(11) << "dimK/dimH"
      << std::setw(14) << "mean_rel_dev" << "seed\n";
  for (const auto& r : rows) {
    std::ostringstream ratio;
    ratio << std::fixed << std::setprecision(2) << r.ratio;
    std::ostringstream dev;
    dev << std::scientific << std::setprecision(1) << r.mean_rel_dev;
    out << std::left << std::setw(4) << r.n_sites << std::setw(6) << r.dt
        << std::setw(8) << r.shots << std::setw(7) << r.k_max << std::setw(8)
        << r.dim_subspace << std::setw(9) << r.dim_sector << std::setw(11)
        << ratio.str() << std::setw(14) << dev.str() << r.seed << "\n";
  }
  return out.str();
}

}  // namespace skqd
