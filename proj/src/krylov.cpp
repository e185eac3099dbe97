#include "skqd/krylov.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "skqd/errors.hpp"
#include "skqd/rng.hpp"

namespace skqd {

bool SubspaceBasis::add(Bits b, int step) {
  if (std::popcount(b) != n_sites_ / 2 || (b >> n_sites_) != 0) {
    throw ConfigError("basis string " + to_display_string(b, n_sites_) +
                      " is outside the zero-charge sector");
  }
  auto [it, inserted] = index_.emplace(b, strings_.size());
  if (!inserted) return false;
  strings_.push_back(b);
  provenance_.push_back(step);
  return true;
}

std::size_t SubspaceBasis::extend(const ShotCounts& counts, int step) {
  if (counts.n_sites != n_sites_) {
    throw ConfigError("counts are for " + std::to_string(counts.n_sites) +
                      " sites, basis expects " + std::to_string(n_sites_));
  }
  std::size_t added = 0;
  for (const auto& [b, c] : counts.counts) {
    (void)c;
    if (add(b, step)) ++added;
  }
  return added;
}

SubspaceBasis SubspaceBasis::prefix(std::size_t dim) const {
  if (dim > strings_.size()) {
    throw ConfigError("prefix length exceeds basis dimension");
  }
  SubspaceBasis out(n_sites_);
  for (std::size_t i = 0; i < dim; ++i) out.add(strings_[i], provenance_[i]);
  return out;
}

SubspaceBasis extend_basis(const SubspaceBasis& basis, const ShotCounts& counts,
                           int step) {
  SubspaceBasis out = basis;
  out.extend(counts, step);
  return out;
}

void ProjectedHamiltonian::matvec(const Eigen::VectorXd& in,
                                  Eigen::VectorXd& out) const {
  out.resize(static_cast<Eigen::Index>(n));
  const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    double sum = diagonal[static_cast<std::size_t>(i)] * in[i];
    for (std::size_t p = row_ptr[static_cast<std::size_t>(i)];
         p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
      sum += val[p] * in[static_cast<Eigen::Index>(col[p])];
    }
    out[i] = sum;
  }
}

void ProjectedHamiltonian::matvec_serial(const Eigen::VectorXd& in,
                                         Eigen::VectorXd& out) const {
  out.resize(static_cast<Eigen::Index>(n));
  const auto rows = static_cast<std::int64_t>(n);
  for (std::int64_t i = 0; i < rows; ++i) {
    double sum = diagonal[static_cast<std::size_t>(i)] * in[i];
    for (std::size_t p = row_ptr[static_cast<std::size_t>(i)];
         p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
      sum += val[p] * in[static_cast<Eigen::Index>(col[p])];
    }
    out[i] = sum;
  }
}

Eigen::MatrixXd ProjectedHamiltonian::to_dense() const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
        diagonal[i];
    for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col[p])) =
          val[p];
    }
  }
  return h;
}

ProjectedHamiltonian project(const SchwingerParams& params,
                             const SubspaceBasis& basis) {
  params.validate();
  if (basis.n_sites() != params.n_sites) {
    throw ConfigError("basis has " + std::to_string(basis.n_sites()) +
                      " sites, parameters expect " +
                      std::to_string(params.n_sites));
  }
  const std::size_t n = basis.dim();
  const auto& strings = basis.bitstrings();

  ProjectedHamiltonian hp;
  hp.n = n;
  hp.diagonal.resize(n);
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n);

  const auto n_rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n_rows; ++i) {
    const Bits b = strings[static_cast<std::size_t>(i)];
    hp.diagonal[static_cast<std::size_t>(i)] = diagonal_energy(b, params);
    auto& row = rows[static_cast<std::size_t>(i)];
    for (const auto& [nb, x] : hopping_neighbors(b, params)) {
      if (auto j = basis.index_of(nb)) {
        row.emplace_back(static_cast<std::uint32_t>(*j), x);
      }
    }
    std::sort(row.begin(), row.end());
  }

  hp.row_ptr.resize(n + 1);
  hp.row_ptr[0] = 0;
  for (std::size_t i = 0; i < n; ++i) {
    hp.row_ptr[i + 1] = hp.row_ptr[i] + rows[i].size();
  }
  hp.col.resize(hp.row_ptr[n]);
  hp.val.resize(hp.row_ptr[n]);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t p = hp.row_ptr[i];
    for (const auto& [j, x] : rows[i]) {
      hp.col[p] = j;
      hp.val[p] = x;
      ++p;
    }
  }
  return hp;
}

GroundStateResult ground_state(const ProjectedHamiltonian& hp,
                               const SolveOptions& opts,
                               const Eigen::VectorXd* warm_start) {
  if (hp.n == 0) {
    throw SolverError("cannot diagonalize an empty subspace", 0.0);
  }
  if (hp.n <= opts.dense_threshold) {
    return dense_ground_state(hp.to_dense(), opts);
  }
  auto apply = [&hp](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    hp.matvec(in, out);
  };
  return lanczos_ground_state(hp.n, apply, opts, warm_start);
}

std::size_t sector_dimension(int n_sites) {
  if (n_sites < 2 || n_sites % 2 != 0 || n_sites > 62) {
    throw ConfigError("sector dimension requires an even site count in [2,62]");
  }
  // C(n, n/2) by multiplicative formula; each intermediate division is exact.
  std::uint64_t result = 1;
  const int k = n_sites / 2;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<std::uint64_t>(n_sites - k + i) /
             static_cast<std::uint64_t>(i);
  }
  return static_cast<std::size_t>(result);
}

SubspaceBasis full_sector_basis(int n_sites) {
  SectorBasis sector(n_sites, n_sites / 2);
  SubspaceBasis out(n_sites);
  for (Bits b : sector.states()) out.add(b, 0);
  return out;
}

std::size_t exact_memory_estimate(int n_sites, const SolveOptions& opts) {
  const std::size_t dim = sector_dimension(n_sites);
  if (dim <= opts.dense_threshold) {
    // Dense matrix plus eigensolver workspace of comparable size.
    return dim * dim * sizeof(double) * 3;
  }
  const std::size_t nnz = dim * static_cast<std::size_t>(n_sites - 1);
  return dim * (sizeof(double) + sizeof(std::size_t))  // diag + row_ptr
         + nnz * (sizeof(double) + sizeof(std::uint32_t))
         + dim * 64  // basis strings + hash index
         + (static_cast<std::size_t>(opts.restart_dim) + 4) * dim *
               sizeof(double);  // solver workspace
}

ExactGroundState exact_ground_state(const SchwingerParams& params,
                                    const SolveOptions& opts,
                                    std::size_t memory_budget) {
  params.validate();
  const std::size_t estimate = exact_memory_estimate(params.n_sites, opts);
  if (estimate > memory_budget) {
    throw InfeasibleError(
        "full-sector diagonalization for n_sites=" +
            std::to_string(params.n_sites) + " needs about " +
            std::to_string(estimate) + " bytes, over the budget of " +
            std::to_string(memory_budget),
        estimate);
  }

  ExactGroundState out;
  out.basis = full_sector_basis(params.n_sites);
  ProjectedHamiltonian hp = project(params, out.basis);
  GroundStateResult gs = ground_state(hp, opts);
  out.e0 = gs.e0;
  out.vec = std::move(gs.vec);
  out.degenerate = gs.degenerate;
  out.gap = gs.gap;
  return out;
}

GroundStateResult ground_state_prefix(const ProjectedHamiltonian& hp,
                                      std::size_t dim,
                                      const SolveOptions& opts,
                                      const Eigen::VectorXd* warm_start) {
  if (dim == 0) {
    throw SolverError("cannot diagonalize an empty subspace", 0.0);
  }
  if (dim > hp.n) {
    throw ConfigError("prefix dimension exceeds the projected matrix");
  }
  if (dim == hp.n) return ground_state(hp, opts, warm_start);
  if (dim <= opts.dense_threshold) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
          hp.diagonal[i];
      for (std::size_t p = hp.row_ptr[i]; p < hp.row_ptr[i + 1]; ++p) {
        if (hp.col[p] >= dim) break;  // columns are sorted per row
        h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(hp.col[p])) =
            hp.val[p];
      }
    }
    return dense_ground_state(h, opts);
  }
  auto apply = [&hp, dim](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    out.resize(static_cast<Eigen::Index>(dim));
    const auto rows = static_cast<std::int64_t>(dim);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < rows; ++i) {
      double sum = hp.diagonal[static_cast<std::size_t>(i)] * in[i];
      for (std::size_t p = hp.row_ptr[static_cast<std::size_t>(i)];
           p < hp.row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
        if (hp.col[p] >= dim) break;  // columns are sorted per row
        sum += hp.val[p] * in[static_cast<Eigen::Index>(hp.col[p])];
      }
      out[i] = sum;
    }
  };
  return lanczos_ground_state(dim, apply, opts, warm_start);
}

namespace {

void validate_loop_options(const SkqdOptions& opts) {
  if (opts.patience < 1) throw ConfigError("patience must be at least 1");
  if (opts.max_steps < 1) throw ConfigError("max_steps must be at least 1");
  if (opts.c < 0.0) throw ConfigError("acceptance threshold must be >= 0");
  if (opts.p_min < 0.0 || opts.p_min >= 1.0) {
    throw ConfigError("p_min must lie in [0, 1)");
  }
}

// Acceptance bookkeeping for one l0 value. The sample stream is shared;
// every tracker decides acceptance and stopping on its own, exactly as a
// standalone run at that l0 would (the evolution never depends on l0).
struct L0Tracker {
  double l0 = 0.0;
  bool is_anchor = false;
  bool active = true;
  bool have_accepted = false;
  double last_accepted = 0.0;
  double last_computed = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd warm;  // eigenvector of the latest solve, any step
  int rejections = 0;
  PerL0Record rec;
};

// Shared adaptive loop. `draw(k)` yields the raw counts for Trotter step k;
// post-selection, basis growth, projection, and the acceptance rule live
// here so the simulated and replay entry points cannot diverge. The first
// tracker is the anchor (params.l0): it mirrors a standalone run bit for
// bit, including the propagation of solver failures.
SkqdMultiResult run_multi_loop(const SchwingerParams& params,
                               const SkqdOptions& opts, int step_limit,
                               const std::function<ShotCounts(int)>& draw,
                               const std::vector<double>& l0_list) {
  params.validate();
  validate_loop_options(opts);
  for (double l0 : l0_list) {
    if (!std::isfinite(l0)) throw ConfigError("l0 values must be finite");
  }

  SkqdMultiResult result;
  result.dim_sector = sector_dimension(params.n_sites);
  result.anchor.dim_sector = result.dim_sector;

  std::vector<L0Tracker> trackers(1 + l0_list.size());
  trackers[0].l0 = params.l0;
  trackers[0].is_anchor = true;
  for (std::size_t i = 0; i < l0_list.size(); ++i) {
    trackers[i + 1].l0 = l0_list[i];
  }
  for (auto& t : trackers) t.rec.l0 = t.l0;

  SubspaceBasis basis(params.n_sites);
  std::vector<DiagonalCoeffs> coeffs;
  SchwingerParams params_base = params;
  params_base.l0 = 0.0;
  ProjectedHamiltonian hp;

  int last_step_run = 0;
  for (int k = 1; k <= step_limit; ++k) {
    bool any_active = false;
    for (const auto& t : trackers) any_active |= t.active;
    if (!any_active) break;
    last_step_run = k;

    ShotCounts post = postselect(draw(k), params.n_sites, opts.p_min);
    const std::size_t added = basis.extend(post, k);
    const std::size_t dim = basis.dim();
    result.step_dims.push_back(dim);

    if (added > 0) {
      hp = project(params_base, basis);
      coeffs.reserve(dim);
      const auto& strings = basis.bitstrings();
      for (std::size_t i = coeffs.size(); i < dim; ++i) {
        coeffs.push_back(diagonal_coeffs(strings[i], params_base));
      }
    }

    for (auto& t : trackers) {
      if (!t.active) continue;

      StepRecord rec;
      rec.k = k;
      rec.dim = dim;

      if (dim == 0) {
        rec.e0 = std::numeric_limits<double>::quiet_NaN();
        rec.accepted = false;
        if (t.is_anchor) result.anchor.steps.push_back(rec);
        if (++t.rejections >= opts.patience) {
          t.active = false;
          t.rec.k_stop = k;
          t.rec.stopped_by_patience = true;
        }
        continue;
      }

      double e0 = 0.0;
      bool degenerate = false;
      if (added == 0) {
        // No new strings: the projected matrix is unchanged, so the energy
        // at this l0 is the one already computed.
        e0 = t.last_computed;
        degenerate = false;
      } else {
        for (std::size_t i = 0; i < dim; ++i) {
          hp.diagonal[i] =
              diagonal_energy_at(coeffs[i], t.l0, params.n_sites);
        }
        Eigen::VectorXd warm =
            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
        const Eigen::VectorXd* warm_ptr = nullptr;
        if (t.warm.size() > 0) {
          warm.head(t.warm.size()) = t.warm;
          warm_ptr = &warm;
        }
        try {
          GroundStateResult gs = ground_state(hp, opts.solve, warm_ptr);
          t.warm = gs.vec;
          e0 = gs.e0;
          degenerate = gs.degenerate;
        } catch (const SolverError& e) {
          if (t.is_anchor) throw;
          t.active = false;
          t.rec.failed = true;
          t.rec.error = e.what();
          t.rec.k_stop = k;
          continue;
        }
      }
      t.last_computed = e0;

      rec.e0 = e0;
      const double rel =
          t.have_accepted
              ? std::abs(e0 - t.last_accepted) /
                    std::max(std::abs(t.last_accepted),
                             std::numeric_limits<double>::min())
              : std::numeric_limits<double>::infinity();
      rec.accepted = !t.have_accepted || rel > opts.c;
      if (t.is_anchor) result.anchor.steps.push_back(rec);

      if (rec.accepted) {
        t.have_accepted = true;
        t.last_accepted = e0;
        t.rejections = 0;
        t.rec.e0 = e0;
        t.rec.accepted_k = k;
        t.rec.accepted_dim = dim;
        t.rec.eigvec = t.warm;
        t.rec.degenerate = degenerate;
      } else if (++t.rejections >= opts.patience) {
        t.active = false;
        t.rec.k_stop = k;
        t.rec.stopped_by_patience = true;
      }
    }
  }

  for (auto& t : trackers) {
    if (t.active) {
      t.rec.k_stop = last_step_run;
      t.rec.stopped_by_patience = false;
      t.active = false;
    }
    if (!t.have_accepted && !t.rec.failed) {
      t.rec.failed = true;
      t.rec.error =
          "no Trotter step produced a post-selected sample; the subspace "
          "stayed empty";
    }
  }

  const L0Tracker& anchor = trackers[0];
  if (!anchor.have_accepted) {
    throw InfeasibleError(anchor.rec.error, 0);
  }

  SkqdResult& a = result.anchor;
  a.k_max = anchor.rec.k_stop;
  a.accepted_k = anchor.rec.accepted_k;
  a.accepted_dim = anchor.rec.accepted_dim;
  a.e0 = anchor.rec.e0;
  a.eigvec = anchor.rec.eigvec;
  a.degenerate = anchor.rec.degenerate;
  a.reached_max_steps = !anchor.rec.stopped_by_patience;
  // The standalone run stops sampling at the anchor's own stopping step;
  // its basis is the corresponding prefix of the shared accumulation.
  a.basis = basis.prefix(
      a.k_max > 0 ? result.step_dims[static_cast<std::size_t>(a.k_max) - 1]
                  : 0);

  result.per_l0.reserve(l0_list.size());
  for (std::size_t i = 1; i < trackers.size(); ++i) {
    result.per_l0.push_back(std::move(trackers[i].rec));
  }
  result.k_stop = last_step_run;
  result.basis = std::move(basis);
  return result;
}

}  // namespace

PerL0Record replay_acceptance(const SchwingerParams& params,
                              const SubspaceBasis& basis,
                              const std::vector<std::size_t>& step_dims,
                              double l0, const SkqdOptions& opts) {
  params.validate();
  validate_loop_options(opts);
  if (!std::isfinite(l0)) throw ConfigError("l0 values must be finite");
  for (std::size_t i = 0; i + 1 < step_dims.size(); ++i) {
    if (step_dims[i] > step_dims[i + 1]) {
      throw ConfigError("per-step dimensions must be non-decreasing");
    }
  }
  if (!step_dims.empty() && step_dims.back() > basis.dim()) {
    throw ConfigError("per-step dimensions exceed the basis");
  }

  PerL0Record rec;
  rec.l0 = l0;

  SchwingerParams params_at = params;
  params_at.l0 = l0;
  ProjectedHamiltonian hp = project(params_at, basis);

  Eigen::VectorXd prev;
  bool have_accepted = false;
  double last_accepted = 0.0;
  double last_computed = std::numeric_limits<double>::quiet_NaN();
  int rejections = 0;
  std::size_t prev_dim = 0;
  int last_step_run = 0;

  const int limit = std::min<int>(opts.max_steps,
                                  static_cast<int>(step_dims.size()));
  for (int k = 1; k <= limit; ++k) {
    last_step_run = k;
    const std::size_t dim = step_dims[static_cast<std::size_t>(k) - 1];

    if (dim == 0) {
      if (++rejections >= opts.patience) {
        rec.k_stop = k;
        rec.stopped_by_patience = true;
        break;
      }
      continue;
    }

    double e0 = 0.0;
    bool degenerate = false;
    if (dim == prev_dim) {
      e0 = last_computed;
    } else {
      Eigen::VectorXd warm =
          Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
      const Eigen::VectorXd* warm_ptr = nullptr;
      if (prev.size() > 0) {
        warm.head(prev.size()) = prev;
        warm_ptr = &warm;
      }
      try {
        GroundStateResult gs = ground_state_prefix(hp, dim, opts.solve,
                                                   warm_ptr);
        prev = gs.vec;
        e0 = gs.e0;
        degenerate = gs.degenerate;
      } catch (const SolverError& e) {
        rec.failed = true;
        rec.error = e.what();
        rec.k_stop = k;
        return rec;
      }
      prev_dim = dim;
    }
    last_computed = e0;

    const double rel =
        have_accepted
            ? std::abs(e0 - last_accepted) /
                  std::max(std::abs(last_accepted),
                           std::numeric_limits<double>::min())
            : std::numeric_limits<double>::infinity();
    if (!have_accepted || rel > opts.c) {
      have_accepted = true;
      last_accepted = e0;
      rejections = 0;
      rec.e0 = e0;
      rec.accepted_k = k;
      rec.accepted_dim = dim;
      rec.eigvec = prev;
      rec.degenerate = degenerate;
    } else if (++rejections >= opts.patience) {
      rec.k_stop = k;
      rec.stopped_by_patience = true;
      break;
    }
  }

  if (!rec.stopped_by_patience && !rec.failed) rec.k_stop = last_step_run;
  if (!have_accepted) {
    rec.failed = true;
    rec.error =
        "no Trotter step produced a post-selected sample; the subspace "
        "stayed empty";
  }
  return rec;
}

SkqdMultiResult run_skqd_multi(const SchwingerParams& params,
                               const SkqdOptions& opts,
                               const std::vector<double>& l0_list) {
  params.validate();
  if (opts.shots < 1) throw ConfigError("shots must be at least 1");
  auto sector =
      std::make_shared<SectorBasis>(params.n_sites, params.n_sites / 2);
  SectorState state = reference_state(opts.reference, params.n_sites,
                                      opts.custom_reference, sector);
  auto draw = [&](int k) {
    state = apply_trotter_step(state, opts.dt);
    return sample(state, opts.shots, derive_seed(opts.seed, k), opts.noise);
  };
  return run_multi_loop(params, opts, opts.max_steps, draw, l0_list);
}

SkqdMultiResult run_skqd_multi_replay(const SchwingerParams& params,
                                      const SkqdOptions& opts,
                                      const std::vector<ShotCounts>& per_step,
                                      const std::vector<double>& l0_list) {
  params.validate();
  if (per_step.empty()) {
    throw ConfigError("replay needs counts for at least one step");
  }
  for (const auto& counts : per_step) {
    if (counts.n_sites != params.n_sites) {
      throw ConfigError("replay counts are for " +
                        std::to_string(counts.n_sites) +
                        " sites, parameters expect " +
                        std::to_string(params.n_sites));
    }
  }
  const int limit = std::min<int>(opts.max_steps,
                                  static_cast<int>(per_step.size()));
  auto draw = [&](int k) { return per_step[static_cast<std::size_t>(k - 1)]; };
  return run_multi_loop(params, opts, limit, draw, l0_list);
}

SkqdResult run_skqd(const SchwingerParams& params, const SkqdOptions& opts) {
  return run_skqd_multi(params, opts, {}).anchor;
}

SkqdResult run_skqd_replay(const SchwingerParams& params,
                           const SkqdOptions& opts,
                           const std::vector<ShotCounts>& per_step) {
  return run_skqd_multi_replay(params, opts, per_step, {}).anchor;
}

}  // namespace skqd
