#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "skqd/evolution.hpp"
#include "skqd/hamiltonian.hpp"
#include "skqd/sampling.hpp"
#include "skqd/solver.hpp"

namespace skqd {

// Insertion-ordered set of unique weight-N/2 bitstrings with the first
// Trotter step each entry was sampled at. Grows append-only, so any earlier
// state of the basis is a prefix of the current one.
class SubspaceBasis {
public:
  SubspaceBasis() = default;
  explicit SubspaceBasis(int n_sites) : n_sites_(n_sites) {}

  int n_sites() const { return n_sites_; }
  std::size_t dim() const { return strings_.size(); }
  const std::vector<Bits>& bitstrings() const { return strings_; }
  const std::vector<int>& provenance() const { return provenance_; }

  std::optional<std::size_t> index_of(Bits b) const {
    auto it = index_.find(b);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(Bits b) const { return index_.count(b) != 0; }

  // Inserts b with the given provenance step; returns false when already
  // present. Throws ConfigError for strings outside the zero-charge sector.
  bool add(Bits b, int step);

  // Union with all strings of a post-selected ShotCounts (ascending order);
  // returns the number of new entries.
  std::size_t extend(const ShotCounts& counts, int step);

  // Snapshot of the first `dim` entries.
  SubspaceBasis prefix(std::size_t dim) const;

private:
  int n_sites_ = 0;
  std::vector<Bits> strings_;
  std::vector<int> provenance_;
  std::unordered_map<Bits, std::size_t> index_;
};

// Value-returning union, preserving insertion order.
SubspaceBasis extend_basis(const SubspaceBasis& basis, const ShotCounts& counts,
                           int step);

// H projected onto a SubspaceBasis: real symmetric, diagonal + hopping
// off-diagonals in CSR form (both triangles stored). Off-diagonal entries
// exist only between basis strings that are hopping neighbors, at most N-1
// per row.
struct ProjectedHamiltonian {
  std::size_t n = 0;
  std::vector<double> diagonal;
  std::vector<std::size_t> row_ptr;  // size n+1
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  std::size_t dim() const { return n; }
  void matvec(const Eigen::VectorXd& in, Eigen::VectorXd& out) const;
  // Single-threaded reference with identical per-row arithmetic.
  void matvec_serial(const Eigen::VectorXd& in, Eigen::VectorXd& out) const;
  Eigen::MatrixXd to_dense() const;
};

ProjectedHamiltonian project(const SchwingerParams& params,
                             const SubspaceBasis& basis);

// Lowest eigenpair of the projected Hamiltonian: dense below
// opts.dense_threshold, Lanczos above. The eigenvector follows the
// first-nonzero-positive sign convention.
GroundStateResult ground_state(const ProjectedHamiltonian& hp,
                               const SolveOptions& opts = {},
                               const Eigen::VectorXd* warm_start = nullptr);

struct ExactGroundState {
  double e0 = 0.0;
  Eigen::VectorXd vec;
  SubspaceBasis basis;  // full zero-charge sector, ascending
  bool degenerate = false;
  double gap = 0.0;
};

// Exact diagonalization over the full weight-N/2 sector (the degenerate
// full-basis case of the subspace pipeline). Refuses with an InfeasibleError
// carrying the memory estimate when the sector would exceed memory_budget.
ExactGroundState exact_ground_state(
    const SchwingerParams& params, const SolveOptions& opts = {},
    std::size_t memory_budget = std::size_t{4} << 30);

// Full sector as a SubspaceBasis (ascending order, provenance 0).
SubspaceBasis full_sector_basis(int n_sites);

std::size_t sector_dimension(int n_sites);

// Peak-memory estimate for a full-sector ground-state solve: dense matrix
// plus eigensolver workspace below opts.dense_threshold, otherwise basis +
// sparse projection + Lanczos workspace.
std::size_t exact_memory_estimate(int n_sites, const SolveOptions& opts = {});

// Adaptive-loop controls. Step 1 is always accepted (it defines the
// baseline); step k >= 2 is accepted iff
// |E0(k) - E0(last accepted)| / |E0(last accepted)| > c. The loop stops after
// `patience` consecutive rejections, or at max_steps.
struct SkqdOptions {
  double dt = 0.2;
  long long shots = 1000;
  std::uint64_t seed = 0x5eed;
  double p_min = 0.0;
  double c = 1e-2;
  int patience = 3;
  int max_steps = 64;
  NoiseSpec noise;
  ReferenceKind reference = ReferenceKind::Alternating10;
  Bits custom_reference = 0;
  SolveOptions solve;
};

struct StepRecord {
  int k = 0;
  std::size_t dim = 0;  // cumulative unique strings after this step
  double e0 = 0.0;
  bool accepted = false;
};

struct SkqdResult {
  std::vector<StepRecord> steps;  // every step, accepted or not
  int k_max = 0;                  // stopping step: the last Trotter step run
  int accepted_k = 0;             // last accepted step (retained estimate)
  std::size_t accepted_dim = 0;   // basis size at the last accepted step
  double e0 = 0.0;                // retained energy, from step accepted_k
  Eigen::VectorXd eigvec;         // ground vector over final_basis()
  SubspaceBasis basis;            // every unique string sampled, all steps
  bool degenerate = false;
  bool reached_max_steps = false;
  std::size_t dim_sector = 0;

  // Basis snapshot backing e0/eigvec: the prefix at the last accepted step.
  SubspaceBasis final_basis() const { return basis.prefix(accepted_dim); }
  double subspace_ratio() const {
    return dim_sector == 0 ? 0.0
                           : static_cast<double>(basis.dim()) /
                                 static_cast<double>(dim_sector);
  }
};

// The full sampled-subspace pipeline: per step evolve, sample, post-select,
// extend the cumulative basis, project, diagonalize; adaptive stopping as in
// SkqdOptions. The basis keeps accumulating through rejected steps (it is the
// span of everything sampled); the energy estimate is the snapshot at the
// last accepted step.
SkqdResult run_skqd(const SchwingerParams& params, const SkqdOptions& opts);

// Same loop, but step k draws its counts from per_step[k-1] (hardware
// replay) instead of the simulated sampler; runs at most per_step.size()
// steps. Post-selection is still applied.
SkqdResult run_skqd_replay(const SchwingerParams& params,
                           const SkqdOptions& opts,
                           const std::vector<ShotCounts>& per_step);

// Lowest eigenpair restricted to the first `dim` basis strings of hp.
// Identical to ground_state(project(prefix basis)): per-row columns are
// sorted ascending, so masking entries with col >= dim preserves both the
// matrix and the summation order bit-for-bit.
GroundStateResult ground_state_prefix(const ProjectedHamiltonian& hp,
                                      std::size_t dim,
                                      const SolveOptions& opts = {},
                                      const Eigen::VectorXd* warm_start =
                                          nullptr);

// Outcome of the adaptive acceptance loop at one l0 value over a shared
// sample stream (the kinetic evolution does not depend on l0, so one stream
// serves every l0).
struct PerL0Record {
  double l0 = 0.0;
  double e0 = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd eigvec;        // over the accepted_dim basis prefix
  int accepted_k = 0;            // last accepted step at this l0
  std::size_t accepted_dim = 0;  // basis size at that step
  int k_stop = 0;                // stopping step at this l0
  bool stopped_by_patience = false;
  bool degenerate = false;
  bool failed = false;  // solver failed (or no sample ever survived)
  std::string error;
};

// One sampling pass, many independent stopping decisions. Each l0 in
// l0_list runs the SkqdOptions acceptance loop on its own; sampling
// continues until every l0 (and params.l0 itself) has stopped, or
// max_steps. `anchor` is exactly what run_skqd(params, opts) returns: its
// records and basis end at the params.l0 stopping step even when other l0
// values keep the sampling alive longer.
struct SkqdMultiResult {
  SkqdResult anchor;
  std::vector<PerL0Record> per_l0;    // parallel to l0_list
  SubspaceBasis basis;                // accumulated over the whole horizon
  std::vector<std::size_t> step_dims;  // cumulative dim after step k = i+1
  int k_stop = 0;                     // global stopping step (the horizon)
  std::size_t dim_sector = 0;
};

SkqdMultiResult run_skqd_multi(const SchwingerParams& params,
                               const SkqdOptions& opts,
                               const std::vector<double>& l0_list);

SkqdMultiResult run_skqd_multi_replay(const SchwingerParams& params,
                                      const SkqdOptions& opts,
                                      const std::vector<ShotCounts>& per_step,
                                      const std::vector<double>& l0_list);

// Re-runs the acceptance loop at a new l0 against a finished run's sampling
// trace (accumulated basis + per-step dimensions): equivalent to having
// included l0 in the run's l0_list, except capped at the recorded horizon.
PerL0Record replay_acceptance(const SchwingerParams& params,
                              const SubspaceBasis& basis,
                              const std::vector<std::size_t>& step_dims,
                              double l0, const SkqdOptions& opts);

}  // namespace skqd
