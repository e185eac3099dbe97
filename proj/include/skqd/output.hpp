#pragma once

#include <string>
#include <vector>

#include "skqd/config.hpp"
#include "skqd/experiments.hpp"
#include "skqd/krylov.hpp"

namespace skqd {

inline constexpr const char* kSchemaVersion = "1";

// Scan CSV: `# schema=` comment, fixed header
// l0,E0,E0_exact,rel_dev,P,dimK,dimH,k_used,seed; optional cells (exact
// overlay, failed points) are left empty.
std::string render_scan_csv(const ScanResult& scan);

// Run record (JSON): parameters, seed, per-step trace (k, dim, E0,
// accepted), and the final observables at the run's l0.
std::string render_run_record(const RunConfig& config, const SkqdResult& run);

// Transition points CSV: N,l0c,sigma.
std::string render_points_csv(const std::vector<TransitionPoint>& points);

// Self-contained SVG line plots (no external plotting dependency).
std::string render_scan_svg(const ScanResult& scan);       // E0 vs l0
std::string render_particle_svg(const ScanResult& scan);   // <P> vs l0
std::string render_dimension_svg(const SkqdResult& run);   // dim vs k
std::string render_ratio_svg(const std::vector<Table1Row>& rows);

}  // namespace skqd
