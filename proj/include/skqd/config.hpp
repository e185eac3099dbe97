#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skqd/evolution.hpp"
#include "skqd/hamiltonian.hpp"
#include "skqd/krylov.hpp"

namespace skqd {

// A full run description, loadable from flat sectioned key=value text:
// `[section]` headers, `key = value` lines, `#` comments. Sections: model,
// run, output. Unknown sections or keys are parse errors.
struct RunConfig {
  // [model] — either x directly or the volume shorthand x = (n_sites/volume)^2
  SchwingerParams model;
  bool x_given = false;
  bool volume_given = false;
  double volume = 30.0;

  // [run]
  double dt = 0.2;
  int max_steps = 64;
  long long shots = 1000;
  std::uint64_t seed = 24301;
  std::optional<double> p_min;  // unset -> n_sites-dependent default
  double c = 1e-2;
  int patience = 3;
  std::string reference_spec = "alternating10";  // | mass-ground | custom:<bits>
  double bitflip_prob = 0.0;
  // Sampled scans: false = per-grid-point acceptance loops over the shared
  // sample stream, true = one fixed accumulated basis for every point.
  bool shared_basis = false;
  double l0_start = 0.0;
  double l0_stop = 2.0;
  int l0_count = 41;

  // [output]
  std::string out_dir = "out";
  bool format_csv = true;
  bool format_json = true;
  bool format_svg = false;

  // Resolved by finalize() from reference_spec.
  ReferenceKind reference = ReferenceKind::Alternating10;
  Bits custom_reference = 0;

  // 0.05 for the 4-site reproduction, 0 otherwise, unless set explicitly.
  double p_min_value() const;
  SkqdOptions skqd_options() const;
  std::vector<double> l0_grid() const;

  // Applies the volume shorthand, resolves the reference spec, and validates
  // every field. Throws ConfigError.
  void finalize();
};

// Parses and finalizes. Structural problems carry the 1-based line number
// (ParseError); semantic problems are ConfigError.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);

// Canonical text form with resolved values; parse(render(c)) reproduces c
// and re-rendering is byte-stable.
std::string render_config(const RunConfig& config);

// "start:stop:count", e.g. "0:2:41". Throws ConfigError when malformed.
void parse_grid_spec(const std::string& spec, double* start, double* stop,
                     int* count);

}  // namespace skqd
