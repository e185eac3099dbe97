#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "skqd/config.hpp"
#include "skqd/errors.hpp"
#include "skqd/experiments.hpp"
#include "skqd/format.hpp"
#include "skqd/fsio.hpp"
#include "skqd/krylov.hpp"
#include "skqd/observables.hpp"
#include "skqd/output.hpp"
#include "skqd/sampling.hpp"

namespace {

using namespace skqd;

struct CommonOpts {
  std::string config_path;
  std::optional<int> n_sites;
  std::optional<double> x;
  std::optional<double> volume;
  std::optional<double> mass_ratio;
  std::optional<double> l0;
  std::optional<double> penalty;
  std::optional<double> dt;
  std::optional<long long> shots;
  std::optional<std::uint64_t> seed;
  std::optional<double> p_min;
  std::optional<double> c;
  std::optional<int> patience;
  std::optional<int> max_steps;
  std::optional<std::string> reference;
  std::optional<double> bitflip_prob;
  bool shared_basis = false;
  std::optional<std::string> grid_spec;
  std::optional<std::string> out_dir;
  std::optional<std::string> formats;
};

void add_common(CLI::App* cmd, CommonOpts* o) {
  cmd->add_option("--config", o->config_path,
                  "configuration file ([model]/[run]/[output] sections)");
  cmd->add_option("--n-sites", o->n_sites, "number of lattice sites (even)");
  cmd->add_option("--x", o->x, "coupling x = 1/(a g)^2");
  cmd->add_option("--volume", o->volume,
                  "fixed-volume shorthand: x = (n_sites/volume)^2");
  cmd->add_option("--mass-ratio", o->mass_ratio, "fermion mass m/g");
  cmd->add_option("--l0", o->l0, "background field l0 of the run itself");
  cmd->add_option("--penalty", o->penalty, "charge penalty weight lambda");
  cmd->add_option("--dt", o->dt, "Trotter step size");
  cmd->add_option("--shots", o->shots, "measurement shots per step");
  cmd->add_option("--seed", o->seed, "master RNG seed");
  cmd->add_option("--p-min", o->p_min, "post-selection probability threshold");
  cmd->add_option("--c", o->c, "relative-change acceptance threshold");
  cmd->add_option("--patience", o->patience,
                  "consecutive rejections before stopping");
  cmd->add_option("--max-steps", o->max_steps, "hard cap on Trotter steps");
  cmd->add_option("--reference", o->reference,
                  "reference state: alternating10 | mass-ground | custom:<bits>");
  cmd->add_option("--bitflip-prob", o->bitflip_prob,
                  "synthetic per-qubit readout bit-flip probability");
  cmd->add_flag("--shared-basis", o->shared_basis,
                "scan every l0 over the run's full accumulated basis instead "
                "of running the acceptance loop per grid point");
  cmd->add_option("--l0-grid", o->grid_spec, "scan grid start:stop:count");
  cmd->add_option("--out-dir", o->out_dir, "output directory");
  cmd->add_option("--format", o->formats,
                  "comma list of output formats (csv,json,svg)");
}

void apply_formats(RunConfig* cfg, const std::string& formats) {
  cfg->format_csv = cfg->format_json = cfg->format_svg = false;
  std::istringstream in(formats);
  std::string fmt;
  while (std::getline(in, fmt, ',')) {
    if (fmt == "csv") {
      cfg->format_csv = true;
    } else if (fmt == "json") {
      cfg->format_json = true;
    } else if (fmt == "svg") {
      cfg->format_svg = true;
    } else {
      throw ConfigError("unknown format '" + fmt + "' (use csv, json, svg)");
    }
  }
}

RunConfig resolve(const CommonOpts& o) {
  RunConfig cfg;
  if (!o.config_path.empty()) cfg = load_config_file(o.config_path);
  if (o.n_sites) cfg.model.n_sites = *o.n_sites;
  if (o.x) {
    cfg.model.x = *o.x;
    cfg.x_given = true;
    cfg.volume_given = false;
  }
  if (o.volume) {
    cfg.volume = *o.volume;
    cfg.volume_given = true;
    if (!o.x) cfg.x_given = false;
  }
  if (o.mass_ratio) cfg.model.mass_ratio = *o.mass_ratio;
  if (o.l0) cfg.model.l0 = *o.l0;
  if (o.penalty) cfg.model.penalty = *o.penalty;
  if (o.dt) cfg.dt = *o.dt;
  if (o.shots) cfg.shots = *o.shots;
  if (o.seed) cfg.seed = *o.seed;
  if (o.p_min) cfg.p_min = *o.p_min;
  if (o.c) cfg.c = *o.c;
  if (o.patience) cfg.patience = *o.patience;
  if (o.max_steps) cfg.max_steps = *o.max_steps;
  if (o.reference) cfg.reference_spec = *o.reference;
  if (o.bitflip_prob) cfg.bitflip_prob = *o.bitflip_prob;
  if (o.shared_basis) cfg.shared_basis = true;
  if (o.grid_spec) {
    parse_grid_spec(*o.grid_spec, &cfg.l0_start, &cfg.l0_stop, &cfg.l0_count);
  }
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.formats) apply_formats(&cfg, *o.formats);
  cfg.finalize();
  return cfg;
}

void write_out(const RunConfig& cfg, const std::string& name,
               const std::string& content) {
  atomic_write_text(cfg.out_dir + "/" + name, content);
}

SchwingerParams params_for(const RunConfig& cfg, int n_sites) {
  SchwingerParams p = cfg.model;
  p.n_sites = n_sites;
  if (!cfg.x_given) {
    const double ratio = static_cast<double>(n_sites) / cfg.volume;
    p.x = ratio * ratio;
  }
  return p;
}

int cmd_exact(const RunConfig& cfg) {
  ScanConfig sc;
  sc.params = cfg.model;
  sc.method = ScanMethod::Exact;
  const ScanResult scan = scan_l0(sc, cfg.l0_grid());

  write_out(cfg, "config.ini", render_config(cfg));
  if (cfg.format_csv) write_out(cfg, "scan_exact.csv", render_scan_csv(scan));
  if (cfg.format_svg) {
    write_out(cfg, "scan_exact.svg", render_scan_svg(scan));
    write_out(cfg, "particle_exact.svg", render_particle_svg(scan));
  }
  std::cout << "exact scan: N=" << cfg.model.n_sites
            << " points=" << scan.points.size()
            << " dimH=" << sector_dimension(cfg.model.n_sites) << "\n";
  std::cout << "wrote " << cfg.out_dir << "/scan_exact.csv\n";
  return 0;
}

int cmd_skqd(const RunConfig& cfg,
             const std::vector<std::string>& counts_files,
             bool exact_overlay) {
  const SkqdOptions opts = cfg.skqd_options();
  const std::vector<double> grid = cfg.l0_grid();
  std::vector<ShotCounts> per_step;
  per_step.reserve(counts_files.size());
  for (const auto& file : counts_files) {
    per_step.push_back(ingest_counts(file));
  }

  SkqdResult run;
  ScanResult scan;
  if (cfg.shared_basis) {
    run = per_step.empty() ? run_skqd(cfg.model, opts)
                           : run_skqd_replay(cfg.model, opts, per_step);
    scan = scan_over_basis(cfg.model, run.basis, grid, scan_solver_defaults(),
                           ScanMethod::Skqd, run.k_max, opts.seed,
                           exact_overlay);
  } else {
    SkqdMultiResult multi =
        per_step.empty()
            ? run_skqd_multi(cfg.model, opts, grid)
            : run_skqd_multi_replay(cfg.model, opts, per_step, grid);
    scan = scan_per_l0(cfg.model, multi, grid, opts.seed, exact_overlay);
    run = std::move(multi.anchor);
  }

  write_out(cfg, "config.ini", render_config(cfg));
  if (cfg.format_json) {
    write_out(cfg, "run_record.json", render_run_record(cfg, run));
  }
  if (cfg.format_csv) write_out(cfg, "scan_skqd.csv", render_scan_csv(scan));
  if (cfg.format_svg) {
    write_out(cfg, "scan_skqd.svg", render_scan_svg(scan));
    write_out(cfg, "particle_skqd.svg", render_particle_svg(scan));
    write_out(cfg, "dimension_skqd.svg", render_dimension_svg(run));
  }

  std::cout << "skqd run: N=" << cfg.model.n_sites << " k_max=" << run.k_max
            << " dimK=" << run.basis.dim() << " dimH=" << run.dim_sector
            << " ratio="
            << format_double(static_cast<double>(run.basis.dim()) /
                             static_cast<double>(run.dim_sector))
            << "\n";
  std::cout << "E0(l0=" << format_double(cfg.model.l0)
            << ") = " << format_double(run.e0) << "  P = "
            << format_double(
                   expected_particle_number(run.final_basis(), run.eigvec))
            << " (accepted step " << run.accepted_k << ", dim "
            << run.accepted_dim << ")\n";
  std::cout << "basis:";
  if (run.basis.dim() <= 16) {
    for (Bits b : run.basis.bitstrings()) {
      std::cout << " " << to_display_string(b, cfg.model.n_sites);
    }
    std::cout << "\n";
  } else {
    std::cout << " " << run.basis.dim() << " strings\n";
  }
  return 0;
}

int cmd_scan_fit(const RunConfig& cfg, const std::vector<int>& n_list,
                 const std::string& method_name, int refine_rounds) {
  if (n_list.empty()) throw ConfigError("--n-list must name at least one N");
  ScanMethod method;
  if (method_name == "exact") {
    method = ScanMethod::Exact;
  } else if (method_name == "skqd") {
    method = ScanMethod::Skqd;
  } else {
    throw ConfigError("unknown method '" + method_name +
                      "' (use exact or skqd)");
  }

  std::vector<TransitionPoint> points;
  for (int n : n_list) {
    ScanConfig sc;
    sc.params = params_for(cfg, n);
    sc.method = method;
    sc.skqd = cfg.skqd_options();
    sc.shared_basis = cfg.shared_basis;
    const TransitionPoint p =
        locate_transition(sc, cfg.l0_grid(), refine_rounds);
    std::cout << "N=" << p.n_sites << "  l0c=" << format_double(p.l0c)
              << " +/- " << format_double(p.sigma) << "\n";
    points.push_back(p);
  }

  const FitResult fit = fit_l0c_model(points, cfg.model.mass_ratio);
  const std::string report = format_fit_report(fit);

  write_out(cfg, "config.ini", render_config(cfg));
  if (cfg.format_csv) {
    write_out(cfg, "transition_points.csv", render_points_csv(points));
  }
  write_out(cfg, "fit_report.txt", report);
  std::cout << report;
  return 0;
}

int cmd_table1(const RunConfig& cfg, const std::vector<int>& n_list,
               bool endpoints_only, bool dt_given, bool shots_given) {
  if (n_list.empty()) throw ConfigError("--n-list must name at least one N");
  std::vector<Table1Row> rows;
  for (int n : n_list) {
    Table1Config tc;
    tc.params = params_for(cfg, n);
    tc.skqd = cfg.skqd_options();
    tc.endpoints_only = endpoints_only;
    tc.shared_basis = cfg.shared_basis;
    if (!dt_given) tc.skqd.dt = n >= 18 ? 0.3 : 0.2;
    if (!shots_given) tc.skqd.shots = n >= 20 ? 10000 : 1000;
    rows.push_back(table1_row(tc));
    const Table1Row& r = rows.back();
    std::cout << "N=" << r.n_sites << " done: k_max=" << r.k_max
              << " ratio=" << format_double(r.ratio)
              << " mean_rel_dev=" << format_double(r.mean_rel_dev) << "\n";
  }
  const std::string table = format_table1(rows);
  write_out(cfg, "config.ini", render_config(cfg));
  write_out(cfg, "table1.txt", table);
  if (cfg.format_svg) write_out(cfg, "ratio.svg", render_ratio_svg(rows));
  std::cout << table;
  return 0;
}

int cmd_ingest_check(const std::string& path, double p_min) {
  const ShotCounts counts = ingest_counts(path);
  std::cout << "file: " << path << "\n";
  std::cout << "N=" << counts.n_sites << " shots=" << counts.n_shots
            << " unique=" << counts.counts.size()
            << " total_counted=" << counts.total() << "\n";
  const ShotCounts post = postselect(counts, counts.n_sites, p_min);
  std::cout << "survivors after post-selection (p_min="
            << format_double(p_min) << "):\n";
  for (const auto& [b, c] : post.counts) {
    std::cout << "  " << to_display_string(b, counts.n_sites) << "," << c
              << "\n";
  }
  if (post.counts.empty()) std::cout << "  (none)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Sampled-subspace diagonalization of the lattice Schwinger model "
      "with a background electric field"};
  app.require_subcommand(1);

  CommonOpts exact_opts;
  CLI::App* exact = app.add_subcommand(
      "exact", "full zero-charge-sector scan over the l0 grid");
  add_common(exact, &exact_opts);

  CommonOpts skqd_opts;
  std::vector<std::string> counts_files;
  bool exact_overlay = false;
  CLI::App* skqd_cmd = app.add_subcommand(
      "skqd",
      "sampled-subspace run, then an l0 scan (per-point acceptance loops by "
      "default)");
  add_common(skqd_cmd, &skqd_opts);
  skqd_cmd->add_option("--counts-file", counts_files,
                       "replay measured counts (one file per Trotter step) "
                       "instead of simulating shots");
  skqd_cmd->add_flag("--exact-overlay", exact_overlay,
                     "add exact energies and relative deviations to the CSV");

  CommonOpts fit_opts;
  std::vector<int> fit_n_list;
  std::string fit_method = "exact";
  int refine_rounds = 3;
  CLI::App* scan_fit = app.add_subcommand(
      "scan-fit", "per-N transition detection plus the finite-size fit");
  add_common(scan_fit, &fit_opts);
  scan_fit->add_option("--n-list", fit_n_list, "system sizes, e.g. 8,10,12,14")
      ->delimiter(',');
  scan_fit->add_option("--method", fit_method, "exact (default) or skqd");
  scan_fit->add_option("--refine-rounds", refine_rounds,
                       "bisection rounds after grid detection");

  CommonOpts table_opts;
  std::vector<int> table_n_list{14, 16};
  bool endpoints_only = false;
  CLI::App* table1 = app.add_subcommand(
      "table1", "per-N convergence summary against the exact sector");
  add_common(table1, &table_opts);
  table1->add_option("--n-list", table_n_list, "system sizes, default 14,16")
      ->delimiter(',');
  table1->add_flag("--endpoints-only", endpoints_only,
                   "average the deviation over {0,2} instead of the grid");

  std::string ingest_path;
  double ingest_p_min = 0.0;
  CLI::App* ingest = app.add_subcommand(
      "ingest-check", "validate a counts file and show what survives");
  ingest->add_option("--counts-file", ingest_path, "counts file to check")
      ->required();
  ingest->add_option("--p-min", ingest_p_min,
                     "post-selection threshold to preview");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(exact)) return cmd_exact(resolve(exact_opts));
    if (app.got_subcommand(skqd_cmd)) {
      return cmd_skqd(resolve(skqd_opts), counts_files, exact_overlay);
    }
    if (app.got_subcommand(scan_fit)) {
      return cmd_scan_fit(resolve(fit_opts), fit_n_list, fit_method,
                          refine_rounds);
    }
    if (app.got_subcommand(table1)) {
      return cmd_table1(resolve(table_opts), table_n_list, endpoints_only,
                        static_cast<bool>(table_opts.dt),
                        static_cast<bool>(table_opts.shots));
    }
    if (app.got_subcommand(ingest)) {
      return cmd_ingest_check(ingest_path, ingest_p_min);
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 5;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 4;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
