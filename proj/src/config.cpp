#include "skqd/config.hpp"

#include <bit>
#include <climits>
#include <cmath>
#include <sstream>

#include "skqd/errors.hpp"
#include "skqd/experiments.hpp"
#include "skqd/format.hpp"
#include "skqd/fsio.hpp"

namespace skqd {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double_strict(const std::string& s, double* out) {
  if (s.empty()) return false;
  try {
    std::size_t pos = 0;
    *out = std::stod(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_ll_strict(const std::string& s, long long* out) {
  if (s.empty()) return false;
  try {
    std::size_t pos = 0;
    *out = std::stoll(s, &pos, 10);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_int_strict(const std::string& s, int* out) {
  long long v = 0;
  if (!parse_ll_strict(s, &v)) return false;
  if (v < INT_MIN || v > INT_MAX) return false;
  *out = static_cast<int>(v);
  return true;
}

bool parse_u64_strict(const std::string& s, std::uint64_t* out) {
  if (s.empty() || s[0] == '-') return false;
  try {
    std::size_t pos = 0;
    *out = std::stoull(s, &pos, 0);  // base 0: decimal or 0x hex
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

double RunConfig::p_min_value() const {
  if (p_min) return *p_min;
  return model.n_sites == 4 ? 0.05 : 0.0;
}

SkqdOptions RunConfig::skqd_options() const {
  SkqdOptions opts;
  opts.dt = dt;
  opts.shots = shots;
  opts.seed = seed;
  opts.p_min = p_min_value();
  opts.c = c;
  opts.patience = patience;
  opts.max_steps = max_steps;
  opts.noise.bitflip_prob = bitflip_prob;
  opts.reference = reference;
  opts.custom_reference = custom_reference;
  return opts;
}

std::vector<double> RunConfig::l0_grid() const {
  return linear_grid(l0_start, l0_stop, l0_count);
}

void RunConfig::finalize() {
  if (x_given && volume_given) {
    throw ConfigError("give either x or volume in [model], not both");
  }
  if (!x_given) {
    if (!(volume > 0.0) || !std::isfinite(volume)) {
      throw ConfigError("volume must be a positive finite number");
    }
    const double ratio = static_cast<double>(model.n_sites) / volume;
    model.x = ratio * ratio;
  }
  model.validate();

  if (reference_spec == "alternating10") {
    reference = ReferenceKind::Alternating10;
    custom_reference = 0;
  } else if (reference_spec == "mass-ground") {
    reference = ReferenceKind::MassGround;
    custom_reference = 0;
  } else if (reference_spec.rfind("custom:", 0) == 0) {
    reference = ReferenceKind::Custom;
    custom_reference =
        parse_bitstring(reference_spec.substr(7), model.n_sites);
    if (std::popcount(custom_reference) != model.n_sites / 2) {
      throw ConfigError("custom reference state must have Hamming weight N/2");
    }
  } else {
    throw ConfigError("unknown reference kind '" + reference_spec +
                      "' (use alternating10, mass-ground, or custom:<bits>)");
  }

  if (!std::isfinite(dt)) throw ConfigError("dt must be finite");
  if (max_steps < 1) throw ConfigError("max_steps must be at least 1");
  if (shots < 1) throw ConfigError("shots must be at least 1");
  if (patience < 1) throw ConfigError("patience must be at least 1");
  if (!(c >= 0.0)) throw ConfigError("c must be >= 0");
  if (p_min && (!(*p_min >= 0.0) || !(*p_min < 1.0))) {
    throw ConfigError("p_min must lie in [0, 1)");
  }
  if (!(bitflip_prob >= 0.0) || !(bitflip_prob < 1.0)) {
    throw ConfigError("bitflip_prob must lie in [0, 1)");
  }
  linear_grid(l0_start, l0_stop, l0_count);  // validates the grid spec
  if (out_dir.empty()) throw ConfigError("output directory must be nonempty");
}

void parse_grid_spec(const std::string& spec, double* start, double* stop,
                     int* count) {
  const auto first = spec.find(':');
  const auto second = first == std::string::npos
                          ? std::string::npos
                          : spec.find(':', first + 1);
  if (first == std::string::npos || second == std::string::npos ||
      spec.find(':', second + 1) != std::string::npos) {
    throw ConfigError("grid spec must be start:stop:count, got '" + spec +
                      "'");
  }
  if (!parse_double_strict(spec.substr(0, first), start) ||
      !parse_double_strict(spec.substr(first + 1, second - first - 1),
                           stop) ||
      !parse_int_strict(spec.substr(second + 1), count)) {
    throw ConfigError("grid spec must be start:stop:count, got '" + spec +
                      "'");
  }
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;

  auto fail = [&](const std::string& msg) -> void {
    throw ParseError(msg, line_no);
  };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "run" && section != "output") {
        fail("unknown section '" + section + "'");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (section.empty()) fail("key outside any section");

    auto want_double = [&](double* out) {
      if (!parse_double_strict(value, out)) {
        fail("invalid number '" + value + "' for " + key);
      }
    };
    auto want_int = [&](int* out) {
      if (!parse_int_strict(value, out)) {
        fail("invalid integer '" + value + "' for " + key);
      }
    };

    if (section == "model") {
      if (key == "n_sites") {
        want_int(&cfg.model.n_sites);
      } else if (key == "x") {
        want_double(&cfg.model.x);
        cfg.x_given = true;
      } else if (key == "volume") {
        want_double(&cfg.volume);
        cfg.volume_given = true;
      } else if (key == "mass_ratio") {
        want_double(&cfg.model.mass_ratio);
      } else if (key == "l0") {
        want_double(&cfg.model.l0);
      } else if (key == "penalty") {
        want_double(&cfg.model.penalty);
      } else {
        fail("unknown key '" + key + "' in [model]");
      }
    } else if (section == "run") {
      if (key == "dt") {
        want_double(&cfg.dt);
      } else if (key == "max_steps") {
        want_int(&cfg.max_steps);
      } else if (key == "shots") {
        if (!parse_ll_strict(value, &cfg.shots)) {
          fail("invalid integer '" + value + "' for shots");
        }
      } else if (key == "seed") {
        if (!parse_u64_strict(value, &cfg.seed)) {
          fail("invalid seed '" + value + "'");
        }
      } else if (key == "p_min") {
        double v = 0.0;
        want_double(&v);
        cfg.p_min = v;
      } else if (key == "c") {
        want_double(&cfg.c);
      } else if (key == "patience") {
        want_int(&cfg.patience);
      } else if (key == "reference") {
        cfg.reference_spec = value;
      } else if (key == "bitflip_prob") {
        want_double(&cfg.bitflip_prob);
      } else if (key == "shared_basis") {
        if (value == "true") {
          cfg.shared_basis = true;
        } else if (value == "false") {
          cfg.shared_basis = false;
        } else {
          fail("invalid value '" + value + "' for shared_basis (true/false)");
        }
      } else if (key == "l0_grid") {
        try {
          parse_grid_spec(value, &cfg.l0_start, &cfg.l0_stop, &cfg.l0_count);
        } catch (const ConfigError& e) {
          fail(e.what());
        }
      } else {
        fail("unknown key '" + key + "' in [run]");
      }
    } else {  // output
      if (key == "directory") {
        cfg.out_dir = value;
      } else if (key == "formats") {
        cfg.format_csv = cfg.format_json = cfg.format_svg = false;
        std::istringstream fmts(value);
        std::string fmt;
        while (std::getline(fmts, fmt, ',')) {
          fmt = trim(fmt);
          if (fmt == "csv") {
            cfg.format_csv = true;
          } else if (fmt == "json") {
            cfg.format_json = true;
          } else if (fmt == "svg") {
            cfg.format_svg = true;
          } else {
            fail("unknown format '" + fmt + "' (use csv, json, svg)");
          }
        }
      } else {
        fail("unknown key '" + key + "' in [output]");
      }
    }
  }

  cfg.finalize();
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  return parse_config_text(read_text_file(path));
}

std::string render_config(const RunConfig& config) {
  std::ostringstream out;
  out << "# schema=1\n";
  out << "[model]\n";
  out << "n_sites = " << config.model.n_sites << "\n";
  if (config.x_given) {
    out << "x = " << format_double(config.model.x) << "\n";
  } else {
    out << "volume = " << format_double(config.volume) << "\n";
  }
  out << "mass_ratio = " << format_double(config.model.mass_ratio) << "\n";
  out << "l0 = " << format_double(config.model.l0) << "\n";
  out << "penalty = " << format_double(config.model.penalty) << "\n";
  out << "\n[run]\n";
  out << "dt = " << format_double(config.dt) << "\n";
  out << "max_steps = " << config.max_steps << "\n";
  out << "shots = " << config.shots << "\n";
  out << "seed = " << config.seed << "\n";
  out << "p_min = " << format_double(config.p_min_value()) << "\n";
  out << "c = " << format_double(config.c) << "\n";
  out << "patience = " << config.patience << "\n";
  out << "reference = " << config.reference_spec << "\n";
  out << "bitflip_prob = " << format_double(config.bitflip_prob) << "\n";
  out << "shared_basis = " << (config.shared_basis ? "true" : "false")
      << "\n";
  out << "l0_grid = " << format_double(config.l0_start) << ":"
      << format_double(config.l0_stop) << ":" << config.l0_count << "\n";
  out << "\n[output]\n";
  out << "directory = " << config.out_dir << "\n";
  out << "formats = ";
  bool first = true;
  auto emit = [&](bool enabled, const char* name) {
    if (!enabled) return;
    if (!first) out << ",";
    out << name;
    first = false;
  };
  emit(config.format_csv, "csv");
  emit(config.format_json, "json");
  emit(config.format_svg, "svg");
  out << "\n";
  return out.str();
}

}  // namespace skqd
