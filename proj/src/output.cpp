#include "skqd/output.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "skqd/format.hpp"
#include "skqd/observables.hpp"

namespace skqd {

namespace {

std::string cell(double v) { return std::isfinite(v) ? format_double(v) : ""; }

}  // namespace

std::string render_scan_csv(const ScanResult& scan) {
  std::ostringstream out;
  out << "# schema=" << kSchemaVersion << "\n";
  out << "# method=" << (scan.method == ScanMethod::Exact ? "exact" : "skqd")
      << "\n";
  out << "l0,E0,E0_exact,rel_dev,P,dimK,dimH,k_used,seed\n";
  for (const auto& p : scan.points) {
    out << format_double(p.record.l0) << ",";
    out << cell(p.record.e0) << ",";
    out << (p.has_exact ? cell(p.e0_exact) : "") << ",";
    out << (p.has_exact ? cell(p.rel_dev) : "") << ",";
    out << cell(p.record.particle_number) << ",";
    out << p.record.dim_subspace << ",";
    out << p.record.dim_sector << ",";
    out << p.k_used << ",";
    out << scan.seed << "\n";
  }
  return out.str();
}

std::string render_run_record(const RunConfig& config, const SkqdResult& run) {
  nlohmann::ordered_json j;
  j["schema"] = kSchemaVersion;
  j["model"] = {{"n_sites", config.model.n_sites},
                {"x", config.model.x},
                {"mass_ratio", config.model.mass_ratio},
                {"l0", config.model.l0},
                {"penalty", config.model.penalty}};
  j["run"] = {{"dt", config.dt},
              {"max_steps", config.max_steps},
              {"shots", config.shots},
              {"seed", config.seed},
              {"p_min", config.p_min_value()},
              {"c", config.c},
              {"patience", config.patience},
              {"reference", config.reference_spec},
              {"bitflip_prob", config.bitflip_prob},
              {"rng", "mt19937_64 + splitmix64 per-step seed derivation"}};
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const auto& s : run.steps) {
    steps.push_back({{"k", s.k},
                     {"dim", s.dim},
                     {"E0", std::isfinite(s.e0) ? nlohmann::ordered_json(s.e0)
                                                : nlohmann::ordered_json()},
                     {"accepted", s.accepted}});
  }
  j["steps"] = std::move(steps);
  j["k_max"] = run.k_max;
  j["k_accepted"] = run.accepted_k;
  j["reached_max_steps"] = run.reached_max_steps;
  nlohmann::ordered_json final_obs;
  final_obs["l0"] = config.model.l0;
  final_obs["E0"] = run.e0;
  final_obs["particle_number"] =
      expected_particle_number(run.final_basis(), run.eigvec);
  final_obs["degenerate"] = run.degenerate;
  final_obs["dim_subspace"] = run.basis.dim();
  final_obs["dim_retained"] = run.accepted_dim;
  final_obs["dim_sector"] = run.dim_sector;
  final_obs["ratio"] = run.subspace_ratio();
  j["final"] = std::move(final_obs);
  return j.dump(2) + "\n";
}

std::string render_points_csv(const std::vector<TransitionPoint>& points) {
  std::ostringstream out;
  out << "# schema=" << kSchemaVersion << "\n";
  out << "N,l0c,sigma\n";
  for (const auto& p : points) {
    out << p.n_sites << "," << format_double(p.l0c) << ","
        << format_double(p.sigma) << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Minimal SVG plotting

namespace {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string label;
  std::string color;
  bool markers = false;
};

std::string coord(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << v;
  return ss.str();
}

// Short tick label: up to 6 significant digits.
std::string tick_label(double v) {
  if (v == 0.0) return "0";
  std::ostringstream ss;
  ss << std::setprecision(6) << v;
  return ss.str();
}

struct Panel {
  double x0, y0, w, h;  // viewport of the plotting area
  double xmin, xmax, ymin, ymax;

  double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double py(double y) const {
    return y0 + h - (y - ymin) / (ymax - ymin) * h;
  }
};

void finite_range(const std::vector<Series>& series, bool use_x, double* lo,
                  double* hi) {
  *lo = std::numeric_limits<double>::infinity();
  *hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    const auto& v = use_x ? s.x : s.y;
    const auto& other = use_x ? s.y : s.x;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i]) || !std::isfinite(other[i])) continue;
      *lo = std::min(*lo, v[i]);
      *hi = std::max(*hi, v[i]);
    }
  }
  if (!(*lo <= *hi)) {
    *lo = 0.0;
    *hi = 1.0;
  }
  if (*lo == *hi) {
    *lo -= 0.5;
    *hi += 0.5;
  } else {
    const double pad = 0.05 * (*hi - *lo);
    *lo -= pad;
    *hi += pad;
  }
}

void draw_panel(std::ostringstream& out, Panel& p,
                const std::vector<Series>& series, const std::string& xlabel,
                const std::string& ylabel) {
  finite_range(series, true, &p.xmin, &p.xmax);
  finite_range(series, false, &p.ymin, &p.ymax);

  out << "<rect x=\"" << coord(p.x0) << "\" y=\"" << coord(p.y0)
      << "\" width=\"" << coord(p.w) << "\" height=\"" << coord(p.h)
      << "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (int t = 0; t <= 4; ++t) {
    const double fx = p.xmin + (p.xmax - p.xmin) * t / 4.0;
    const double fy = p.ymin + (p.ymax - p.ymin) * t / 4.0;
    out << "<line x1=\"" << coord(p.px(fx)) << "\" y1=\""
        << coord(p.y0 + p.h) << "\" x2=\"" << coord(p.px(fx)) << "\" y2=\""
        << coord(p.y0 + p.h + 4) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << coord(p.px(fx)) << "\" y=\""
        << coord(p.y0 + p.h + 16) << "\" font-size=\"10\" text-anchor=\""
        << "middle\">" << tick_label(fx) << "</text>\n";
    out << "<line x1=\"" << coord(p.x0 - 4) << "\" y1=\"" << coord(p.py(fy))
        << "\" x2=\"" << coord(p.x0) << "\" y2=\"" << coord(p.py(fy))
        << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << coord(p.x0 - 6) << "\" y=\""
        << coord(p.py(fy) + 3) << "\" font-size=\"10\" text-anchor=\"end\">"
        << tick_label(fy) << "</text>\n";
  }

  out << "<text x=\"" << coord(p.x0 + p.w / 2) << "\" y=\""
      << coord(p.y0 + p.h + 30) << "\" font-size=\"11\" text-anchor=\""
      << "middle\">" << xlabel << "</text>\n";
  out << "<text x=\"" << coord(p.x0 - 44) << "\" y=\""
      << coord(p.y0 + p.h / 2) << "\" font-size=\"11\" text-anchor=\"middle\""
      << " transform=\"rotate(-90 " << coord(p.x0 - 44) << " "
      << coord(p.y0 + p.h / 2) << ")\">" << ylabel << "</text>\n";

  double legend_y = p.y0 + 14;
  for (const auto& s : series) {
    std::ostringstream pts;
    bool open = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        open = false;
        continue;
      }
      if (!open && pts.tellp() > 0) {
        // break the polyline across gaps
        out << "<polyline fill=\"none\" stroke=\"" << s.color
            << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
        pts.str("");
      }
      pts << coord(p.px(s.x[i])) << "," << coord(p.py(s.y[i])) << " ";
      open = true;
    }
    if (pts.tellp() > 0) {
      out << "<polyline fill=\"none\" stroke=\"" << s.color
          << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    }
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        out << "<circle cx=\"" << coord(p.px(s.x[i])) << "\" cy=\""
            << coord(p.py(s.y[i])) << "\" r=\"2.5\" fill=\"" << s.color
            << "\"/>\n";
      }
    }
    if (!s.label.empty()) {
      out << "<line x1=\"" << coord(p.x0 + p.w - 110) << "\" y1=\""
          << coord(legend_y - 4) << "\" x2=\"" << coord(p.x0 + p.w - 92)
          << "\" y2=\"" << coord(legend_y - 4) << "\" stroke=\"" << s.color
          << "\" stroke-width=\"1.5\"/>\n";
      out << "<text x=\"" << coord(p.x0 + p.w - 88) << "\" y=\""
          << coord(legend_y) << "\" font-size=\"10\">" << s.label
          << "</text>\n";
      legend_y += 14;
    }
  }
}

std::string svg_document(double width, double height,
                         const std::string& body) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << coord(width)
      << "\" height=\"" << coord(height) << "\" viewBox=\"0 0 "
      << coord(width) << " " << coord(height) << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << body << "</svg>\n";
  return out.str();
}

}  // namespace

std::string render_scan_svg(const ScanResult& scan) {
  std::vector<Series> main_series(1);
  main_series[0].label = scan.method == ScanMethod::Exact ? "exact" : "skqd";
  main_series[0].color = "#1f77b4";
  bool any_exact = false;
  for (const auto& p : scan.points) {
    main_series[0].x.push_back(p.record.l0);
    main_series[0].y.push_back(p.record.e0);
    any_exact = any_exact || p.has_exact;
  }
  if (any_exact) {
    Series exact;
    exact.label = "exact";
    exact.color = "#d62728";
    for (const auto& p : scan.points) {
      exact.x.push_back(p.record.l0);
      exact.y.push_back(p.has_exact
                            ? p.e0_exact
                            : std::numeric_limits<double>::quiet_NaN());
    }
    main_series.push_back(std::move(exact));
  }

  std::ostringstream body;
  if (any_exact) {
    Panel top{60, 20, 540, 240, 0, 0, 0, 0};
    draw_panel(body, top, main_series, "", "E0");
    Series dev;
    dev.color = "#2ca02c";
    for (const auto& p : scan.points) {
      dev.x.push_back(p.record.l0);
      dev.y.push_back(p.has_exact && p.rel_dev > 0.0
                          ? std::log10(p.rel_dev)
                          : std::numeric_limits<double>::quiet_NaN());
    }
    Panel bottom{60, 310, 540, 110, 0, 0, 0, 0};
    draw_panel(body, bottom, {dev}, "l0", "log10 rel dev");
    return svg_document(640, 470, body.str());
  }
  Panel panel{60, 20, 540, 340, 0, 0, 0, 0};
  draw_panel(body, panel, main_series, "l0", "E0");
  return svg_document(640, 420, body.str());
}

std::string render_particle_svg(const ScanResult& scan) {
  Series s;
  s.label = "particle number";
  s.color = "#1f77b4";
  s.markers = true;
  for (const auto& p : scan.points) {
    s.x.push_back(p.record.l0);
    s.y.push_back(p.record.particle_number);
  }
  std::ostringstream body;
  Panel panel{60, 20, 540, 340, 0, 0, 0, 0};
  draw_panel(body, panel, {s}, "l0", "P");
  return svg_document(640, 420, body.str());
}

std::string render_dimension_svg(const SkqdResult& run) {
  Series all;
  all.label = "dim per step";
  all.color = "#1f77b4";
  Series accepted;
  accepted.label = "accepted";
  accepted.color = "#d62728";
  accepted.markers = true;
  for (const auto& s : run.steps) {
    all.x.push_back(s.k);
    all.y.push_back(static_cast<double>(s.dim));
    if (s.accepted) {
      accepted.x.push_back(s.k);
      accepted.y.push_back(static_cast<double>(s.dim));
    }
  }
  std::ostringstream body;
  Panel panel{60, 20, 540, 340, 0, 0, 0, 0};
  draw_panel(body, panel, {all, accepted}, "Trotter step k", "dim");
  return svg_document(640, 420, body.str());
}

std::string render_ratio_svg(const std::vector<Table1Row>& rows) {
  Series s;
  s.label = "dimK/dimH";
  s.color = "#1f77b4";
  s.markers = true;
  for (const auto& r : rows) {
    s.x.push_back(r.n_sites);
    s.y.push_back(r.ratio);
  }
  std::ostringstream body;
  Panel panel{60, 20, 540, 340, 0, 0, 0, 0};
  draw_panel(body, panel, {s}, "N", "dimK/dimH");
  return svg_document(640, 420, body.str());
}

}  // namespace skqd
