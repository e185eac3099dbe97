#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "skqd/errors.hpp"
#include "skqd/experiments.hpp"

using namespace skqd;

namespace {

SchwingerParams params_n(int n) {
  SchwingerParams p = SchwingerParams::with_volume(n);
  p.mass_ratio = 10.0;
  p.penalty = 100.0;
  return p;
}

// The sampled six-site configuration used across the adaptive-scan cases:
// small enough that the run saturates the 20-dimensional sector, large
// enough that grid points stop at different steps.
ScanConfig sampled_n6() {
  ScanConfig sc;
  sc.params = params_n(6);
  sc.method = ScanMethod::Skqd;
  sc.skqd.dt = 0.2;
  sc.skqd.shots = 1000;
  sc.skqd.seed = 1;
  sc.skqd.c = 1e-2;
  sc.skqd.patience = 6;
  sc.skqd.max_steps = 64;
  return sc;
}

ScanResult synthetic_scan(const std::vector<double>& particle) {
  ScanResult scan;
  scan.points.resize(particle.size());
  for (std::size_t i = 0; i < particle.size(); ++i) {
    scan.points[i].record.l0 = 0.5 * static_cast<double>(i);
    scan.points[i].record.particle_number = particle[i];
  }
  return scan;
}

template <typename Fn>
std::string message_of(Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("linear grids are inclusive, uniform, and validated") {
  const std::vector<double> g = linear_grid(0.0, 2.0, 41);
  REQUIRE(g.size() == 41);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 2.0);
  CHECK(g[20] == doctest::Approx(1.0).epsilon(1e-15));
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(g[i] - g[i - 1] == doctest::Approx(0.05).epsilon(1e-12));
  }

  CHECK(linear_grid(0.7, 0.7, 1) == std::vector<double>{0.7});
  CHECK_THROWS_AS(linear_grid(0.0, 1.0, 0), ConfigError);
  CHECK_THROWS_AS(linear_grid(0.0, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(linear_grid(1.0, 0.0, 5), ConfigError);
  CHECK_THROWS_AS(linear_grid(0.0, 0.0, 3), ConfigError);
  CHECK_THROWS_AS(
      linear_grid(0.0, std::numeric_limits<double>::infinity(), 3),
      ConfigError);
}

TEST_CASE("transition detection reads a single upward crossing") {
  const ScanResult scan = synthetic_scan({0.1, 0.2, 0.4, 1.6, 1.9});
  const DetectionResult d = detect_l0c(scan);
  CHECK(d.interval_index == 2);
  CHECK(d.l0c == doctest::Approx(1.25).epsilon(1e-15));  // mid of 1.0, 1.5
  CHECK(d.sigma == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("every unreadable scan shape gets its own diagnosis") {
  CHECK_THROWS_AS(detect_l0c(synthetic_scan({0.4})), DetectionError);
  CHECK(message_of([] { detect_l0c(synthetic_scan({0.4})); }) ==
        "transition detection needs at least two points");

  ScanResult broken = synthetic_scan({0.1, 0.3, 1.8});
  broken.points[1].failed = true;
  CHECK_THROWS_AS(detect_l0c(broken), DetectionError);
  CHECK(message_of([&] { detect_l0c(broken); })
            .rfind("scan contains failed points at l0=", 0) == 0);

  CHECK(message_of([] { detect_l0c(synthetic_scan({0.1, 0.2, 0.3})); }) ==
        "particle number never crosses 1 on the grid");
  CHECK(message_of([] {
          detect_l0c(synthetic_scan({0.1, 1.8, 0.2, 1.9}));
        }) == "particle number crosses 1 more than once");
  CHECK(message_of([] { detect_l0c(synthetic_scan({1.8, 0.2, 0.1})); }) ==
        "particle number only crosses 1 downward");
}

TEST_CASE("bisection refinement halves the uncertainty every round") {
  const double true_l0c = 0.837;
  const auto particle_at = [true_l0c](double l0) {
    return l0 > true_l0c ? 2.0 : 0.0;
  };
  const ScanResult scan = synthetic_scan({0.0, 0.0, 2.0, 2.0, 2.0});

  const DetectionResult coarse = refine_l0c(particle_at, scan, 0);
  CHECK(coarse.l0c == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(coarse.sigma == doctest::Approx(0.25).epsilon(1e-15));

  for (int rounds : {1, 2, 4, 6}) {
    const DetectionResult d = refine_l0c(particle_at, scan, rounds);
    CHECK(d.sigma ==
          doctest::Approx(0.25 / std::pow(2.0, rounds)).epsilon(1e-12));
    CHECK(std::abs(d.l0c - true_l0c) <= d.sigma);
  }
  CHECK_THROWS_AS(refine_l0c(particle_at, scan, -1), ConfigError);
}

TEST_CASE("an exact four-site scan stays deep in the zero-particle phase") {
  ScanConfig sc;
  sc.params = params_n(4);
  const ScanResult scan = scan_l0(sc, linear_grid(0.0, 2.0, 41));
  REQUIRE(scan.points.size() == 41);
  CHECK(scan.method == ScanMethod::Exact);
  CHECK(scan.k_used == 0);
  CHECK(scan.seed == 0);

  const ScanPoint& first = scan.points.front();
  const ScanPoint& last = scan.points.back();
  CHECK(first.record.e0 == doctest::Approx(-5.333483038183392).epsilon(1e-13));
  CHECK(last.record.e0 == doctest::Approx(6.666470058477874).epsilon(1e-13));
  CHECK(first.record.particle_number ==
        doctest::Approx(4.7273477591046354e-05).epsilon(1e-10));
  CHECK(last.record.particle_number ==
        doctest::Approx(0.0001279112028954108).epsilon(1e-10));
  for (const auto& p : scan.points) {
    CHECK_FALSE(p.failed);
    CHECK(p.record.dim_subspace == 6);
    CHECK(p.record.dim_sector == 6);
    CHECK(p.k_used == 0);
    CHECK(p.record.particle_number < 1.0);
  }
  CHECK(scan.grid() == linear_grid(0.0, 2.0, 41));
  CHECK(scan.particle_numbers().size() == 41);
  CHECK_THROWS_AS(detect_l0c(scan), DetectionError);
}

TEST_CASE("scans over the full sector agree with themselves as an overlay") {
  const SchwingerParams p = params_n(4);
  const ScanResult scan =
      scan_over_basis(p, full_sector_basis(4), linear_grid(0.0, 2.0, 9),
                      scan_solver_defaults(), ScanMethod::Skqd, 7, 99, true);
  CHECK(scan.k_used == 7);
  CHECK(scan.seed == 99);
  for (const auto& pt : scan.points) {
    REQUIRE(pt.has_exact);
    CHECK(pt.k_used == 7);
    CHECK(pt.record.e0 == doctest::Approx(pt.e0_exact).epsilon(1e-13));
    CHECK(pt.rel_dev <= 1e-12);
  }
}

TEST_CASE("the scan engine rewrites one projection across l0 values") {
  const SchwingerParams p = params_n(6);
  ScanEngine engine(p, full_sector_basis(6));
  const auto first = engine.solve_at(0.7);
  const ExactGroundState exact = exact_ground_state(p.with_l0(0.7));
  CHECK(first.e0 == exact.e0);

  // a later solve must not disturb a repeated one
  (void)engine.solve_at(1.3);
  const auto again = engine.solve_at(0.7);
  CHECK(again.e0 == first.e0);
  CHECK(again.particle_number == first.particle_number);

  CHECK_THROWS_AS(ScanEngine(p, SubspaceBasis(6)), ConfigError);
  CHECK_THROWS_AS(ScanEngine(p, full_sector_basis(4)), ConfigError);
}

TEST_CASE("exact transition location brackets the known crossings") {
  ScanConfig six;
  six.params = params_n(6);
  const TransitionPoint t6 =
      locate_transition(six, linear_grid(0.0, 2.0, 21), 3);
  CHECK(t6.n_sites == 6);
  CHECK(t6.l0c > 1.8);
  CHECK(t6.l0c < 1.9);
  CHECK(t6.sigma == doctest::Approx(0.05 / 8.0).epsilon(1e-12));

  ScanConfig four;
  four.params = params_n(4);
  const TransitionPoint t4 =
      locate_transition(four, linear_grid(2.5, 4.0, 31), 3);
  CHECK(t4.n_sites == 4);
  CHECK(t4.l0c > 3.15);
  CHECK(t4.l0c < 3.2);
  CHECK(t4.sigma == doctest::Approx(0.025 / 8.0).epsilon(1e-12));
}

TEST_CASE("a sampled scan stops each grid point on its own schedule") {
  ScanConfig sc = sampled_n6();
  sc.with_exact_overlay = true;
  const std::vector<double> grid = linear_grid(0.0, 2.0, 21);
  const ScanResult scan = scan_l0(sc, grid);
  REQUIRE(scan.points.size() == grid.size());
  CHECK(scan.method == ScanMethod::Skqd);
  CHECK(scan.seed == 1);

  const ScanPoint& at0 = scan.points.front();
  CHECK(at0.record.e0 ==
        doctest::Approx(-12.000711075998726).epsilon(1e-13));
  CHECK(at0.record.particle_number ==
        doctest::Approx(0.00015800128496050992).epsilon(1e-10));
  CHECK(at0.record.dim_subspace == 15);
  CHECK(at0.k_used == 10);

  std::set<int> steps_seen;
  std::set<std::size_t> dims_seen;
  double max_rel = 0.0;
  for (const auto& p : scan.points) {
    REQUIRE_FALSE(p.failed);
    REQUIRE(p.has_exact);
    steps_seen.insert(p.k_used);
    dims_seen.insert(p.record.dim_subspace);
    max_rel = std::max(max_rel, p.rel_dev);
    CHECK(p.record.dim_sector == 20);
    CHECK(p.record.e0 >= p.e0_exact - 1e-12);  // variational
  }
  CHECK(steps_seen == std::set<int>{10, 16});
  CHECK(dims_seen == std::set<std::size_t>{15, 20});
  CHECK(max_rel > 1e-6);
  CHECK(max_rel < 5e-4);

  const DetectionResult d = detect_l0c(scan);
  CHECK(d.l0c == doctest::Approx(1.85).epsilon(1e-12));
  CHECK(d.sigma == doctest::Approx(0.05).epsilon(1e-12));

  const TransitionPoint t = locate_transition(sc, grid, 2);
  CHECK(t.n_sites == 6);
  CHECK(t.l0c > 1.8);
  CHECK(t.l0c < 1.9);
  CHECK(t.sigma == doctest::Approx(0.05 / 4.0).epsilon(1e-12));
}

TEST_CASE("the shared-basis mode is variationally at or below per-point") {
  const std::vector<double> grid = linear_grid(0.0, 2.0, 21);
  ScanConfig per_point = sampled_n6();
  per_point.with_exact_overlay = true;
  ScanConfig shared = per_point;
  shared.shared_basis = true;

  const ScanResult a = scan_l0(per_point, grid);
  const ScanResult b = scan_l0(shared, grid);
  REQUIRE(a.points.size() == b.points.size());

  // this run accumulates the whole sector, so the shared mode is exact
  CHECK(b.points.front().record.dim_subspace == 20);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(b.points[i].record.e0 <= a.points[i].record.e0 + 1e-12);
    CHECK(b.points[i].rel_dev <= a.points[i].rel_dev + 1e-12);
    CHECK(b.points[i].k_used == 10);  // the run's own stopping step
  }
}

TEST_CASE("the finite-size model fit recovers exact synthetic parameters") {
  const double a = 1.2, b = -3.4, c = 5.6, mg = 10.0;
  std::vector<TransitionPoint> points;
  for (int n : {8, 10, 14, 18, 24, 30}) {
    points.push_back({n, l0c_model(n, a, b, c, mg), 0.01});
  }
  const FitResult fit = fit_l0c_model(points, mg);
  CHECK(fit.a == doctest::Approx(a).epsilon(1e-9));
  CHECK(fit.b == doctest::Approx(b).epsilon(1e-9));
  CHECK(fit.c == doctest::Approx(c).epsilon(1e-9));
  CHECK(fit.residual_norm <= 1e-9);
  CHECK(fit.sigma_a > 0.0);
  CHECK(fit.sigma_a == doctest::Approx(std::sqrt(fit.covariance(0, 0)))
                           .epsilon(1e-12));
  CHECK(fit.mass_ratio == mg);
  CHECK(fit.points.size() == points.size());

  const std::string report = format_fit_report(fit);
  CHECK(report.find("a =") != std::string::npos);

  // spot-check the model itself at one point
  const double ms = a / std::sqrt(8.0) + b / 8.0 + c / 64.0;
  CHECK(l0c_model(8, a, b, c, mg) ==
        doctest::Approx((mg + ms) / (15.0 * (1.0 - 1.0 / 8.0)) + 0.5)
            .epsilon(1e-14));
}

TEST_CASE("degenerate fit inputs are refused up front") {
  const double mg = 10.0;
  std::vector<TransitionPoint> three = {
      {8, 1.2, 0.01}, {10, 1.15, 0.01}, {14, 1.1, 0.01}};
  CHECK_THROWS_AS(fit_l0c_model(three, mg), ConfigError);

  std::vector<TransitionPoint> same_n(4, TransitionPoint{10, 1.15, 0.01});
  CHECK_THROWS_AS(fit_l0c_model(same_n, mg), ConfigError);

  std::vector<TransitionPoint> bad_sigma = {
      {8, 1.2, 0.01}, {10, 1.15, 0.0}, {14, 1.1, 0.01}, {18, 1.05, 0.01}};
  CHECK_THROWS_AS(fit_l0c_model(bad_sigma, mg), ConfigError);

  std::vector<TransitionPoint> odd_n = {
      {8, 1.2, 0.01}, {9, 1.15, 0.01}, {14, 1.1, 0.01}, {18, 1.05, 0.01}};
  CHECK_THROWS_AS(fit_l0c_model(odd_n, mg), ConfigError);
}

TEST_CASE("a convergence-summary row reports both scan modes coherently") {
  Table1Config tc;
  tc.params = params_n(6);
  tc.skqd = sampled_n6().skqd;

  const Table1Row per_point = table1_row(tc);
  CHECK(per_point.n_sites == 6);
  CHECK(per_point.dim_sector == 20);
  CHECK(per_point.dim_subspace == 20);  // accumulated over the horizon
  CHECK(per_point.ratio == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(per_point.k_max == 16);  // latest stopping step across the grid
  CHECK(per_point.shots == 1000);
  CHECK(per_point.seed == 1);
  CHECK(per_point.mean_rel_dev > 0.0);
  CHECK(per_point.mean_rel_dev <= per_point.max_rel_dev);
  CHECK(per_point.max_rel_dev < 5e-4);

  tc.shared_basis = true;
  const Table1Row shared = table1_row(tc);
  CHECK(shared.k_max == 10);  // the run's own stopping step
  CHECK(shared.dim_subspace == 20);
  CHECK(shared.max_rel_dev <= 1e-10);  // full sector: the scan is exact

  const std::string table = format_table1({per_point, shared});
  CHECK(table.find("N") != std::string::npos);
  CHECK(table.find("20") != std::string::npos);
}
