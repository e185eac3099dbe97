// Benchmarks the OpenMP kernels against their serial reference
// implementations and verifies the results stay bit-identical: the Trotter
// gate pass over the sector statevector, and the projected-Hamiltonian
// matvec.
#include <chrono>
#include <cmath>
#include <complex>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "skqd/evolution.hpp"
#include "skqd/krylov.hpp"
#include "skqd/rng.hpp"

using namespace skqd;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

int run_bench(int n_sites, int steps, int matvecs) {
  const double dt = 0.25;

  std::cout << "n_sites=" << n_sites
            << "  sector_dim=" << sector_dimension(n_sites) << "\n\n";

  SectorState parallel_state = reference_state(ReferenceKind::Alternating10,
                                               n_sites);
  SectorState serial_state = parallel_state;

  auto t0 = clock_type::now();
  for (int k = 0; k < steps; ++k) {
    apply_trotter_step_inplace(parallel_state, dt);
  }
  const double t_par = seconds_since(t0);

  t0 = clock_type::now();
  for (int k = 0; k < steps; ++k) {
    apply_trotter_step_inplace_serial(serial_state, dt);
  }
  const double t_ser = seconds_since(t0);

  bool identical = true;
  for (std::size_t i = 0; i < parallel_state.amplitudes.size(); ++i) {
    if (parallel_state.amplitudes[i] != serial_state.amplitudes[i]) {
      identical = false;
      break;
    }
  }
  std::cout << "trotter step x" << steps << ":  parallel " << t_par
            << " s,  serial " << t_ser << " s,  speedup "
            << (t_par > 0 ? t_ser / t_par : 0.0) << "\n";
  std::cout << "  amplitudes bit-identical: " << (identical ? "yes" : "NO")
            << "\n\n";

  const SchwingerParams params = SchwingerParams::with_volume(n_sites);
  ProjectedHamiltonian hp = project(params, full_sector_basis(n_sites));

  Eigen::VectorXd x(static_cast<Eigen::Index>(hp.dim()));
  std::uint64_t s = 0x9e3779b97f4a7c15ull;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    s = splitmix64(s);
    x[i] = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
  }
  Eigen::VectorXd y_par(x.size()), y_ser(x.size());

  t0 = clock_type::now();
  for (int r = 0; r < matvecs; ++r) hp.matvec(x, y_par);
  const double m_par = seconds_since(t0);

  t0 = clock_type::now();
  for (int r = 0; r < matvecs; ++r) hp.matvec_serial(x, y_ser);
  const double m_ser = seconds_since(t0);

  const bool mv_identical = (y_par.array() == y_ser.array()).all();
  std::cout << "matvec x" << matvecs << " (dim " << hp.dim() << ", nnz "
            << hp.val.size() << "):  parallel " << m_par << " s,  serial "
            << m_ser << " s,  speedup "
            << (m_par > 0 ? m_ser / m_par : 0.0) << "\n";
  std::cout << "  results bit-identical: " << (mv_identical ? "yes" : "NO")
            << "\n";

  return (identical && mv_identical) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  int n_sites = 16;
  int steps = 50;
  int matvecs = 200;
  CLI::App app{"serial-vs-parallel kernel benchmark"};
  app.add_option("--n-sites", n_sites, "system size (even)");
  app.add_option("--steps", steps, "Trotter steps to time");
  app.add_option("--matvecs", matvecs, "matvec repetitions to time");
  CLI11_PARSE(app, argc, argv);
  try {
    return run_bench(n_sites, steps, matvecs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
