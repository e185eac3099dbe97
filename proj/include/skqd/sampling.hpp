#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "skqd/evolution.hpp"
#include "skqd/hamiltonian.hpp"

namespace skqd {

// Synthetic readout-noise channel: each measured bit flips independently with
// the given probability. Defaults to ideal.
struct NoiseSpec {
  double bitflip_prob = 0.0;
};

// Measurement record: shot counts per bitstring. The ordered map gives a
// deterministic ascending iteration order everywhere downstream.
struct ShotCounts {
  enum class Origin { Simulated, Ingested };

  int n_sites = 0;
  long long n_shots = 0;  // shots taken; >= sum of counts after post-selection
  std::map<Bits, long long> counts;
  Origin origin = Origin::Simulated;
  std::uint64_t seed = 0;   // meaningful for Origin::Simulated
  std::string file_id;      // meaningful for Origin::Ingested

  long long total() const {
    long long t = 0;
    for (const auto& [b, c] : counts) t += c;
    return t;
  }
};

// Draws n_shots i.i.d. bitstrings from |amplitude|^2 by inverse-CDF lookup
// over one cumulative pass, then applies independent per-bit flips. Identical
// (state, n_shots, seed, noise) give bit-identical counts.
ShotCounts sample(const SectorState& state, long long n_shots,
                  std::uint64_t seed, const NoiseSpec& noise = {});

// Removes bitstrings with Hamming weight != N/2 (nonzero total charge), then
// bitstrings with empirical probability count/n_shots < p_min. Probabilities
// are measured against the original n_shots; survivors keep raw counts.
ShotCounts postselect(const ShotCounts& counts, int n_sites, double p_min);

// Reads a counts file:
//   N=<int> shots=<int>
//   <bitstring>,<count>
//   ...
// Bitstrings are written q_{N-1}...q_0. Throws ParseError (with line number)
// on malformed input, including width mismatches against the header N.
ShotCounts ingest_counts(const std::string& path);

// Export in the same format, one row per bitstring ascending by value.
std::string render_counts_file(const ShotCounts& counts);
void write_counts_file(const std::string& path, const ShotCounts& counts);

}  // namespace skqd
