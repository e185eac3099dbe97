#include "skqd/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <random>
#include <sstream>
#include <vector>

#include "skqd/errors.hpp"
#include "skqd/fsio.hpp"
#include "skqd/rng.hpp"

namespace skqd {

ShotCounts sample(const SectorState& state, long long n_shots,
                  std::uint64_t seed, const NoiseSpec& noise) {
  if (n_shots < 1) throw ConfigError("n_shots must be >= 1");
  if (noise.bitflip_prob < 0.0 || noise.bitflip_prob >= 1.0)
    throw ConfigError("bitflip_prob must lie in [0, 1)");

  const auto& amps = state.amplitudes;
  std::vector<double> cum(amps.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    acc += std::norm(amps[i]);
    cum[i] = acc;
  }

  const int n = state.basis->n_sites();
  std::mt19937_64 gen(seed);
  ShotCounts out;
  out.n_sites = n;
  out.n_shots = n_shots;
  out.origin = ShotCounts::Origin::Simulated;
  out.seed = seed;
  for (long long shot = 0; shot < n_shots; ++shot) {
    const double u = canonical_double(gen) * acc;
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cum.begin());
    if (idx >= cum.size()) idx = cum.size() - 1;
    Bits b = state.basis->unrank(idx);
    if (noise.bitflip_prob > 0.0)
      for (int site = 0; site < n; ++site)
        if (canonical_double(gen) < noise.bitflip_prob) b ^= Bits{1} << site;
    ++out.counts[b];
  }
  return out;
}

ShotCounts postselect(const ShotCounts& counts, int n_sites, double p_min) {
  if (p_min < 0.0 || p_min >= 1.0) throw ConfigError("p_min must lie in [0, 1)");
  ShotCounts out = counts;
  out.counts.clear();
  for (const auto& [b, c] : counts.counts) {
    if (std::popcount(b) != n_sites / 2) continue;
    if (static_cast<double>(c) / static_cast<double>(counts.n_shots) < p_min)
      continue;
    out.counts[b] = c;
  }
  return out;
}

ShotCounts ingest_counts(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  int lineno = 0;

  if (!std::getline(in, line)) throw ParseError("empty counts file", 1);
  ++lineno;
  int n_sites = 0;
  long long shots = 0;
  {
    std::istringstream hdr(line);
    std::string ntok, stok;
    hdr >> ntok >> stok;
    if (ntok.rfind("N=", 0) != 0 || stok.rfind("shots=", 0) != 0)
      throw ParseError("expected header 'N=<int> shots=<int>'", lineno);
    try {
      n_sites = std::stoi(ntok.substr(2));
      shots = std::stoll(stok.substr(6));
    } catch (const std::exception&) {
      throw ParseError("non-numeric header field", lineno);
    }
    if (n_sites < 1 || n_sites > 62)
      throw ParseError("header N out of range", lineno);
    if (shots < 1) throw ParseError("header shots must be >= 1", lineno);
  }

  ShotCounts out;
  out.n_sites = n_sites;
  out.n_shots = shots;
  out.origin = ShotCounts::Origin::Ingested;
  out.file_id = path;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError("expected '<bitstring>,<count>'", lineno);
    std::string bs = line.substr(0, comma);
    std::string cs = line.substr(comma + 1);
    while (!cs.empty() && (cs.back() == '\r' || cs.back() == ' ')) cs.pop_back();
    if (static_cast<int>(bs.size()) != n_sites)
      throw ParseError("bitstring width " + std::to_string(bs.size()) +
                           " does not match header N=" + std::to_string(n_sites),
                       lineno);
    Bits b = 0;
    for (int i = 0; i < n_sites; ++i) {
      const char c = bs[static_cast<std::size_t>(i)];
      if (c != '0' && c != '1')
        throw ParseError("non-binary character in bitstring", lineno);
      if (c == '1') b |= Bits{1} << (n_sites - 1 - i);
    }
    long long count = 0;
    try {
      std::size_t pos = 0;
      count = std::stoll(cs, &pos);
      if (pos != cs.size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw ParseError("malformed count '" + cs + "'", lineno);
    }
    if (count < 0) throw ParseError("negative count", lineno);
    out.counts[b] += count;
  }
  if (out.total() > shots)
    throw ParseError("counts sum to " + std::to_string(out.total()) +
                         " > header shots=" + std::to_string(shots),
                     lineno);
  return out;
}

std::string render_counts_file(const ShotCounts& counts) {
  std::ostringstream out;
  out << "N=" << counts.n_sites << " shots=" << counts.n_shots << "\n";
  for (const auto& [b, c] : counts.counts)
    out << to_display_string(b, counts.n_sites) << "," << c << "\n";
  return out.str();
}

void write_counts_file(const std::string& path, const ShotCounts& counts) {
  atomic_write_text(path, render_counts_file(counts));
}

}  // namespace skqd
