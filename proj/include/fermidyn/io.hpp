#ifndef FERMIDYN_IO_HPP
#define FERMIDYN_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fermidyn/density_matrix.hpp"
#include "fermidyn/phase_space.hpp"

namespace fermidyn::io {

std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

// All writes go through a temp file plus rename, so readers never observe a
// partially written artifact.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

// Deterministic decimal formatting (%.17g round-trips doubles exactly).
std::string format_double(double v);

// Minimal CSV builder: header once, then rows of preformatted cells.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  const std::string& str() const { return body_; }

 private:
  std::size_t width_;
  std::string body_;
};

// Phase-space snapshot, CSV: one row per cell, columns
// x-index coords, p-index coords, value.
std::string phase_space_csv(const phase::PhaseSpaceDensity& f);

// Phase-space snapshot, binary: 64-byte header of eight little-endian 64-bit
// fields (dim, nx, np, dx, dp, p_min, hbar, reserved), then the value array
// as float64 in (x outer, p inner) row-major order.
std::string phase_space_binary(const phase::PhaseSpaceDensity& f);
phase::PhaseSpaceDensity read_phase_space_binary(const std::filesystem::path& path);

// Density-matrix snapshot, binary: header (basis hash, N, hbar, t as
// little-endian 64-bit fields), then the packed lower triangle row by row as
// complex128.
std::string density_matrix_binary(const DensityMatrix& dm, double t);
// Reads the snapshot back onto the given basis (hash-checked).
DensityMatrix read_density_matrix_binary(const std::filesystem::path& path,
                                         std::shared_ptr<const MomentumLattice> basis);

// Run manifest: scenario echo, artifact list with content hashes, timings.
class Manifest {
 public:
  Manifest(std::string subcommand, std::string scenario_json);
  void add_artifact(const std::filesystem::path& path);
  void add_timing(const std::string& key, double ms);
  void write(const std::filesystem::path& path) const;

 private:
  std::string subcommand_;
  std::string scenario_json_;
  std::vector<std::pair<std::string, std::string>> timings_;
  struct Artifact {
    std::string name;
    std::uint64_t bytes;
    std::string hash_hex;
  };
  std::vector<Artifact> artifacts_;
};

}  // namespace fermidyn::io

#endif
