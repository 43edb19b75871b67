#include "fermidyn/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace fermidyn::io {

std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < n; ++i) { h ^= p[i]; h *= 1099511628211ull; }
  return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open artifact for hashing: " + path.string());
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  return h;
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write artifact: " + path.string());
    out.write(contents.data(), std::streamsize(contents.size()));
  }
  std::filesystem::rename(tmp, path);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Csv::Csv(std::vector<std::string> header) : width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i)
    body_ += header[i] + (i + 1 < header.size() ? "," : "\n");
}

void Csv::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw ConfigError("csv row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i)
    body_ += cells[i] + (i + 1 < cells.size() ? "," : "\n");
}

namespace {

void put_u64(std::string& s, std::uint64_t v) { s.append(reinterpret_cast<char*>(&v), 8); }
void put_f64(std::string& s, double v) { s.append(reinterpret_cast<char*>(&v), 8); }

template <typename T>
T take(const std::string& s, std::size_t& off) {
  T v;
  std::memcpy(&v, s.data() + off, sizeof v);
  off += sizeof v;
  return v;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path.string());
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return s;
}

}  // namespace

std::string phase_space_csv(const phase::PhaseSpaceDensity& f) {
  const auto& g = f.grid;
  std::vector<std::string> header;
  for (int a = 0; a < g.dim; ++a) header.push_back("x" + std::to_string(a));
  for (int a = 0; a < g.dim; ++a) header.push_back("p" + std::to_string(a));
  header.push_back("value");
  Csv csv(header);
  std::vector<int> xi(std::size_t(g.dim)), pi(std::size_t(g.dim));
  for (long x = 0; x < g.total_x(); ++x) {
    long rem = x;
    for (int a = g.dim - 1; a >= 0; --a) { xi[std::size_t(a)] = int(rem % g.nx); rem /= g.nx; }
    for (long p = 0; p < g.total_p(); ++p) {
      rem = p;
      for (int a = g.dim - 1; a >= 0; --a) { pi[std::size_t(a)] = int(rem % g.np); rem /= g.np; }
      std::vector<std::string> cells;
      for (int a = 0; a < g.dim; ++a) cells.push_back(std::to_string(xi[std::size_t(a)]));
      for (int a = 0; a < g.dim; ++a) cells.push_back(std::to_string(pi[std::size_t(a)]));
      cells.push_back(format_double(f.at(p, x)));
      csv.row(cells);
    }
  }
  return csv.str();
}

std::string phase_space_binary(const phase::PhaseSpaceDensity& f) {
  const auto& g = f.grid;
  std::string out;
  out.reserve(64 + std::size_t(g.total_x() * g.total_p()) * 8);
  put_u64(out, std::uint64_t(g.dim));
  put_u64(out, std::uint64_t(g.nx));
  put_u64(out, std::uint64_t(g.np));
  put_f64(out, g.dx);
  put_f64(out, g.dp);
  put_f64(out, g.p_min());
  put_f64(out, g.hbar);
  put_u64(out, 0);  // reserved
  for (long x = 0; x < g.total_x(); ++x)
    for (long p = 0; p < g.total_p(); ++p) put_f64(out, f.at(p, x));
  return out;
}

phase::PhaseSpaceDensity read_phase_space_binary(const std::filesystem::path& path) {
  const std::string s = slurp(path);
  if (s.size() < 64) throw ConfigError("phase-space binary too short: " + path.string());
  std::size_t off = 0;
  phase::PhaseSpaceGrid g;
  g.dim = int(take<std::uint64_t>(s, off));
  g.nx = int(take<std::uint64_t>(s, off));
  g.np = int(take<std::uint64_t>(s, off));
  g.dx = take<double>(s, off);
  g.dp = take<double>(s, off);
  (void)take<double>(s, off);  // p_min is derived from np and dp
  g.hbar = take<double>(s, off);
  (void)take<std::uint64_t>(s, off);
  phase::PhaseSpaceDensity f{g, Eigen::ArrayXd::Zero(g.total_x() * g.total_p())};
  if (s.size() != 64 + std::size_t(g.total_x() * g.total_p()) * 8)
    throw ConfigError("phase-space binary has inconsistent payload size");
  for (long x = 0; x < g.total_x(); ++x)
    for (long p = 0; p < g.total_p(); ++p) f.at(p, x) = take<double>(s, off);
  return f;
}

std::string density_matrix_binary(const DensityMatrix& dm, double t) {
  std::string out;
  put_u64(out, dm.basis->content_hash());
  put_u64(out, std::uint64_t(std::llround(dm.trace())));
  put_f64(out, dm.hbar);
  put_f64(out, t);
  for (int i = 0; i < dm.size(); ++i)
    for (int j = 0; j <= i; ++j) {
      put_f64(out, dm.m(i, j).real());
      put_f64(out, dm.m(i, j).imag());
    }
  return out;
}

DensityMatrix read_density_matrix_binary(const std::filesystem::path& path,
                                         std::shared_ptr<const MomentumLattice> basis) {
  const std::string s = slurp(path);
  std::size_t off = 0;
  const std::uint64_t hash = take<std::uint64_t>(s, off);
  if (hash != basis->content_hash())
    throw ConfigError("density-matrix snapshot basis hash mismatch: " + path.string());
  (void)take<std::uint64_t>(s, off);  // N, recoverable from the trace
  const double hbar = take<double>(s, off);
  (void)take<double>(s, off);  // t
  const int n = basis->size();
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double re = take<double>(s, off), im = take<double>(s, off);
      m(i, j) = {re, im};
      m(j, i) = {re, -im};
    }
  return make_density_matrix(std::move(basis), std::move(m), hbar);
}

Manifest::Manifest(std::string subcommand, std::string scenario_json)
    : subcommand_(std::move(subcommand)), scenario_json_(std::move(scenario_json)) {}

void Manifest::add_artifact(const std::filesystem::path& path) {
  char hex[32];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a64_file(path)));
  artifacts_.push_back(
      {path.filename().string(), std::filesystem::file_size(path), hex});
}

void Manifest::add_timing(const std::string& key, double ms) {
  timings_.emplace_back(key, format_double(ms));
}

void Manifest::write(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["subcommand"] = subcommand_;
  j["scenario"] = nlohmann::json::parse(scenario_json_);
  j["versions"] = {{"fermidyn", "0.1.0"},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)}};
  nlohmann::json arts = nlohmann::json::array();
  for (const auto& a : artifacts_)
    arts.push_back({{"name", a.name}, {"bytes", a.bytes}, {"fnv1a64", a.hash_hex}});
  j["artifacts"] = arts;
  nlohmann::json tm;
  for (const auto& [k, v] : timings_) tm[k] = v;
  j["timings_ms"] = tm;
  atomic_write(path, j.dump(2) + "\n");
}

}  // namespace fermidyn::io
