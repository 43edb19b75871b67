#include "fermidyn/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fermidyn {

double norm(const KVec& a) { return std::sqrt(double(norm2(a))); }

std::string to_string(const KVec& a) {
  return "(" + std::to_string(a[0]) + "," + std::to_string(a[1]) + "," + std::to_string(a[2]) + ")";
}

namespace {

void check_dimension(int d) {
  if (d < 1 || d > 3) throw ConfigError("lattice dimension must be 1, 2 or 3");
}

std::vector<KVec> enumerate_ball(int d, double radius) {
  const double r2 = radius * radius;
  const int kmax = int(std::floor(radius));
  std::vector<KVec> pts;
  const int xm = kmax, ym = (d >= 2) ? kmax : 0, zm = (d >= 3) ? kmax : 0;
  for (int x = -xm; x <= xm; ++x)
    for (int y = -ym; y <= ym; ++y)
      for (int z = -zm; z <= zm; ++z) {
        KVec k{x, y, z};
        if (double(norm2(k)) <= r2) pts.push_back(k);
      }
  std::sort(pts.begin(), pts.end());
  return pts;
}

}  // namespace

MomentumLattice::MomentumLattice(int dimension, double k_cut) : dim_(dimension), k_cut_(k_cut) {
  check_dimension(dimension);
  if (!(k_cut > 0)) throw ConfigError("lattice cutoff must be positive");
  points_ = enumerate_ball(dim_, k_cut_);
  index_.reserve(points_.size());
  for (int i = 0; i < int(points_.size()); ++i) index_[points_[std::size_t(i)]] = i;
}

std::optional<int> MomentumLattice::index_of(const KVec& k) const {
  auto it = index_.find(k);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t MomentumLattice::content_hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) { h ^= (v >> (8 * i)) & 0xff; h *= 1099511628211ull; }
  };
  mix(std::uint64_t(dim_));
  for (const KVec& k : points_)
    for (int c : k) mix(std::uint64_t(std::uint32_t(c)));
  return h;
}

FermiBall::FermiBall(double k_f, int dimension) : k_f_(k_f), kf2_(k_f * k_f), dim_(dimension) {
  check_dimension(dimension);
  if (!(k_f > 0)) throw ConfigError("Fermi radius must be positive");
  members_ = enumerate_ball(dim_, k_f);
}

FermiBall build_fermi_ball(double k_f, int dimension) { return FermiBall(k_f, dimension); }

ScalingConstants scaling_constants(const FermiBall& fb, HbarConvention convention) {
  ScalingConstants sc;
  sc.convention = convention;
  if (convention == HbarConvention::Bulk) {
    sc.hbar = std::pow(double(fb.particle_number()), -1.0 / fb.dimension());
  } else {
    if (fb.dimension() != 3) throw ConfigError("RPA hbar convention requires dimension 3");
    sc.kappa = std::cbrt(3.0 / (4.0 * M_PI));
    sc.hbar = sc.kappa / fb.k_f();
  }
  return sc;
}

double dispersion(const KVec& k, const FermiBall& fb, const ScalingConstants& sc) {
  return sc.hbar * sc.hbar * std::abs(double(norm2(k)) - fb.k_f_squared());
}

namespace {

// Sign rule defining the positive half of a symmetric support.
bool in_positive_half(const KVec& k) {
  if (k[2] != 0) return k[2] > 0;
  if (k[1] != 0) return k[1] > 0;
  return k[0] > 0;
}

}  // namespace

Potential Potential::from_coeffs(const std::map<KVec, double>& coeffs, bool rpa_strict) {
  Potential v;
  for (const auto& [k, val] : coeffs) {
    if (val == 0.0) continue;
    auto it = coeffs.find(-k);
    if (it == coeffs.end() || it->second != val)
      throw ConfigError("potential violates the symmetry rule V(k) = V(-k) at k = " + to_string(k));
    if (rpa_strict && val < 0.0)
      throw ConfigError("RPA-strict potential requires V(k) >= 0, got V" + to_string(k) + " = " +
                        std::to_string(val));
    v.coeffs_[k] = val;
  }
  for (const auto& [k, val] : v.coeffs_) {
    (void)val;
    v.support_radius_ = std::max(v.support_radius_, norm(k));
    if (k != KVec{0, 0, 0} && in_positive_half(k)) v.gamma_nor_.push_back(k);
    for (const auto& [k2, val2] : v.coeffs_) {
      (void)val2;
      v.support_diameter_ = std::max(v.support_diameter_, norm(k - k2));
    }
  }
  return v;
}

double Potential::coeff(const KVec& k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? 0.0 : it->second;
}

}  // namespace fermidyn
