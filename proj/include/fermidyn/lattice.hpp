#ifndef FERMIDYN_LATTICE_HPP
#define FERMIDYN_LATTICE_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "fermidyn/errors.hpp"

namespace fermidyn {

// Integer momentum vector on the torus dual lattice. Dimensions d < 3 use
// trailing zero components so the same type serves d = 1, 2, 3.
using KVec = std::array<int, 3>;

inline KVec kvec(int x, int y = 0, int z = 0) { return {x, y, z}; }
inline KVec operator+(const KVec& a, const KVec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline KVec operator-(const KVec& a, const KVec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline KVec operator-(const KVec& a) { return {-a[0], -a[1], -a[2]}; }
inline std::int64_t norm2(const KVec& a) {
  return std::int64_t(a[0]) * a[0] + std::int64_t(a[1]) * a[1] + std::int64_t(a[2]) * a[2];
}
double norm(const KVec& a);
std::string to_string(const KVec& a);

struct KVecHash {
  std::size_t operator()(const KVec& a) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (int c : a) { h ^= std::uint64_t(std::uint32_t(c)); h *= 1099511628211ull; }
    return std::size_t(h);
  }
};

// All integer vectors k with |k| <= K_cut in the first d components, ordered
// lexicographically. The ordering is a pure function of (d, K_cut), so matrix
// indices are reproducible across runs.
class MomentumLattice {
 public:
  MomentumLattice(int dimension, double k_cut);

  int dimension() const { return dim_; }
  double cutoff() const { return k_cut_; }
  int size() const { return int(points_.size()); }
  const std::vector<KVec>& points() const { return points_; }
  const KVec& point(int i) const { return points_[std::size_t(i)]; }

  std::optional<int> index_of(const KVec& k) const;
  bool contains(const KVec& k) const { return index_of(k).has_value(); }

  // FNV-1a over the ordered point list; identifies the basis in file headers.
  std::uint64_t content_hash() const;

 private:
  int dim_;
  double k_cut_;
  std::vector<KVec> points_;
  std::unordered_map<KVec, int, KVecHash> index_;
};

// Fermi ball B_F = { k integer : |k| <= k_F }. Membership compares the exact
// integer |k|^2 against k_F^2, so boundary shells are classified without
// floating-point ambiguity whenever k_F^2 is representable.
class FermiBall {
 public:
  FermiBall(double k_f, int dimension);

  double k_f() const { return k_f_; }
  double k_f_squared() const { return kf2_; }
  int dimension() const { return dim_; }
  int particle_number() const { return int(members_.size()); }
  const std::vector<KVec>& members() const { return members_; }

  bool contains(const KVec& k) const { return double(norm2(k)) <= kf2_; }

 private:
  double k_f_;
  double kf2_;
  int dim_;
  std::vector<KVec> members_;
};

FermiBall build_fermi_ball(double k_f, int dimension);

enum class HbarConvention { Bulk, Rpa };

// hbar = N^(-1/d) in the bulk convention; hbar = kappa / k_F with
// kappa = (3/4pi)^(1/3) in the RPA convention (3D only).
struct ScalingConstants {
  double hbar = 0.0;
  double kappa = 0.0;  // meaningful in the RPA convention
  HbarConvention convention = HbarConvention::Bulk;
};

ScalingConstants scaling_constants(const FermiBall& fb, HbarConvention convention);

// Kinetic energy of a pair excitation: e(k) = hbar^2 | |k|^2 - k_F^2 |.
double dispersion(const KVec& k, const FermiBall& fb, const ScalingConstants& sc);

// Compactly supported Fourier coefficient map k -> V(k) of the interaction,
// with V(k) = V(-k). Coefficients enter all kernels through the convention
// V(x) = sum_k V(k) e^{ik.x}, so no extra constant appears in the direct,
// exchange, or force terms (worked one-mode example in the phase-space tests:
// rho(x) = cos x with V(+-1) = v gives force F(x) = 2 pi v sin x).
class Potential {
 public:
  static Potential from_coeffs(const std::map<KVec, double>& coeffs, bool rpa_strict = false);
  static Potential free_potential() { return Potential{}; }

  const std::map<KVec, double>& coeffs() const { return coeffs_; }
  double coeff(const KVec& k) const;
  bool empty() const { return coeffs_.empty(); }

  // Half support: each nonzero support vector lies in exactly one of
  // gamma_nor, -gamma_nor, selected by the sign rule on (k3, k2, k1).
  const std::vector<KVec>& gamma_nor() const { return gamma_nor_; }

  // max |k| over the support; 0 for the free potential.
  double support_radius() const { return support_radius_; }
  // max pairwise distance over the support; 0 for the free potential.
  double support_diameter() const { return support_diameter_; }

 private:
  Potential() = default;
  std::map<KVec, double> coeffs_;  // zeros dropped at construction
  std::vector<KVec> gamma_nor_;
  double support_radius_ = 0.0;
  double support_diameter_ = 0.0;
};

inline Potential make_potential(const std::map<KVec, double>& coeffs, bool rpa_strict = false) {
  return Potential::from_coeffs(coeffs, rpa_strict);
}

}  // namespace fermidyn

#endif
