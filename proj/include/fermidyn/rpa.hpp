#ifndef FERMIDYN_RPA_HPP
#define FERMIDYN_RPA_HPP

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fermidyn/lattice.hpp"

namespace fermidyn::rpa {

struct Patch {
  Eigen::Vector3d center;    // omega_alpha, |omega_alpha| = k_F
  std::vector<KVec> points;  // shell lattice points, corridors excluded
};

// Equal-area zonal partition of the northern half of the Fermi-surface shell
// (polar cap plus collars subdivided in azimuth), reflected through the
// origin to the southern half. Patches are shrunk about their centers by a
// uniform angular margin until every pair of patches is separated by more
// than the required corridor width.
class PatchDecomposition {
 public:
  // shell_halfwidth: radial extent |#|q| - k_F| kept around the surface.
  // required_corridor: minimum pairwise point-set distance (exclusive).
  static PatchDecomposition build(const FermiBall& fb, int patch_count, double shell_halfwidth,
                                  double required_corridor);
  // Shell and corridor widths derived from the interaction support:
  // halfwidth = max |k| over supp V, corridor > 2 max |k|.
  static PatchDecomposition build(const FermiBall& fb, int patch_count, const Potential& v);

  int patch_count() const { return int(patches_.size()); }  // M
  double k_f() const { return k_f_; }
  double shell_halfwidth() const { return shell_halfwidth_; }
  double realized_corridor() const { return realized_corridor_; }
  double angular_margin() const { return margin_; }
  const std::vector<Patch>& patches() const { return patches_; }
  const Patch& patch(int alpha) const { return patches_[std::size_t(alpha)]; }

  // Southern patches are ordered after the northern ones.
  int reflection_partner(int alpha) const {
    const int half = patch_count() / 2;
    return alpha < half ? alpha + half : alpha - half;
  }

  std::optional<int> patch_of(const KVec& q) const;

 private:
  double k_f_ = 0.0;
  double shell_halfwidth_ = 0.0;
  double realized_corridor_ = 0.0;
  double margin_ = 0.0;
  std::vector<Patch> patches_;
  std::unordered_map<KVec, int, KVecHash> membership_;
};

struct IndexSets {
  std::vector<int> i_plus;   // alpha with k . w_alpha / |w_alpha| >= N^-delta
  std::vector<int> i_minus;  // alpha with the same for -k
  std::vector<int> all() const;
};

// Patch cut-off of eq-type k . w_alpha/|w_alpha| >= N^-delta; the two sets
// are disjoint because the threshold is positive.
IndexSets index_sets(const KVec& k, const PatchDecomposition& pd, double delta, long n_particles);

struct PairCount {
  long count = 0;       // #{(p, h) in patch: p - h = k, p outside, h inside}
  double n_exact = 0;   // sqrt(count); normalization of the pair operator
  double n_approx = 0;  // sqrt(4 pi k_F^2 / M |k . w_alpha/|w_alpha||)
};

// Lattice enumeration over the patch point set. A zero count means the pair
// operator is undefined for this (k, alpha); callers exclude such patches.
PairCount pair_count(const KVec& k, int alpha, const PatchDecomposition& pd, const FermiBall& fb);

// Quadratic one-boson blocks of a single interaction mode k. Patch order is
// i_plus then i_minus; for alpha in i_minus the pair operator and its
// normalization refer to -k.
struct RpaBlocks {
  KVec k;
  IndexSets idx;
  std::vector<int> order;              // concatenated patch indices
  Eigen::VectorXd n;                   // exact normalizations, aligned with order
  Eigen::MatrixXd D, W, Wt;
  std::vector<std::string> dropped_patches;  // per-patch exclusion reports
  bool dropped = false;                // no usable patch survived
  std::string drop_reason;

  int size() const { return int(order.size()); }
  int n_plus() const { return int(idx.i_plus.size()); }
};

RpaBlocks build_blocks(const KVec& k, const PatchDecomposition& pd, const Potential& v,
                       const FermiBall& fb, const fermidyn::ScalingConstants& sc, double delta);

struct BogoliubovKernel {
  Eigen::MatrixXd E;  // [ (D+W-Wt)^1/2 (D+W+Wt) (D+W-Wt)^1/2 ]^1/2
  Eigen::MatrixXd S;  // (D+W-Wt)^1/2 E^-1/2
  Eigen::MatrixXd K;  // 1/2 log(S S^T)
};

BogoliubovKernel bogoliubov_kernel(const Eigen::MatrixXd& D, const Eigen::MatrixXd& W,
                                   const Eigen::MatrixXd& Wt);

struct DiagonalizedBlock {
  Eigen::MatrixXd Kfrak;     // cosh(K)(D+W)cosh(K) + sinh(K)(D+W)sinh(K)
                             //   + cosh(K) Wt sinh(K) + sinh(K) Wt cosh(K)
  Eigen::MatrixXd residual;  // off-diagonal part; vanishes for the exact kernel
};

DiagonalizedBlock diagonalized_block(const Eigen::MatrixXd& D, const Eigen::MatrixXd& W,
                                     const Eigen::MatrixXd& Wt, const Eigen::MatrixXd& K);

struct EnergyCorrection {
  double total = 0.0;  // sum_k hbar kappa |k| tr(E - D - W)
  std::vector<std::pair<KVec, double>> per_mode;
};

EnergyCorrection rpa_energy_correction(const std::vector<RpaBlocks>& blocks,
                                       const fermidyn::ScalingConstants& sc);

// Eigenvalues of 2 hbar kappa |k| E(k), ascending.
Eigen::VectorXd excitation_spectrum(const RpaBlocks& blocks, const fermidyn::ScalingConstants& sc);

// Worst relative deviation of the pair energy hbar^2 (|p|^2 - |h|^2) from its
// linearization 2 hbar^2 k_F k . w_alpha/|w_alpha| over the patch pairs.
double linearization_residual(const KVec& k, int alpha, const PatchDecomposition& pd,
                              const FermiBall& fb, const fermidyn::ScalingConstants& sc);

// One-boson amplitude vector, per mode k aligned with RpaBlocks::order.
struct BosonState {
  std::map<KVec, Eigen::VectorXcd> amplitudes;

  double norm() const;
  void normalize();
};

// phi(k) -> exp(-i t 2 kappa |k| Kfrak(k)) phi(k); the hbar of the one-boson
// Hamiltonian cancels against the 1/hbar of the propagator.
BosonState boson_evolve(const BosonState& phi, const std::vector<RpaBlocks>& blocks,
                        const std::vector<DiagonalizedBlock>& diag,
                        const fermidyn::ScalingConstants& sc, double t);

// Specification of a pair-excitation state (1/Z_m) c*(phi_1)...c*(phi_m) |vac>;
// Z_m stays symbolic here and is fixed by normalization when the exact
// oracle materializes the state.
struct PairExcitationSpec {
  std::vector<BosonState> phis;
  bool m_condition_ok = true;  // m^3 (2m-1)!! << N^delta proxy: lhs < rhs
  double m_condition_lhs = 0.0;
  double m_condition_rhs = 0.0;
};

PairExcitationSpec pair_excitation_state(const std::vector<BosonState>& phis, long n_particles,
                                         double delta);

}  // namespace fermidyn::rpa

#endif
