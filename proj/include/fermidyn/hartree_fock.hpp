#ifndef FERMIDYN_HARTREE_FOCK_HPP
#define FERMIDYN_HARTREE_FOCK_HPP

#include <vector>

#include "fermidyn/density_matrix.hpp"

namespace fermidyn::hf {

// Direct term (1/N) V * rho as a matrix in the plane-wave basis:
//   <k| . |k'> = (1/N) V(k - k') rho(k - k'),  rho(q) = sum_m w_{m+q, m}.
Eigen::MatrixXcd direct_term(const DensityMatrix& omega, const Potential& v, int n_particles);

// Exchange term with kernel (1/N) V(x - x') w(x; x'):
//   X_{k,k'} = (1/N) sum_q V(q) w_{k-q, k'-q},
// indices outside the basis treated as zero (truncation rule shared with the
// exact oracle).
Eigen::MatrixXcd exchange_term(const DensityMatrix& omega, const Potential& v, int n_particles);

// h(w) = diag(hbar^2 |k|^2) + direct - (exchange if enabled).
Eigen::MatrixXcd hf_generator(const DensityMatrix& omega, const Potential& v, int n_particles,
                              bool include_exchange);

// tr(K w) + 1/2 tr(direct(w) w) - 1/2 tr(exchange(w) w); conserved along the
// flow because both interaction forms are symmetric bilinear in w.
double hf_energy(const DensityMatrix& omega, const Potential& v, int n_particles,
                 bool include_exchange);

struct HfOptions {
  bool include_exchange = true;
  int midpoint_iters = 50;
  double tol = 1e-12;          // fixed-point tolerance on the Frobenius update
  int snapshot_stride = 0;     // 0: keep initial and final states only
  double spectrum_tol = 1e-8;  // diagnostic gate on eigenvalues outside [0, 1]
};

struct HfStepStats {
  double t;
  double trace;
  double energy;
  double idempotency_residual;
  int midpoint_iterations;
};

struct HfTrajectory {
  std::vector<double> snapshot_times;
  std::vector<DensityMatrix> snapshots;
  std::vector<HfStepStats> stats;  // one row per step, including t = 0

  const DensityMatrix& final_state() const { return snapshots.back(); }
};

// Self-consistent implicit midpoint: per step iterate
//   hbar_gen = h((w_n + w_{n+1}) / 2),  w_{n+1} = U w_n U*,
//   U = exp(-i dt hbar_gen / hbar),
// until the update moves by less than tol. Unitary conjugation preserves
// trace, spectrum and idempotency up to the accuracy of the exponential.
// Requires the basis cutoff to satisfy K_cut >= k_F-equivalent reach of the
// initial data plus the support diameter of V (callers constructing lattices
// use check_interaction_reach below).
HfTrajectory hf_evolve(const DensityMatrix& omega0, const Potential& v, int n_particles,
                       double t_final, double dt, const HfOptions& opts = {});

// Throws unless K_cut >= k_F + diam supp V (diameter = max pairwise distance
// over the support).
void check_interaction_reach(const MomentumLattice& lattice, double k_f, const Potential& v);

}  // namespace fermidyn::hf

#endif
