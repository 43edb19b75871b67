#include "fermidyn/hartree_fock.hpp"

#include <cmath>
#include <complex>
#include <string>

namespace fermidyn::hf {

using Eigen::MatrixXcd;
using std::complex;

Eigen::MatrixXcd direct_term(const DensityMatrix& omega, const Potential& v, int n_particles) {
  const MomentumLattice& lat = *omega.basis;
  const int n = lat.size();
  MatrixXcd out = MatrixXcd::Zero(n, n);
  if (v.empty()) return out;

  // rho(q) = sum_m w_{m+q, m} for q in supp V.
  for (const auto& [q, vq] : v.coeffs()) {
    complex<double> rho_q = 0.0;
    for (int j = 0; j < n; ++j) {
      auto i = lat.index_of(lat.point(j) + q);
      if (i) rho_q += omega.m(*i, j);
    }
    if (rho_q == complex<double>(0.0)) continue;
    const complex<double> amp = vq * rho_q / double(n_particles);
    for (int j = 0; j < n; ++j) {
      auto i = lat.index_of(lat.point(j) + q);
      if (i) out(*i, j) += amp;
    }
  }
  return out;
}

Eigen::MatrixXcd exchange_term(const DensityMatrix& omega, const Potential& v, int n_particles) {
  const MomentumLattice& lat = *omega.basis;
  const int n = lat.size();
  MatrixXcd out = MatrixXcd::Zero(n, n);
  for (const auto& [q, vq] : v.coeffs()) {
    for (int a = 0; a < n; ++a) {
      auto am = lat.index_of(lat.point(a) - q);
      if (!am) continue;
      for (int b = 0; b < n; ++b) {
        auto bm = lat.index_of(lat.point(b) - q);
        if (bm) out(a, b) += vq * omega.m(*am, *bm);
      }
    }
  }
  return out / double(n_particles);
}

Eigen::MatrixXcd hf_generator(const DensityMatrix& omega, const Potential& v, int n_particles,
                              bool include_exchange) {
  const MomentumLattice& lat = *omega.basis;
  const int n = lat.size();
  MatrixXcd h = direct_term(omega, v, n_particles);
  if (include_exchange) h -= exchange_term(omega, v, n_particles);
  const double h2 = omega.hbar * omega.hbar;
  for (int i = 0; i < n; ++i) h(i, i) += h2 * double(norm2(lat.point(i)));
  return h;
}

double hf_energy(const DensityMatrix& omega, const Potential& v, int n_particles,
                 bool include_exchange) {
  const MomentumLattice& lat = *omega.basis;
  const double h2 = omega.hbar * omega.hbar;
  double kinetic = 0.0;
  for (int i = 0; i < lat.size(); ++i)
    kinetic += h2 * double(norm2(lat.point(i))) * omega.m(i, i).real();
  double interaction = 0.5 * (direct_term(omega, v, n_particles) * omega.m).trace().real();
  if (include_exchange)
    interaction -= 0.5 * (exchange_term(omega, v, n_particles) * omega.m).trace().real();
  return kinetic + interaction;
}

void check_interaction_reach(const MomentumLattice& lattice, double k_f, const Potential& v) {
  const double need = k_f + v.support_diameter();
  if (lattice.cutoff() < need - 1e-12)
    throw ConfigError("lattice cutoff " + std::to_string(lattice.cutoff()) +
                      " below k_F + diam supp V = " + std::to_string(need));
}

namespace {

MatrixXcd unitary_exp(const MatrixXcd& h, double angle_scale) {
  // exp(-i * angle_scale * h) for Hermitian h.
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  Eigen::VectorXcd phases(h.rows());
  for (int i = 0; i < h.rows(); ++i)
    phases(i) = std::exp(complex<double>(0, -angle_scale * es.eigenvalues()(i)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

void check_spectrum(const DensityMatrix& dm, double tol, double t) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(dm.m, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (lo < -tol || hi > 1.0 + tol)
    throw NumericsError("density matrix spectrum violation at t = " + std::to_string(t) +
                        ": eigenvalues in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

}  // namespace

HfTrajectory hf_evolve(const DensityMatrix& omega0, const Potential& v, int n_particles,
                       double t_final, double dt, const HfOptions& opts) {
  if (!(dt > 0)) throw ConfigError("hf_evolve: dt must be positive");
  if (!(t_final >= 0)) throw ConfigError("hf_evolve: t_final must be non-negative");
  check_spectrum(omega0, opts.spectrum_tol, 0.0);

  const int n_steps = int(std::llround(t_final / dt));
  HfTrajectory traj;
  DensityMatrix omega = omega0;
  auto record_stats = [&](double t, int iters) {
    traj.stats.push_back({t, omega.trace(), hf_energy(omega, v, n_particles, opts.include_exchange),
                          omega.idempotency_residual(), iters});
  };
  auto record_snapshot = [&](double t) {
    traj.snapshot_times.push_back(t);
    traj.snapshots.push_back(omega);
  };
  record_stats(0.0, 0);
  record_snapshot(0.0);

  for (int step = 1; step <= n_steps; ++step) {
    const MatrixXcd& wn = omega.m;
    MatrixXcd wnext = wn;
    bool converged = false;
    int iters = 0;
    for (; iters < opts.midpoint_iters; ++iters) {
      DensityMatrix mid{omega.basis, (wn + wnext) / 2.0, omega.hbar};
      const MatrixXcd h_mid = hf_generator(mid, v, n_particles, opts.include_exchange);
      const MatrixXcd u = unitary_exp(h_mid, dt / omega.hbar);
      MatrixXcd candidate = u * wn * u.adjoint();
      const double move = (candidate - wnext).norm();
      wnext.swap(candidate);
      if (move < opts.tol) { converged = true; ++iters; break; }
    }
    if (!converged)
      throw NumericsError("hf_evolve: midpoint iteration did not converge within " +
                          std::to_string(opts.midpoint_iters) + " iterations at step " +
                          std::to_string(step) + " (residual above " + std::to_string(opts.tol) + ")");
    omega.m = (wnext + wnext.adjoint().eval()) / 2.0;  // re-symmetrize roundoff
    const double t = dt * step;
    record_stats(t, iters);
    if ((opts.snapshot_stride > 0 && step % opts.snapshot_stride == 0) || step == n_steps)
      record_snapshot(t);
  }
  check_spectrum(omega, opts.spectrum_tol, t_final);
  return traj;
}

}  // namespace fermidyn::hf
