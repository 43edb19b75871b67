#include "fermidyn/density_matrix.hpp"

#include <algorithm>

namespace fermidyn {

DensityMatrix make_density_matrix(std::shared_ptr<const MomentumLattice> basis,
                                  Eigen::MatrixXcd m, double hbar) {
  if (!basis) throw ConfigError("density matrix requires a basis");
  if (m.rows() != basis->size() || m.cols() != basis->size())
    throw ConfigError("density matrix shape does not match basis size");
  DensityMatrix dm{std::move(basis), std::move(m), hbar};
  if (dm.hermiticity_residual() > 1e-12 * std::max(1.0, dm.m.cwiseAbs().maxCoeff()))
    throw NumericsError("density matrix is not Hermitian");
  return dm;
}

DensityMatrix fermi_ball_projector(std::shared_ptr<const MomentumLattice> basis,
                                   const FermiBall& fb, double hbar) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(basis->size(), basis->size());
  for (const KVec& k : fb.members()) {
    auto idx = basis->index_of(k);
    if (!idx) throw ConfigError("Fermi ball member " + to_string(k) + " outside the lattice");
    m(*idx, *idx) = 1.0;
  }
  return DensityMatrix{std::move(basis), std::move(m), hbar};
}

DensityMatrix well_ground_state(std::shared_ptr<const MomentumLattice> basis,
                                const Potential& well, int n_particles, double hbar) {
  const int n = basis->size();
  if (n_particles <= 0 || n_particles > n)
    throw ConfigError("well ground state: particle number out of range");
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = hbar * hbar * double(norm2(basis->point(i)));
    for (int j = 0; j < n; ++j) {
      const double w = well.coeff(basis->point(i) - basis->point(j));
      if (w != 0.0) h(i, j) += w;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::MatrixXcd m = es.eigenvectors().leftCols(n_particles) *
                       es.eigenvectors().leftCols(n_particles).adjoint();
  return DensityMatrix{std::move(basis), std::move(m), hbar};
}

double trace_norm(const Eigen::MatrixXcd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  return svd.singularValues().sum();
}

double trace_norm_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (!a.same_basis(b)) throw ConfigError("trace_norm_distance: basis mismatch");
  // The difference is Hermitian, so the singular values are |eigenvalues|.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.m - b.m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

std::vector<Orbital> orbitals(const DensityMatrix& dm) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dm.m);
  std::vector<Orbital> out;
  for (int i = dm.size() - 1; i >= 0; --i)
    out.push_back({es.eigenvalues()(i), es.eigenvectors().col(i)});
  return out;
}

}  // namespace fermidyn
