#ifndef FERMIDYN_DENSITY_MATRIX_HPP
#define FERMIDYN_DENSITY_MATRIX_HPP

#include <Eigen/Dense>
#include <memory>

#include "fermidyn/lattice.hpp"

namespace fermidyn {

// Hermitian one-particle operator in the ordered plane-wave basis of a
// MomentumLattice. Entries m(i, j) = <f_{k_i}| gamma |f_{k_j}>.
struct DensityMatrix {
  std::shared_ptr<const MomentumLattice> basis;
  Eigen::MatrixXcd m;
  double hbar = 0.0;

  int size() const { return int(m.rows()); }
  double trace() const { return m.trace().real(); }

  double hermiticity_residual() const { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }
  double idempotency_residual() const { return (m * m - m).norm(); }  // Hilbert-Schmidt

  bool same_basis(const DensityMatrix& other) const {
    return basis && other.basis &&
           (basis == other.basis || basis->content_hash() == other.basis->content_hash());
  }
};

DensityMatrix make_density_matrix(std::shared_ptr<const MomentumLattice> basis,
                                  Eigen::MatrixXcd m, double hbar);

// Projector onto the plane waves of the Fermi ball, embedded in `basis`.
DensityMatrix fermi_ball_projector(std::shared_ptr<const MomentumLattice> basis,
                                   const FermiBall& fb, double hbar);

// Projector onto the lowest n eigenvectors of the one-body Hamiltonian
// hbar^2 |k|^2 + w(x), where w has Fourier coefficients `well`. Used to
// prepare quench initial data (confined ground state, then the confinement is
// switched off).
DensityMatrix well_ground_state(std::shared_ptr<const MomentumLattice> basis,
                                const Potential& well, int n_particles, double hbar);

// Sum of singular values of A - B (equal-basis check enforced).
double trace_norm_distance(const DensityMatrix& a, const DensityMatrix& b);

// Trace norm of an arbitrary matrix, via singular values.
double trace_norm(const Eigen::MatrixXcd& a);

// Spectral decomposition (descending occupation) for display purposes.
struct Orbital {
  double occupation;
  Eigen::VectorXcd amplitudes;
};
std::vector<Orbital> orbitals(const DensityMatrix& dm);

}  // namespace fermidyn

#endif
