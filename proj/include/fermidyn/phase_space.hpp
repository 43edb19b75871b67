#ifndef FERMIDYN_PHASE_SPACE_HPP
#define FERMIDYN_PHASE_SPACE_HPP

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "fermidyn/density_matrix.hpp"

namespace fermidyn::phase {

// Uniform grid on [0, 2pi)^d (periodic) times a symmetric momentum box with
// spacing dp. The Wigner transform produces dp = hbar/2, which is the spacing
// on which the plane-wave Weyl pair is an exact bijection.
struct PhaseSpaceGrid {
  int dim = 1;
  int nx = 1;        // points per spatial axis, x_j = j * dx
  int np = 1;        // points per momentum axis (odd), p_i = (i - (np-1)/2) * dp
  double dx = 0.0;
  double dp = 0.0;
  double hbar = 0.0;

  long total_x() const;
  long total_p() const;
  double p_min() const { return -0.5 * double(np - 1) * dp; }
  double cell_volume() const;  // dx^d * dp^d
  double x_coord(int j) const { return dx * j; }
  double p_coord(int i) const { return p_min() + dp * i; }
};

struct PhaseSpaceDensity {
  PhaseSpaceGrid grid;
  // Layout: value(p_flat, x_flat) = values[p_flat * total_x + x_flat], both
  // flat indices row-major over their d axes.
  Eigen::ArrayXd values;

  double& at(long p_flat, long x_flat) { return values[p_flat * grid.total_x() + x_flat]; }
  double at(long p_flat, long x_flat) const { return values[p_flat * grid.total_x() + x_flat]; }

  double mass() const { return values.sum() * grid.cell_volume(); }
  double min_value() const { return values.minCoeff(); }
  bool has_negative_parts() const { return min_value() < 0.0; }  // allowed for Wigner data
};

// Discrete Wigner transform of a lattice density matrix. Momentum pairs
// (k, k') contribute at p = hbar (k + k')/2 with spatial frequency k - k';
// the y-integral is realized as the exact finite Fourier sum of the
// plane-wave basis. Normalization: sum f * cell_volume = hbar^d tr gamma.
// nx = 0 / s_max = 0 pick the smallest exact grid (nx = 4K+1) with 2x
// momentum headroom for force kicks (s_max = 4K).
PhaseSpaceDensity wigner_transform(const DensityMatrix& gamma, int nx = 0, int s_max = 0);

// Exact inverse of wigner_transform on the representable class:
//   gamma_{k,k'} = pi^d / nx^d * sum_x f(x, hbar (k+k')/2) e^{-i(k-k').x}.
// (The continuum kernel carries 1/hbar^d, which equals N in the bulk
// convention hbar = N^(-1/d).)
DensityMatrix weyl_quantize(const PhaseSpaceDensity& f,
                            std::shared_ptr<const MomentumLattice> basis);

// sum_{|beta| <= 1} integral |grad^beta f|, by quadrature with centered
// differences (periodic in x, one-sided at the momentum box edges).
double w11_norm(const PhaseSpaceDensity& f);

// F = -grad (V * rho_f), rho_f(x) = sum_p f(x, p) dp^d; convolution and
// gradient in the spatial Fourier representation (exact for band-limited V).
// Column a holds the force component along axis a at each x grid point.
Eigen::MatrixXd mean_field_force(const PhaseSpaceDensity& f, const Potential& v);

enum class KickScheme {
  CubicSemiLagrangian,  // periodic 4-point Lagrange interpolation in p
  Spectral,             // exact phase shift of the p-spectrum
};

struct VlasovOptions {
  KickScheme kick = KickScheme::CubicSemiLagrangian;
};

struct VlasovResult {
  PhaseSpaceDensity f;
  std::vector<std::string> warnings;
  double mass_initial = 0.0;
  double mass_final = 0.0;
};

// Strang splitting for  d/dt f + 2p . grad_x f = -F(f) . grad_p f.
// The transport velocity is 2p (the kinetic term is -hbar^2 Laplacian, no
// 1/2m), applied as an exact spectral shift in x; the force kick is a
// per-column shift in p. Both stages conserve the total mass exactly.
VlasovResult vlasov_evolve(const PhaseSpaceDensity& f0, const Potential& v, double t_final,
                           double dt, const VlasovOptions& opts = {});

// tr e^{i(alpha.x + beta.p)} gamma via the unitary exponential of the finite
// Hermitian generator in the working basis.
std::complex<double> semiclassical_observable(const DensityMatrix& gamma,
                                              const Eigen::Vector3d& alpha,
                                              const Eigen::Vector3d& beta);

// Same observable through the exact factorization e^{i alpha.x} e^{i beta.p}
// e^{i hbar alpha.beta / 2}, available when alpha is an integer lattice
// vector (then e^{i alpha.x} is the exact momentum shift).
std::complex<double> weyl_observable(const DensityMatrix& gamma, const KVec& alpha,
                                     const Eigen::Vector3d& beta);

}  // namespace fermidyn::phase

#endif
