#ifndef FERMIDYN_FOCK_HPP
#define FERMIDYN_FOCK_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <memory>
#include <optional>

#include "fermidyn/density_matrix.hpp"
#include "fermidyn/rpa.hpp"

namespace fermidyn::fock {

using SparseC = Eigen::SparseMatrix<std::complex<double>>;

// Occupation-number basis over up to 64 ordered modes. Two flavors:
//  - fixed particle number (the torus oracle): all N-subsets as bitmasks;
//  - pair sectors (particle-hole frame): equal numbers of particle and hole
//    excitations up to max_pairs, with particle modes in the low bits.
// The sign convention is normal order by mode index: a*_i flips the sign by
// the parity of the occupied modes below i.
struct FockBasis {
  std::vector<KVec> modes;
  int n_particles = -1;     // -1 for pair-sector bases
  int n_particle_modes = 0; // pair bases: modes[0 .. npm) are particle modes
  std::vector<std::uint64_t> states;  // deterministic enumeration order
  std::unordered_map<std::uint64_t, long> state_index;
  std::unordered_map<KVec, int, KVecHash> mode_index;

  long dim() const { return long(states.size()); }
  bool is_pair_basis() const { return n_particles < 0; }
  std::optional<int> index_of_mode(const KVec& k) const;
};

FockBasis build_fock_basis(const std::vector<KVec>& modes, int n_particles);
FockBasis build_pair_basis(const std::vector<KVec>& particle_modes,
                           const std::vector<KVec>& hole_modes, int max_pairs);

struct FockState {
  std::shared_ptr<const FockBasis> basis;
  Eigen::VectorXcd amps;

  double norm() const { return amps.norm(); }
};

FockState slater_state(std::shared_ptr<const FockBasis> basis, const std::vector<KVec>& occupied);
FockState vacuum_state(std::shared_ptr<const FockBasis> basis);

// Second-quantized Hamiltonian restricted to the fixed-N sector:
//   hbar^2 sum |p|^2 a*_p a_p
//   + (1/2N) sum_k V(k) a*_{p+k} a*_{q-k} a_q a_p,
// with momentum transfers leaving the mode set dropped (the same truncation
// rule as the Hartree-Fock kernels, so dynamics comparisons are like for
// like).
SparseC build_hamiltonian(const FockBasis& basis, const Potential& v, const ScalingConstants& sc);

struct EvolveOptions {
  long dimension_cap = 200000;
  long dense_threshold = 2000;  // full eigendecomposition below this size
  int krylov_dim = 48;
  double tol = 1e-12;
};

// psi(t) = e^{-iHt/hbar} psi0; dense eigensolver at small dimension, Lanczos
// with adaptive substeps above it.
FockState evolve_exact(const FockState& psi0, const SparseC& h, double t,
                       const ScalingConstants& sc, const EvolveOptions& opts = {});

// gamma_{k,k'} = <psi, a*_{k'} a_k psi> over the given one-particle basis;
// trace N for normalized psi.
DensityMatrix reduced_density_matrix(const FockState& psi,
                                     std::shared_ptr<const MomentumLattice> one_particle_basis,
                                     double hbar);

// Pair creation operators on a pair-sector basis (particle-hole frame, so
// both factors are creations).
//   b*(k)       = sum_{p - h = k} a*_p a*_h        over the whole shell
//   b*_alpha(k) = (1/n_alpha(k)) sum restricted to patch alpha
// Every (p, h) pair of the lattice enumeration must be representable in the
// basis; an incomplete materialization throws.
SparseC pair_creation_delocalized(const FockBasis& basis, const FermiBall& fb, const KVec& k);
SparseC pair_creation_patch(const FockBasis& basis, const FermiBall& fb,
                            const rpa::PatchDecomposition& pd, const KVec& k, int alpha);

// Diagonal excitation-number operators (pair bases).
SparseC number_operator(const FockBasis& basis);
SparseC particle_number_operator(const FockBasis& basis);
SparseC hole_number_operator(const FockBasis& basis);

struct MaterializedExcitation {
  FockState state;  // normalized
  double z_m;       // norm of the raw product c*(phi_1)...c*(phi_m) |vac>
};

// Materializes (1/Z_m) c*(phi_1) ... c*(phi_m) |vac> with
// c*(phi) = sum_k sum_alpha (phi(k))_alpha c*_alpha(k), where c*_alpha(k) is
// the patch operator for k (alpha in I_k^+) or -k (alpha in I_-k^+).
MaterializedExcitation materialize_pair_excitations(std::shared_ptr<const FockBasis> basis,
                                                    const FermiBall& fb,
                                                    const rpa::PatchDecomposition& pd,
                                                    const std::vector<rpa::RpaBlocks>& blocks,
                                                    const rpa::PairExcitationSpec& spec);

}  // namespace fermidyn::fock

#endif
