#include "fermidyn/fock.hpp"

#include <bit>
#include <cmath>

namespace fermidyn::fock {

using std::complex;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

constexpr std::uint64_t bit(int i) { return std::uint64_t(1) << i; }

int parity_sign(std::uint64_t mask, int i) {
  return (std::popcount(mask & (bit(i) - 1)) & 1) ? -1 : 1;
}

// a*_i |mask>; zero if occupied.
std::optional<std::pair<std::uint64_t, int>> create(std::uint64_t mask, int i) {
  if (mask & bit(i)) return std::nullopt;
  return std::make_pair(mask | bit(i), parity_sign(mask, i));
}

// a_i |mask>; zero if empty.
std::optional<std::pair<std::uint64_t, int>> annihilate(std::uint64_t mask, int i) {
  if (!(mask & bit(i))) return std::nullopt;
  return std::make_pair(mask & ~bit(i), parity_sign(mask, i));
}

void index_modes(FockBasis& b) {
  for (int i = 0; i < int(b.modes.size()); ++i) b.mode_index[b.modes[std::size_t(i)]] = i;
  for (long s = 0; s < b.dim(); ++s) b.state_index[b.states[std::size_t(s)]] = s;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// All k-subsets of n bits in increasing numeric order (Gosper's hack).
std::vector<std::uint64_t> subsets(int n, int k, std::uint64_t shift = 0) {
  std::vector<std::uint64_t> out;
  if (k == 0) { out.push_back(0); return out; }
  std::uint64_t v = bit(k) - 1;
  const std::uint64_t limit = bit(n);
  while (v < limit) {
    out.push_back(v << shift);
    const std::uint64_t c = v & std::uint64_t(-std::int64_t(v));
    const std::uint64_t r = v + c;
    v = (((r ^ v) >> 2) / c) | r;
  }
  return out;
}

}  // namespace

std::optional<int> FockBasis::index_of_mode(const KVec& k) const {
  auto it = mode_index.find(k);
  if (it == mode_index.end()) return std::nullopt;
  return it->second;
}

FockBasis build_fock_basis(const std::vector<KVec>& modes, int n_particles) {
  if (modes.empty() || modes.size() > 64) throw ConfigError("fock basis needs 1..64 modes");
  if (n_particles <= 0 || n_particles > int(modes.size()))
    throw ConfigError("particle number out of range for the mode set");
  FockBasis b;
  b.modes = modes;
  b.n_particles = n_particles;
  b.states = subsets(int(modes.size()), n_particles);
  index_modes(b);
  return b;
}

FockBasis build_pair_basis(const std::vector<KVec>& particle_modes,
                           const std::vector<KVec>& hole_modes, int max_pairs) {
  const int np = int(particle_modes.size()), nh = int(hole_modes.size());
  if (np + nh == 0 || np + nh > 64) throw ConfigError("pair basis needs 1..64 modes");
  if (max_pairs < 0) throw ConfigError("max_pairs must be non-negative");
  double dim = 0;
  for (int m = 0; m <= max_pairs; ++m) dim += binomial(np, m) * binomial(nh, m);
  if (dim > 5e7) throw ResourceCapError("pair basis dimension too large");

  FockBasis b;
  b.modes = particle_modes;
  b.modes.insert(b.modes.end(), hole_modes.begin(), hole_modes.end());
  b.n_particle_modes = np;
  for (int m = 0; m <= std::min(max_pairs, std::min(np, nh)); ++m) {
    const auto pm = subsets(np, m);
    const auto hm = subsets(nh, m, std::uint64_t(np));
    for (std::uint64_t p : pm)
      for (std::uint64_t h : hm) b.states.push_back(p | h);
  }
  index_modes(b);
  return b;
}

FockState slater_state(std::shared_ptr<const FockBasis> basis, const std::vector<KVec>& occupied) {
  if (basis->is_pair_basis()) throw ConfigError("slater_state requires a fixed-N basis");
  if (int(occupied.size()) != basis->n_particles)
    throw ConfigError("slater_state: occupation set has wrong cardinality");
  std::uint64_t mask = 0;
  for (const KVec& k : occupied) {
    auto i = basis->index_of_mode(k);
    if (!i) throw ConfigError("slater_state: mode " + to_string(k) + " not in basis");
    if (mask & bit(*i)) throw ConfigError("slater_state: repeated mode " + to_string(k));
    mask |= bit(*i);
  }
  FockState psi{basis, VectorXcd::Zero(basis->dim())};
  psi.amps[basis->state_index.at(mask)] = 1.0;
  return psi;
}

FockState vacuum_state(std::shared_ptr<const FockBasis> basis) {
  if (!basis->is_pair_basis()) throw ConfigError("vacuum_state requires a pair basis");
  FockState psi{basis, VectorXcd::Zero(basis->dim())};
  psi.amps[basis->state_index.at(0)] = 1.0;
  return psi;
}

SparseC build_hamiltonian(const FockBasis& basis, const Potential& v,
                          const ScalingConstants& sc) {
  if (basis.is_pair_basis()) throw ConfigError("build_hamiltonian requires a fixed-N basis");
  const double h2 = sc.hbar * sc.hbar;
  const double coupling = 1.0 / (2.0 * basis.n_particles);
  std::vector<Eigen::Triplet<complex<double>>> trip;

  std::vector<int> occ;
  for (long s = 0; s < basis.dim(); ++s) {
    const std::uint64_t mask = basis.states[std::size_t(s)];
    occ.clear();
    double kinetic = 0.0;
    for (int i = 0; i < int(basis.modes.size()); ++i)
      if (mask & bit(i)) {
        occ.push_back(i);
        kinetic += h2 * double(norm2(basis.modes[std::size_t(i)]));
      }
    trip.emplace_back(int(s), int(s), kinetic);

    if (v.empty()) continue;
    for (int ip : occ) {
      for (int iq : occ) {
        if (ip == iq) continue;
        // apply a_p, a_q, a*_{q-k}, a*_{p+k} right to left
        const auto s1 = annihilate(mask, ip);
        const auto s2 = annihilate(s1->first, iq);
        for (const auto& [k, vk] : v.coeffs()) {
          const auto ipk = basis.index_of_mode(basis.modes[std::size_t(ip)] + k);
          const auto iqk = basis.index_of_mode(basis.modes[std::size_t(iq)] - k);
          if (!ipk || !iqk) continue;  // transfer leaves the truncated mode set
          const auto s3 = create(s2->first, *iqk);
          if (!s3) continue;
          const auto s4 = create(s3->first, *ipk);
          if (!s4) continue;
          const int sign = s1->second * s2->second * s3->second * s4->second;
          trip.emplace_back(int(basis.state_index.at(s4->first)), int(s),
                            coupling * vk * sign);
        }
      }
    }
  }
  SparseC h(basis.dim(), basis.dim());
  h.setFromTriplets(trip.begin(), trip.end());
  return h;
}

namespace {

FockState evolve_dense(const FockState& psi0, const SparseC& h, double angle) {
  const MatrixXcd dense(h);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(dense);
  VectorXcd y = es.eigenvectors().adjoint() * psi0.amps;
  for (long i = 0; i < y.size(); ++i)
    y[i] *= std::exp(complex<double>(0, -angle * es.eigenvalues()(i)));
  return FockState{psi0.basis, es.eigenvectors() * y};
}

// Lanczos propagation of one adaptive substep sequence; full
// reorthogonalization keeps the small basis numerically orthonormal.
FockState evolve_lanczos(const FockState& psi0, const SparseC& h, double angle, int m_max,
                         double tol) {
  VectorXcd psi = psi0.amps;
  double remaining = angle;
  const double total = std::abs(angle);
  const int sign = angle >= 0 ? 1 : -1;
  while (std::abs(remaining) > 1e-15 * std::max(total, 1.0)) {
    const double beta0 = psi.norm();
    const long n = psi.size();
    const int m = int(std::min<long>(m_max, n));
    MatrixXcd v(n, m + 1);
    VectorXd alpha(m), beta(m + 1);
    v.col(0) = psi / beta0;
    int built = m;
    for (int j = 0; j < m; ++j) {
      VectorXcd w = h * v.col(j);
      alpha(j) = (v.col(j).adjoint() * w).real()(0);
      w -= alpha(j) * v.col(j);
      if (j > 0) w -= beta(j) * v.col(j - 1);
      for (int i = 0; i <= j; ++i) w -= (v.col(i).adjoint() * w)(0) * v.col(i);
      beta(j + 1) = w.norm();
      if (beta(j + 1) < 1e-14) { built = j + 1; break; }  // happy breakdown
      if (j + 1 <= m) v.col(j + 1) = w / beta(j + 1);
    }
    MatrixXd t = MatrixXd::Zero(built, built);
    for (int j = 0; j < built; ++j) {
      t(j, j) = alpha(j);
      if (j + 1 < built) t(j, j + 1) = t(j + 1, j) = beta(j + 1);
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(t);
    double tau = remaining;
    VectorXcd y;
    for (;;) {
      VectorXcd phases(built);
      for (int i = 0; i < built; ++i)
        phases(i) = std::exp(complex<double>(0, -tau * es.eigenvalues()(i)));
      y = es.eigenvectors().cast<complex<double>>() *
          phases.asDiagonal() * es.eigenvectors().row(0).transpose().cast<complex<double>>();
      const bool exact = built < m || built == n;
      const double err = exact ? 0.0 : beta(built) * std::abs(y(built - 1)) * std::abs(tau);
      if (err <= tol * std::max(std::abs(tau) / total, 1e-3) || std::abs(tau) < 1e-12)
        break;
      tau /= 2.0;
    }
    psi = beta0 * (v.leftCols(built) * y);
    remaining -= tau;
    if (sign * remaining < 0) break;
  }
  return FockState{psi0.basis, psi};
}

}  // namespace

FockState evolve_exact(const FockState& psi0, const SparseC& h, double t,
                       const ScalingConstants& sc, const EvolveOptions& opts) {
  if (psi0.basis->dim() > opts.dimension_cap)
    throw ResourceCapError("evolve_exact: dimension " + std::to_string(psi0.basis->dim()) +
                           " exceeds the cap " + std::to_string(opts.dimension_cap));
  const double angle = t / sc.hbar;
  if (t == 0.0) return psi0;
  FockState out = (psi0.basis->dim() <= opts.dense_threshold)
                      ? evolve_dense(psi0, h, angle)
                      : evolve_lanczos(psi0, h, angle, opts.krylov_dim, opts.tol);
  const double drift = std::abs(out.norm() - psi0.norm());
  if (drift > 1e-10)
    throw NumericsError("evolve_exact: norm drift " + std::to_string(drift));
  return out;
}

DensityMatrix reduced_density_matrix(const FockState& psi,
                                     std::shared_ptr<const MomentumLattice> one_particle_basis,
                                     double hbar) {
  const FockBasis& b = *psi.basis;
  const int n_modes = int(b.modes.size());
  std::vector<int> lat_index(static_cast<std::size_t>(n_modes));
  for (int i = 0; i < n_modes; ++i) {
    auto li = one_particle_basis->index_of(b.modes[std::size_t(i)]);
    if (!li)
      throw ConfigError("reduced_density_matrix: mode " + to_string(b.modes[std::size_t(i)]) +
                        " missing from the one-particle basis");
    lat_index[std::size_t(i)] = *li;
  }
  MatrixXcd gamma = MatrixXcd::Zero(one_particle_basis->size(), one_particle_basis->size());
  for (long s = 0; s < b.dim(); ++s) {
    const complex<double> cs = psi.amps[s];
    if (cs == complex<double>(0.0)) continue;
    const std::uint64_t mask = b.states[std::size_t(s)];
    for (int i = 0; i < n_modes; ++i) {
      const auto s1 = annihilate(mask, i);
      if (!s1) continue;
      for (int j = 0; j < n_modes; ++j) {
        const auto s2 = create(s1->first, j);
        if (!s2) continue;
        auto it = b.state_index.find(s2->first);
        if (it == b.state_index.end()) continue;
        // gamma_{k,k'} = <psi, a*_{k'} a_k psi>, row = annihilated mode
        gamma(lat_index[std::size_t(i)], lat_index[std::size_t(j)]) +=
            std::conj(psi.amps[it->second]) * double(s1->second * s2->second) * cs;
      }
    }
  }
  return make_density_matrix(std::move(one_particle_basis), std::move(gamma), hbar);
}

namespace {

SparseC pair_creation_from_list(const FockBasis& basis,
                                const std::vector<std::pair<KVec, KVec>>& pairs,
                                double normalization) {
  std::vector<Eigen::Triplet<complex<double>>> trip;
  std::vector<std::pair<int, int>> idx;
  for (const auto& [p, h] : pairs) {
    auto ip = basis.index_of_mode(p), ih = basis.index_of_mode(h);
    if (!ip || !ih)
      throw ConfigError("pair operator: pair (" + to_string(p) + ", " + to_string(h) +
                        ") not representable in the basis");
    idx.emplace_back(*ip, *ih);
  }
  for (long s = 0; s < basis.dim(); ++s) {
    const std::uint64_t mask = basis.states[std::size_t(s)];
    for (const auto& [ip, ih] : idx) {
      const auto s1 = create(mask, ih);  // a*_p a*_h acts with a*_h first
      if (!s1) continue;
      const auto s2 = create(s1->first, ip);
      if (!s2) continue;
      auto it = basis.state_index.find(s2->first);
      if (it == basis.state_index.end()) continue;  // beyond the sector cap
      trip.emplace_back(int(it->second), int(s),
                        double(s1->second * s2->second) / normalization);
    }
  }
  SparseC m(basis.dim(), basis.dim());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace

SparseC pair_creation_delocalized(const FockBasis& basis, const FermiBall& fb, const KVec& k) {
  std::vector<std::pair<KVec, KVec>> pairs;
  for (int i = basis.n_particle_modes; i < int(basis.modes.size()); ++i) {
    const KVec h = basis.modes[std::size_t(i)];
    if (!fb.contains(h)) continue;
    const KVec p = h + k;
    if (fb.contains(p)) continue;
    if (basis.index_of_mode(p)) pairs.emplace_back(p, h);
  }
  if (pairs.empty()) throw ConfigError("pair_creation_delocalized: no pairs for k = " + to_string(k));
  return pair_creation_from_list(basis, pairs, 1.0);
}

SparseC pair_creation_patch(const FockBasis& basis, const FermiBall& fb,
                            const rpa::PatchDecomposition& pd, const KVec& k, int alpha) {
  const rpa::PairCount pc = rpa::pair_count(k, alpha, pd, fb);
  if (pc.count == 0)
    throw ConfigError("pair_creation_patch: zero normalization for k = " + to_string(k) +
                      ", patch " + std::to_string(alpha));
  std::vector<std::pair<KVec, KVec>> pairs;
  for (const KVec& h : pd.patch(alpha).points) {
    if (!fb.contains(h)) continue;
    const KVec p = h + k;
    if (fb.contains(p)) continue;
    auto member = pd.patch_of(p);
    if (member && *member == alpha) pairs.emplace_back(p, h);
  }
  // the basis must carry every pair of the lattice enumeration, otherwise the
  // operator would be silently truncated
  if (long(pairs.size()) != pc.count)
    throw ConfigError("pair_creation_patch: inconsistent pair enumeration");
  return pair_creation_from_list(basis, pairs, pc.n_exact);
}

namespace {

SparseC diagonal_op(const FockBasis& basis, std::uint64_t selector) {
  std::vector<Eigen::Triplet<complex<double>>> trip;
  for (long s = 0; s < basis.dim(); ++s)
    trip.emplace_back(int(s), int(s),
                      double(std::popcount(basis.states[std::size_t(s)] & selector)));
  SparseC m(basis.dim(), basis.dim());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace

SparseC number_operator(const FockBasis& basis) { return diagonal_op(basis, ~std::uint64_t(0)); }

SparseC particle_number_operator(const FockBasis& basis) {
  return diagonal_op(basis, bit(basis.n_particle_modes) - 1);
}

SparseC hole_number_operator(const FockBasis& basis) {
  return diagonal_op(basis, ~(bit(basis.n_particle_modes) - 1));
}

MaterializedExcitation materialize_pair_excitations(std::shared_ptr<const FockBasis> basis,
                                                    const FermiBall& fb,
                                                    const rpa::PatchDecomposition& pd,
                                                    const std::vector<rpa::RpaBlocks>& blocks,
                                                    const rpa::PairExcitationSpec& spec) {
  FockState psi = vacuum_state(basis);
  for (const rpa::BosonState& phi : spec.phis) {
    SparseC op(basis->dim(), basis->dim());
    for (const auto& [k, amp] : phi.amplitudes) {
      const rpa::RpaBlocks* blk = nullptr;
      for (const auto& b : blocks)
        if (b.k == k && !b.dropped) { blk = &b; break; }
      if (!blk) throw ConfigError("materialize: no blocks for mode k = " + to_string(k));
      if (amp.size() != blk->size())
        throw ConfigError("materialize: amplitude size mismatch at k = " + to_string(k));
      for (int j = 0; j < blk->size(); ++j) {
        if (amp(j) == complex<double>(0.0)) continue;
        const bool plus = j < blk->n_plus();
        const SparseC c = pair_creation_patch(*basis, fb, pd, plus ? k : -k,
                                              blk->order[std::size_t(j)]);
        op += amp(j) * c;
      }
    }
    psi.amps = (op * psi.amps).eval();
  }
  const double z = psi.norm();
  if (z == 0.0) throw NumericsError("materialize: pair excitation state vanished");
  psi.amps /= z;
  return {std::move(psi), z};
}

}  // namespace fermidyn::fock
