#include "fermidyn/rpa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fermidyn::rpa {

using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

bool in_positive_half(const KVec& k) {
  if (k[2] != 0) return k[2] > 0;
  if (k[1] != 0) return k[1] > 0;
  return k[0] > 0;
}

struct ZonalCells {
  double theta_cap;                  // polar cap boundary (cap is cell 0)
  std::vector<double> band_bounds;   // theta_cap = b_0 < b_1 < ... < b_B = pi/2
  std::vector<int> band_counts;      // azimuthal cells per band
};

// Equal-area layout: cap of area tau, then collars whose areas are integer
// multiples of tau, azimuthally subdivided.
ZonalCells zonal_layout(int n_northern) {
  ZonalCells z;
  if (n_northern == 1) {
    z.theta_cap = M_PI / 2.0;
    return z;
  }
  const double tau = 2.0 * M_PI / n_northern;
  z.theta_cap = std::acos(1.0 - 1.0 / n_northern);
  const int remaining = n_northern - 1;
  const double ideal_height = std::sqrt(tau);
  int n_bands = std::max(1, int(std::lround((M_PI / 2.0 - z.theta_cap) / ideal_height)));
  n_bands = std::min(n_bands, remaining);

  // apportion cells to bands by provisional equal-theta areas (largest remainder)
  std::vector<double> quota(static_cast<std::size_t>(n_bands));
  const double h = (M_PI / 2.0 - z.theta_cap) / n_bands;
  double total_area = std::cos(z.theta_cap);
  for (int i = 0; i < n_bands; ++i)
    quota[std::size_t(i)] = remaining *
                            (std::cos(z.theta_cap + i * h) - std::cos(z.theta_cap + (i + 1) * h)) /
                            total_area;
  std::vector<int> counts(static_cast<std::size_t>(n_bands), 1);
  int assigned = n_bands;
  for (int i = 0; i < n_bands; ++i) {
    int extra = int(std::floor(quota[std::size_t(i)])) - 1;
    if (extra > 0) { counts[std::size_t(i)] += extra; assigned += extra; }
  }
  while (assigned < remaining) {  // hand out leftovers by largest fractional part
    int best = 0;
    double best_frac = -1.0;
    for (int i = 0; i < n_bands; ++i) {
      const double frac = quota[std::size_t(i)] - counts[std::size_t(i)];
      if (frac > best_frac) { best_frac = frac; best = i; }
    }
    ++counts[std::size_t(best)];
    ++assigned;
  }
  // final boundaries give every cell area exactly tau
  z.band_bounds.push_back(z.theta_cap);
  double c = std::cos(z.theta_cap);
  for (int i = 0; i < n_bands; ++i) {
    c -= counts[std::size_t(i)] * tau / (2.0 * M_PI);
    z.band_bounds.push_back(std::acos(std::clamp(c, 0.0, 1.0)));
  }
  z.band_bounds.back() = M_PI / 2.0;  // telescoping lands here up to roundoff
  z.band_counts = counts;
  return z;
}

struct CellId {
  int band;  // -1 = polar cap
  int sector;
};

// Cell of a direction in the northern layout, with the uniform angular margin
// removed from every boundary; nullopt marks corridor points.
std::optional<CellId> northern_cell(const ZonalCells& z, double theta, double phi, double margin) {
  if (theta <= z.theta_cap - (z.band_bounds.empty() ? 0.0 : margin)) {
    if (z.band_bounds.empty() && theta > z.theta_cap - margin) return std::nullopt;
    return CellId{-1, 0};
  }
  if (z.band_bounds.empty()) return std::nullopt;  // single-cap layout, inside margin
  for (int b = 0; b < int(z.band_counts.size()); ++b) {
    const double lo = z.band_bounds[std::size_t(b)], hi = z.band_bounds[std::size_t(b) + 1];
    const bool last = (b + 1 == int(z.band_counts.size()));
    if (theta < lo || (last ? theta > hi : theta >= hi)) continue;
    if (theta < lo + margin || theta > hi - margin) return std::nullopt;
    const int m = z.band_counts[std::size_t(b)];
    const double width = 2.0 * M_PI / m;
    int sector = int(std::floor(phi / width));
    sector = std::clamp(sector, 0, m - 1);
    if (m > 1) {
      const double phi_center = (sector + 0.5) * width;
      const double sin_mid = std::sin((lo + hi) / 2.0);
      const double phi_margin = margin / std::max(sin_mid, 1e-12);
      if (std::abs(phi - phi_center) > width / 2.0 - phi_margin) return std::nullopt;
    }
    return CellId{b, sector};
  }
  return std::nullopt;
}

int cell_index(const ZonalCells& z, const CellId& c) {
  if (c.band < 0) return 0;
  int idx = 1;
  for (int b = 0; b < c.band; ++b) idx += z.band_counts[std::size_t(b)];
  return idx + c.sector;
}

Vector3d cell_center(const ZonalCells& z, int index) {
  if (index == 0) return Vector3d(0, 0, 1);
  int idx = index - 1;
  for (int b = 0; b < int(z.band_counts.size()); ++b) {
    const int m = z.band_counts[std::size_t(b)];
    if (idx < m) {
      const double theta = (z.band_bounds[std::size_t(b)] + z.band_bounds[std::size_t(b) + 1]) / 2.0;
      const double phi = (idx + 0.5) * (2.0 * M_PI / m);
      return Vector3d(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                      std::cos(theta));
    }
    idx -= m;
  }
  throw ConfigError("patch index out of range");
}

}  // namespace

PatchDecomposition PatchDecomposition::build(const FermiBall& fb, int patch_count,
                                             double shell_halfwidth, double required_corridor) {
  if (fb.dimension() != 3) throw ConfigError("patch decomposition requires dimension 3");
  if (patch_count < 2 || patch_count % 2 != 0)
    throw ConfigError("patch count must be even and >= 2");
  if (!(shell_halfwidth > 0)) throw ConfigError("patch shell is empty (zero half-width)");

  PatchDecomposition pd;
  pd.k_f_ = fb.k_f();
  pd.shell_halfwidth_ = shell_halfwidth;
  const int half = patch_count / 2;
  const ZonalCells layout = zonal_layout(half);

  // shell lattice points
  const double r_lo = std::max(fb.k_f() - shell_halfwidth, 0.0);
  const double r_hi = fb.k_f() + shell_halfwidth;
  std::vector<KVec> shell;
  const int kmax = int(std::floor(r_hi));
  for (int x = -kmax; x <= kmax; ++x)
    for (int y = -kmax; y <= kmax; ++y)
      for (int z = -kmax; z <= kmax; ++z) {
        KVec q{x, y, z};
        const double q2 = double(norm2(q));
        if (q2 >= r_lo * r_lo && q2 <= r_hi * r_hi && q != KVec{0, 0, 0}) shell.push_back(q);
      }
  std::sort(shell.begin(), shell.end());
  if (shell.empty()) throw ConfigError("patch shell contains no lattice points");

  // Smallest nominal cell extent bounds the margin search.
  double min_extent = layout.theta_cap;
  for (int b = 0; b < int(layout.band_counts.size()); ++b) {
    min_extent = std::min(min_extent, layout.band_bounds[std::size_t(b) + 1] -
                                          layout.band_bounds[std::size_t(b)]);
    min_extent = std::min(min_extent, 2.0 * M_PI / layout.band_counts[std::size_t(b)]);
  }

  const double margin_step = std::max(min_extent / 64.0, 1e-4);
  std::string last_violation;
  for (double margin = 0.0; margin <= min_extent / 2.0 + 1e-12; margin += margin_step) {
    std::unordered_map<KVec, int, KVecHash> membership;
    std::vector<Patch> patches(static_cast<std::size_t>(patch_count));
    for (int a = 0; a < patch_count; ++a)
      patches[std::size_t(a)].center =
          (a < half ? 1.0 : -1.0) * fb.k_f() * cell_center(layout, a % half);

    for (const KVec& q : shell) {
      const bool north = in_positive_half(q);
      const KVec qn = north ? q : -q;
      const double r = norm(qn);
      const double theta = std::acos(std::clamp(double(qn[2]) / r, -1.0, 1.0));
      double phi = std::atan2(double(qn[1]), double(qn[0]));
      if (phi < 0) phi += 2.0 * M_PI;
      const auto cell = northern_cell(layout, theta, phi, margin);
      if (!cell) continue;
      const int alpha = cell_index(layout, *cell) + (north ? 0 : half);
      membership[q] = alpha;
      patches[std::size_t(alpha)].points.push_back(q);
    }

    // exhaustive pairwise corridor check via neighbor scan
    const int reach = int(std::ceil(required_corridor));
    double min_dist2 = std::numeric_limits<double>::infinity();
    std::pair<int, int> violating{-1, -1};
    KVec at{}, other{};
    for (const auto& [q, alpha] : membership) {
      for (int dx = -reach; dx <= reach; ++dx)
        for (int dy = -reach; dy <= reach; ++dy)
          for (int dz = -reach; dz <= reach; ++dz) {
            const KVec q2 = q + KVec{dx, dy, dz};
            auto it = membership.find(q2);
            if (it == membership.end() || it->second == alpha) continue;
            const double d2 = double(norm2(q2 - q));
            if (d2 < min_dist2) {
              min_dist2 = d2;
              violating = {alpha, it->second};
              at = q; other = q2;
            }
          }
    }
    const double realized = std::isfinite(min_dist2) ? std::sqrt(min_dist2)
                                                     : std::numeric_limits<double>::infinity();
    if (realized > required_corridor) {
      bool any_empty = false;
      for (int a = 0; a < patch_count; ++a)
        if (patches[std::size_t(a)].points.empty()) {
          any_empty = true;
          last_violation = "patch " + std::to_string(a) + " shrank to zero shell points";
        }
      if (any_empty) break;
      pd.margin_ = margin;
      pd.realized_corridor_ = realized;
      pd.patches_ = std::move(patches);
      pd.membership_ = std::move(membership);
      return pd;
    }
    last_violation = "patches " + std::to_string(violating.first) + " and " +
                     std::to_string(violating.second) + " at points " + to_string(at) + ", " +
                     to_string(other) + " (distance " + std::to_string(realized) + ")";
  }
  throw ConfigError("corridor constraint (width > " + std::to_string(required_corridor) +
                    ") infeasible for k_F = " + std::to_string(fb.k_f()) + ", M = " +
                    std::to_string(patch_count) +
                    (last_violation.empty() ? "" : "; closest pair: " + last_violation));
}

PatchDecomposition PatchDecomposition::build(const FermiBall& fb, int patch_count,
                                             const Potential& v) {
  const double r = v.support_radius();
  if (r <= 0) throw ConfigError("patch decomposition needs an interaction with nonempty support");
  return build(fb, patch_count, r, 2.0 * r);
}

std::optional<int> PatchDecomposition::patch_of(const KVec& q) const {
  auto it = membership_.find(q);
  if (it == membership_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> IndexSets::all() const {
  std::vector<int> v = i_plus;
  v.insert(v.end(), i_minus.begin(), i_minus.end());
  return v;
}

IndexSets index_sets(const KVec& k, const PatchDecomposition& pd, double delta, long n_particles) {
  if (!(delta > 0)) throw ConfigError("index_sets: delta must be positive");
  const double threshold = std::pow(double(n_particles), -delta);
  IndexSets sets;
  for (int a = 0; a < pd.patch_count(); ++a) {
    const Vector3d w = pd.patch(a).center.normalized();
    const double dot = k[0] * w(0) + k[1] * w(1) + k[2] * w(2);
    if (dot >= threshold) sets.i_plus.push_back(a);
    else if (-dot >= threshold) sets.i_minus.push_back(a);
  }
  return sets;
}

PairCount pair_count(const KVec& k, int alpha, const PatchDecomposition& pd, const FermiBall& fb) {
  PairCount pc;
  const Patch& patch = pd.patch(alpha);
  for (const KVec& h : patch.points) {
    if (!fb.contains(h)) continue;  // holes live inside the ball
    const KVec p = h + k;
    if (fb.contains(p)) continue;  // particles outside
    auto member = pd.patch_of(p);
    if (member && *member == alpha) ++pc.count;
  }
  pc.n_exact = std::sqrt(double(pc.count));
  const Vector3d w = patch.center.normalized();
  const double dot = std::abs(k[0] * w(0) + k[1] * w(1) + k[2] * w(2));
  pc.n_approx = std::sqrt(4.0 * M_PI * fb.k_f_squared() / pd.patch_count() * dot);
  return pc;
}

RpaBlocks build_blocks(const KVec& k, const PatchDecomposition& pd, const Potential& v,
                       const FermiBall& fb, const fermidyn::ScalingConstants& sc, double delta) {
  if (sc.convention != HbarConvention::Rpa)
    throw ConfigError("build_blocks requires the RPA hbar convention");
  RpaBlocks blocks;
  blocks.k = k;
  const long n_particles = fb.particle_number();
  IndexSets raw = index_sets(k, pd, delta, n_particles);
  if (raw.i_plus.empty() && raw.i_minus.empty()) {
    blocks.dropped = true;
    blocks.drop_reason = "empty index set (cut-off excluded every patch)";
    return blocks;
  }

  // exclude patches whose pair operator is undefined (zero pair count)
  std::vector<double> norms;
  auto filter = [&](const std::vector<int>& in, const KVec& kk, std::vector<int>& out) {
    for (int a : in) {
      const PairCount pc = pair_count(kk, a, pd, fb);
      if (pc.count == 0) {
        blocks.dropped_patches.push_back("patch " + std::to_string(a) + " for k = " +
                                         to_string(kk) + ": zero pair count");
        continue;
      }
      out.push_back(a);
      norms.push_back(pc.n_exact);
    }
  };
  filter(raw.i_plus, k, blocks.idx.i_plus);
  filter(raw.i_minus, -k, blocks.idx.i_minus);
  blocks.order = blocks.idx.all();
  if (blocks.order.empty()) {
    blocks.dropped = true;
    blocks.drop_reason = "no patch with a nonzero pair count";
    return blocks;
  }

  const int n = blocks.size();
  blocks.n = Eigen::Map<VectorXd>(norms.data(), n);
  blocks.D = MatrixXd::Zero(n, n);
  blocks.W = MatrixXd::Zero(n, n);
  blocks.Wt = MatrixXd::Zero(n, n);
  const double kn = norm(k);
  for (int i = 0; i < n; ++i) {
    const Vector3d w = pd.patch(blocks.order[std::size_t(i)]).center.normalized();
    blocks.D(i, i) = std::abs(k[0] * w(0) + k[1] * w(1) + k[2] * w(2)) / kn;
  }
  const double vk = v.coeff(k);
  if (vk != 0.0) {
    const double pref = vk / (2.0 * sc.hbar * sc.kappa * double(n_particles) * kn);
    const int np = blocks.n_plus();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const bool same_side = (i < np) == (j < np);
        const double val = pref * blocks.n(i) * blocks.n(j);
        (same_side ? blocks.W(i, j) : blocks.Wt(i, j)) = val;
      }
  }
  return blocks;
}

namespace {

MatrixXd sym_eig_apply(const MatrixXd& a, double (*fn)(double), const char* what,
                       bool require_pd) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es((a + a.transpose()) / 2.0);
  const double floor_tol = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (require_pd && es.eigenvalues().minCoeff() <= floor_tol)
    throw NumericsError(std::string(what) + ": matrix not positive definite (min eigenvalue " +
                        std::to_string(es.eigenvalues().minCoeff()) + ")");
  VectorXd mapped = es.eigenvalues().unaryExpr(fn);
  return es.eigenvectors() * mapped.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

BogoliubovKernel bogoliubov_kernel(const MatrixXd& D, const MatrixXd& W, const MatrixXd& Wt) {
  const MatrixXd a = D + W - Wt;
  const MatrixXd b = D + W + Wt;
  const MatrixXd a_half = sym_eig_apply(a, [](double x) { return std::sqrt(x); },
                                        "bogoliubov_kernel: D+W-Wt", true);
  BogoliubovKernel out;
  out.E = sym_eig_apply(a_half * b * a_half, [](double x) { return std::sqrt(std::max(x, 0.0)); },
                        "bogoliubov_kernel: inner product", true);
  const MatrixXd e_invhalf = sym_eig_apply(out.E, [](double x) { return 1.0 / std::sqrt(x); },
                                           "bogoliubov_kernel: E", true);
  out.S = a_half * e_invhalf;
  out.K = 0.5 * sym_eig_apply(out.S * out.S.transpose(), [](double x) { return std::log(x); },
                              "bogoliubov_kernel: S S^T", true);
  return out;
}

DiagonalizedBlock diagonalized_block(const MatrixXd& D, const MatrixXd& W, const MatrixXd& Wt,
                                     const MatrixXd& K) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es((K + K.transpose()) / 2.0);
  const MatrixXd ch = es.eigenvectors() *
                      es.eigenvalues().unaryExpr([](double x) { return std::cosh(x); }).asDiagonal() *
                      es.eigenvectors().transpose();
  const MatrixXd sh = es.eigenvectors() *
                      es.eigenvalues().unaryExpr([](double x) { return std::sinh(x); }).asDiagonal() *
                      es.eigenvectors().transpose();
  const MatrixXd dw = D + W;
  DiagonalizedBlock out;
  out.Kfrak = ch * dw * ch + sh * dw * sh + ch * Wt * sh + sh * Wt * ch;
  out.residual = sh * dw * ch + ch * dw * sh + ch * Wt * ch + sh * Wt * sh;
  return out;
}

EnergyCorrection rpa_energy_correction(const std::vector<RpaBlocks>& blocks,
                                       const fermidyn::ScalingConstants& sc) {
  EnergyCorrection ec;
  for (const RpaBlocks& b : blocks) {
    if (b.dropped) continue;
    const BogoliubovKernel kern = bogoliubov_kernel(b.D, b.W, b.Wt);
    const double term = sc.hbar * sc.kappa * norm(b.k) * (kern.E - b.D - b.W).trace();
    ec.per_mode.emplace_back(b.k, term);
    ec.total += term;
  }
  return ec;
}

Eigen::VectorXd excitation_spectrum(const RpaBlocks& blocks, const fermidyn::ScalingConstants& sc) {
  if (blocks.dropped) throw ConfigError("excitation_spectrum: mode was dropped");
  const BogoliubovKernel kern = bogoliubov_kernel(blocks.D, blocks.W, blocks.Wt);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(2.0 * sc.hbar * sc.kappa * norm(blocks.k) * kern.E,
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double linearization_residual(const KVec& k, int alpha, const PatchDecomposition& pd,
                              const FermiBall& fb, const fermidyn::ScalingConstants& sc) {
  const Patch& patch = pd.patch(alpha);
  const Vector3d w = patch.center.normalized();
  const double dot = k[0] * w(0) + k[1] * w(1) + k[2] * w(2);
  const double h2 = sc.hbar * sc.hbar;
  const double target = 2.0 * h2 * fb.k_f() * dot;
  if (!(target > 0))
    throw ConfigError("linearization_residual: alpha is not in I_k^+ for this k");
  double worst = 0.0;
  long pairs = 0;
  for (const KVec& h : patch.points) {
    if (!fb.contains(h)) continue;
    const KVec p = h + k;
    if (fb.contains(p)) continue;
    auto member = pd.patch_of(p);
    if (!member || *member != alpha) continue;
    ++pairs;
    // pair energy e(p) + e(h) = hbar^2 (|p|^2 - |h|^2), positive by construction
    const double de = h2 * double(norm2(p) - norm2(h));
    worst = std::max(worst, std::abs(de - target) / target);
  }
  if (pairs == 0) throw NumericsError("linearization_residual: empty pair set");
  return worst;
}

double BosonState::norm() const {
  double s = 0.0;
  for (const auto& [k, v] : amplitudes) s += v.squaredNorm();
  return std::sqrt(s);
}

void BosonState::normalize() {
  const double s = norm();
  if (s == 0.0) throw ConfigError("cannot normalize a zero boson state");
  for (auto& [k, v] : amplitudes) v /= s;
}

BosonState boson_evolve(const BosonState& phi, const std::vector<RpaBlocks>& blocks,
                        const std::vector<DiagonalizedBlock>& diag,
                        const fermidyn::ScalingConstants& sc, double t) {
  BosonState out;
  for (const auto& [k, amp] : phi.amplitudes) {
    const RpaBlocks* blk = nullptr;
    const DiagonalizedBlock* dg = nullptr;
    for (std::size_t i = 0; i < blocks.size(); ++i)
      if (blocks[i].k == k && !blocks[i].dropped) { blk = &blocks[i]; dg = &diag[i]; break; }
    if (!blk) throw ConfigError("boson_evolve: unsupported mode k = " + to_string(k));
    if (amp.size() != blk->size())
      throw ConfigError("boson_evolve: amplitude size mismatch at k = " + to_string(k));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(dg->Kfrak);
    Eigen::VectorXcd phases(amp.size());
    const double scale = 2.0 * sc.kappa * norm(k) * t;
    for (int i = 0; i < amp.size(); ++i)
      phases(i) = std::exp(std::complex<double>(0, -scale * es.eigenvalues()(i)));
    out.amplitudes[k] = es.eigenvectors().cast<std::complex<double>>() * phases.asDiagonal() *
                        es.eigenvectors().transpose().cast<std::complex<double>>() * amp;
  }
  return out;
}

PairExcitationSpec pair_excitation_state(const std::vector<BosonState>& phis, long n_particles,
                                         double delta) {
  if (phis.empty()) throw ConfigError("pair_excitation_state: m must be at least 1");
  PairExcitationSpec spec;
  for (const BosonState& phi : phis) {
    if (std::abs(phi.norm() - 1.0) > 1e-9)
      throw ConfigError("pair_excitation_state: one-boson states must be normalized");
    spec.phis.push_back(phi);
  }
  const double m = double(phis.size());
  double double_factorial = 1.0;  // (2m-1)!!
  for (double j = 2.0 * m - 1.0; j > 1.0; j -= 2.0) double_factorial *= j;
  spec.m_condition_lhs = m * m * m * double_factorial;
  spec.m_condition_rhs = std::pow(double(n_particles), delta);
  spec.m_condition_ok = spec.m_condition_lhs < spec.m_condition_rhs;
  return spec;
}

}  // namespace fermidyn::rpa
