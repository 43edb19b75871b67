#include "fermidyn/phase_space.hpp"

#include <cmath>
#include <unsupported/Eigen/FFT>

namespace fermidyn::phase {

using Eigen::ArrayXd;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using std::complex;

namespace {

long ipow(long b, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Largest |k_i| over lattice points and axes.
int component_cutoff(const MomentumLattice& lat) {
  int k = 0;
  for (const KVec& p : lat.points())
    for (int c : p) k = std::max(k, std::abs(c));
  return k;
}

void decode(long flat, int dim, int n, int* out) {
  for (int a = dim - 1; a >= 0; --a) { out[a] = int(flat % n); flat /= n; }
}

}  // namespace

long PhaseSpaceGrid::total_x() const { return ipow(nx, dim); }
long PhaseSpaceGrid::total_p() const { return ipow(np, dim); }
double PhaseSpaceGrid::cell_volume() const { return std::pow(dx * dp, dim); }

PhaseSpaceDensity wigner_transform(const DensityMatrix& gamma, int nx, int s_max) {
  const MomentumLattice& lat = *gamma.basis;
  const int d = lat.dimension();
  if (!(gamma.hbar > 0)) throw ConfigError("wigner_transform: hbar must be positive");
  const int kc = component_cutoff(lat);
  if (nx == 0) nx = 4 * kc + 1;
  if (s_max == 0) s_max = 4 * kc;  // 2x headroom over max |hbar k| for force kicks
  if (nx < 4 * kc + 1)
    throw ConfigError("wigner_transform: nx below the alias-free minimum 4K+1");
  if (s_max < 2 * kc)
    throw ConfigError("wigner_transform: momentum grid too small to hold hbar * lattice momenta");

  PhaseSpaceGrid grid;
  grid.dim = d;
  grid.nx = nx;
  grid.np = 2 * s_max + 1;
  grid.dx = 2.0 * M_PI / nx;
  grid.dp = gamma.hbar / 2.0;
  grid.hbar = gamma.hbar;

  const long NX = grid.total_x();
  PhaseSpaceDensity f{grid, ArrayXd::Zero(NX * grid.total_p())};

  // Per-axis tables e^{i u x_j}, u in [-2K, 2K].
  std::vector<VectorXcd> phase(static_cast<std::size_t>(4 * kc + 1));
  for (int u = -2 * kc; u <= 2 * kc; ++u) {
    VectorXcd col(nx);
    for (int j = 0; j < nx; ++j) col(j) = std::exp(complex<double>(0, u * grid.x_coord(j)));
    phase[std::size_t(u + 2 * kc)] = col;
  }

  const double scale = std::pow(1.0 / M_PI, d);
  const int n = lat.size();
  std::vector<int> xi(static_cast<std::size_t>(d));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const complex<double> c = gamma.m(a, b) * scale;
      if (c == complex<double>(0.0)) continue;
      const KVec s = lat.point(a) + lat.point(b);
      const KVec u = lat.point(a) - lat.point(b);
      long p_flat = 0;
      for (int ax = 0; ax < d; ++ax) p_flat = p_flat * grid.np + (s[std::size_t(ax)] + s_max);
      double* row = f.values.data() + p_flat * NX;
      for (long x = 0; x < NX; ++x) {
        decode(x, d, nx, xi.data());
        complex<double> ph = 1.0;
        for (int ax = 0; ax < d; ++ax)
          ph *= phase[std::size_t(u[std::size_t(ax)] + 2 * kc)](xi[std::size_t(ax)]);
        row[x] += (c * ph).real();
      }
    }
  }
  return f;
}

DensityMatrix weyl_quantize(const PhaseSpaceDensity& f,
                            std::shared_ptr<const MomentumLattice> basis) {
  const int d = basis->dimension();
  const PhaseSpaceGrid& g = f.grid;
  if (g.dim != d) throw ConfigError("weyl_quantize: dimension mismatch");
  if (std::abs(g.dp - g.hbar / 2.0) > 1e-9 * g.hbar)
    throw ConfigError("weyl_quantize: incompatible grids (dp must equal hbar/2)");
  const int kc = component_cutoff(*basis);
  const int s_max = (g.np - 1) / 2;
  if (g.nx < 4 * kc + 1 || s_max < 2 * kc)
    throw ConfigError("weyl_quantize: incompatible grids (resolution below basis bandwidth)");

  const long NX = g.total_x();
  const int n = basis->size();
  const double scale = std::pow(M_PI, d) / double(NX);
  MatrixXcd m(n, n);
  std::vector<int> xi(static_cast<std::size_t>(d));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const KVec s = basis->point(a) + basis->point(b);
      const KVec u = basis->point(a) - basis->point(b);
      long p_flat = 0;
      for (int ax = 0; ax < d; ++ax) p_flat = p_flat * g.np + (s[std::size_t(ax)] + s_max);
      const double* row = f.values.data() + p_flat * NX;
      complex<double> acc = 0.0;
      for (long x = 0; x < NX; ++x) {
        decode(x, d, g.nx, xi.data());
        double arg = 0.0;
        for (int ax = 0; ax < d; ++ax) arg += u[std::size_t(ax)] * g.x_coord(xi[std::size_t(ax)]);
        acc += row[x] * std::exp(complex<double>(0, -arg));
      }
      m(a, b) = scale * acc;
    }
  }
  m = ((m + m.adjoint()) / 2.0).eval();  // roundoff symmetrization
  return DensityMatrix{std::move(basis), std::move(m), g.hbar};
}

double w11_norm(const PhaseSpaceDensity& f) {
  const PhaseSpaceGrid& g = f.grid;
  const long NX = g.total_x(), NP = g.total_p();
  const double vol = g.cell_volume();
  double total = f.values.abs().sum() * vol;

  std::vector<int> xi(static_cast<std::size_t>(g.dim)), pi(static_cast<std::size_t>(g.dim));
  for (int ax = 0; ax < g.dim; ++ax) {
    const long x_stride = ipow(g.nx, g.dim - 1 - ax);
    const long p_stride = ipow(g.np, g.dim - 1 - ax);
    double gx = 0.0, gp = 0.0;
    for (long p = 0; p < NP; ++p) {
      decode(p, g.dim, g.np, pi.data());
      const double* row = f.values.data() + p * NX;
      for (long x = 0; x < NX; ++x) {
        decode(x, g.dim, g.nx, xi.data());
        // periodic centered difference in x
        const int j = xi[std::size_t(ax)];
        const long xp = x + (j + 1 == g.nx ? (1 - g.nx) : 1) * x_stride;
        const long xm = x + (j == 0 ? (g.nx - 1) : -1) * x_stride;
        gx += std::abs((row[xp] - row[xm]) / (2.0 * g.dx));
        // centered in the momentum interior, one-sided at the box edges
        const int i = pi[std::size_t(ax)];
        const double here = row[x];
        double dfdp;
        if (i == 0)
          dfdp = (f.values[(p + p_stride) * NX + x] - here) / g.dp;
        else if (i + 1 == g.np)
          dfdp = (here - f.values[(p - p_stride) * NX + x]) / g.dp;
        else
          dfdp = (f.values[(p + p_stride) * NX + x] - f.values[(p - p_stride) * NX + x]) /
                 (2.0 * g.dp);
        gp += std::abs(dfdp);
      }
    }
    total += (gx + gp) * vol;
  }
  return total;
}

Eigen::MatrixXd mean_field_force(const PhaseSpaceDensity& f, const Potential& v) {
  const PhaseSpaceGrid& g = f.grid;
  const long NX = g.total_x(), NP = g.total_p();
  MatrixXd force = MatrixXd::Zero(NX, g.dim);
  if (v.empty()) return force;
  for (const auto& [m, vm] : v.coeffs())
    for (int ax = 0; ax < g.dim; ++ax)
      if (2 * std::abs(m[std::size_t(ax)]) >= g.nx)
        throw ConfigError("mean_field_force: potential mode " + to_string(m) +
                          " beyond spatial grid resolution");

  ArrayXd rho = ArrayXd::Zero(NX);
  const double dpd = std::pow(g.dp, g.dim);
  for (long p = 0; p < NP; ++p)
    rho += Eigen::Map<const ArrayXd>(f.values.data() + p * NX, NX) * dpd;

  const double conv = std::pow(2.0 * M_PI, g.dim);  // torus convolution volume
  std::vector<int> xi(static_cast<std::size_t>(g.dim));
  for (const auto& [m, vm] : v.coeffs()) {
    if (m == KVec{0, 0, 0}) continue;  // gradient of the constant mode vanishes
    complex<double> rm = 0.0;
    for (long x = 0; x < NX; ++x) {
      decode(x, g.dim, g.nx, xi.data());
      double arg = 0.0;
      for (int ax = 0; ax < g.dim; ++ax) arg += m[std::size_t(ax)] * g.x_coord(xi[std::size_t(ax)]);
      rm += rho[x] * std::exp(complex<double>(0, -arg));
    }
    rm /= double(NX);
    for (long x = 0; x < NX; ++x) {
      decode(x, g.dim, g.nx, xi.data());
      double arg = 0.0;
      for (int ax = 0; ax < g.dim; ++ax) arg += m[std::size_t(ax)] * g.x_coord(xi[std::size_t(ax)]);
      const complex<double> e = std::exp(complex<double>(0, arg));
      for (int ax = 0; ax < g.dim; ++ax)
        force(x, ax) -= (vm * conv * rm * complex<double>(0, m[std::size_t(ax)]) * e).real();
    }
  }
  return force;
}

namespace {

// Exact spectral shift f(x) -> f(x - sigma) of one periodic line.
void spectral_shift_line(Eigen::FFT<double>& fft, std::vector<complex<double>>& buf,
                         std::vector<complex<double>>& spec, double sigma, double period) {
  const int n = int(buf.size());
  fft.fwd(spec, buf);
  for (int j = 0; j < n; ++j) {
    const int m = (j <= n / 2) ? j : j - n;
    spec[std::size_t(j)] *= std::exp(complex<double>(0, -2.0 * M_PI * m * sigma / period));
  }
  fft.inv(buf, spec);
}

void cubic_shift_line(const std::vector<double>& in, std::vector<double>& out, double delta_cells) {
  const int n = int(in.size());
  const double shift = delta_cells;
  for (int i = 0; i < n; ++i) {
    const double y = double(i) - shift;
    const long i0 = long(std::floor(y));
    const double t = y - double(i0);
    const double wm1 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double w0 = (t * t - 1.0) * (t - 2.0) / 2.0;
    const double w1 = -t * (t + 1.0) * (t - 2.0) / 2.0;
    const double w2 = t * (t * t - 1.0) / 6.0;
    auto wrap = [n](long idx) { return std::size_t(((idx % n) + n) % n); };
    out[std::size_t(i)] = wm1 * in[wrap(i0 - 1)] + w0 * in[wrap(i0)] + w1 * in[wrap(i0 + 1)] +
                          w2 * in[wrap(i0 + 2)];
  }
}

}  // namespace

VlasovResult vlasov_evolve(const PhaseSpaceDensity& f0, const Potential& v, double t_final,
                           double dt, const VlasovOptions& opts) {
  if (!(dt > 0)) throw ConfigError("vlasov_evolve: dt must be positive");
  const PhaseSpaceGrid& g = f0.grid;
  const int d = g.dim;
  const long NX = g.total_x(), NP = g.total_p();
  VlasovResult res{f0, {}, f0.mass(), 0.0};
  PhaseSpaceDensity& f = res.f;
  const int n_steps = int(std::llround(t_final / dt));

  const double p_max = std::abs(g.p_min());
  if (2.0 * p_max * dt > g.nx * g.dx)
    res.warnings.push_back("transport shift exceeds the spatial box per step (dt too large)");

  Eigen::FFT<double> fft;
  std::vector<complex<double>> xbuf(static_cast<std::size_t>(g.nx)), xspec(static_cast<std::size_t>(g.nx));
  std::vector<complex<double>> pbuf(static_cast<std::size_t>(g.np)), pspec(static_cast<std::size_t>(g.np));
  std::vector<double> pline(static_cast<std::size_t>(g.np)), pout(static_cast<std::size_t>(g.np));
  std::vector<int> pi(static_cast<std::size_t>(d)), xi(static_cast<std::size_t>(d));

  // x-transport over time tau: per momentum slice, shift axis `ax` by
  // 2 p_ax tau (exact spectral shift; the 2 comes from the kinetic term).
  auto transport = [&](double tau) {
    for (long p = 0; p < NP; ++p) {
      decode(p, d, g.np, pi.data());
      double* row = f.values.data() + p * NX;
      for (int ax = 0; ax < d; ++ax) {
        const double sigma = 2.0 * g.p_coord(pi[std::size_t(ax)]) * tau;
        if (sigma == 0.0) continue;
        const long stride = ipow(g.nx, d - 1 - ax);
        const long lines = NX / g.nx;
        for (long line = 0; line < lines; ++line) {
          // base index of this 1D line along `ax`
          const long block = line / stride, offset = line % stride;
          const long base = block * stride * g.nx + offset;
          for (int j = 0; j < g.nx; ++j) xbuf[std::size_t(j)] = row[base + j * stride];
          spectral_shift_line(fft, xbuf, xspec, sigma, 2.0 * M_PI);
          for (int j = 0; j < g.nx; ++j) row[base + j * stride] = xbuf[std::size_t(j)].real();
        }
      }
    }
  };

  bool kick_warned = false;
  auto kick = [&](double tau) {
    if (v.empty()) return;
    const MatrixXd force = mean_field_force(f, v);
    const double box_p = g.np * g.dp;
    for (int ax = 0; ax < d; ++ax) {
      const long stride = ipow(g.np, d - 1 - ax);
      const long lines = NP / g.np;
      for (long x = 0; x < NX; ++x) {
        const double delta = force(x, ax) * tau;
        if (delta == 0.0) continue;
        if (!kick_warned && std::abs(delta) > 0.25 * box_p) {
          res.warnings.push_back("force kick shift exceeds a quarter of the momentum box");
          kick_warned = true;
        }
        for (long line = 0; line < lines; ++line) {
          const long block = line / stride, offset = line % stride;
          const long base = block * stride * g.np + offset;
          if (opts.kick == KickScheme::Spectral) {
            for (int i = 0; i < g.np; ++i)
              pbuf[std::size_t(i)] = f.values[(base + i * stride) * NX + x];
            spectral_shift_line(fft, pbuf, pspec, delta, box_p);
            for (int i = 0; i < g.np; ++i)
              f.values[(base + i * stride) * NX + x] = pbuf[std::size_t(i)].real();
          } else {
            for (int i = 0; i < g.np; ++i)
              pline[std::size_t(i)] = f.values[(base + i * stride) * NX + x];
            cubic_shift_line(pline, pout, delta / g.dp);
            for (int i = 0; i < g.np; ++i)
              f.values[(base + i * stride) * NX + x] = pout[std::size_t(i)];
          }
        }
      }
    }
  };

  for (int step = 0; step < n_steps; ++step) {
    transport(dt / 2.0);
    kick(dt);
    transport(dt / 2.0);
    if (!f.values.allFinite())
      throw NumericsError("vlasov_evolve: non-finite values at step " + std::to_string(step + 1));
  }
  res.mass_final = f.mass();
  return res;
}

std::complex<double> semiclassical_observable(const DensityMatrix& gamma,
                                              const Eigen::Vector3d& alpha,
                                              const Eigen::Vector3d& beta) {
  const MomentumLattice& lat = *gamma.basis;
  const int n = lat.size();
  MatrixXcd gen = MatrixXcd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    const KVec& q = lat.point(a);
    double diag = 0.0;
    for (int ax = 0; ax < 3; ++ax)
      diag += alpha(ax) * M_PI + beta(ax) * gamma.hbar * q[std::size_t(ax)];
    gen(a, a) = diag;
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const KVec& r = lat.point(b);
      // position matrix elements couple points differing on a single axis
      int diff_axis = -1, diffs = 0;
      for (int ax = 0; ax < 3; ++ax)
        if (q[std::size_t(ax)] != r[std::size_t(ax)]) { diff_axis = ax; ++diffs; }
      if (diffs != 1 || alpha(diff_axis) == 0.0) continue;
      const double du = double(r[std::size_t(diff_axis)] - q[std::size_t(diff_axis)]);
      gen(a, b) = alpha(diff_axis) / complex<double>(0, du);
    }
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gen);
  VectorXcd phases(n);
  for (int i = 0; i < n; ++i) phases(i) = std::exp(complex<double>(0, es.eigenvalues()(i)));
  const MatrixXcd expg = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  return (expg * gamma.m).trace();
}

std::complex<double> weyl_observable(const DensityMatrix& gamma, const KVec& alpha,
                                     const Eigen::Vector3d& beta) {
  const MomentumLattice& lat = *gamma.basis;
  double ab = 0.0;
  for (int ax = 0; ax < 3; ++ax) ab += alpha[std::size_t(ax)] * beta(ax);
  complex<double> acc = 0.0;
  for (int b = 0; b < lat.size(); ++b) {
    auto col = lat.index_of(lat.point(b) + alpha);
    if (!col) continue;
    double bk = 0.0;
    for (int ax = 0; ax < 3; ++ax) bk += beta(ax) * gamma.hbar * lat.point(b)[std::size_t(ax)];
    acc += std::exp(complex<double>(0, bk)) * gamma.m(b, *col);
  }
  return std::exp(complex<double>(0, gamma.hbar * ab / 2.0)) * acc;
}

}  // namespace fermidyn::phase
