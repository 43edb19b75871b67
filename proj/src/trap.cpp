#include "fermidyn/trap.hpp"

#include <cmath>
#include <complex>
#include <unsupported/Eigen/KroneckerProduct>

namespace fermidyn::trap {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using std::complex;

TrapSpec make_trap_spec(const std::array<double, 3>& omega, const std::array<int, 3>& caps,
                        double hbar) {
  TrapSpec s{omega, caps, hbar};
  for (int i = 0; i < 3; ++i) {
    if (!(s.omega[i] > 0)) throw ConfigError("trap frequencies must be positive");
    if (s.caps[i] < 0) throw ConfigError("level caps must be non-negative");
  }
  if (!(s.omega[0] <= s.omega[1] && s.omega[1] <= s.omega[2]))
    throw ConfigError("trap frequencies must be sorted ascending");
  if (!(s.hbar > 0)) throw ConfigError("hbar must be positive");
  return s;
}

LevelCaps nmax_levels(long n_target, double energy, const std::array<double, 3>& omega) {
  if (n_target <= 0) throw ConfigError("target particle number must be positive");
  if (!(energy > 0)) throw ConfigError("energy parameter must be positive");
  if (!(omega[0] > 0 && omega[0] <= omega[1] && omega[1] <= omega[2]))
    throw ConfigError("trap frequencies must be positive and sorted ascending");
  const double base = std::cbrt(double(n_target)) * energy;
  LevelCaps lc{};
  for (int i = 0; i < 3; ++i) {
    // guard factor absorbs representation error when the exact value is integer
    double v = base * (omega[0] / omega[i]) * (1.0 + 1e-12);
    lc.caps[i] = int(std::floor(v));
  }
  lc.realized_n = long(lc.caps[0] + 1) * (lc.caps[1] + 1) * (lc.caps[2] + 1);
  return lc;
}

Eigen::MatrixXd ladder_matrix(int truncation) {
  if (truncation < 1) throw ConfigError("ladder truncation must be >= 1");
  MatrixXd a = MatrixXd::Zero(truncation, truncation);
  for (int n = 1; n < truncation; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

double commutator_trace_norm_analytic(const TrapSpec& spec, int axis, TrapOperator op) {
  const double w = spec.omega[std::size_t(axis)];
  const double scale = (op == TrapOperator::Position) ? std::sqrt(spec.hbar / (2.0 * w))
                                                      : std::sqrt(spec.hbar * w / 2.0);
  double transverse = 1.0;
  for (int j = 0; j < 3; ++j)
    if (j != axis) transverse *= double(spec.caps[std::size_t(j)] + 1);
  return scale * std::sqrt(double(spec.caps[std::size_t(axis)] + 1)) * 2.0 * transverse;
}

Eigen::MatrixXcd axis_operator(const TrapSpec& spec, TrapOperator op, int axis, int truncation) {
  const double w = spec.omega[std::size_t(axis)];
  const MatrixXd a = ladder_matrix(truncation);
  if (op == TrapOperator::Position)
    return std::sqrt(spec.hbar / (2.0 * w)) * (a + a.transpose()).cast<complex<double>>();
  return complex<double>(0, 1) * std::sqrt(spec.hbar * w / 2.0) *
         (a.transpose() - a).cast<complex<double>>();
}

Eigen::MatrixXd axis_projector(int cap, int truncation) {
  MatrixXd p = MatrixXd::Zero(truncation, truncation);
  for (int n = 0; n <= cap && n < truncation; ++n) p(n, n) = 1.0;
  return p;
}

double commutator_trace_norm_bruteforce(const TrapSpec& spec, TrapOperator op, int axis) {
  if (axis < 0 || axis > 2) throw ConfigError("axis must be 0, 1 or 2");
  // The commutator couples levels cap <-> cap + 1 only, so cap + 2 levels per
  // axis represent it exactly.
  std::array<int, 3> trunc;
  for (int i = 0; i < 3; ++i) trunc[std::size_t(i)] = spec.caps[std::size_t(i)] + 2;

  const MatrixXcd op_axis = axis_operator(spec, op, axis, trunc[std::size_t(axis)]);
  std::array<MatrixXcd, 3> factors_op, factors_proj;
  for (int i = 0; i < 3; ++i) {
    const int t = trunc[std::size_t(i)];
    factors_proj[std::size_t(i)] = axis_projector(spec.caps[std::size_t(i)], t).cast<complex<double>>();
    factors_op[std::size_t(i)] =
        (i == axis) ? op_axis : MatrixXcd::Identity(t, t);
  }
  auto kron3 = [](const MatrixXcd& a, const MatrixXcd& b, const MatrixXcd& c) {
    return Eigen::kroneckerProduct(a, Eigen::kroneckerProduct(b, c).eval()).eval();
  };
  const MatrixXcd big_op = kron3(factors_op[0], factors_op[1], factors_op[2]);
  const MatrixXcd big_proj = kron3(factors_proj[0], factors_proj[1], factors_proj[2]);

  MatrixXcd comm = big_op * big_proj - big_proj * big_op;
  // [A, P] with A Hermitian is anti-Hermitian; i*[A, P] is Hermitian, so the
  // singular values are the absolute eigenvalues.
  MatrixXcd herm = complex<double>(0, 1) * comm;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double spatial_extension(const TrapSpec& spec, int axis) {
  const double w = spec.omega[std::size_t(axis)];
  return std::sqrt(spec.hbar * double(spec.caps[std::size_t(axis)] + 1) / (2.0 * w));
}

}  // namespace fermidyn::trap
