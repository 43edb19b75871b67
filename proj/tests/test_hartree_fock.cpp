#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fermidyn/hartree_fock.hpp"

using namespace fermidyn;
using std::complex;

namespace {

std::shared_ptr<const MomentumLattice> lattice_1d(double cutoff) {
  return std::make_shared<const MomentumLattice>(1, cutoff);
}

DensityMatrix random_hermitian(std::shared_ptr<const MomentumLattice> basis, double hbar,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const int n = basis->size();
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = complex<double>(g(rng), g(rng));
  Eigen::MatrixXcd h = (a + a.adjoint()) / 2.0;
  return DensityMatrix{std::move(basis), std::move(h), hbar};
}

const Potential v1(double v) {
  return make_potential({{kvec(1, 0, 0), v}, {kvec(-1, 0, 0), v}});
}

}  // namespace

TEST_CASE("direct term") {
  auto basis = lattice_1d(3.0);
  const FermiBall fb = build_fermi_ball(1.0, 1);
  const double hbar = 1.0 / 3.0;
  const DensityMatrix ball = fermi_ball_projector(basis, fb, hbar);

  CHECK(hf::direct_term(ball, Potential::free_potential(), 3).norm() == 0.0);

  // translation-invariant w: only q = 0 survives, entries V(0)
  const Potential v0 = make_potential({{kvec(0, 0, 0), 0.7}, {kvec(1, 0, 0), 0.2},
                                       {kvec(-1, 0, 0), 0.2}});
  const Eigen::MatrixXcd d = hf::direct_term(ball, v0, 3);
  CHECK((d - 0.7 * Eigen::MatrixXcd::Identity(7, 7)).norm() < 1e-14);

  // single off-diagonal entry at (m + q0, m): one band at offset q0
  Eigen::MatrixXcd m = ball.m;
  const int row = basis->index_of(kvec(1, 0, 0)).value();
  const int col = basis->index_of(kvec(0, 0, 0)).value();
  m(row, col) += 0.1;
  m(col, row) += 0.1;
  const DensityMatrix perturbed{basis, m, hbar};
  const Eigen::MatrixXcd dp = hf::direct_term(perturbed, v1(0.5), 3);
  // rho(q0 = +1) = 0.1, so every admissible (k+1, k) entry equals v/N * 0.1
  const complex<double> expect = 0.5 * 0.1 / 3.0;
  for (int j = 0; j < basis->size(); ++j) {
    auto i = basis->index_of(basis->point(j) + kvec(1, 0, 0));
    if (!i) continue;
    CHECK(std::abs(dp(*i, j) - expect) < 1e-15);
  }
}

TEST_CASE("exchange term") {
  auto basis = lattice_1d(2.0);
  const DensityMatrix w = random_hermitian(basis, 0.5, 7);
  CHECK(hf::exchange_term(w, Potential::free_potential(), 4).norm() == 0.0);

  // V = v delta_{q,0} rescales: X = (v/N) w
  const Potential delta0 = make_potential({{kvec(0, 0, 0), 0.9}});
  CHECK((hf::exchange_term(w, delta0, 4) - (0.9 / 4.0) * w.m).norm() < 1e-14);

  // Hermiticity for Hermitian input
  const Eigen::MatrixXcd x = hf::exchange_term(w, v1(0.3), 4);
  CHECK((x - x.adjoint()).norm() < 1e-14);
}

TEST_CASE("hf generator: kinetic diagonal, stationarity, exchange toggle") {
  auto basis = lattice_1d(3.0);
  const FermiBall fb = build_fermi_ball(1.0, 1);
  const double hbar = 1.0 / 3.0;
  const DensityMatrix ball = fermi_ball_projector(basis, fb, hbar);

  const Eigen::MatrixXcd h0 = hf::hf_generator(ball, Potential::free_potential(), 3, true);
  for (int i = 0; i < basis->size(); ++i)
    CHECK(h0(i, i) == complex<double>(hbar * hbar * double(norm2(basis->point(i)))));
  CHECK((h0 - Eigen::MatrixXcd(h0.diagonal().asDiagonal())).norm() == 0.0);

  // the Fermi ball commutes with its own generator (translation invariance)
  const Eigen::MatrixXcd h = hf::hf_generator(ball, v1(0.4), 3, true);
  CHECK((h * ball.m - ball.m * h).norm() < 1e-14);

  const Eigen::MatrixXcd with = hf::hf_generator(ball, v1(0.4), 3, true);
  const Eigen::MatrixXcd without = hf::hf_generator(ball, v1(0.4), 3, false);
  CHECK((without - with - hf::exchange_term(ball, v1(0.4), 3)).norm() < 1e-14);
}

TEST_CASE("hf_evolve: free evolution matches the closed form") {
  auto basis = lattice_1d(2.0);
  const int n_p = 2;
  const double hbar = 0.5;
  const Potential well = make_potential({{kvec(1, 0, 0), 0.4}, {kvec(-1, 0, 0), 0.4}});
  const DensityMatrix w0 = well_ground_state(basis, well, n_p, hbar);

  const double t = 0.3;
  const auto traj = hf::hf_evolve(w0, Potential::free_potential(), n_p, t, 0.01);
  Eigen::VectorXcd phases(basis->size());
  for (int i = 0; i < basis->size(); ++i)
    phases(i) = std::exp(complex<double>(0, -t * hbar * double(norm2(basis->point(i)))));
  const Eigen::MatrixXcd expected =
      phases.asDiagonal() * w0.m * phases.conjugate().asDiagonal();
  CHECK((traj.final_state().m - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("hf_evolve: Fermi ball is stationary") {
  auto basis = lattice_1d(3.0);
  const FermiBall fb = build_fermi_ball(1.0, 1);
  const DensityMatrix ball = fermi_ball_projector(basis, fb, 1.0 / 3.0);
  const auto traj = hf::hf_evolve(ball, v1(0.3), 3, 0.2, 0.01);
  CHECK(trace_norm_distance(traj.final_state(), ball) < 1e-10);
}

TEST_CASE("hf_evolve: structure preservation along a quench") {
  auto basis = lattice_1d(4.0);
  const int n_p = 3;
  const double hbar = 1.0 / 3.0;
  const Potential well = make_potential({{kvec(1, 0, 0), 0.5}, {kvec(-1, 0, 0), 0.5}});
  const DensityMatrix w0 = well_ground_state(basis, well, n_p, hbar);
  const auto traj = hf::hf_evolve(w0, v1(0.4), n_p, 0.25, 1e-3);

  const double e0 = traj.stats.front().energy;
  for (const auto& st : traj.stats) {
    CHECK(std::abs(st.trace - n_p) <= 1e-10);
    CHECK(st.idempotency_residual <= 1e-8);
    CHECK(std::abs(st.energy - e0) / std::abs(e0) <= 1e-8);
  }

  // generator at a trajectory point stays Hermitian
  const Eigen::MatrixXcd h = hf::hf_generator(traj.final_state(), v1(0.4), n_p, true);
  CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("hf_energy") {
  auto basis = lattice_1d(3.0);
  const FermiBall fb = build_fermi_ball(1.0, 1);
  const double hbar = 1.0 / 3.0;
  const DensityMatrix ball = fermi_ball_projector(basis, fb, hbar);

  // free Fermi ball: sum of hbar^2 |k|^2 over the ball = 2 hbar^2
  CHECK(hf::hf_energy(ball, Potential::free_potential(), 3, true) ==
        doctest::Approx(2.0 * hbar * hbar).epsilon(1e-14));

  // doubling V doubles the interaction part exactly
  const double e_kin = hf::hf_energy(ball, Potential::free_potential(), 3, true);
  const double e1 = hf::hf_energy(ball, v1(0.3), 3, true) - e_kin;
  const double e2 = hf::hf_energy(ball, v1(0.6), 3, true) - e_kin;
  CHECK(e2 == doctest::Approx(2.0 * e1).epsilon(1e-13));
}

TEST_CASE("exchange-drop comparison: trajectories differ, gap recorded") {
  auto basis = lattice_1d(4.0);
  const int n_p = 3;
  const Potential well = make_potential({{kvec(1, 0, 0), 0.5}, {kvec(-1, 0, 0), 0.5}});
  const DensityMatrix w0 = well_ground_state(basis, well, n_p, 1.0 / 3.0);
  hf::HfOptions with, without;
  without.include_exchange = false;
  const auto a = hf::hf_evolve(w0, v1(0.4), n_p, 0.2, 1e-2, with);
  const auto b = hf::hf_evolve(w0, v1(0.4), n_p, 0.2, 1e-2, without);
  const double gap = trace_norm_distance(a.final_state(), b.final_state());
  MESSAGE("exchange on/off trace-norm gap at t = 0.2: ", gap);
  CHECK(gap > 1e-8);
}

TEST_CASE("trace_norm_distance") {
  auto basis = lattice_1d(2.0);
  const DensityMatrix a = random_hermitian(basis, 1.0, 11);
  CHECK(trace_norm_distance(a, a) == 0.0);

  // rank-one difference has trace norm |lambda|
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  Eigen::VectorXcd phi(basis->size());
  for (int i = 0; i < phi.size(); ++i) phi(i) = complex<double>(g(rng), g(rng));
  phi.normalize();
  const double lambda = -0.37;
  const DensityMatrix b{basis, a.m + lambda * (phi * phi.adjoint()), 1.0};
  CHECK(trace_norm_distance(a, b) == doctest::Approx(std::abs(lambda)).epsilon(1e-12));

  // triangle inequality and unitary invariance against an SVD oracle
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    const DensityMatrix x = random_hermitian(basis, 1.0, seed);
    const DensityMatrix y = random_hermitian(basis, 1.0, seed + 100);
    const DensityMatrix z = random_hermitian(basis, 1.0, seed + 200);
    CHECK(trace_norm_distance(x, z) <=
          trace_norm_distance(x, y) + trace_norm_distance(y, z) + 1e-12);
    CHECK(trace_norm_distance(x, y) == doctest::Approx(trace_norm(x.m - y.m)).epsilon(1e-11));
    Eigen::MatrixXcd q = random_hermitian(basis, 1.0, seed + 300).m;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(q);
    const Eigen::MatrixXcd u = qr.householderQ();
    CHECK(trace_norm(u * (x.m - y.m) * u.adjoint()) ==
          doctest::Approx(trace_norm_distance(x, y)).epsilon(1e-11));
  }
}

TEST_CASE("error paths") {
  auto basis = lattice_1d(2.0);
  auto other = lattice_1d(3.0);
  const DensityMatrix a = random_hermitian(basis, 1.0, 31);
  const DensityMatrix b = random_hermitian(other, 1.0, 32);
  CHECK_THROWS_AS(trace_norm_distance(a, b), ConfigError);

  // cutoff below k_F + diam supp V
  CHECK_THROWS_AS(hf::check_interaction_reach(MomentumLattice(1, 2.0), 1.0, v1(0.1)),
                  ConfigError);
  CHECK_NOTHROW(hf::check_interaction_reach(MomentumLattice(1, 3.0), 1.0, v1(0.1)));

  // midpoint iteration cap
  const FermiBall fb = build_fermi_ball(1.0, 1);
  auto big = lattice_1d(3.0);
  const Potential well = make_potential({{kvec(1, 0, 0), 0.5}, {kvec(-1, 0, 0), 0.5}});
  const DensityMatrix w0 = well_ground_state(big, well, 3, 1.0 / 3.0);
  hf::HfOptions opts;
  opts.midpoint_iters = 1;
  opts.tol = 1e-15;
  CHECK_THROWS_AS(hf::hf_evolve(w0, v1(0.5), 3, 0.5, 0.5, opts), NumericsError);
}

TEST_CASE("orbital extraction for display") {
  auto basis = lattice_1d(2.0);
  const Potential well = make_potential({{kvec(1, 0, 0), 0.4}, {kvec(-1, 0, 0), 0.4}});
  const DensityMatrix w0 = well_ground_state(basis, well, 2, 0.5);
  const auto orbs = orbitals(w0);
  REQUIRE(orbs.size() == std::size_t(basis->size()));
  CHECK(orbs[0].occupation == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(orbs[1].occupation == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(orbs[2].occupation) < 1e-12);
}
