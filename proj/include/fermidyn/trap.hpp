#ifndef FERMIDYN_TRAP_HPP
#define FERMIDYN_TRAP_HPP

#include <Eigen/Dense>
#include <array>

#include "fermidyn/errors.hpp"

namespace fermidyn::trap {

// Ground state of N non-interacting fermions in an anisotropic harmonic trap,
// described by per-axis occupation caps: all levels |n1,n2,n3> with
// n_i <= cap_i are filled, so N = prod (cap_i + 1).
struct TrapSpec {
  std::array<double, 3> omega{1.0, 1.0, 1.0};  // sorted ascending
  std::array<int, 3> caps{0, 0, 0};
  double hbar = 1.0;

  long particle_number() const {
    return long(caps[0] + 1) * long(caps[1] + 1) * long(caps[2] + 1);
  }
};

TrapSpec make_trap_spec(const std::array<double, 3>& omega, const std::array<int, 3>& caps,
                        double hbar);

struct LevelCaps {
  std::array<int, 3> caps;
  long realized_n;  // prod (cap_i + 1); may differ from the requested target
};

// Caps occupying all three oscillators up to the common energy E:
// cap_1 = floor(N^(1/3) E), cap_i = floor(N^(1/3) E w_1/w_i). The realized
// particle number is reported, not adjusted to the target.
LevelCaps nmax_levels(long n_target, double energy, const std::array<double, 3>& omega);

// Annihilation operator on the truncated Hermite basis {|0>,...,|trunc-1>}:
// entries sqrt(n) on the first superdiagonal.
Eigen::MatrixXd ladder_matrix(int truncation);

enum class TrapOperator { Position, Momentum };

// Closed form of || [x_i, w_N] ||_tr (resp. [p_i, .]): the commutator couples
// only levels cap_i <-> cap_i + 1, leaving a rank-2 block per transverse mode:
//   scale * sqrt(cap_i + 1) * 2 * prod_{j != i} (cap_j + 1),
// scale = sqrt(hbar/(2 w_i)) for position, sqrt(hbar w_i / 2) for momentum.
// Note the momentum value is w_i times the position value; they coincide only
// for w_i = 1.
double commutator_trace_norm_analytic(const TrapSpec& spec, int axis,
                                      TrapOperator op = TrapOperator::Position);

// Independent oracle: builds x_i = sqrt(hbar/2w_i)(a + a*) or
// p_i = i sqrt(hbar w_i/2)(a* - a) and the occupation projector as explicit
// matrices on the truncated triple tensor product, then sums singular values
// of the commutator. Truncation >= cap_i + 2 on every axis is required for
// the commutator to be represented exactly.
double commutator_trace_norm_bruteforce(const TrapSpec& spec, TrapOperator op, int axis);

// sqrt(hbar (cap_i + 1) / (2 w_i)); the rms extent sqrt(<x_i^2>) of the cloud.
double spatial_extension(const TrapSpec& spec, int axis);

// Single-axis operators exposed for tests.
Eigen::MatrixXcd axis_operator(const TrapSpec& spec, TrapOperator op, int axis, int truncation);
Eigen::MatrixXd axis_projector(int cap, int truncation);

}  // namespace fermidyn::trap

#endif
