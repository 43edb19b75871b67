#ifndef FERMIDYN_SCENARIO_HPP
#define FERMIDYN_SCENARIO_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fermidyn/lattice.hpp"

namespace fermidyn {

// Scenario file schema (JSON, strict: unknown keys are rejected). The hbar
// convention is always named explicitly; it is the likeliest user error.
struct ScenarioTrap {
  std::array<double, 3> omega{1.0, 1.0, 1.0};
  std::optional<std::array<int, 3>> caps;
  std::optional<long> n_target;  // used with `energy` when caps are absent
  double energy = 1.0;
  double hbar = 1.0;
};

struct ScenarioTime {
  double t_final = 1.0;
  double dt = 1e-2;
};

struct ScenarioHf {
  bool include_exchange = true;
  int midpoint_iters = 50;
  double tol = 1e-12;
  int snapshot_stride = 0;
};

struct ScenarioRpa {
  int patches = 8;
  double delta = 2.0 / 45.0;
};

struct ScenarioVlasov {
  int nx = 0;     // 0: smallest alias-free grid
  int s_max = 0;  // 0: 2x momentum headroom
  std::string kick = "cubic";  // cubic | spectral
};

struct ScenarioInitial {
  std::string type = "fermi-ball";  // fermi-ball | well-ground-state
  std::map<KVec, double> well;      // external well Fourier coefficients
  int n_particles = 0;              // well-ground-state only
};

struct ScenarioObservable {
  std::array<double, 3> alpha{0, 0, 0};
  std::array<double, 3> beta{0, 0, 0};
  double t = 0.0;
};

struct Scenario {
  int schema_version = 1;
  std::uint64_t seed = 0;
  int dimension = 3;
  std::string hbar_convention = "bulk";  // bulk | rpa
  std::optional<double> k_f;
  std::optional<double> lattice_cutoff;
  std::map<KVec, double> potential_coeffs;
  bool rpa_strict = false;
  std::optional<ScenarioTrap> trap;
  std::optional<ScenarioTime> time;
  ScenarioHf hf;
  ScenarioRpa rpa;
  ScenarioVlasov vlasov;
  std::optional<ScenarioInitial> initial_state;
  std::optional<ScenarioObservable> observable;
  std::vector<int> compare_sizes;  // 1D mode counts for vlasov-compare
  double compare_fill = 0.5;       // filled fraction of modes per size
  std::string output_dir = "out";

  Potential potential() const { return Potential::from_coeffs(potential_coeffs, rpa_strict); }
  HbarConvention convention() const;
};

Scenario parse_scenario(const std::string& path, bool strict = true);
Scenario parse_scenario_text(const std::string& text, bool strict = true);
std::string serialize_scenario(const Scenario& s);

bool operator==(const Scenario& a, const Scenario& b);

}  // namespace fermidyn

#endif
