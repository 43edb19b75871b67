#include "fermidyn/harness.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <json.hpp>

#include "fermidyn/fock.hpp"
#include "fermidyn/hartree_fock.hpp"
#include "fermidyn/io.hpp"
#include "fermidyn/phase_space.hpp"
#include "fermidyn/rpa.hpp"
#include "fermidyn/trap.hpp"

namespace fermidyn::harness {

namespace fs = std::filesystem;
using io::format_double;
using nlohmann::json;

namespace {

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

fs::path resolve_out(const Scenario& s, const RunOptions& opts) {
  fs::path dir = opts.out_dir.empty() ? fs::path(s.output_dir) : opts.out_dir;
  fs::create_directories(dir);
  return dir;
}

double scenario_hbar(const Scenario& s, const FermiBall& fb) {
  return scaling_constants(fb, s.convention()).hbar;
}

json kvec_json(const KVec& k) { return json::array({k[0], k[1], k[2]}); }

}  // namespace

int run_trap_commutators(const Scenario& s, const RunOptions& opts) {
  if (!s.trap) throw ConfigError("trap-commutators requires a [trap] section");
  Timer timer;
  const fs::path dir = resolve_out(s, opts);

  std::array<int, 3> caps{};
  long realized = 0;
  if (s.trap->caps) {
    caps = *s.trap->caps;
    realized = long(caps[0] + 1) * (caps[1] + 1) * (caps[2] + 1);
  } else if (s.trap->n_target) {
    const auto lc = trap::nmax_levels(*s.trap->n_target, s.trap->energy, s.trap->omega);
    caps = lc.caps;
    realized = lc.realized_n;
  } else {
    throw ConfigError("trap-commutators needs trap.caps or trap.n_target");
  }
  const trap::TrapSpec spec = trap::make_trap_spec(s.trap->omega, caps, s.trap->hbar);

  io::Csv csv({"axis", "operator", "analytic", "bruteforce", "rel_diff"});
  for (int axis = 0; axis < 3; ++axis)
    for (auto op : {trap::TrapOperator::Position, trap::TrapOperator::Momentum}) {
      const double a = trap::commutator_trace_norm_analytic(spec, axis, op);
      const double b = trap::commutator_trace_norm_bruteforce(spec, op, axis);
      csv.row({std::to_string(axis), op == trap::TrapOperator::Position ? "position" : "momentum",
               format_double(a), format_double(b), format_double(std::abs(a - b) / a)});
    }
  io::atomic_write(dir / "commutators.csv", csv.str());

  io::Csv ext({"axis", "spatial_extension"});
  for (int axis = 0; axis < 3; ++axis)
    ext.row({std::to_string(axis), format_double(trap::spatial_extension(spec, axis))});
  io::atomic_write(dir / "extensions.csv", ext.str());

  json summary = {{"caps", caps},
                  {"realized_n", realized},
                  {"omega", s.trap->omega},
                  {"hbar", s.trap->hbar}};
  io::atomic_write(dir / "trap_summary.json", summary.dump(2) + "\n");

  io::Manifest manifest("trap-commutators", serialize_scenario(s));
  manifest.add_artifact(dir / "commutators.csv");
  manifest.add_artifact(dir / "extensions.csv");
  manifest.add_artifact(dir / "trap_summary.json");
  manifest.add_timing("total", timer.ms());
  manifest.write(dir / "manifest.json");
  return 0;
}

namespace {

struct QuenchSetup {
  std::shared_ptr<const MomentumLattice> lattice;
  DensityMatrix omega0;
  int n_particles;
};

QuenchSetup prepare_initial_state(const Scenario& s, const Potential& v) {
  if (!s.lattice_cutoff) throw ConfigError("quench setup requires lattice_cutoff");
  if (!s.initial_state) throw ConfigError("quench setup requires an initial_state section");
  auto lattice = std::make_shared<const MomentumLattice>(s.dimension, *s.lattice_cutoff);
  if (s.initial_state->type == "fermi-ball") {
    if (!s.k_f) throw ConfigError("fermi-ball initial state requires k_f");
    const FermiBall fb = build_fermi_ball(*s.k_f, s.dimension);
    hf::check_interaction_reach(*lattice, fb.k_f(), v);
    const double hbar = scenario_hbar(s, fb);
    return {lattice, fermi_ball_projector(lattice, fb, hbar), fb.particle_number()};
  }
  const int n = s.initial_state->n_particles;
  if (n <= 0) throw ConfigError("well-ground-state initial state requires n_particles > 0");
  const double hbar = std::pow(double(n), -1.0 / s.dimension);
  const Potential well = Potential::from_coeffs(s.initial_state->well);
  return {lattice, well_ground_state(lattice, well, n, hbar), n};
}

}  // namespace

int run_quench_hf(const Scenario& s, const RunOptions& opts) {
  if (!s.time) throw ConfigError("quench-hf requires a [time] section");
  Timer timer;
  const fs::path dir = resolve_out(s, opts);
  const Potential v = s.potential();
  QuenchSetup setup = prepare_initial_state(s, v);

  hf::HfOptions hopts;
  hopts.include_exchange = s.hf.include_exchange;
  hopts.midpoint_iters = s.hf.midpoint_iters;
  hopts.tol = s.hf.tol;
  hopts.snapshot_stride = s.hf.snapshot_stride;
  const auto traj =
      hf::hf_evolve(setup.omega0, v, setup.n_particles, s.time->t_final, s.time->dt, hopts);

  io::Csv csv({"t", "trace", "energy", "idempotency_residual", "midpoint_iterations"});
  for (const auto& st : traj.stats)
    csv.row({format_double(st.t), format_double(st.trace), format_double(st.energy),
             format_double(st.idempotency_residual), std::to_string(st.midpoint_iterations)});
  io::atomic_write(dir / "hf_summary.csv", csv.str());

  io::Manifest manifest("quench-hf", serialize_scenario(s));
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const fs::path p = dir / ("hf_snapshot_" + std::to_string(i) + ".bin");
    io::atomic_write(p, io::density_matrix_binary(traj.snapshots[i], traj.snapshot_times[i]));
    manifest.add_artifact(p);
  }
  manifest.add_artifact(dir / "hf_summary.csv");
  manifest.add_timing("total", timer.ms());
  manifest.write(dir / "manifest.json");
  return 0;
}

int run_vlasov_compare(const Scenario& s, const RunOptions& opts) {
  if (s.dimension != 1) throw ConfigError("vlasov-compare runs in dimension 1");
  if (!s.observable || !s.time) throw ConfigError("vlasov-compare requires observable and time");
  if (s.compare_sizes.empty()) throw ConfigError("vlasov-compare requires compare_sizes");
  if (!s.initial_state || s.initial_state->type != "well-ground-state")
    throw ConfigError("vlasov-compare requires a well-ground-state initial state");
  Timer timer;
  const fs::path dir = resolve_out(s, opts);
  const Potential v = s.potential();
  const Potential well = Potential::from_coeffs(s.initial_state->well);
  const double t_obs = s.observable->t;
  const Eigen::Vector3d alpha(s.observable->alpha[0], s.observable->alpha[1],
                              s.observable->alpha[2]);
  const Eigen::Vector3d beta(s.observable->beta[0], s.observable->beta[1], s.observable->beta[2]);
  const KVec alpha_int{int(std::lround(alpha(0))), int(std::lround(alpha(1))),
                       int(std::lround(alpha(2)))};

  phase::VlasovOptions vopts;
  vopts.kick = (s.vlasov.kick == "spectral") ? phase::KickScheme::Spectral
                                             : phase::KickScheme::CubicSemiLagrangian;

  io::Csv csv({"modes", "n_particles", "hbar", "gap_generator", "gap_weyl", "w11_initial",
               "vlasov_mass_drift", "hf_energy_drift"});
  for (int n_modes : s.compare_sizes) {
    if (n_modes < 3 || n_modes % 2 == 0)
      throw ConfigError("compare_sizes entries must be odd mode counts >= 3");
    const int k_cut = (n_modes - 1) / 2;
    auto lattice = std::make_shared<const MomentumLattice>(1, double(k_cut));
    const int n_p = std::max(1, int(std::lround(s.compare_fill * n_modes)));
    const double hbar = 1.0 / double(n_p);
    const DensityMatrix omega0 = well_ground_state(lattice, well, n_p, hbar);

    hf::HfOptions hopts;
    hopts.include_exchange = s.hf.include_exchange;
    hopts.midpoint_iters = s.hf.midpoint_iters;
    hopts.tol = s.hf.tol;
    const auto traj = hf::hf_evolve(omega0, v, n_p, t_obs, s.time->dt, hopts);
    const DensityMatrix& gamma_hf = traj.final_state();
    const double e0 = traj.stats.front().energy, e1 = traj.stats.back().energy;

    const phase::PhaseSpaceDensity f0 = phase::wigner_transform(omega0, s.vlasov.nx, s.vlasov.s_max);
    const double w11 = phase::w11_norm(f0);
    const auto vres = phase::vlasov_evolve(f0, v, t_obs, s.time->dt, vopts);
    const DensityMatrix gamma_vlasov = phase::weyl_quantize(vres.f, lattice);

    const auto gap_gen = std::abs(phase::semiclassical_observable(gamma_hf, alpha, beta) -
                                  phase::semiclassical_observable(gamma_vlasov, alpha, beta));
    const auto gap_weyl = std::abs(phase::weyl_observable(gamma_hf, alpha_int, beta) -
                                   phase::weyl_observable(gamma_vlasov, alpha_int, beta));
    csv.row({std::to_string(n_modes), std::to_string(n_p), format_double(hbar),
             format_double(gap_gen), format_double(gap_weyl), format_double(w11),
             format_double(std::abs(vres.mass_final - vres.mass_initial)),
             format_double(std::abs(e1 - e0) / std::max(std::abs(e0), 1e-300))});
  }
  io::atomic_write(dir / "vlasov_compare.csv", csv.str());

  io::Manifest manifest("vlasov-compare", serialize_scenario(s));
  manifest.add_artifact(dir / "vlasov_compare.csv");
  manifest.add_timing("total", timer.ms());
  manifest.write(dir / "manifest.json");
  return 0;
}

int run_rpa_spectrum(const Scenario& s, const RunOptions& opts) {
  if (s.convention() != HbarConvention::Rpa)
    throw ConfigError("rpa-spectrum requires hbar_convention = \"rpa\"");
  if (!s.k_f) throw ConfigError("rpa-spectrum requires k_f");
  Timer timer;
  const fs::path dir = resolve_out(s, opts);
  const Potential v = Potential::from_coeffs(s.potential_coeffs, /*rpa_strict=*/true);
  const FermiBall fb = build_fermi_ball(*s.k_f, 3);
  const ScalingConstants sc = scaling_constants(fb, HbarConvention::Rpa);
  const rpa::PatchDecomposition pd =
      v.empty() ? rpa::PatchDecomposition::build(fb, s.rpa.patches, 1.0, 0.0)
                : rpa::PatchDecomposition::build(fb, s.rpa.patches, v);

  struct ModeResult {
    rpa::RpaBlocks blocks;
    rpa::BogoliubovKernel kern;
    rpa::DiagonalizedBlock diag;
    Eigen::VectorXd spectrum;
  };
  const std::vector<KVec> modes = v.gamma_nor();
  std::vector<ModeResult> results(modes.size());
  auto work = [&](std::size_t i) {
    ModeResult r;
    r.blocks = rpa::build_blocks(modes[i], pd, v, fb, sc, s.rpa.delta);
    if (!r.blocks.dropped) {
      r.kern = rpa::bogoliubov_kernel(r.blocks.D, r.blocks.W, r.blocks.Wt);
      r.diag = rpa::diagonalized_block(r.blocks.D, r.blocks.W, r.blocks.Wt, r.kern.K);
      r.spectrum = rpa::excitation_spectrum(r.blocks, sc);
    }
    return r;
  };
  const int threads = std::max(1, opts.threads);
  for (std::size_t base = 0; base < modes.size(); base += std::size_t(threads)) {
    std::vector<std::future<ModeResult>> batch;
    for (std::size_t i = base; i < std::min(base + std::size_t(threads), modes.size()); ++i)
      batch.push_back(std::async(std::launch::async, work, i));
    for (std::size_t i = 0; i < batch.size(); ++i) results[base + i] = batch[i].get();
  }

  json summary;
  summary["schema_version"] = 1;
  summary["n_particles"] = fb.particle_number();
  summary["k_f"] = fb.k_f();
  summary["patches"] = s.rpa.patches;
  summary["delta"] = s.rpa.delta;
  summary["hbar"] = sc.hbar;
  summary["kappa"] = sc.kappa;
  const double corridor = pd.realized_corridor();
  summary["realized_corridor"] = std::isfinite(corridor) ? json(corridor) : json();

  io::Csv csv({"k", "alpha", "beta", "tag", "value"});
  json mode_list = json::array();
  std::vector<rpa::RpaBlocks> all_blocks;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const ModeResult& r = results[i];
    all_blocks.push_back(r.blocks);
    json m;
    m["k"] = kvec_json(modes[i]);
    m["dropped"] = r.blocks.dropped;
    m["dropped_patches"] = r.blocks.dropped_patches;
    if (r.blocks.dropped) {
      m["reason"] = r.blocks.drop_reason;
      mode_list.push_back(m);
      continue;
    }
    m["patch_order"] = r.blocks.order;
    m["n_plus"] = r.blocks.n_plus();
    std::vector<double> spec(r.spectrum.data(), r.spectrum.data() + r.spectrum.size());
    m["spectrum"] = spec;
    m["trace_e_minus_d_w"] = (r.kern.E - r.blocks.D - r.blocks.W).trace();
    m["offdiag_residual_ratio"] = r.diag.residual.norm() / (r.blocks.D + r.blocks.W).norm();
    mode_list.push_back(m);

    const std::string ks = to_string(modes[i]);
    auto emit = [&](const char* tag, const Eigen::MatrixXd& mat) {
      for (int a = 0; a < mat.rows(); ++a)
        for (int b = 0; b < mat.cols(); ++b)
          csv.row({ks, std::to_string(r.blocks.order[std::size_t(a)]),
                   std::to_string(r.blocks.order[std::size_t(b)]), tag,
                   format_double(mat(a, b))});
    };
    emit("D", r.blocks.D);
    emit("W", r.blocks.W);
    emit("Wt", r.blocks.Wt);
    emit("E", r.kern.E);
    emit("K", r.kern.K);
    emit("Kfrak", r.diag.Kfrak);
  }
  summary["modes"] = mode_list;
  summary["rpa_energy_correction"] = rpa::rpa_energy_correction(all_blocks, sc).total;

  io::atomic_write(dir / "rpa_blocks.csv", csv.str());
  io::atomic_write(dir / "rpa_summary.json", summary.dump(2) + "\n");

  io::Manifest manifest("rpa-spectrum", serialize_scenario(s));
  manifest.add_artifact(dir / "rpa_blocks.csv");
  manifest.add_artifact(dir / "rpa_summary.json");
  manifest.add_timing("total", timer.ms());
  manifest.write(dir / "manifest.json");
  return 0;
}

int run_oracle_compare(const Scenario& s, const RunOptions& opts) {
  if (!s.k_f || !s.lattice_cutoff || !s.time)
    throw ConfigError("oracle-compare requires k_f, lattice_cutoff and time");
  Timer timer;
  const fs::path dir = resolve_out(s, opts);
  const Potential v = s.potential();
  auto lattice = std::make_shared<const MomentumLattice>(s.dimension, *s.lattice_cutoff);
  const FermiBall fb = build_fermi_ball(*s.k_f, s.dimension);
  hf::check_interaction_reach(*lattice, fb.k_f(), v);
  const ScalingConstants sc = scaling_constants(fb, s.convention());
  if (lattice->size() > 64)
    throw ResourceCapError("oracle-compare: lattice has more than 64 modes");

  auto basis = std::make_shared<const fock::FockBasis>(
      fock::build_fock_basis(lattice->points(), fb.particle_number()));
  const auto h = fock::build_hamiltonian(*basis, v, sc);
  const fock::FockState psi0 = fock::slater_state(basis, fb.members());
  const DensityMatrix omega0 = fermi_ball_projector(lattice, fb, sc.hbar);

  const int n_rows = 10;
  const int total_steps = int(std::llround(s.time->t_final / s.time->dt));
  const int stride = std::max(1, total_steps / n_rows);
  hf::HfOptions hopts;
  hopts.include_exchange = s.hf.include_exchange;
  hopts.midpoint_iters = s.hf.midpoint_iters;
  hopts.tol = s.hf.tol;
  hopts.snapshot_stride = stride;
  const auto traj = hf::hf_evolve(omega0, v, fb.particle_number(), s.time->t_final, s.time->dt,
                                  hopts);

  const double e_exact0 =
      (psi0.amps.adjoint() * (h * psi0.amps))(0).real();
  io::Csv csv({"t", "trace_norm_distance", "exact_energy_drift", "exact_norm_drift"});
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const double t = traj.snapshot_times[i];
    const fock::FockState psi_t = fock::evolve_exact(psi0, h, t, sc);
    const DensityMatrix gamma = fock::reduced_density_matrix(psi_t, lattice, sc.hbar);
    const double e_t = (psi_t.amps.adjoint() * (h * psi_t.amps))(0).real();
    csv.row({format_double(t), format_double(trace_norm_distance(gamma, traj.snapshots[i])),
             format_double(std::abs(e_t - e_exact0) / std::max(std::abs(e_exact0), 1e-300)),
             format_double(std::abs(psi_t.norm() - 1.0))});
  }
  io::atomic_write(dir / "oracle_compare.csv", csv.str());

  io::Manifest manifest("oracle-compare", serialize_scenario(s));
  manifest.add_artifact(dir / "oracle_compare.csv");
  manifest.add_timing("total", timer.ms());
  manifest.write(dir / "manifest.json");
  return 0;
}

int run_subcommand(const std::string& name, const Scenario& s, const RunOptions& opts) {
  if (name == "trap-commutators") return run_trap_commutators(s, opts);
  if (name == "quench-hf") return run_quench_hf(s, opts);
  if (name == "vlasov-compare") return run_vlasov_compare(s, opts);
  if (name == "rpa-spectrum") return run_rpa_spectrum(s, opts);
  if (name == "oracle-compare") return run_oracle_compare(s, opts);
  throw ConfigError("unknown subcommand: " + name);
}

}  // namespace fermidyn::harness
