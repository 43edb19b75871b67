#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "fermidyn/harness.hpp"

namespace {

int thread_cap_from_env(int requested) {
  // env var caps whatever --threads asked for
  if (const char* cap = std::getenv("FERMIDYN_THREADS")) {
    const int c = std::atoi(cap);
    if (c > 0) return std::min(requested, c);
  }
  return requested;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fermidyn: cross-validated Vlasov / Hartree-Fock / RPA fermion dynamics"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir;
  int threads = 1;
  bool lenient = false;

  for (const char* name : {"trap-commutators", "quench-hf", "vlasov-compare", "rpa-spectrum",
                           "oracle-compare"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--scenario", scenario_path, "scenario file (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides scenario)");
    sub->add_option("--threads", threads, "worker thread cap")->check(CLI::PositiveNumber);
    sub->add_flag("--strict", "reject unknown scenario keys (default)");
    sub->add_flag("--lenient", lenient, "accept unknown scenario keys");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    const fermidyn::Scenario s = fermidyn::parse_scenario(scenario_path, !lenient);
    fermidyn::harness::RunOptions opts;
    opts.out_dir = out_dir;
    opts.threads = thread_cap_from_env(threads);
    return fermidyn::harness::run_subcommand(sub, s, opts);
  } catch (const fermidyn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fermidyn::NumericsError& e) {
    std::cerr << "numerical invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const fermidyn::ResourceCapError& e) {
    std::cerr << "resource cap exceeded: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
