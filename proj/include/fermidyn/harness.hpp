#ifndef FERMIDYN_HARNESS_HPP
#define FERMIDYN_HARNESS_HPP

#include <filesystem>
#include <string>

#include "fermidyn/scenario.hpp"

namespace fermidyn::harness {

struct RunOptions {
  std::filesystem::path out_dir;  // overrides scenario.output_dir when set
  int threads = 1;
};

// Subcommand entry points; each emits its artifacts plus manifest.json into
// the output directory and returns 0. Failures surface as the typed errors
// mapped to exit codes by the CLI.
int run_trap_commutators(const Scenario& s, const RunOptions& opts);
int run_quench_hf(const Scenario& s, const RunOptions& opts);
int run_vlasov_compare(const Scenario& s, const RunOptions& opts);
int run_rpa_spectrum(const Scenario& s, const RunOptions& opts);
int run_oracle_compare(const Scenario& s, const RunOptions& opts);

int run_subcommand(const std::string& name, const Scenario& s, const RunOptions& opts);

}  // namespace fermidyn::harness

#endif
