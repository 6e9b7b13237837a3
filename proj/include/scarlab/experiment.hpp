#pragma once

#include <string>

#include "scarlab/config.hpp"

namespace scarlab {

struct RunOptions {
  std::string out_override;  // replaces the config's output_dir when nonempty
  i64 only_n = 0;            // restrict the sweep to one dimension; 0 keeps all
  bool quiet = false;
};

// Executes one subcommand against a config file: validate, scar, variance,
// average, egorov, product, spectrum, classical-check.  Writes CSV outputs
// plus manifest.json (always last) into the output directory.  Returns 0 on
// success, 1 on a validation or structural error, 2 when a result violates
// its tolerance.
int run_subcommand(const std::string& cmd, const std::string& config_path,
                   const RunOptions& opt);

}  // namespace scarlab
