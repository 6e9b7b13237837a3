#include <string>

#include <CLI11.hpp>

#include "scarlab/experiment.hpp"
#include "scarlab/kernels.hpp"

int main(int argc, char** argv) {
  scarlab::init_threads_from_env();

  CLI::App app{"numerics laboratory for quantized toral automorphisms"};
  app.require_subcommand(1);

  struct SubSpec {
    const char* name;
    const char* help;
  };
  const SubSpec subs[] = {
      {"validate", "construct the invariant subspace and check unitarity per N"},
      {"scar", "sweep restricted eigenbasis maxima of submanifold-vanishing observables"},
      {"variance", "quantum variances, Wigner tables and the density-one report"},
      {"average", "state-averaged Wigner values against their exact characters"},
      {"egorov", "kick flow conjugation residual against its certified bound"},
      {"product", "operator product defect for all observable pairs"},
      {"spectrum", "eigenphases of the restricted propagator"},
      {"classical-check", "classical-side diagnostics: sharps, flows, Birkhoff averages"},
  };

  std::string config_path;
  std::string out_override;
  scarlab::i64 only_n = 0;
  bool quiet = false;

  for (const SubSpec& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config_path, "experiment config (json)")->required();
    sub->add_option("--out", out_override, "override the config's output directory");
    sub->add_option("--only-n", only_n, "restrict the sweep to a single N");
    sub->add_flag("--quiet", quiet, "suppress progress lines");
  }

  CLI11_PARSE(app, argc, argv);

  scarlab::RunOptions opt;
  opt.out_override = out_override;
  opt.only_n = only_n;
  opt.quiet = quiet;
  return scarlab::run_subcommand(app.get_subcommands().front()->get_name(), config_path, opt);
}
