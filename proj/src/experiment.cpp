#include "scarlab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scarlab/egorov.hpp"
#include "scarlab/propagator.hpp"
#include "scarlab/scarring.hpp"

namespace scarlab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kToolVersion = "scarlab 1.0";
constexpr i64 kDenseValidateCap = 512;
constexpr i64 kProductCap = 512;

std::string num17(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string freq_str(const IntRowVec& n) {
  std::string s;
  for (int i = 0; i < n.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(n(i));
  }
  return s;
}

i64 pow_i64(i64 base, int e) {
  i64 r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// all n != 0 with |n|_inf <= m, lexicographic
std::vector<IntRowVec> box_ball(int two_d, i64 m) {
  std::vector<IntRowVec> out;
  IntRowVec n = IntRowVec::Constant(two_d, -m);
  while (true) {
    if (n.squaredNorm() != 0) out.push_back(n);
    int i = two_d - 1;
    while (i >= 0 && n(i) == m) {
      n(i) = -m;
      --i;
    }
    if (i < 0) break;
    n(i) += 1;
  }
  return out;
}

// all n != 0 with |n|_2 <= m, lexicographic
std::vector<IntRowVec> euclid_ball(int two_d, i64 m) {
  std::vector<IntRowVec> out;
  for (const IntRowVec& n : box_ball(two_d, m))
    if (n.squaredNorm() <= m * m) out.push_back(n);
  return out;
}

void write_text(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ResolutionError("cannot open output file " + p.string());
  out << content;
  out.flush();
  if (!out.good()) throw ResolutionError("short write to " + p.string());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ResolutionError("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Ctx {
  const ExperimentConfig* cfg = nullptr;
  fs::path out;
  bool quiet = false;
  std::vector<i64> use_all;         // N_values after --only-n
  std::vector<i64> use_admissible;  // admissible subset after --only-n
  json stages = json::array();
  json per_n = json::array();
  json outputs = json::array();
  json summary = json::object();
  std::vector<std::string> run_warnings;
  std::chrono::steady_clock::time_point mark = std::chrono::steady_clock::now();
  int exit_code = 0;

  void stage(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    stages.push_back({{"name", name},
                      {"wall_ms", std::chrono::duration<double, std::milli>(now - mark).count()}});
    mark = now;
  }
  void say(const std::string& s) const {
    if (!quiet) std::cout << s << "\n";
  }
  void tolerance_failure(const std::string& why) {
    run_warnings.push_back("tolerance failure: " + why);
    exit_code = 2;
  }
};

// Per-N work items each write their block to a temp file; the merger then
// concatenates the blocks in listed order on a single thread and removes the
// temps.  The manifest entry records the digest of the merged content.
struct CsvPlan {
  std::string name;
  std::string header;
  std::vector<fs::path> parts;
};

void add_part(CsvPlan& plan, const Ctx& ctx, i64 big_n, const std::string& block) {
  const fs::path p = ctx.out / (plan.name + ".part" + std::to_string(big_n) + ".tmp");
  write_text(p, block);
  plan.parts.push_back(p);
}

void merge_csv(CsvPlan& plan, Ctx& ctx) {
  std::string content = plan.header + "\n";
  for (const fs::path& p : plan.parts) {
    content += slurp(p);
    fs::remove(p);
  }
  write_text(ctx.out / plan.name, content);
  ctx.outputs.push_back({{"file", plan.name}, {"digest", fnv1a_hex(content)}});
  ctx.say("wrote " + (ctx.out / plan.name).string());
}

CosetFrame frame_for(const ExperimentConfig& cfg, i64 big_n) {
  if (!shift_frame_available(cfg.spec))
    throw PreconditionError(
        "a lattice generator carries a modulation component; the streaming "
        "subspace path needs pure shift generators");
  return build_coset_frame(make_space(big_n, cfg.d), cfg.spec);
}

int run_validate(const ExperimentConfig& cfg, Ctx& ctx) {
  for (i64 big_n : ctx.use_admissible) {
    const i64 dim_full = pow_i64(big_n, cfg.d);
    json row = {{"N", big_n}};
    if (shift_frame_available(cfg.spec)) {
      const CosetFrame f = frame_for(cfg, big_n);
      const i64 expect = pow_i64(big_n, cfg.d - cfg.spec.lattice.d0);
      row["dim"] = f.dim;
      if (f.dim != expect) {
        ctx.tolerance_failure("subspace dimension " + std::to_string(f.dim) + " at N=" +
                              std::to_string(big_n) + ", expected " + std::to_string(expect));
      }
      const RestrictedPropagator rp = restricted_propagator(f, cfg.a, cfg.hamiltonian);
      row["unitary_defect"] = rp.unitary_defect;
      if (rp.unitary_defect > cfg.tol.unitary)
        ctx.tolerance_failure("restricted propagator defect at N=" + std::to_string(big_n));
    } else if (dim_full <= kDenseValidateCap) {
      const HilbertSpace s = make_space(big_n, cfg.d);
      const ScarSubspace sub = build_scar_subspace(s, cfg.spec);
      const PropagatorBundle b = quantize_perturbed(cfg.a, cfg.hamiltonian, s, cfg.tol.unitary);
      const double defect = check_invariance(sub, b.u_total.matrix);
      row["dim"] = sub.dim;
      row["invariance_defect"] = defect;
      row["unitary_defect"] = b.validation.unitary_defect_total;
      if (defect > cfg.tol.unitary || b.validation.unitary_defect_total > cfg.tol.unitary)
        ctx.tolerance_failure("dense validation defect at N=" + std::to_string(big_n));
    } else {
      row["note"] = "construction skipped (dense cap)";
    }
    ctx.per_n.push_back(row);
    ctx.say("validated N=" + std::to_string(big_n));
  }
  ctx.stage("validate");
  return 0;
}

int run_scar(const ExperimentConfig& cfg, Ctx& ctx) {
  CsvPlan plan{"scarring.csv", "N,observable,max_abs,mean_abs,cf_over_n_bound", {}};
  std::map<i64, std::string> blocks;
  for (const LabeledObservable& obs : cfg.observables) {
    ScarSweep sweep;
    try {
      sweep = scarring_sweep(cfg.a, cfg.hamiltonian, cfg.spec, obs.poly, ctx.use_admissible,
                             cfg.tol.unitary);
    } catch (const PreconditionError& e) {
      std::cerr << "scar: observable '" << obs.label << "': " << e.what() << "\n";
      return 1;
    }
    for (const ScarPoint& pt : sweep.points) {
      blocks[pt.big_n] += std::to_string(pt.big_n) + "," + obs.label + "," +
                          num17(pt.max_value) + "," + num17(pt.mean_value) + "," +
                          num17(pt.bound) + "\n";
      if (pt.max_value > pt.bound * (1.0 + 1e-6) + 1e-12)
        ctx.tolerance_failure("scar bound violated by '" + obs.label + "' at N=" +
                              std::to_string(pt.big_n));
    }
    ctx.summary["slope_" + obs.label] = sweep.slope;
    ctx.summary["exact_vanishing_" + obs.label] = sweep.exact_vanishing;
    ctx.say("swept " + obs.label);
  }
  ctx.stage("sweep");
  for (i64 big_n : ctx.use_admissible)
    if (blocks.count(big_n)) add_part(plan, ctx, big_n, blocks[big_n]);
  merge_csv(plan, ctx);
  ctx.stage("write");
  return 0;
}

int run_variance(const ExperimentConfig& cfg, Ctx& ctx) {
  const ClassicalMap map = make_classical_map(cfg.a, cfg.hamiltonian, 1.0);
  std::map<std::string, double> ft2;
  for (const LabeledObservable& obs : cfg.observables)
    ft2[obs.label] =
        mc_time_average_l2(obs.poly, map, cfg.spec, cfg.time_average_t).mean.real();
  ctx.stage("classical");

  CsvPlan var_plan{"variance.csv", "N,observable,sigma2,ft_l2_bound,density_fraction,M", {}};
  CsvPlan wig_plan{"wigner.csv", "N,state_index,eigenphase,freq,re,im", {}};
  const std::vector<IntRowVec> freqs = euclid_ball(2 * cfg.d, cfg.frequency_cutoff_m);

  for (i64 big_n : ctx.use_admissible) {
    const CosetFrame f = frame_for(cfg, big_n);
    const RestrictedPropagator rp = restricted_propagator(f, cfg.a, cfg.hamiltonian);
    if (rp.unitary_defect > cfg.tol.unitary)
      ctx.tolerance_failure("restricted propagator defect at N=" + std::to_string(big_n));
    const DensityRow density = density_one_report(f, rp, double(cfg.frequency_cutoff_m));

    std::string vblock;
    for (const LabeledObservable& obs : cfg.observables) {
      const double sigma2 = quantum_variance(f, rp, obs.poly);
      vblock += std::to_string(big_n) + "," + obs.label + "," + num17(sigma2) + "," +
                num17(ft2[obs.label]) + "," + num17(density.fraction) + "," +
                std::to_string(cfg.frequency_cutoff_m) + "\n";
    }
    add_part(var_plan, ctx, big_n, vblock);

    std::string wblock;
    for (const WignerRow& r : wigner_table(f, rp, freqs))
      wblock += std::to_string(big_n) + "," + std::to_string(r.state) + "," +
                num17(r.eigenphase) + "," + freq_str(r.n) + "," + num17(r.value.real()) + "," +
                num17(r.value.imag()) + "\n";
    add_part(wig_plan, ctx, big_n, wblock);

    ctx.per_n.push_back({{"N", big_n},
                         {"dim", f.dim},
                         {"unitary_defect", rp.unitary_defect},
                         {"density_fraction", density.fraction}});
    ctx.say("variance N=" + std::to_string(big_n));
  }
  ctx.stage("sweep");
  merge_csv(var_plan, ctx);
  merge_csv(wig_plan, ctx);
  ctx.stage("write");
  return 0;
}

int run_average(const ExperimentConfig& cfg, Ctx& ctx) {
  CsvPlan plan{"average.csv", "N,freq,avg_re,avg_im,exact_re,exact_im,resonant_flag", {}};
  const std::vector<IntRowVec> freqs = box_ball(2 * cfg.d, cfg.frequency_cutoff_m);
  for (i64 big_n : ctx.use_admissible) {
    const CosetFrame f = frame_for(cfg, big_n);
    std::string block;
    for (const IntRowVec& n : freqs) {
      const AverageKind kind = classify_average(cfg.spec, big_n, n);
      const cplx avg = average_wigner(f, n);
      const cplx exact =
          kind == AverageKind::lattice ? character_at_xi(n, cfg.spec.xi) : cplx(0.0, 0.0);
      const bool resonant = kind == AverageKind::resonant;
      if (!resonant && std::abs(avg - exact) > 1e-10)
        ctx.tolerance_failure("average of " + freq_str(n) + " off by " +
                              num17(std::abs(avg - exact)) + " at N=" + std::to_string(big_n));
      block += std::to_string(big_n) + "," + freq_str(n) + "," + num17(avg.real()) + "," +
               num17(avg.imag()) + "," + num17(exact.real()) + "," + num17(exact.imag()) + "," +
               (resonant ? "1" : "0") + "\n";
    }
    add_part(plan, ctx, big_n, block);
    ctx.per_n.push_back({{"N", big_n}, {"dim", f.dim}});
    ctx.say("averaged N=" + std::to_string(big_n));
  }
  ctx.stage("sweep");
  merge_csv(plan, ctx);
  ctx.stage("write");
  return 0;
}

int run_egorov(const ExperimentConfig& cfg, Ctx& ctx) {
  const LabeledObservable& obs = cfg.observables.front();
  const i64 t = 1;
  const EgorovSweep sweep = egorov_sweep(obs.poly, cfg.hamiltonian, t, ctx.use_all,
                                         cfg.grid_points_per_axis, cfg.tol.truncation);
  CsvPlan plan{"egorov.csv", "N,t,residual,bound", {}};
  for (const EgorovPoint& pt : sweep.points) {
    if (pt.residual > pt.bound + cfg.tol.egorov)
      ctx.tolerance_failure("flow comparison residual above bound at N=" +
                            std::to_string(pt.big_n));
    add_part(plan, ctx, pt.big_n,
             std::to_string(pt.big_n) + "," + std::to_string(t) + "," + num17(pt.residual) +
                 "," + num17(pt.bound) + "\n");
    ctx.per_n.push_back({{"N", pt.big_n}, {"residual", pt.residual}, {"bound", pt.bound}});
  }
  ctx.summary["egorov_slope"] = sweep.slope;
  ctx.summary["egorov_observable"] = obs.label;
  ctx.stage("sweep");
  merge_csv(plan, ctx);
  ctx.stage("write");
  return 0;
}

int run_product(const ExperimentConfig& cfg, Ctx& ctx) {
  CsvPlan plan{"product.csv", "N,f,g,defect", {}};
  for (i64 big_n : ctx.use_all) {
    if (pow_i64(big_n, cfg.d) > kProductCap) {
      ctx.run_warnings.push_back("product skipped at N=" + std::to_string(big_n) +
                                 " (dense cap)");
      continue;
    }
    const HilbertSpace s = make_space(big_n, cfg.d);
    std::string block;
    for (size_t i = 0; i < cfg.observables.size(); ++i)
      for (size_t k = i; k < cfg.observables.size(); ++k) {
        const double defect =
            product_defect(s, cfg.observables[i].poly, cfg.observables[k].poly);
        block += std::to_string(big_n) + "," + cfg.observables[i].label + "," +
                 cfg.observables[k].label + "," + num17(defect) + "\n";
      }
    add_part(plan, ctx, big_n, block);
    ctx.say("product N=" + std::to_string(big_n));
  }
  ctx.stage("sweep");
  merge_csv(plan, ctx);
  ctx.stage("write");
  return 0;
}

int run_spectrum(const ExperimentConfig& cfg, Ctx& ctx) {
  CsvPlan plan{"spectrum.csv", "N,state_index,eigenphase", {}};
  for (i64 big_n : ctx.use_admissible) {
    const CosetFrame f = frame_for(cfg, big_n);
    const RestrictedPropagator rp = restricted_propagator(f, cfg.a, cfg.hamiltonian);
    if (rp.unitary_defect > cfg.tol.unitary)
      ctx.tolerance_failure("restricted propagator defect at N=" + std::to_string(big_n));
    std::string block;
    for (size_t i = 0; i < rp.eigenphases.size(); ++i)
      block += std::to_string(big_n) + "," + std::to_string(i) + "," +
               num17(rp.eigenphases[i]) + "\n";
    add_part(plan, ctx, big_n, block);
    ctx.per_n.push_back({{"N", big_n}, {"dim", f.dim}, {"unitary_defect", rp.unitary_defect}});
    ctx.say("spectrum N=" + std::to_string(big_n));
  }
  ctx.stage("sweep");
  merge_csv(plan, ctx);
  ctx.stage("write");
  return 0;
}

int run_classical(const ExperimentConfig& cfg, Ctx& ctx) {
  CsvPlan plan{"classical.csv", "check,label,value", {}};
  const ClassicalMap map = make_classical_map(cfg.a, cfg.hamiltonian, 1.0);
  std::string block;

  for (const LabeledObservable& obs : cfg.observables)
    block += "sharp_residual," + obs.label + "," +
             num17(sharp_max_abs(obs.poly, cfg.spec)) + "\n";
  for (const LabeledObservable& obs : cfg.observables)
    block += "time_average_l2," + obs.label + "," +
             num17(mc_time_average_l2(obs.poly, map, cfg.spec, cfg.time_average_t).mean.real()) +
             "\n";

  const LabeledObservable& first = cfg.observables.front();
  const i64 g = cfg.grid_points_per_axis;
  const TrigPolynomial once = flow_pushforward(first.poly, map, 1.0, g, cfg.tol.truncation);
  const TrigPolynomial half = flow_pushforward(first.poly, map, 0.5, g, cfg.tol.truncation);
  const TrigPolynomial twice = flow_pushforward(half, map, 0.5, g, cfg.tol.truncation);
  block += "pushforward_semigroup," + first.label + "," + num17((twice - once).one_norm()) + "\n";

  // Birkhoff average along a generic ambient orbit against the volume mean.
  // The submanifold itself is transversally unstable, so a long double-precision
  // orbit cannot stay on it; the volume mean is the right ambient reference
  // (and equals the submanifold mean when the lattice is empty).
  Point x0(2 * cfg.d);
  for (int i = 0; i < 2 * cfg.d; ++i) x0(i) = std::fmod(0.381966011250105 * (i + 1), 1.0);
  const cplx volume_mean = first.poly.coefficient(IntRowVec::Zero(2 * cfg.d));
  block += "birkhoff_vs_volume," + first.label + "," +
           num17(birkhoff_diagnostic(map, first.poly, x0, 4000, volume_mean)) + "\n";

  ctx.stage("diagnostics");
  add_part(plan, ctx, 0, block);
  merge_csv(plan, ctx);
  ctx.stage("write");
  return 0;
}

void finalize_manifest(Ctx& ctx, const std::string& cmd) {
  json m;
  m["tool_version"] = kToolVersion;
  m["subcommand"] = cmd;
  m["config_digest"] = ctx.cfg->digest;
  json warn = json::array();
  for (const std::string& w : ctx.cfg->warnings) warn.push_back(w);
  for (const std::string& w : ctx.run_warnings) warn.push_back(w);
  m["warnings"] = warn;
  m["stages"] = ctx.stages;
  m["per_n"] = ctx.per_n;
  m["outputs"] = ctx.outputs;
  m["summary"] = ctx.summary;
  write_text(ctx.out / "manifest.json", m.dump(2) + "\n");
  ctx.say("wrote " + (ctx.out / "manifest.json").string());
}

}  // namespace

int run_subcommand(const std::string& cmd, const std::string& config_path,
                   const RunOptions& opt) {
  ExperimentConfig cfg;
  try {
    cfg = load_and_validate(config_path);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  if (!opt.out_override.empty()) cfg.output_dir = opt.out_override;

  Ctx ctx;
  ctx.cfg = &cfg;
  ctx.quiet = opt.quiet;
  ctx.out = cfg.output_dir;
  ctx.use_all = cfg.n_values;
  ctx.use_admissible = cfg.admissible_n;
  if (opt.only_n > 0) {
    const auto keep = [&](const std::vector<i64>& v) {
      std::vector<i64> r;
      for (i64 n : v)
        if (n == opt.only_n) r.push_back(n);
      return r;
    };
    ctx.use_all = keep(ctx.use_all);
    ctx.use_admissible = keep(ctx.use_admissible);
    if (ctx.use_all.empty()) {
      std::cerr << "requested N=" << opt.only_n << " is not in N_values\n";
      return 1;
    }
  }

  try {
    fs::create_directories(ctx.out);
  } catch (const std::exception& e) {
    std::cerr << "cannot create output directory: " << e.what() << "\n";
    return 1;
  }
  for (const std::string& w : cfg.warnings) ctx.say("warning: " + w);
  ctx.stage("load");

  int rc = 0;
  try {
    if (cmd == "validate")
      rc = run_validate(cfg, ctx);
    else if (cmd == "scar")
      rc = run_scar(cfg, ctx);
    else if (cmd == "variance")
      rc = run_variance(cfg, ctx);
    else if (cmd == "average")
      rc = run_average(cfg, ctx);
    else if (cmd == "egorov")
      rc = run_egorov(cfg, ctx);
    else if (cmd == "product")
      rc = run_product(cfg, ctx);
    else if (cmd == "spectrum")
      rc = run_spectrum(cfg, ctx);
    else if (cmd == "classical-check")
      rc = run_classical(cfg, ctx);
    else {
      std::cerr << "unknown subcommand: " << cmd << "\n";
      return 1;
    }
  } catch (const Error& e) {
    std::cerr << cmd << ": " << e.what() << "\n";
    return 1;
  }

  finalize_manifest(ctx, cmd);
  return rc != 0 ? rc : ctx.exit_code;
}

}  // namespace scarlab
