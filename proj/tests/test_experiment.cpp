#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scarlab/config.hpp"
#include "scarlab/experiment.hpp"
#include "scarlab/scarring.hpp"

using namespace scarlab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path config_dir() { return fs::path(SCARLAB_CONFIG_DIR); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(bool(in));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> csv_lines(const fs::path& p) {
  std::vector<std::string> lines;
  std::ifstream in(p);
  REQUIRE(bool(in));
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

// scratch space unique to this test binary, wiped per use
fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("scarlab_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
  const fs::path p = dir / name;
  std::ofstream out(p);
  out << j.dump(2);
  return p;
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

RunOptions opts(const fs::path& out, i64 only_n = 0) {
  RunOptions o;
  o.out_override = out.string();
  o.only_n = only_n;
  o.quiet = true;
  return o;
}

}  // namespace

TEST_CASE("shipped configs load with the documented semantics") {
  const ExperimentConfig a = load_and_validate((config_dir() / "cfg-a.json").string());
  CHECK(a.d == 1);
  CHECK(a.epsilon == doctest::Approx(0.05));
  CHECK(a.n_values.size() == 7);
  CHECK(a.admissible_n == a.n_values);  // empty lattice never filters
  // the stored hamiltonian carries epsilon already
  IntRowVec q1(2);
  q1 << 0, 1;
  CHECK(a.hamiltonian.coefficient(q1).real() == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(a.observables.size() == 2);
  CHECK(a.observables[0].label == "cos_p");
  CHECK(a.warnings.empty());
  CHECK(a.digest.size() == 16);

  const ExperimentConfig b = load_and_validate((config_dir() / "cfg-b.json").string());
  CHECK(b.d == 2);
  CHECK(b.spec.lattice.d0 == 2);
  CHECK(b.admissible_n.size() == b.n_values.size());

  const ExperimentConfig c = load_and_validate((config_dir() / "cfg-c.json").string());
  CHECK(c.d == 3);
  CHECK(c.spec.lattice.d0 == 2);
  CHECK(shift_frame_available(c.spec));

  const ExperimentConfig v = load_and_validate((config_dir() / "cfg-c-variance.json").string());
  CHECK(v.observables.size() == 3);
  CHECK(v.time_average_t == 20);
  CHECK(v.frequency_cutoff_m == 2);
}

TEST_CASE("validation errors name the offending field") {
  const fs::path dir = scratch("badcfg");
  json base = load_json(config_dir() / "cfg-c.json");

  {
    json j = base;
    j.erase("dimension_d");
    const fs::path p = write_config(dir, "no_d.json", j);
    CHECK_THROWS_WITH_AS(load_and_validate(p.string()),
                         doctest::Contains("dimension_d"), ValidationError);
  }
  {
    json j = base;
    j["matrix_A"][0][0] = 7;  // breaks the symplectic relation
    const fs::path p = write_config(dir, "nonsymp.json", j);
    CHECK_THROWS_WITH_AS(load_and_validate(p.string()), doctest::Contains("matrix_A"),
                         ValidationError);
  }
  {
    json j = base;
    // q1 component pairs nonzero with the lattice row e1
    j["hamiltonian"]["terms"].push_back({{"freq", {0, 0, 0, 1, 0, 0}}, {"re", 0.5}});
    j["hamiltonian"]["terms"].push_back({{"freq", {0, 0, 0, -1, 0, 0}}, {"re", 0.5}});
    const fs::path p = write_config(dir, "badham.json", j);
    CHECK_THROWS_WITH_AS(load_and_validate(p.string()), doctest::Contains("hamiltonian"),
                         ValidationError);
  }
  {
    json j = base;
    j["xi_numerator"] = {1, 0, 0, 0, 0, 0};
    j["xi_denominator"] = 3;  // (A - I) xi != 0 mod 1
    const fs::path p = write_config(dir, "badxi.json", j);
    CHECK_THROWS_WITH_AS(load_and_validate(p.string()), doctest::Contains("xi_numerator"),
                         ValidationError);
  }
  {
    json j = base;
    j["lambda_basis"] = {{1, 0, 0, 0, 0, 0}, {0, 0, 0, 1, 0, 0}};  // pairs symplectically
    const fs::path p = write_config(dir, "badlat.json", j);
    CHECK_THROWS_WITH_AS(load_and_validate(p.string()), doctest::Contains("lambda_basis"),
                         ValidationError);
  }
  {
    json j = base;
    j["N_values"] = {4, 4};
    const fs::path p = write_config(dir, "dupn.json", j);
    CHECK_THROWS_WITH_AS(load_and_validate(p.string()), doctest::Contains("N_values"),
                         ValidationError);
  }
}

TEST_CASE("content digest matches the reference vectors") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("validate subcommand checks every admissible size and writes a manifest") {
  const fs::path out = scratch("validate_b");
  const int rc = run_subcommand("validate", (config_dir() / "cfg-b.json").string(), opts(out));
  CHECK(rc == 0);
  const json m = load_json(out / "manifest.json");
  CHECK(m.at("subcommand") == "validate");
  CHECK(m.at("config_digest") == load_and_validate((config_dir() / "cfg-b.json").string()).digest);
  CHECK(m.at("per_n").size() == 11);
  for (const json& row : m.at("per_n")) {
    CHECK(row.at("dim").get<i64>() == 1);
    CHECK(row.at("unitary_defect").get<double>() <= 1e-9);
  }
}

TEST_CASE("scar subcommand emits bounded rows and a per observable summary") {
  const fs::path out = scratch("scar_c");
  const int rc = run_subcommand("scar", (config_dir() / "cfg-c.json").string(), opts(out, 8));
  CHECK(rc == 0);
  const auto lines = csv_lines(out / "scarring.csv");
  REQUIRE(lines.size() == 3);  // header + one row per observable
  CHECK(lines[0] == "N,observable,max_abs,mean_abs,cf_over_n_bound");
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    REQUIRE(f.size() == 5);
    CHECK(f[0] == "8");
    CHECK(std::stod(f[2]) <= std::stod(f[4]) + 1e-12);
  }
  const json m = load_json(out / "manifest.json");
  CHECK(m.at("summary").contains("exact_vanishing_cos_p1_minus_one"));

  // manifest digests certify the written files
  for (const json& o : m.at("outputs")) {
    const std::string content = slurp(out / o.at("file").get<std::string>());
    CHECK(o.at("digest").get<std::string>() == fnv1a_hex(content));
  }
}

TEST_CASE("scar subcommand rejects an observable that does not vanish on the subtorus") {
  const fs::path out = scratch("scar_b");
  // cfg-b ships cos_q1 precisely to exercise this path
  const int rc = run_subcommand("scar", (config_dir() / "cfg-b.json").string(), opts(out));
  CHECK(rc == 1);
}

TEST_CASE("variance subcommand writes the variance table and the wigner table") {
  const fs::path out = scratch("var_c");
  const int rc =
      run_subcommand("variance", (config_dir() / "cfg-c-variance.json").string(), opts(out, 12));
  CHECK(rc == 0);
  const auto vl = csv_lines(out / "variance.csv");
  REQUIRE(vl.size() == 4);  // header + 3 observables
  CHECK(vl[0] == "N,observable,sigma2,ft_l2_bound,density_fraction,M");
  for (size_t i = 1; i < vl.size(); ++i) {
    const auto f = split(vl[i], ',');
    REQUIRE(f.size() == 6);
    CHECK(std::stod(f[2]) >= 0.0);
    CHECK(f[5] == "2");
  }
  // 484 nonzero integer vectors of euclidean norm <= 2 in Z^6, 12 states
  const auto wl = csv_lines(out / "wigner.csv");
  CHECK(wl.size() == 1 + 12 * 484);
  CHECK(wl[0] == "N,state_index,eigenphase,freq,re,im");
  const auto f = split(wl[1], ',');
  REQUIRE(f.size() == 6);
  CHECK(split(f[3], ';').size() == 6);
}

TEST_CASE("average subcommand reproduces the exact characters off resonance") {
  const fs::path out = scratch("avg_b");
  const int rc = run_subcommand("average", (config_dir() / "cfg-b.json").string(), opts(out, 4));
  CHECK(rc == 0);
  const auto lines = csv_lines(out / "average.csv");
  REQUIRE(lines.size() == 1 + 624);  // 5^4 - 1 frequencies in the box |n|_inf <= 2
  CHECK(lines[0] == "N,freq,avg_re,avg_im,exact_re,exact_im,resonant_flag");
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    REQUIRE(f.size() == 7);
    if (f[6] == "1") continue;
    const double dre = std::stod(f[2]) - std::stod(f[4]);
    const double dim = std::stod(f[3]) - std::stod(f[5]);
    CHECK(std::abs(dre) <= 1e-10);
    CHECK(std::abs(dim) <= 1e-10);
  }
}

TEST_CASE("egorov subcommand certifies the residual at every size") {
  const fs::path out = scratch("ego_a");
  const int rc = run_subcommand("egorov", (config_dir() / "cfg-a.json").string(), opts(out));
  CHECK(rc == 0);
  const auto lines = csv_lines(out / "egorov.csv");
  REQUIRE(lines.size() == 1 + 7);
  CHECK(lines[0] == "N,t,residual,bound");
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    REQUIRE(f.size() == 4);
    CHECK(std::stod(f[2]) <= std::stod(f[3]));
  }
  const json m = load_json(out / "manifest.json");
  const double slope = m.at("summary").at("egorov_slope").get<double>();
  CHECK(slope < -1.6);
  CHECK(slope > -2.4);
}

TEST_CASE("product subcommand sweeps unordered observable pairs") {
  const fs::path out = scratch("prod_a");
  const int rc = run_subcommand("product", (config_dir() / "cfg-a.json").string(), opts(out, 8));
  CHECK(rc == 0);
  const auto lines = csv_lines(out / "product.csv");
  REQUIRE(lines.size() == 1 + 3);  // (cos_p,cos_p), (cos_p,cos_q), (cos_q,cos_q)
  CHECK(lines[0] == "N,f,g,defect");
  bool mixed_nonzero = false;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f[1] != f[2]) mixed_nonzero = std::stod(f[3]) > 1e-3;
  }
  CHECK(mixed_nonzero);
}

TEST_CASE("spectrum subcommand emits one eigenphase row per state") {
  const fs::path out = scratch("spec_b");
  const int rc = run_subcommand("spectrum", (config_dir() / "cfg-b.json").string(), opts(out, 5));
  CHECK(rc == 0);
  const auto lines = csv_lines(out / "spectrum.csv");
  REQUIRE(lines.size() == 2);  // dim 1 at N = 5
  CHECK(lines[0] == "N,state_index,eigenphase");
}

TEST_CASE("classical check reports flow side diagnostics") {
  const fs::path out = scratch("cls_a");
  const int rc =
      run_subcommand("classical-check", (config_dir() / "cfg-a.json").string(), opts(out));
  CHECK(rc == 0);
  const auto lines = csv_lines(out / "classical.csv");
  REQUIRE(lines.size() == 7);  // header + 2 sharps + 2 time averages + semigroup + birkhoff
  CHECK(lines[0] == "check,label,value");
  double semigroup = -1.0, birkhoff = -1.0;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f[0] == "pushforward_semigroup") semigroup = std::stod(f[2]);
    if (f[0] == "birkhoff_vs_volume") birkhoff = std::stod(f[2]);
  }
  CHECK(semigroup >= 0.0);
  CHECK(semigroup <= 1e-9);
  CHECK(birkhoff >= 0.0);
  CHECK(birkhoff <= 0.1);  // generic hyperbolic orbit equidistributes
}

TEST_CASE("reruns reproduce byte identical outputs") {
  const fs::path o1 = scratch("det1");
  const fs::path o2 = scratch("det2");
  REQUIRE(run_subcommand("scar", (config_dir() / "cfg-c.json").string(), opts(o1)) == 0);
  REQUIRE(run_subcommand("scar", (config_dir() / "cfg-c.json").string(), opts(o2)) == 0);
  CHECK(slurp(o1 / "scarring.csv") == slurp(o2 / "scarring.csv"));
}

TEST_CASE("unknown sizes and unknown subcommands are structural errors") {
  const fs::path out = scratch("err");
  CHECK(run_subcommand("scar", (config_dir() / "cfg-c.json").string(), opts(out, 7)) == 1);
  CHECK(run_subcommand("nope", (config_dir() / "cfg-c.json").string(), opts(out)) == 1);
  CHECK(run_subcommand("scar", (config_dir() / "missing.json").string(), opts(out)) == 1);
}
