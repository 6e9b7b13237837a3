#include "scarlab/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "scarlab/integer_linalg.hpp"
#include "scarlab/scarring.hpp"

namespace scarlab {

using nlohmann::json;

namespace {

const json& need(const json& j, const char* field) {
  if (!j.is_object() || !j.contains(field))
    throw ValidationError(std::string("config field missing: ") + field);
  return j.at(field);
}

i64 as_int(const json& v, const std::string& field) {
  if (!v.is_number_integer())
    throw ValidationError(field + ": expected an integer");
  return v.get<i64>();
}

double as_double(const json& v, const std::string& field) {
  if (!v.is_number()) throw ValidationError(field + ": expected a number");
  return v.get<double>();
}

i64 opt_int(const json& j, const char* field, i64 fallback) {
  if (!j.is_object() || !j.contains(field)) return fallback;
  return as_int(j.at(field), field);
}

double opt_double(const json& j, const char* field, double fallback) {
  if (!j.is_object() || !j.contains(field)) return fallback;
  return as_double(j.at(field), field);
}

IntRowVec parse_row(const json& v, const std::string& field, int len) {
  if (!v.is_array() || static_cast<int>(v.size()) != len)
    throw ValidationError(field + ": expected an array of " + std::to_string(len) + " integers");
  IntRowVec r(len);
  for (int i = 0; i < len; ++i) r(i) = as_int(v.at(static_cast<size_t>(i)), field);
  return r;
}

IntMat parse_matrix(const json& v, const std::string& field, i64 rows_expected, int cols) {
  if (!v.is_array()) throw ValidationError(field + ": expected an array of integer rows");
  const i64 rows = static_cast<i64>(v.size());
  if (rows_expected >= 0 && rows != rows_expected)
    throw ValidationError(field + ": expected " + std::to_string(rows_expected) + " rows");
  IntMat m(rows, cols);
  for (i64 r = 0; r < rows; ++r)
    m.row(r) = parse_row(v.at(static_cast<size_t>(r)), field, cols);
  return m;
}

TrigPolynomial parse_terms(const json& v, const std::string& field, int two_d) {
  if (!v.is_array()) throw ValidationError(field + ": expected an array of terms");
  TrigPolynomial f(two_d);
  for (const json& t : v) {
    if (!t.is_object() || !t.contains("freq"))
      throw ValidationError(field + ": every term needs a freq array");
    const IntRowVec n = parse_row(t.at("freq"), field + ".freq", two_d);
    const double re = t.contains("re") ? as_double(t.at("re"), field + ".re") : 0.0;
    const double im = t.contains("im") ? as_double(t.at("im"), field + ".im") : 0.0;
    f.add_term(n, cplx(re, im));
  }
  return f;
}

i64 mod_pos(i64 a, i64 m) {
  i64 r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

ExperimentConfig load_and_validate(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config file not found: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();

  json j;
  try {
    j = json::parse(bytes);
  } catch (const std::exception& e) {
    throw ValidationError(std::string("config parse error: ") + e.what());
  }

  ExperimentConfig cfg;
  cfg.digest = fnv1a_hex(bytes);

  const i64 d = as_int(need(j, "dimension_d"), "dimension_d");
  if (d < 1 || d > 8) throw ValidationError("dimension_d: must be in [1, 8]");
  cfg.d = static_cast<int>(d);
  const int two_d = 2 * cfg.d;

  const IntMat amat = parse_matrix(need(j, "matrix_A"), "matrix_A", two_d, two_d);
  try {
    cfg.a = validate_symplectic(amat);
  } catch (const Error& e) {
    throw ValidationError(std::string("matrix_A: ") + e.what());
  }

  const IntMat lrows = parse_matrix(need(j, "lambda_basis"), "lambda_basis", -1, two_d);
  IsotropicLattice lat;
  try {
    lat = check_invariant_isotropic(cfg.a, lrows);
  } catch (const Error& e) {
    throw ValidationError(std::string("lambda_basis: ") + e.what());
  }

  const i64 den = as_int(need(j, "xi_denominator"), "xi_denominator");
  if (den < 1) throw ValidationError("xi_denominator: must be a positive integer");
  const IntRowVec numrow = parse_row(need(j, "xi_numerator"), "xi_numerator", two_d);
  FixedPoint xi;
  xi.denominator = den;
  xi.numerator = IntVec(two_d);
  for (int i = 0; i < two_d; ++i) xi.numerator(i) = mod_pos(numrow(i), den);
  bool xi_zero = true;
  for (int r = 0; r < two_d; ++r) {
    if (xi.numerator(r) != 0) xi_zero = false;
    i64 acc = 0;
    for (int c = 0; c < two_d; ++c)
      acc += (cfg.a.a(r, c) - (r == c ? 1 : 0)) * xi.numerator(c);
    if (mod_pos(acc, den) != 0)
      throw ValidationError("xi_numerator: not a fixed point of matrix_A at this denominator");
  }
  if (!xi_zero) {
    IntMat ami = cfg.a.a;
    for (int i = 0; i < two_d; ++i) ami(i, i) -= 1;
    const i64 r_index = det_integer(ami);
    if (r_index == 0 || mod_pos(r_index, den) != 0)
      cfg.warnings.push_back("xi_denominator does not divide det(A - I) = " +
                             std::to_string(r_index) + "; expect inadmissible sizes");
  }
  try {
    cfg.spec = make_submanifold_spec(lat, xi);
  } catch (const Error& e) {
    throw ValidationError(std::string("xi_numerator: ") + e.what());
  }

  const json& hj = need(j, "hamiltonian");
  cfg.epsilon = as_double(need(hj, "epsilon"), "hamiltonian.epsilon");
  const TrigPolynomial hbase = parse_terms(need(hj, "terms"), "hamiltonian.terms", two_d);
  if (!hbase.is_real())
    throw ValidationError("hamiltonian.terms: not conjugate symmetric, the potential must be real");
  for (const auto& [key, coef] : hbase.terms()) {
    (void)coef;
    const IntRowVec n = TrigPolynomial::to_row(key);
    for (i64 r = 0; r < lat.basis.rows(); ++r) {
      const IntRowVec m = lat.basis.row(r);
      if (symplectic_form(m, n, cfg.d) != 0)
        throw ValidationError("hamiltonian.terms: a term pairs nonzero with the lattice "
                              "(H not supported in the lattice commutant)");
    }
  }
  cfg.hamiltonian = cfg.epsilon * hbase;

  const json& obs = need(j, "observables");
  if (!obs.is_array() || obs.empty())
    throw ValidationError("observables: expected a nonempty array");
  std::set<std::string> seen;
  for (const json& o : obs) {
    if (!o.is_object() || !o.contains("label") || !o.at("label").is_string())
      throw ValidationError("observables: every entry needs a string label");
    const std::string label = o.at("label").get<std::string>();
    if (label.empty() || !seen.insert(label).second)
      throw ValidationError("observables: duplicate or empty label '" + label + "'");
    cfg.observables.push_back({label, parse_terms(need(o, "terms"), "observables.terms", two_d)});
  }

  const json& nv = need(j, "N_values");
  if (!nv.is_array() || nv.empty())
    throw ValidationError("N_values: expected a nonempty array of integers");
  std::set<i64> seen_n;
  for (const json& v : nv) {
    const i64 n = as_int(v, "N_values");
    if (n < 1) throw ValidationError("N_values: entries must be positive");
    if (!seen_n.insert(n).second) throw ValidationError("N_values: duplicate entry");
    cfg.n_values.push_back(n);
  }

  cfg.time_average_t = opt_int(j, "time_average_T", 20);
  if (cfg.time_average_t < 0) throw ValidationError("time_average_T: must be nonnegative");
  cfg.frequency_cutoff_m = opt_int(j, "frequency_cutoff_M", 2);
  if (cfg.frequency_cutoff_m < 0) throw ValidationError("frequency_cutoff_M: must be nonnegative");
  cfg.grid_points_per_axis = opt_int(j, "grid_points_per_axis", 64);
  const i64 g = cfg.grid_points_per_axis;
  if (g < 4 || (g & (g - 1)) != 0)
    throw ValidationError("grid_points_per_axis: must be a power of two, at least 4");

  if (j.contains("tolerances")) {
    const json& tj = j.at("tolerances");
    cfg.tol.rank = opt_double(tj, "rank", cfg.tol.rank);
    cfg.tol.unitary = opt_double(tj, "unitary", cfg.tol.unitary);
    cfg.tol.egorov = opt_double(tj, "egorov", cfg.tol.egorov);
    cfg.tol.truncation = opt_double(tj, "truncation", cfg.tol.truncation);
    for (double t : {cfg.tol.rank, cfg.tol.unitary, cfg.tol.egorov, cfg.tol.truncation})
      if (!(t > 0.0)) throw ValidationError("tolerances: entries must be positive");
  }

  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string())
      throw ValidationError("output_dir: expected a string");
    cfg.output_dir = j.at("output_dir").get<std::string>();
  }

  for (i64 n : cfg.n_values) {
    Admissibility ad;
    try {
      ad = character_admissible(make_space(n, cfg.d), cfg.spec);
    } catch (const Error& e) {
      throw ValidationError("N_values: N=" + std::to_string(n) + ": " + e.what());
    }
    if (ad.admissible)
      cfg.admissible_n.push_back(n);
    else
      cfg.warnings.push_back("N=" + std::to_string(n) + " skipped: " + ad.diagnosis);
  }

  return cfg;
}

}  // namespace scarlab
