#pragma once

#include <string>
#include <vector>

#include "scarlab/classical.hpp"
#include "scarlab/symplectic.hpp"
#include "scarlab/trigpoly.hpp"

namespace scarlab {

struct LabeledObservable {
  std::string label;
  TrigPolynomial poly;
};

struct ToleranceSet {
  double rank = 1e-8;
  double unitary = 1e-9;
  double egorov = 1e-8;
  double truncation = 1e-12;
};

// Fully validated experiment description.  The hamiltonian is stored with its
// amplitude already applied; epsilon is kept for reporting.  admissible_n is
// N_values with the sizes whose character cannot be realized removed (each
// removal leaves a warning).
struct ExperimentConfig {
  int d = 0;
  SymplecticMatrix a;
  SubmanifoldSpec spec;
  TrigPolynomial hamiltonian;
  double epsilon = 0.0;
  std::vector<LabeledObservable> observables;
  std::vector<i64> n_values;
  std::vector<i64> admissible_n;
  i64 time_average_t = 20;
  i64 frequency_cutoff_m = 2;
  i64 grid_points_per_axis = 64;
  ToleranceSet tol;
  std::string output_dir = "out";
  std::vector<std::string> warnings;
  std::string digest;  // content hash of the raw config bytes
};

// Parses the JSON description and runs every structural validator: matrix
// symplectic, lattice rows saturated / isotropic / invariant, potential real
// and inside the lattice commutant, character point fixed by the matrix.
// Throws ValidationError naming the offending field.
ExperimentConfig load_and_validate(const std::string& path);

// FNV-1a 64-bit over raw bytes, lowercase hex
std::string fnv1a_hex(const std::string& bytes);

}  // namespace scarlab
