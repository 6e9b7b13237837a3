#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace scarlab {

using cplx = std::complex<double>;
using i64 = std::int64_t;

inline constexpr double kPi = std::numbers::pi_v<double>;

// e(x) = exp(2 pi i x), the character every phase in this code is built from
inline cplx e2pi(double x) { return std::polar(1.0, 2.0 * kPi * x); }

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// bad input data: non-symplectic matrix, malformed config, complex Hamiltonian
struct ValidationError : Error {
  using Error::Error;
};

// a computed dimension disagrees with the predicted one, or a map degenerates
struct DimensionError : Error {
  using Error::Error;
};

// the parity character sum says no intertwiner exists at this N
struct ObstructionError : Error {
  using Error::Error;
};

// an internal invariant failed (non-unitary factor, projector defect, ...)
struct ConsistencyError : Error {
  using Error::Error;
};

// grid too coarse: aliased Fourier mass above the truncation budget
struct ResolutionError : Error {
  using Error::Error;
};

// input rows do not have full rank over the rationals
struct RankError : Error {
  using Error::Error;
};

// a map that must be invertible on the torus is singular (det(A - I) = 0)
struct DegeneracyError : Error {
  using Error::Error;
};

// ODE integration could not reach the requested tolerance
struct IntegrationError : Error {
  using Error::Error;
};

// a dense solve was requested beyond the configured size ceiling
struct CostCapError : Error {
  using Error::Error;
};

// an operation's mathematical precondition does not hold for this input
struct PreconditionError : Error {
  using Error::Error;
};

// a state that must be unit-norm is not
struct NormalizationError : Error {
  using Error::Error;
};

enum class Exec { serial, parallel };

Exec exec_policy();
void set_exec_policy(Exec e);

// honors SCARLAB_THREADS when set, otherwise the OpenMP default
int worker_count();
void init_threads_from_env();

}  // namespace scarlab
