#ifndef ODECERT_PROBLEM_HPP
#define ODECERT_PROBLEM_HPP

#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "odecert/catalog.hpp"
#include "odecert/jet.hpp"
#include "odecert/linalg.hpp"

namespace odecert {

/// One factor (x + lambda + i*omega) of a characteristic polynomial.
/// lambda is the decay rate of the associated mode, omega its angular
/// frequency; only lambda enters the error-bound formulas.
struct ComplexRoot {
  double lambda = 0.0;
  double omega = 0.0;
};

struct Interval {
  double t0 = 0.0;
  double t1 = 1.0;
  double length() const { return t1 - t0; }
  bool contains(double t) const { return t >= t0 && t <= t1; }
};

void validate(const Interval& iv);  // finite, t0 < t1

/// u' + (lambda + i*omega) u = f
struct FirstOrderConstant {
  ComplexRoot root;
  Complex u0;
};

/// u^(n) + a_{n-1} u^(n-1) + ... + a_0 u = f, stored in factored-root form.
/// coeffs holds a_0..a_{n-1} and is derived from the roots on construction.
struct HigherOrderConstant {
  std::vector<ComplexRoot> roots;
  std::vector<Complex> ics;  // u^(k)(t0) for k = 0..n-1
  std::vector<Complex> coeffs;
};

struct JordanBlockSpec {
  ComplexRoot root;
  int size = 1;
};

/// u' + A u = f with A = M J M^-1 assembled from modal data. Storing the
/// factorization rather than A keeps certification well-posed: extracting a
/// Jordan form from a raw matrix is numerically ill-posed.
struct LinearSystem {
  int dim = 0;
  Matrix modal;
  std::vector<JordanBlockSpec> blocks;
  std::vector<Complex> u0;
  NormP norm_p = NormP::Two;
  // Derived on construction.
  Matrix modal_inv;
  Matrix a;
};

/// u' + (p(t) + i q(t)) u = f. The antiderivative P of p may be supplied;
/// when absent the bound engine integrates p numerically.
struct NonconstantFirstOrder {
  ScalarFn p;
  ScalarFn q;        // may be null (treated as 0)
  ScalarFn p_antideriv;  // may be null
  Complex u0;
};

/// Forcing evaluated by value; out has the problem's complex dimension.
using ForcingFn = std::function<void(double t, std::span<Complex> out)>;

struct OdeProblem {
  std::variant<FirstOrderConstant, HigherOrderConstant, LinearSystem, NonconstantFirstOrder> kind;
  ForcingFn forcing;
  Interval domain;
  /// True when the problem genuinely couples real and imaginary parts, in
  /// which case candidates carry 2*complex_dim real components (re, im
  /// interleaved). The manufactured suite is entirely real.
  bool complex_state = false;

  int complex_dim() const;
  int state_dim() const { return complex_state ? 2 * complex_dim() : complex_dim(); }
  /// Highest derivative order the residual operator needs.
  int operator_order() const;

  const char* kind_name() const;
};

/// Monic-polynomial coefficients a_0..a_{n-1} with
/// x^n + sum a_k x^k = prod (x + lambda_k + i omega_k).
std::vector<Complex> expand_characteristic(std::span<const ComplexRoot> roots);

HigherOrderConstant make_higher_order(std::vector<ComplexRoot> roots, std::vector<Complex> ics);

/// Builds the system struct and its derived members; throws
/// SingularMatrixError when the modal matrix is not invertible and
/// std::invalid_argument when block sizes do not sum to dim.
LinearSystem make_linear_system(Matrix modal, std::vector<JordanBlockSpec> blocks,
                                std::vector<Complex> u0, NormP norm_p);

/// Assembles per-component complex Taylor coefficients (up to `order`) from
/// realified candidate jets, honoring complex_state pairing.
void assemble_complex_state(const OdeProblem& problem, std::span<const Jet> state_jets, int order,
                            std::vector<std::vector<Complex>>& out);

}  // namespace odecert

#endif  // ODECERT_PROBLEM_HPP
