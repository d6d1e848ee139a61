#ifndef ODECERT_BOUNDS_HPP
#define ODECERT_BOUNDS_HPP

#include <span>
#include <string>
#include <vector>

#include "odecert/problem.hpp"
#include "odecert/residual.hpp"

namespace odecert {

/// Raised when a problem falls outside the certified class (for example a
/// higher-order or system problem with a negative decay rate).
class CertificationRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Certified error-bound values sampled on a time grid.
struct BoundCurve {
  enum class Kind { AbsoluteError, RelativeToNaturalResponse };
  std::vector<double> times;
  std::vector<double> values;
  Kind kind = Kind::AbsoluteError;
  std::string theorem_tag;
  int partition_cells = 1;
};

// ---- auxiliary kernels -------------------------------------------------
//
// Everything below is expressed in elapsed time x = t - t0. h_k is both the
// constant-coefficient chain kernel and the basic building block:
//   h_k(x; lambda) = integral_0^x s^(k-1)/(k-1)! e^(-lambda s) ds
//                  = lambda^-k (1 - e^(-lambda x) sum_{j<k} (lambda x)^j/j!)
// evaluated through an alternating series when lambda*x is small, which is
// also how the lambda -> 0 polynomial branch x^k/k! arises.

double h_k(double t, double lambda, int k, double t0 = 0.0);
double H_k(double t, double lambda, int k, double t0 = 0.0);

/// phi_n of the elapsed time x >= 0; lambdas must be nonnegative.
/// Pairwise-separated roots use the closed form (a divided-difference
/// evaluation of the stable kernel g(mu) = -expm1(-mu x)/mu, algebraically
/// identical to the partial-fraction sum); clustered or near-zero roots
/// fall back to the integral recurrence
///   Phi_n(x) = integral_0^x e^(-lambda_n (x-s)) Phi_{n-1}(s) ds
/// with adaptive Simpson quadrature; all-zero roots give x^n/n! exactly.
double phi_elapsed(double x, std::span<const double> lambdas);

double phi_n(double t, std::span<const double> lambdas, double t0 = 0.0);
double phi2(double t, double lambda1, double lambda2, double t0 = 0.0);

/// integral_a^b e^(lambda (tau - t)) dtau for a <= b <= t; any real lambda.
double exp_cell_integral(double a, double b, double t, double lambda);

/// integral_a^b (t - tau)^m / m! * e^(lambda (tau - t)) dtau for lambda >= 0,
/// evaluated as a cancellation-free positive sum of h kernels.
double poly_exp_cell_integral(double a, double b, double t, double lambda, int m);

/// integral_a^b (e^(l2 (tau-t)) - e^(l1 (tau-t)))/(l1 - l2) dtau with the
/// confluent branch (t - tau) e^(lbar (tau-t)) when |l1 - l2| is below the
/// degeneracy tolerance.
double second_order_cell_integral(double a, double b, double t, double lambda1, double lambda2);

// ---- per-class bounds ----------------------------------------------------

/// sum_i eps_i integral_{I_i cap [t0,t]} e^(lambda (tau-t)) dtau; with one
/// cell this is eps (1 - e^(lambda(t0-t)))/lambda, or eps (t-t0) at lambda=0.
double bound_first_order(const FirstOrderConstant& problem, const ResidualProfile& profile,
                         double t);

/// eps (1 - e^(-|lambda|(t-t0)))/(|lambda| |u0|), valid for lambda < 0 and
/// u0 != 0; relative to the natural response.
double bound_first_order_relative(const FirstOrderConstant& problem, double epsilon, double t,
                                  double t0);

/// Single cell: eps * phi_n(t). Partitioned: per-cell kernel integrals
/// (order 2 uses the explicit two-exponential kernel; higher orders the
/// phi_n primitive differences). Refuses any negative decay rate.
double bound_higher_order(const HigherOrderConstant& problem, const ResidualProfile& profile,
                          double t);

/// Jordan-chain assembly: component j of chain k is bounded by
/// ||M^-1|| sum_{m=0..size-j} sum_i eps_i poly_exp_cell_integral(...),
/// the per-component bounds are combined in the problem's p-norm and scaled
/// by ||M||. Refuses negative decay rates; zero rates use the polynomial
/// branch.
double bound_system(const LinearSystem& problem, const ResidualProfile& profile, double t);

/// e^(-P(t)) sum_i eps_i integral_{I_i cap [t0,t]} e^(P(tau)) dtau with P
/// from the supplied antiderivative or adaptive quadrature of p.
double bound_nonconstant(const NonconstantFirstOrder& problem, const ResidualProfile& profile,
                         double t, const Interval& domain);

/// Dispatches to the class-specific bound per time point.
BoundCurve bound_curve(const OdeProblem& problem, const ResidualProfile& profile,
                       std::span<const double> times, int threads = 1);

/// Relative-error curve for the first-order constant class (lambda < 0).
BoundCurve relative_bound_curve(const OdeProblem& problem, const ResidualProfile& profile,
                                std::span<const double> times);

/// CSV export: header t,bound,kind,theorem_tag,cells; 17 significant
/// digits, LF endings.
std::string bound_curve_csv(const BoundCurve& curve);
void write_bound_curve_csv(const BoundCurve& curve, const std::string& path);

}  // namespace odecert

#endif  // ODECERT_BOUNDS_HPP
