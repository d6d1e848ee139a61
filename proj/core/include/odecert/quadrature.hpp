#ifndef ODECERT_QUADRATURE_HPP
#define ODECERT_QUADRATURE_HPP

#include <functional>
#include <stdexcept>

namespace odecert {

/// Thrown when an adaptive quadrature cannot reach its tolerance within the
/// evaluation budget. Carries enough context to diagnose the failing call.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  int max_depth = 40;
  long max_evals = 4'000'000;
};

/// Adaptive Simpson integration of f over [a, b]. The local acceptance test
/// is |S_fine - S_coarse| <= 15 * tol_local with the tolerance split across
/// bisections; the returned value uses the standard (S_fine + err/15)
/// refinement. Throws QuadratureError when the budget is exhausted.
double integrate_adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureOptions& opts = {});

}  // namespace odecert

#endif  // ODECERT_QUADRATURE_HPP
