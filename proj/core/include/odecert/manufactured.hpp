#ifndef ODECERT_MANUFACTURED_HPP
#define ODECERT_MANUFACTURED_HPP

#include <string>
#include <vector>

#include "odecert/candidate.hpp"
#include "odecert/problem.hpp"

namespace odecert {

/// Per-case training protocol hints (network width, sampling domain,
/// reparametrization) reproducing the experimental setup each case came
/// from.
struct TrainHints {
  int hidden_width = 32;
  Interval sample_domain{0.0, 3.0};
  ReparamKind reparam = ReparamKind::ExpFirstOrder;
};

/// A problem paired with its known exact solution. The forcing is always
/// derived by applying the differential operator to `exact` in jet
/// arithmetic; printed forcing columns are treated as display artifacts,
/// not inputs.
struct ManufacturedCase {
  std::string name;
  OdeProblem problem;
  VectorFn exact;  // realified jets, dim = problem.state_dim()
  std::string notes;
  TrainHints hints;
};

/// The verification suite: 4 first-order constant, 8 second-order constant,
/// 4 nonconstant first-order, and one six-dimensional Jordan system whose
/// orthogonal modal matrix is generated from `seed`.
std::vector<ManufacturedCase> manufactured_suite(unsigned seed = 42);

const ManufacturedCase& find_case(const std::vector<ManufacturedCase>& suite,
                                  const std::string& name);

/// Exact solution value(s) at t (complex assembly of the realified jets).
std::vector<Complex> exact_eval(const ManufacturedCase& mcase, double t);

/// Max over `probes` uniformly spaced points of |L(exact)(t) - forcing(t)|
/// plus the initial-condition mismatch; a manufactured case is well-formed
/// when this is <= 1e-9.
double self_check_deviation(const ManufacturedCase& mcase, int probes = 100);

/// Haar-ish random orthogonal matrix: modified Gram-Schmidt on a seeded
/// standard-normal matrix, with each column's sign fixed so Q(j,j) >= 0.
Matrix random_orthogonal(int n, unsigned seed);

}  // namespace odecert

#endif  // ODECERT_MANUFACTURED_HPP
