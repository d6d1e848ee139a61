#include "odecert/problem.hpp"

#include <cmath>

namespace odecert {

void validate(const Interval& iv) {
  if (!std::isfinite(iv.t0) || !std::isfinite(iv.t1) || !(iv.t0 < iv.t1)) {
    throw std::invalid_argument("interval requires finite t0 < t1");
  }
}

int OdeProblem::complex_dim() const {
  if (std::holds_alternative<LinearSystem>(kind)) return std::get<LinearSystem>(kind).dim;
  return 1;
}

int OdeProblem::operator_order() const {
  if (const auto* ho = std::get_if<HigherOrderConstant>(&kind)) {
    return static_cast<int>(ho->roots.size());
  }
  return 1;
}

const char* OdeProblem::kind_name() const {
  switch (kind.index()) {
    case 0: return "first-order-constant";
    case 1: return "higher-order-constant";
    case 2: return "linear-system";
    case 3: return "nonconstant-first-order";
  }
  return "unknown";
}

std::vector<Complex> expand_characteristic(std::span<const ComplexRoot> roots) {
  if (roots.empty()) throw std::invalid_argument("expand_characteristic: need at least one root");
  // Multiply out prod (x + r_k) keeping the monic head implicit: poly holds
  // a_0..a_{deg-1} after each step.
  std::vector<Complex> poly{Complex{1.0, 0.0}};  // the polynomial "1"
  for (const ComplexRoot& r : roots) {
    const Complex c{r.lambda, r.omega};
    std::vector<Complex> next(poly.size() + 1, Complex{0.0, 0.0});
    for (size_t k = 0; k < poly.size(); ++k) {
      next[k + 1] += poly[k];
      next[k] += poly[k] * c;
    }
    poly = std::move(next);
  }
  poly.pop_back();  // drop the leading 1
  return poly;
}

HigherOrderConstant make_higher_order(std::vector<ComplexRoot> roots, std::vector<Complex> ics) {
  if (roots.size() != ics.size()) {
    throw std::invalid_argument("higher-order problem needs one initial condition per root");
  }
  HigherOrderConstant ho;
  ho.coeffs = expand_characteristic(roots);
  ho.roots = std::move(roots);
  ho.ics = std::move(ics);
  return ho;
}

LinearSystem make_linear_system(Matrix modal, std::vector<JordanBlockSpec> blocks,
                                std::vector<Complex> u0, NormP norm_p) {
  const int n = modal.rows();
  if (modal.cols() != n) throw std::invalid_argument("modal matrix must be square");
  int total = 0;
  for (const auto& b : blocks) {
    if (b.size < 1) throw std::invalid_argument("Jordan block size must be positive");
    total += b.size;
  }
  if (total != n) throw std::invalid_argument("Jordan block sizes must sum to the system dimension");
  if (static_cast<int>(u0.size()) != n) throw std::invalid_argument("u0 dimension mismatch");

  LinearSystem sys;
  sys.dim = n;
  sys.modal_inv = inverse(modal);  // throws SingularMatrixError if ill-posed

  Matrix j(n, n);
  int pos = 0;
  for (const auto& b : blocks) {
    const Complex eig{b.root.lambda, b.root.omega};
    for (int k = 0; k < b.size; ++k) {
      j(pos + k, pos + k) = eig;
      if (k + 1 < b.size) j(pos + k, pos + k + 1) = 1.0;
    }
    pos += b.size;
  }
  sys.a = modal * j * sys.modal_inv;
  sys.modal = std::move(modal);
  sys.blocks = std::move(blocks);
  sys.u0 = std::move(u0);
  sys.norm_p = norm_p;
  return sys;
}

void assemble_complex_state(const OdeProblem& problem, std::span<const Jet> state_jets, int order,
                            std::vector<std::vector<Complex>>& out) {
  const int n = problem.complex_dim();
  out.resize(n);
  for (int j = 0; j < n; ++j) {
    out[j].assign(order + 1, Complex{0.0, 0.0});
    for (int k = 0; k <= order; ++k) {
      if (problem.complex_state) {
        out[j][k] = Complex{state_jets[2 * j].coeff(k), state_jets[2 * j + 1].coeff(k)};
      } else {
        out[j][k] = Complex{state_jets[j].coeff(k), 0.0};
      }
    }
  }
}

}  // namespace odecert
