#include "odecert/manufactured.hpp"

#include <cmath>
#include <memory>

#include "odecert/catalog.hpp"
#include "odecert/residual.hpp"
#include "odecert/rng.hpp"

namespace odecert {

namespace {

VectorFn scalar_exact(const std::string& catalog_name) {
  ScalarFn fn = Catalog::instance().scalar(catalog_name);
  return [fn](const Jet& t) { return std::vector<Jet>{fn(t)}; };
}

/// Forcing closure f := L(u_exact) evaluated through jets. The problem copy
/// captured here has no forcing of its own; only its operator is used.
ForcingFn derived_forcing(const OdeProblem& skeleton, const VectorFn& exact) {
  auto op = std::make_shared<OdeProblem>(skeleton);
  return [op, exact](double t, std::span<Complex> out) {
    const std::vector<Jet> jets = exact(Jet::variable(t, op->operator_order()));
    apply_operator(*op, t, jets, out);
  };
}

ManufacturedCase make_scalar_case(std::string name, OdeProblem problem, VectorFn exact,
                                  std::string notes, TrainHints hints) {
  problem.forcing = derived_forcing(problem, exact);
  return ManufacturedCase{std::move(name), std::move(problem), std::move(exact), std::move(notes),
                          std::move(hints)};
}

ManufacturedCase first_order_case(const std::string& name, const std::string& exact_id,
                                  double u0, const std::string& notes) {
  OdeProblem p;
  p.kind = FirstOrderConstant{ComplexRoot{3.0, 0.0}, Complex{u0, 0.0}};
  p.domain = Interval{0.0, 3.0};
  return make_scalar_case(name, std::move(p), scalar_exact(exact_id), notes,
                          TrainHints{32, Interval{0.0, 3.0}, ReparamKind::ExpFirstOrder});
}

ManufacturedCase second_order_case(const std::string& name, std::vector<ComplexRoot> roots,
                                   double u0, double u0p, const std::string& exact_id,
                                   const std::string& notes) {
  OdeProblem p;
  p.kind = make_higher_order(std::move(roots), {Complex{u0, 0.0}, Complex{u0p, 0.0}});
  p.domain = Interval{0.0, 3.0};
  return make_scalar_case(name, std::move(p), scalar_exact(exact_id), notes,
                          TrainHints{32, Interval{0.0, 3.0}, ReparamKind::ExpSecondOrder});
}

ManufacturedCase nonconstant_case(const std::string& name, const std::string& tag, double u0,
                                  const std::string& notes) {
  auto& cat = Catalog::instance();
  NonconstantFirstOrder nc;
  nc.p = cat.scalar("coef.p." + tag);
  nc.p_antideriv = cat.scalar("coef.P." + tag);
  nc.u0 = Complex{u0, 0.0};
  OdeProblem p;
  p.kind = std::move(nc);
  p.domain = Interval{0.0, 3.0};
  return make_scalar_case(name, std::move(p), scalar_exact("exact." + tag), notes,
                          TrainHints{32, Interval{0.0, 3.0}, ReparamKind::ExpFirstOrder});
}

ManufacturedCase system_case(unsigned seed) {
  const int n = 6;
  Matrix modal = random_orthogonal(n, seed);

  // u0 = M * (1,...,1)^T
  std::vector<Complex> ones(n, Complex{1.0, 0.0});
  std::vector<Complex> u0 = modal * ones;

  std::vector<JordanBlockSpec> blocks{
      {ComplexRoot{4.0, 0.0}, 3}, {ComplexRoot{3.0, 0.0}, 2}, {ComplexRoot{2.0, 0.0}, 1}};

  OdeProblem p;
  p.kind = make_linear_system(modal, std::move(blocks), std::move(u0), NormP::Two);
  p.domain = Interval{0.0, 3.0};

  // exact u = M v with the modal solution v from the catalog. M is real
  // orthogonal, so the realified state is just the matrix-vector product.
  std::vector<double> m_re(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m_re[static_cast<size_t>(i) * n + j] = modal(i, j).real();
  VectorFn modal_exact = Catalog::instance().vector("exact.sys-jordan6.modal");
  VectorFn exact = [m_re, modal_exact, n](const Jet& t) {
    const std::vector<Jet> v = modal_exact(t);
    std::vector<Jet> u(n, Jet(t.order()));
    for (int i = 0; i < n; ++i) {
      Jet acc(t.order());
      for (int j = 0; j < n; ++j) acc += m_re[static_cast<size_t>(i) * n + j] * v[j];
      u[i] = acc;
    }
    return u;
  };

  ManufacturedCase c = make_scalar_case(
      "sys-jordan6", std::move(p), std::move(exact),
      "six-dimensional system with Jordan blocks (4;3)(3;2)(2;1) and a seeded random "
      "orthogonal modal matrix",
      TrainHints{512, Interval{-1.0, 4.0}, ReparamKind::ExpFirstOrder});
  return c;
}

}  // namespace

Matrix random_orthogonal(int n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::vector<double>> cols(n, std::vector<double>(n));
  for (auto& col : cols)
    for (double& x : col) x = normal01(gen);

  // Modified Gram-Schmidt, then fix each column's sign via its diagonal
  // entry so the result is reproducible and independent of sign flips in
  // the raw draws.
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < j; ++k) {
      double dot = 0.0;
      for (int i = 0; i < n; ++i) dot += cols[k][i] * cols[j][i];
      for (int i = 0; i < n; ++i) cols[j][i] -= dot * cols[k][i];
    }
    double norm = 0.0;
    for (double x : cols[j]) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : cols[j]) x /= norm;
    if (cols[j][j] < 0.0) {
      for (double& x : cols[j]) x = -x;
    }
  }
  Matrix q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q(i, j) = cols[j][i];
  return q;
}

std::vector<ManufacturedCase> manufactured_suite(unsigned seed) {
  std::vector<ManufacturedCase> suite;
  suite.reserve(17);

  // First-order u' + 3u = f on [0,3], u(0) = 2.
  suite.push_back(first_order_case("fo-poly", "exact.fo-poly", 2.0,
                                   "stable first-order decay, polynomial drive"));
  suite.push_back(first_order_case("fo-osc", "exact.fo-osc", 2.0,
                                   "stable first-order decay, oscillatory drive"));
  suite.push_back(first_order_case("fo-exp", "exact.fo-exp", 2.0,
                                   "stable first-order decay, growing exponential drive"));
  suite.push_back(first_order_case("fo-log", "exact.fo-log", 2.0,
                                   "stable first-order decay, logarithmic drive"));

  // Harmonic oscillator u'' + u = f (roots +-i, lambda = 0).
  const std::vector<ComplexRoot> osc{{0.0, 1.0}, {0.0, -1.0}};
  suite.push_back(second_order_case("ho-osc-exp", osc, 2.0, 2.0, "exact.ho-osc-exp",
                                    "harmonic oscillator, exponential drive"));
  suite.push_back(second_order_case("ho-osc-poly", osc, 2.0, 2.0, "exact.ho-osc-poly",
                                    "harmonic oscillator, polynomial drive"));
  suite.push_back(second_order_case("ho-osc-log", osc, 1.0, 2.0, "exact.ho-osc-log",
                                    "harmonic oscillator, logarithmic drive"));
  suite.push_back(second_order_case("ho-osc-sinsq", osc, 1.0, 1.0, "exact.ho-osc-sinsq",
                                    "harmonic oscillator, chirp drive"));

  // Overdamped u'' + 4u' + 3u = f (roots -1, -3 of the homogeneous basis).
  const std::vector<ComplexRoot> damped{{1.0, 0.0}, {3.0, 0.0}};
  suite.push_back(second_order_case("ho-exp-exp", damped, 3.0, -3.0, "exact.ho-exp-exp",
                                    "overdamped second order, exponential drive"));
  suite.push_back(second_order_case("ho-exp-poly", damped, 3.0, -3.0, "exact.ho-exp-poly",
                                    "overdamped second order, polynomial drive"));
  suite.push_back(second_order_case("ho-exp-log", damped, 2.0, -3.0, "exact.ho-exp-log",
                                    "overdamped second order, logarithmic drive"));
  suite.push_back(second_order_case("ho-exp-osc", damped, 3.0, -3.0, "exact.ho-exp-osc",
                                    "overdamped second order, oscillatory drive"));

  // Nonconstant coefficients u' + p(t) u = f on [0,3].
  suite.push_back(nonconstant_case("nc-tcos", "nc-tcos", 1.0,
                                   "p = 1/(t+1), solution with secular cosine term"));
  suite.push_back(nonconstant_case("nc-exp", "nc-exp", 2.0,
                                   "p = 2t/(t^2+1), growing exponential solution"));
  suite.push_back(nonconstant_case("nc-poly", "nc-poly", 1.0,
                                   "p = cos t/(1+sin t), sign-changing coefficient"));
  suite.push_back(nonconstant_case("nc-log", "nc-log", 1.0,
                                   "p = (t+2)/(t+1), logarithmic solution"));

  suite.push_back(system_case(seed));
  return suite;
}

const ManufacturedCase& find_case(const std::vector<ManufacturedCase>& suite,
                                  const std::string& name) {
  for (const auto& c : suite) {
    if (c.name == name) return c;
  }
  throw std::invalid_argument("unknown manufactured case '" + name + "'");
}

std::vector<Complex> exact_eval(const ManufacturedCase& mcase, double t) {
  const std::vector<Jet> jets = mcase.exact(Jet::variable(t, 0));
  std::vector<std::vector<Complex>> coeffs;
  assemble_complex_state(mcase.problem, jets, 0, coeffs);
  std::vector<Complex> out(mcase.problem.complex_dim());
  for (size_t j = 0; j < out.size(); ++j) out[j] = coeffs[j][0];
  return out;
}

double self_check_deviation(const ManufacturedCase& mcase, int probes) {
  const OdeProblem& p = mcase.problem;
  ClosedFormCandidate as_candidate(mcase.exact, p.state_dim(), mcase.name + "/exact");
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    const double t =
        p.domain.t0 + (p.domain.t1 - p.domain.t0) * (static_cast<double>(i) / (probes - 1));
    const std::vector<Complex> r = residual_at(p, as_candidate, t);
    for (const Complex& ri : r) worst = std::max(worst, std::abs(ri));
  }
  // Initial-condition agreement is part of being well-formed.
  const std::vector<Complex> at_t0 = exact_eval(mcase, p.domain.t0);
  if (const auto* fo = std::get_if<FirstOrderConstant>(&p.kind)) {
    worst = std::max(worst, std::abs(at_t0[0] - fo->u0));
  } else if (const auto* ho = std::get_if<HigherOrderConstant>(&p.kind)) {
    const std::vector<Jet> jets = mcase.exact(
        Jet::variable(p.domain.t0, static_cast<int>(ho->roots.size()) - 1));
    for (size_t k = 0; k < ho->ics.size(); ++k) {
      worst = std::max(worst, std::abs(Complex{jets[0].derivative(static_cast<int>(k)), 0.0} -
                                       ho->ics[k]));
    }
  } else if (const auto* sys = std::get_if<LinearSystem>(&p.kind)) {
    for (int j = 0; j < sys->dim; ++j) worst = std::max(worst, std::abs(at_t0[j] - sys->u0[j]));
  } else if (const auto* nc = std::get_if<NonconstantFirstOrder>(&p.kind)) {
    worst = std::max(worst, std::abs(at_t0[0] - nc->u0));
  }
  return worst;
}

}  // namespace odecert
