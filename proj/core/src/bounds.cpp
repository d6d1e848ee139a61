#include "odecert/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "odecert/parallel.hpp"
#include "odecert/quadrature.hpp"

namespace odecert {

namespace {

constexpr double kSeriesSwitch = 0.25;  // lambda*x below this uses the series

double factorial_d(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

/// Degeneracy tolerance for closed-form eligibility. The base 1e-6*(1+max)
/// comes from the two-root case; higher orders amplify divided-difference
/// cancellation by another 1/gap per level, so the threshold widens.
double degeneracy_tol(int n, double lambda_max) {
  const double base = (n <= 2) ? 1e-6 : (n == 3 ? 3e-4 : 3e-3);
  return base * (1.0 + lambda_max);
}

/// g(mu) = integral_0^x e^(-mu s) ds, the n = 1 kernel; stable for any
/// mu >= 0 including exactly zero.
double phi1_kernel(double mu, double x) {
  if (mu == 0.0) return x;
  return -std::expm1(-mu * x) / mu;
}

void validate_nonneg(std::span<const double> lambdas) {
  for (double l : lambdas) {
    if (!(l >= 0.0)) {
      throw std::invalid_argument("phi_n requires nonnegative decay rates");
    }
  }
}

/// h_k as a function of elapsed time x >= 0 (validation done by callers).
double h_impl(double x, double lambda, int k) {
  if (x == 0.0) return 0.0;
  const double z = lambda * x;
  if (z < kSeriesSwitch) {
    // h_k = x^k/(k-1)! sum_m (-z)^m / (m! (k+m)), fast alternating series.
    double sum = 0.0, c = 1.0;
    for (int m = 0; m < 80; ++m) {
      const double term = c / (k + m);
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      c *= -z / (m + 1);
    }
    return std::pow(x, k) / factorial_d(k - 1) * sum;
  }
  double partial = 0.0, term = 1.0;
  for (int j = 0; j < k; ++j) {
    partial += term;
    term *= z / (j + 1);
  }
  return (1.0 - std::exp(-z) * partial) / std::pow(lambda, k);
}

/// Divided difference of g(mu) = phi1_kernel(mu, x) over a window of nearby
/// nodes, via the Opitz-Taylor expansion around the window mean:
///   g[x_1..x_w] = sum_m g^(w-1+m)(mu)/(w-1+m)! S_m(offsets),
/// S_m the complete homogeneous symmetric polynomials. The derivatives are
/// g^(k)(mu) = (-1)^k k! h_{k+1}(x; mu), so every term reuses the stable h
/// kernels. Returns false when the series fails to converge (clusters wider
/// than the expansion can absorb).
bool cluster_divided_difference(std::span<const double> nodes, double x, double& out) {
  const int w = static_cast<int>(nodes.size());
  double mu = 0.0;
  for (double v : nodes) mu += v;
  mu /= w;
  std::vector<double> offset(w);
  for (int i = 0; i < w; ++i) offset[i] = nodes[i] - mu;

  constexpr int kMaxTerms = 24;
  // s[m] = complete homogeneous symmetric polynomial of degree m, built by
  // folding one variable at a time: S_m(d_1..d_k) = S_m(d_1..d_{k-1}) +
  // d_k S_{m-1}(d_1..d_k).
  std::array<double, kMaxTerms + 1> s{};
  s[0] = 1.0;
  for (int var = 0; var < w; ++var) {
    for (int m = 1; m <= kMaxTerms; ++m) s[m] += offset[var] * s[m - 1];
  }

  double sum = 0.0;
  bool converged = false;
  for (int m = 0; m <= kMaxTerms; ++m) {
    const int k = w - 1 + m;                 // derivative order
    const double gk_over_kfact =             // g^(k)(mu)/k! = (-1)^k h_{k+1}
        ((k % 2 == 0) ? 1.0 : -1.0) * h_impl(x, mu, k + 1);
    const double term = gk_over_kfact * s[m];
    sum += term;
    if (m >= 2 && std::abs(term) <= 1e-17 * std::max(1e-300, std::abs(sum))) {
      converged = true;
      break;
    }
  }
  out = sum;
  return converged || w == 1;
}

double phi_elapsed_sorted(double x, std::span<const double> sorted);

/// Last-resort integral recurrence (one adaptive level):
/// Phi_n(x) = int_0^x e^(-l_n (x-s)) Phi_{n-1}(s) ds.
double phi_recurrence(double x, std::span<const double> sorted) {
  const double l_last = sorted.back();
  const auto prefix = sorted.first(sorted.size() - 1);
  QuadratureOptions opts;
  opts.abs_tol = 1e-300;
  opts.rel_tol = 1e-11;
  return integrate_adaptive_simpson(
      [&](double s) { return std::exp(-l_last * (x - s)) * phi_elapsed_sorted(s, prefix); }, 0.0,
      x, opts);
}

double phi_elapsed_sorted(double x, std::span<const double> sorted) {
  const int n = static_cast<int>(sorted.size());
  if (n == 0) return 1.0;
  if (x <= 0.0) return 0.0;
  if (n == 1) return phi1_kernel(sorted[0], x);

  // Confluent Newton table over the sorted nodes: windows lying inside one
  // near-degenerate cluster are evaluated by the Opitz series; windows that
  // span clusters use the ordinary recurrence, whose divisor is then at
  // least the clustering tolerance.
  const double tol = degeneracy_tol(n, sorted.back());
  std::vector<int> cluster(n, 0);
  for (int i = 1; i < n; ++i) {
    cluster[i] = (sorted[i] - sorted[i - 1] < tol) ? cluster[i - 1] : cluster[i - 1] + 1;
  }

  // table[i] holds g[x_i..x_{i+level}] as level advances.
  std::vector<double> table(n);
  for (int i = 0; i < n; ++i) table[i] = phi1_kernel(sorted[i], x);
  for (int level = 1; level < n; ++level) {
    for (int i = 0; i + level < n; ++i) {
      if (cluster[i] == cluster[i + level]) {
        double dd;
        if (!cluster_divided_difference(sorted.subspan(i, level + 1), x, dd)) {
          return phi_recurrence(x, sorted);
        }
        table[i] = dd;
      } else {
        table[i] = (table[i + 1] - table[i]) / (sorted[i + level] - sorted[i]);
      }
    }
  }
  const double value = ((n - 1) % 2 == 0) ? table[0] : -table[0];
  return std::max(0.0, value);
}

}  // namespace

double h_k(double t, double lambda, int k, double t0) {
  if (k < 1) throw std::invalid_argument("h_k needs k >= 1");
  if (!(lambda >= 0.0)) throw std::invalid_argument("h_k requires lambda >= 0");
  const double x = t - t0;
  if (x < 0.0) throw std::invalid_argument("h_k requires t >= t0");
  return h_impl(x, lambda, k);
}

double H_k(double t, double lambda, int k, double t0) {
  double s = 0.0;
  for (int j = 1; j <= k; ++j) s += h_k(t, lambda, j, t0);
  return s;
}

double phi_elapsed(double x, std::span<const double> lambdas) {
  validate_nonneg(lambdas);
  if (lambdas.empty()) throw std::invalid_argument("phi_n needs at least one root");
  if (!(x >= 0.0)) throw std::invalid_argument("phi_n requires t >= t0");
  std::vector<double> sorted(lambdas.begin(), lambdas.end());
  std::sort(sorted.begin(), sorted.end());
  return phi_elapsed_sorted(x, sorted);
}

double phi_n(double t, std::span<const double> lambdas, double t0) {
  return phi_elapsed(t - t0, lambdas);
}

double phi2(double t, double lambda1, double lambda2, double t0) {
  const double ls[2] = {lambda1, lambda2};
  return phi_n(t, ls, t0);
}

double exp_cell_integral(double a, double b, double t, double lambda) {
  if (!(a <= b && b <= t)) throw std::invalid_argument("exp_cell_integral needs a <= b <= t");
  if (a == b) return 0.0;
  if (lambda == 0.0) return b - a;
  return std::exp(lambda * (b - t)) * (-std::expm1(lambda * (a - b))) / lambda;
}

double poly_exp_cell_integral(double a, double b, double t, double lambda, int m) {
  if (!(a <= b && b <= t)) throw std::invalid_argument("poly_exp_cell_integral needs a <= b <= t");
  if (!(lambda >= 0.0)) throw std::invalid_argument("poly_exp_cell_integral requires lambda >= 0");
  if (m < 0) throw std::invalid_argument("poly_exp_cell_integral requires m >= 0");
  if (a == b) return 0.0;
  // Shift tau = b - s and expand (t - tau)^m binomially around c = t - b:
  // every term is nonnegative, so nothing cancels.
  const double c = t - b;
  const double w = b - a;
  double sum = 0.0;
  for (int j = 0; j <= m; ++j) {
    sum += std::pow(c, m - j) / factorial_d(m - j) * h_k(w, lambda, j + 1, 0.0);
  }
  return std::exp(-lambda * c) * sum;
}

double second_order_cell_integral(double a, double b, double t, double lambda1, double lambda2) {
  if (!(lambda1 >= 0.0 && lambda2 >= 0.0)) {
    throw std::invalid_argument("second-order kernel requires nonnegative decay rates");
  }
  const double tol = 1e-6 * (1.0 + std::max(lambda1, lambda2));
  if (std::abs(lambda1 - lambda2) < tol) {
    return poly_exp_cell_integral(a, b, t, 0.5 * (lambda1 + lambda2), 1);
  }
  return (exp_cell_integral(a, b, t, lambda2) - exp_cell_integral(a, b, t, lambda1)) /
         (lambda1 - lambda2);
}

namespace {

void check_in_domain(const Interval& domain, double t) {
  const double slack = 1e-12 * (1.0 + std::abs(domain.t1));
  if (t < domain.t0 - slack || t > domain.t1 + slack) {
    throw std::invalid_argument("bound evaluation time outside the problem domain");
  }
}

/// Applies fn(eps_i, a_i, b_i) over the parts of each profile cell that lie
/// inside [t0, t].
template <typename F>
double accumulate_cells(const ResidualProfile& profile, double t, F&& cell_integral) {
  const auto& cuts = profile.partition.cuts;
  double sum = 0.0;
  for (int i = 0; i < profile.partition.cells(); ++i) {
    const double a = cuts[i];
    if (a >= t) break;
    const double b = std::min(cuts[i + 1], t);
    sum += profile.eps[i] * cell_integral(a, b);
  }
  return sum;
}

}  // namespace

double bound_first_order(const FirstOrderConstant& problem, const ResidualProfile& profile,
                         double t) {
  check_in_domain(profile.partition.interval, t);
  const double lambda = problem.root.lambda;
  return accumulate_cells(profile, t,
                          [&](double a, double b) { return exp_cell_integral(a, b, t, lambda); });
}

double bound_first_order_relative(const FirstOrderConstant& problem, double epsilon, double t,
                                  double t0) {
  const double lambda = problem.root.lambda;
  if (!(lambda < 0.0)) {
    throw std::invalid_argument("relative bound applies to divergent problems (lambda < 0) only");
  }
  const double u0_mag = std::abs(problem.u0);
  if (u0_mag == 0.0) {
    throw std::invalid_argument("relative bound undefined for zero initial condition");
  }
  if (epsilon < 0.0) throw std::invalid_argument("negative residual bound");
  const double mag = -lambda;
  return epsilon * (-std::expm1(-mag * (t - t0))) / (mag * u0_mag);
}

double bound_higher_order(const HigherOrderConstant& problem, const ResidualProfile& profile,
                          double t) {
  check_in_domain(profile.partition.interval, t);
  const int n = static_cast<int>(problem.roots.size());
  std::vector<double> lambdas(n);
  for (int k = 0; k < n; ++k) {
    lambdas[k] = problem.roots[k].lambda;
    if (lambdas[k] < 0.0) {
      throw CertificationRefused(
          "higher-order certification requires all decay rates >= 0; root with lambda = " +
          std::to_string(lambdas[k]) + " is outside the certified class");
    }
  }
  if (n == 2) {
    return accumulate_cells(profile, t, [&](double a, double b) {
      return second_order_cell_integral(a, b, t, lambdas[0], lambdas[1]);
    });
  }
  // Per-cell integral of the order-n kernel is a difference of its
  // primitive, which is phi_n of the elapsed time.
  return accumulate_cells(profile, t, [&](double a, double b) {
    return phi_elapsed(t - a, lambdas) - phi_elapsed(t - b, lambdas);
  });
}

double bound_system(const LinearSystem& problem, const ResidualProfile& profile, double t) {
  check_in_domain(profile.partition.interval, t);
  for (const auto& block : problem.blocks) {
    if (block.root.lambda < 0.0) {
      throw CertificationRefused(
          "system certification requires all Jordan-block decay rates >= 0; block with lambda = " +
          std::to_string(block.root.lambda) + " is outside the certified class");
    }
  }
  const NormP p = problem.norm_p;
  const double minv_norm = induced_norm(problem.modal_inv, p);
  const double m_norm = induced_norm(problem.modal, p);

  std::vector<double> component_bounds;
  component_bounds.reserve(problem.dim);
  for (const auto& block : problem.blocks) {
    const double lambda = block.root.lambda;
    // kernel_sum[m] = sum_i eps_i * integral of (t-tau)^m/m! e^(lambda(tau-t)).
    std::vector<double> kernel_sum(block.size);
    for (int m = 0; m < block.size; ++m) {
      kernel_sum[m] = accumulate_cells(profile, t, [&](double a, double b) {
        return poly_exp_cell_integral(a, b, t, lambda, m);
      });
    }
    // Component at position j (1-based from the top of the chain) collects
    // kernel orders 0..size-j.
    for (int j = 1; j <= block.size; ++j) {
      double s = 0.0;
      for (int m = 0; m + j <= block.size; ++m) s += kernel_sum[m];
      component_bounds.push_back(minv_norm * s);
    }
  }
  return m_norm * vector_norm(component_bounds, p);
}

double bound_nonconstant(const NonconstantFirstOrder& problem, const ResidualProfile& profile,
                         double t, const Interval& domain) {
  check_in_domain(profile.partition.interval, t);
  // P evaluated from the supplied antiderivative, else by quadrature of p
  // from t0; only differences P(tau) - P(t) enter, so any constant offset
  // in the antiderivative cancels.
  std::function<double(double)> p_value = [&](double tau) {
    return problem.p(Jet::variable(tau, 0)).value();
  };
  std::function<double(double)> big_p;
  if (problem.p_antideriv) {
    big_p = [&](double tau) { return problem.p_antideriv(Jet::variable(tau, 0)).value(); };
  } else {
    QuadratureOptions p_opts;
    p_opts.abs_tol = 1e-10;
    p_opts.rel_tol = 1e-12;
    const double t0 = domain.t0;
    big_p = [&, t0, p_opts](double tau) {
      return integrate_adaptive_simpson(p_value, t0, tau, p_opts);
    };
  }
  const double p_at_t = big_p(t);
  QuadratureOptions opts;
  opts.abs_tol = 1e-15;
  opts.rel_tol = 1e-11;
  return accumulate_cells(profile, t, [&](double a, double b) {
    return integrate_adaptive_simpson([&](double tau) { return std::exp(big_p(tau) - p_at_t); },
                                      a, b, opts);
  });
}

BoundCurve bound_curve(const OdeProblem& problem, const ResidualProfile& profile,
                       std::span<const double> times, int threads) {
  for (size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw std::invalid_argument("bound_curve times must be strictly increasing");
    }
  }
  BoundCurve curve;
  curve.times.assign(times.begin(), times.end());
  curve.values.assign(times.size(), 0.0);
  curve.kind = BoundCurve::Kind::AbsoluteError;
  curve.partition_cells = profile.partition.cells();

  std::function<double(double)> eval;
  if (const auto* fo = std::get_if<FirstOrderConstant>(&problem.kind)) {
    curve.theorem_tag = "first-order-integrating-factor";
    eval = [fo, &profile](double t) { return bound_first_order(*fo, profile, t); };
  } else if (const auto* ho = std::get_if<HigherOrderConstant>(&problem.kind)) {
    curve.theorem_tag = ho->roots.size() == 2 ? "second-order-kernel" : "higher-order-phi";
    eval = [ho, &profile](double t) { return bound_higher_order(*ho, profile, t); };
  } else if (const auto* sys = std::get_if<LinearSystem>(&problem.kind)) {
    curve.theorem_tag = "jordan-system-chains";
    eval = [sys, &profile](double t) { return bound_system(*sys, profile, t); };
  } else {
    const auto* nc = std::get_if<NonconstantFirstOrder>(&problem.kind);
    curve.theorem_tag = "nonconstant-integrating-factor";
    const Interval domain = problem.domain;
    eval = [nc, &profile, domain](double t) { return bound_nonconstant(*nc, profile, t, domain); };
  }

  parallel_for(times.size(), threads, [&](std::size_t i) { curve.values[i] = eval(times[i]); });
  return curve;
}

BoundCurve relative_bound_curve(const OdeProblem& problem, const ResidualProfile& profile,
                                std::span<const double> times) {
  const auto* fo = std::get_if<FirstOrderConstant>(&problem.kind);
  if (!fo) {
    throw std::invalid_argument(
        "relative bounds are provided for the first-order constant class only");
  }
  BoundCurve curve;
  curve.times.assign(times.begin(), times.end());
  curve.values.resize(times.size());
  curve.kind = BoundCurve::Kind::RelativeToNaturalResponse;
  curve.theorem_tag = "first-order-relative";
  curve.partition_cells = profile.partition.cells();
  const double eps = profile.max_eps();
  const double t0 = profile.partition.interval.t0;
  for (size_t i = 0; i < times.size(); ++i) {
    curve.values[i] = bound_first_order_relative(*fo, eps, times[i], t0);
  }
  return curve;
}

std::string bound_curve_csv(const BoundCurve& curve) {
  std::string out = "t,bound,kind,theorem_tag,cells\n";
  const char* kind = curve.kind == BoundCurve::Kind::AbsoluteError ? "absolute" : "relative";
  char buf[192];
  for (size_t i = 0; i < curve.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%s,%d\n", curve.times[i], curve.values[i], kind,
                  curve.theorem_tag.c_str(), curve.partition_cells);
    out += buf;
  }
  return out;
}

void write_bound_curve_csv(const BoundCurve& curve, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << bound_curve_csv(curve);
}

}  // namespace odecert
