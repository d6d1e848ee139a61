#include "odecert/residual.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "odecert/parallel.hpp"

namespace odecert {

namespace {

double factorial(int k) {
  static const double table[] = {1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0};
  return table[k];
}

// Complex k-th Taylor coefficient of state component j.
Complex state_coeff(const OdeProblem& problem, std::span<const Jet> jets, int j, int k) {
  if (problem.complex_state) {
    return Complex{jets[2 * j].coeff(k), jets[2 * j + 1].coeff(k)};
  }
  return Complex{jets[j].coeff(k), 0.0};
}

}  // namespace

void apply_operator(const OdeProblem& problem, double t, std::span<const Jet> state_jets,
                    std::span<Complex> out) {
  if (static_cast<int>(state_jets.size()) != problem.state_dim()) {
    throw std::invalid_argument("apply_operator: candidate output dimension mismatch");
  }
  if (const auto* fo = std::get_if<FirstOrderConstant>(&problem.kind)) {
    const Complex c{fo->root.lambda, fo->root.omega};
    out[0] = state_coeff(problem, state_jets, 0, 1) + c * state_coeff(problem, state_jets, 0, 0);
  } else if (const auto* ho = std::get_if<HigherOrderConstant>(&problem.kind)) {
    const int n = static_cast<int>(ho->roots.size());
    Complex acc = state_coeff(problem, state_jets, 0, n) * factorial(n);
    for (int k = 0; k < n; ++k) {
      acc += ho->coeffs[k] * state_coeff(problem, state_jets, 0, k) * factorial(k);
    }
    out[0] = acc;
  } else if (const auto* sys = std::get_if<LinearSystem>(&problem.kind)) {
    for (int i = 0; i < sys->dim; ++i) {
      Complex acc = state_coeff(problem, state_jets, i, 1);
      for (int j = 0; j < sys->dim; ++j) {
        acc += sys->a(i, j) * state_coeff(problem, state_jets, j, 0);
      }
      out[i] = acc;
    }
  } else {
    const auto& nc = std::get<NonconstantFirstOrder>(problem.kind);
    const Jet tj = Jet::variable(t, 0);
    const double p = nc.p(tj).value();
    const double q = nc.q ? nc.q(tj).value() : 0.0;
    out[0] = state_coeff(problem, state_jets, 0, 1) +
             Complex{p, q} * state_coeff(problem, state_jets, 0, 0);
  }
}

std::vector<Complex> residual_at(const OdeProblem& problem, const Candidate& candidate, double t) {
  if (candidate.output_dim() != problem.state_dim()) {
    throw std::invalid_argument("residual_at: candidate output dimension mismatch");
  }
  const int order = problem.operator_order();
  const std::vector<Jet> jets = jet_eval(candidate, t, order);
  std::vector<Complex> r(problem.complex_dim());
  apply_operator(problem, t, jets, r);
  std::vector<Complex> f(problem.complex_dim());
  problem.forcing(t, f);
  for (size_t i = 0; i < r.size(); ++i) r[i] -= f[i];
  return r;
}

double residual_norm_at(const OdeProblem& problem, const Candidate& candidate, double t) {
  NormP p = NormP::Inf;
  if (const auto* sys = std::get_if<LinearSystem>(&problem.kind)) p = sys->norm_p;
  return residual_norm_at(problem, candidate, t, p);
}

double residual_norm_at(const OdeProblem& problem, const Candidate& candidate, double t,
                        NormP norm_p) {
  const std::vector<Complex> r = residual_at(problem, candidate, t);
  if (std::holds_alternative<LinearSystem>(problem.kind)) {
    return vector_norm(r, norm_p);
  }
  return std::abs(r[0]);
}

void residual_accumulate_adjoint(const OdeProblem& problem, double t, std::span<const Complex> r,
                                 double weight, std::span<Jet> state_bar) {
  // The operator is linear in the jet coefficients, so the adjoint of
  // L_s = weight * sum_i |r_i|^2 is assembled from the same coefficients:
  // for dr_i/dX = c (complex), Xbar += 2*weight*Re(conj(r_i)*c).
  auto add = [&](int complex_j, int k, const Complex& coef, const Complex& ri) {
    const Complex g = std::conj(ri) * coef;
    if (problem.complex_state) {
      state_bar[2 * complex_j].coeff(k) += 2.0 * weight * g.real();
      // d r / d Y = i * coef; Re(conj(r) * i * coef) = -Im(conj(r)*coef).
      state_bar[2 * complex_j + 1].coeff(k) += -2.0 * weight * g.imag();
    } else {
      state_bar[complex_j].coeff(k) += 2.0 * weight * g.real();
    }
  };

  if (const auto* fo = std::get_if<FirstOrderConstant>(&problem.kind)) {
    const Complex c{fo->root.lambda, fo->root.omega};
    add(0, 1, Complex{1.0, 0.0}, r[0]);
    add(0, 0, c, r[0]);
  } else if (const auto* ho = std::get_if<HigherOrderConstant>(&problem.kind)) {
    const int n = static_cast<int>(ho->roots.size());
    add(0, n, Complex{factorial(n), 0.0}, r[0]);
    for (int k = 0; k < n; ++k) add(0, k, ho->coeffs[k] * factorial(k), r[0]);
  } else if (const auto* sys = std::get_if<LinearSystem>(&problem.kind)) {
    for (int i = 0; i < sys->dim; ++i) {
      add(i, 1, Complex{1.0, 0.0}, r[i]);
      for (int j = 0; j < sys->dim; ++j) add(j, 0, sys->a(i, j), r[i]);
    }
  } else {
    const auto& nc = std::get<NonconstantFirstOrder>(problem.kind);
    const Jet tj = Jet::variable(t, 0);
    const double p = nc.p(tj).value();
    const double q = nc.q ? nc.q(tj).value() : 0.0;
    add(0, 1, Complex{1.0, 0.0}, r[0]);
    add(0, 0, Complex{p, q}, r[0]);
  }
}

Partition Partition::uniform(const Interval& iv, int n_cells) {
  validate(iv);
  if (n_cells < 1) throw std::invalid_argument("partition needs at least one cell");
  Partition p;
  p.interval = iv;
  p.cuts.resize(n_cells + 1);
  for (int i = 0; i <= n_cells; ++i) {
    p.cuts[i] = iv.t0 + (iv.t1 - iv.t0) * (static_cast<double>(i) / n_cells);
  }
  p.cuts.front() = iv.t0;
  p.cuts.back() = iv.t1;
  return p;
}

Partition Partition::refine(int factor) const {
  if (factor < 1) throw std::invalid_argument("refine factor must be >= 1");
  Partition p;
  p.interval = interval;
  p.cuts.reserve(static_cast<size_t>(cells()) * factor + 1);
  for (int i = 0; i < cells(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    p.cuts.push_back(a);  // original cuts are kept bit-exactly
    for (int j = 1; j < factor; ++j) {
      p.cuts.push_back(a + (b - a) * (static_cast<double>(j) / factor));
    }
  }
  p.cuts.push_back(cuts.back());
  return p;
}

double ResidualProfile::max_eps() const {
  double m = 0.0;
  for (double e : eps) m = std::max(m, e);
  return m;
}

ResidualProfile ResidualProfile::scaled(double c) const {
  ResidualProfile p = *this;
  for (double& e : p.eps) e *= c;
  return p;
}

double sup_residual(const OdeProblem& problem, const Candidate& candidate, const Interval& cell,
                    int grid_per_cell, NormP norm_p) {
  if (grid_per_cell < 2) throw std::invalid_argument("sup_residual needs grid_per_cell >= 2");
  double best = 0.0;
  for (int k = 0; k < grid_per_cell; ++k) {
    const double t =
        cell.t0 + (cell.t1 - cell.t0) * (static_cast<double>(k) / (grid_per_cell - 1));
    best = std::max(best, residual_norm_at(problem, candidate, t, norm_p));
  }
  return best;
}

ResidualTable make_residual_table(const OdeProblem& problem, const Candidate& candidate,
                                  int n_intervals, int threads) {
  if (n_intervals < 1) throw std::invalid_argument("residual table needs at least one interval");
  ResidualTable table;
  table.domain = problem.domain;
  table.ts.resize(n_intervals + 1);
  table.values.resize(n_intervals + 1);
  const double t0 = problem.domain.t0, t1 = problem.domain.t1;
  for (int i = 0; i <= n_intervals; ++i) {
    table.ts[i] = t0 + (t1 - t0) * (static_cast<double>(i) / n_intervals);
  }
  table.ts.front() = t0;
  table.ts.back() = t1;
  parallel_for(table.ts.size(), threads, [&](std::size_t i) {
    table.values[i] = residual_norm_at(problem, candidate, table.ts[i]);
  });
  return table;
}

ResidualProfile profile_from_table(const ResidualTable& table, int n_cells, NormP norm_p,
                                   int grid_per_cell_recorded) {
  const int n_intervals = static_cast<int>(table.ts.size()) - 1;
  if (n_cells < 1 || n_intervals % n_cells != 0) {
    throw std::invalid_argument("profile cells must divide the residual table's grid");
  }
  const int stride = n_intervals / n_cells;
  ResidualProfile profile;
  profile.partition = Partition::uniform(table.domain, n_cells);
  profile.norm_p = norm_p;
  profile.grid_per_cell = grid_per_cell_recorded;
  profile.eps.resize(n_cells);
  for (int c = 0; c < n_cells; ++c) {
    double m = 0.0;
    // Closed range: cut points belong to both neighboring cells.
    for (int i = c * stride; i <= (c + 1) * stride; ++i) m = std::max(m, table.values[i]);
    profile.eps[c] = m;
  }
  return profile;
}

ResidualProfile residual_profile(const OdeProblem& problem, const Candidate& candidate,
                                 int n_cells, int grid_per_cell, int threads) {
  if (grid_per_cell < 2) throw std::invalid_argument("residual_profile needs grid_per_cell >= 2");
  NormP p = NormP::Inf;
  if (const auto* sys = std::get_if<LinearSystem>(&problem.kind)) p = sys->norm_p;
  const ResidualTable table =
      make_residual_table(problem, candidate, n_cells * (grid_per_cell - 1), threads);
  return profile_from_table(table, n_cells, p, grid_per_cell);
}

std::string profile_csv(const ResidualProfile& profile) {
  std::string out = "cell_index,s_left,s_right,epsilon\n";
  char buf[128];
  for (int c = 0; c < profile.partition.cells(); ++c) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", c, profile.partition.cuts[c],
                  profile.partition.cuts[c + 1], profile.eps[c]);
    out += buf;
  }
  return out;
}

void write_profile_csv(const ResidualProfile& profile, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << profile_csv(profile);
}

}  // namespace odecert
