#ifndef ODECERT_RESIDUAL_HPP
#define ODECERT_RESIDUAL_HPP

#include <span>
#include <string>
#include <vector>

#include "odecert/candidate.hpp"
#include "odecert/problem.hpp"

namespace odecert {

/// Applies the problem's differential operator L to state jets, by value:
/// out[i] = (L u)_i(t). state_jets must carry at least operator_order()
/// coefficients and have the problem's (realified) state dimension.
void apply_operator(const OdeProblem& problem, double t, std::span<const Jet> state_jets,
                    std::span<Complex> out);

/// Residual Ru(t) = Lu(t) - f(t), one complex entry per equation.
std::vector<Complex> residual_at(const OdeProblem& problem, const Candidate& candidate, double t);

/// p-norm (problem's norm for systems, modulus for scalar classes) of the
/// residual at t. The two-argument overload uses an explicit norm instead
/// of the one stored on the problem.
double residual_norm_at(const OdeProblem& problem, const Candidate& candidate, double t);
double residual_norm_at(const OdeProblem& problem, const Candidate& candidate, double t,
                        NormP norm_p);

/// Accumulates the adjoint of sum_i weight * |r_i|^2 with respect to the
/// candidate's state-jet coefficients: state_bar[c].coeff(k) +=
/// weight * 2 * Re(conj(r_i) * dr_i/dX_{c,k}). Used by the trainer's
/// reverse pass; r must be the residual values at t.
void residual_accumulate_adjoint(const OdeProblem& problem, double t, std::span<const Complex> r,
                                 double weight, std::span<Jet> state_bar);

struct Partition {
  Interval interval;
  std::vector<double> cuts;  // strictly increasing, cuts.front()=t0, back()=t1

  static Partition uniform(const Interval& iv, int n_cells);
  /// Splits every cell into `factor` equal parts; the coarse cut set is a
  /// subset of the refined one.
  Partition refine(int factor) const;
  int cells() const { return static_cast<int>(cuts.size()) - 1; }
};

struct ResidualProfile {
  Partition partition;
  std::vector<double> eps;  // per-cell estimated residual sup
  NormP norm_p = NormP::Two;
  int grid_per_cell = kDefaultGridPerCell;

  static constexpr int kDefaultGridPerCell = 256;
  double max_eps() const;
  ResidualProfile scaled(double c) const;
};

/// Max residual norm over a uniform closed grid (endpoints included) on the
/// cell. A lower estimate of the true sup: the gap is surfaced by the
/// harness's grid-convergence diagnostic rather than hidden.
double sup_residual(const OdeProblem& problem, const Candidate& candidate, const Interval& cell,
                    int grid_per_cell, NormP norm_p);

/// Residual norms tabulated once on a single global uniform grid
/// (n_intervals + 1 points). Profiles for every partition level are read
/// off this shared table, which is what makes partition monotonicity an
/// exact property instead of an approximate one.
struct ResidualTable {
  Interval domain;
  std::vector<double> ts;
  std::vector<double> values;
};

ResidualTable make_residual_table(const OdeProblem& problem, const Candidate& candidate,
                                  int n_intervals, int threads = 1);

/// Per-cell maxima over the table's grid points that fall in each cell of a
/// uniform n_cells partition; interior cut points are credited to both
/// adjacent cells. n_cells must divide the table's interval count.
ResidualProfile profile_from_table(const ResidualTable& table, int n_cells, NormP norm_p,
                                   int grid_per_cell_recorded);

/// Uniform partition into n_cells, each cell sampled with grid_per_cell
/// points drawn from one shared global grid of n_cells*(grid_per_cell-1)
/// intervals.
ResidualProfile residual_profile(const OdeProblem& problem, const Candidate& candidate,
                                 int n_cells, int grid_per_cell = ResidualProfile::kDefaultGridPerCell,
                                 int threads = 1);

/// CSV export: header + one row (cell_index, s_left, s_right, epsilon) per
/// cell, 17 significant digits, LF line endings.
std::string profile_csv(const ResidualProfile& profile);
void write_profile_csv(const ResidualProfile& profile, const std::string& path);

}  // namespace odecert

#endif  // ODECERT_RESIDUAL_HPP
