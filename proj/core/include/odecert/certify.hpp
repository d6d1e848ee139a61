#ifndef ODECERT_CERTIFY_HPP
#define ODECERT_CERTIFY_HPP

#include <optional>
#include <string>
#include <vector>

#include "odecert/bounds.hpp"
#include "odecert/manufactured.hpp"
#include "odecert/residual.hpp"
#include "odecert/trainer.hpp"

namespace odecert {

enum class Verdict { CertifiedAndVerified, CertifiedOnly, Violation };
std::string to_string(Verdict v);

struct CertifyOptions {
  std::vector<int> partition_levels{1, 10, 100};  // each must divide the next
  int eval_points = 1000;
  int grid_per_cell = ResidualProfile::kDefaultGridPerCell;
  int threads = 1;
  double verification_slack = 1e-9;  // absolute slack absorbing roundoff
};

struct LevelResult {
  ResidualProfile profile;
  BoundCurve curve;
};

/// Relative epsilon change when the residual grid is halved/doubled; above
/// 1 percent the certificate is stamped grid sensitive.
struct GridDiagnostic {
  double eps_coarse = 0.0;  // grid_per_cell / 2
  double eps = 0.0;
  double eps_fine = 0.0;  // grid_per_cell * 2
  double relative_change = 0.0;
  bool grid_sensitive = false;
};

struct Certificate {
  static constexpr int kSchemaVersion = 1;
  std::string case_name;
  std::string problem_kind;
  Interval domain;
  std::string candidate_digest;
  int grid_per_cell = 0;
  std::vector<LevelResult> levels;
  std::vector<double> eval_times;
  bool has_exact = false;
  std::vector<double> error_curve;  // |u - u*| in the problem norm, per eval time
  Verdict verdict = Verdict::CertifiedOnly;
  GridDiagnostic grid_diagnostic;
  bool diverged = false;
  std::string diagnostic;
};

/// Profiles the candidate's residual on one shared fine grid, derives the
/// nested partition levels from it, evaluates bound curves on the eval
/// grid, measures the true error when the exact solution is known, and
/// assembles the verdict.
Certificate run_case(const ManufacturedCase& mcase, const Candidate& candidate,
                     const CertifyOptions& options);

/// Trains first (or reports divergence), then certifies the result.
Certificate run_case(const ManufacturedCase& mcase, const TrainConfig& train_config,
                     const CertifyOptions& options, ReparametrizedMlp* trained_out = nullptr);

/// JSON certificate with stable key order; excludes anything
/// nondeterministic (timings, hostnames) so reruns are byte-identical.
std::string certificate_json(const Certificate& cert);
void write_certificate_json(const Certificate& cert, const std::string& path);

/// Combined curve CSV: t,bound_<cells>...,abs_error (abs_error empty when no
/// exact solution is known).
std::string certificate_csv(const Certificate& cert);

/// Writes bounds.csv, per-level bound_L*.csv / profile_L*.csv and
/// certificate.json under dir (created if needed).
void write_certificate_files(const Certificate& cert, const std::string& dir);

std::string train_report_json(const TrainReport& report);

struct SuiteOptions {
  TrainConfig train;        // seed is advanced per case index
  CertifyOptions certify;
  std::string out_dir;
  int case_workers = 1;     // cases run in parallel; inner threads divide
};

struct SuiteResult {
  std::vector<Certificate> certificates;
  bool all_verified = false;
};

/// Runs every manufactured case, writes per-case artifacts plus a summary
/// CSV, and reports whether every verdict was CERTIFIED_AND_VERIFIED.
SuiteResult run_suite(const std::vector<ManufacturedCase>& suite, const SuiteOptions& options);

}  // namespace odecert

#endif  // ODECERT_CERTIFY_HPP
