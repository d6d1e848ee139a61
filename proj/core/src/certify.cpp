#include "odecert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "odecert/parallel.hpp"

namespace odecert {

using ordered_json = nlohmann::ordered_json;

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::CertifiedAndVerified: return "CERTIFIED_AND_VERIFIED";
    case Verdict::CertifiedOnly: return "CERTIFIED_ONLY";
    case Verdict::Violation: return "VIOLATION";
  }
  return "?";
}

namespace {

void validate_levels(const std::vector<int>& levels) {
  if (levels.empty()) throw std::invalid_argument("need at least one partition level");
  for (size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 1) throw std::invalid_argument("partition levels must be positive");
    if (i > 0 && levels[i] % levels[i - 1] != 0) {
      throw std::invalid_argument("partition levels must be nested (each divides the next)");
    }
  }
}

std::vector<double> linspace(const Interval& iv, int n) {
  std::vector<double> ts(n);
  for (int i = 0; i < n; ++i) {
    ts[i] = iv.t0 + (iv.t1 - iv.t0) * (static_cast<double>(i) / (n - 1));
  }
  ts.front() = iv.t0;
  ts.back() = iv.t1;
  return ts;
}

NormP problem_norm(const OdeProblem& problem) {
  if (const auto* sys = std::get_if<LinearSystem>(&problem.kind)) return sys->norm_p;
  return NormP::Inf;
}

std::vector<double> measure_error_curve(const ManufacturedCase& mcase, const Candidate& candidate,
                                        std::span<const double> times, int threads) {
  const NormP p = problem_norm(mcase.problem);
  std::vector<double> err(times.size(), 0.0);
  parallel_for(times.size(), threads, [&](std::size_t i) {
    const std::vector<Complex> exact = exact_eval(mcase, times[i]);
    const std::vector<Jet> jets = jet_eval(candidate, times[i], 0);
    std::vector<std::vector<Complex>> coeffs;
    assemble_complex_state(mcase.problem, jets, 0, coeffs);
    std::vector<Complex> diff(exact.size());
    for (size_t j = 0; j < exact.size(); ++j) diff[j] = coeffs[j][0] - exact[j];
    err[i] = vector_norm(diff, p);
  });
  return err;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Certificate run_case(const ManufacturedCase& mcase, const Candidate& candidate,
                     const CertifyOptions& options) {
  validate_levels(options.partition_levels);
  if (options.eval_points < 2) throw std::invalid_argument("eval grid needs at least two points");
  if (options.grid_per_cell < 3) throw std::invalid_argument("grid_per_cell too small");

  Certificate cert;
  cert.case_name = mcase.name;
  cert.problem_kind = mcase.problem.kind_name();
  cert.domain = mcase.problem.domain;
  cert.candidate_digest = candidate.digest();
  cert.grid_per_cell = options.grid_per_cell;
  cert.has_exact = static_cast<bool>(mcase.exact);

  const int finest = options.partition_levels.back();
  const NormP p = problem_norm(mcase.problem);

  // One shared fine table; every level's per-cell maxima are read off it,
  // which makes bound curves exactly monotone under refinement.
  const ResidualTable table = make_residual_table(
      mcase.problem, candidate, finest * (options.grid_per_cell - 1), options.threads);

  // Grid-convergence diagnostic at half and double density.
  {
    const ResidualTable coarse = make_residual_table(
        mcase.problem, candidate, finest * (options.grid_per_cell / 2 - 1), options.threads);
    const ResidualTable fine = make_residual_table(
        mcase.problem, candidate, finest * (options.grid_per_cell * 2 - 1), options.threads);
    auto global_max = [](const ResidualTable& t) {
      double m = 0.0;
      for (double v : t.values) m = std::max(m, v);
      return m;
    };
    GridDiagnostic d;
    d.eps_coarse = global_max(coarse);
    d.eps = global_max(table);
    d.eps_fine = global_max(fine);
    const double scale = std::max(d.eps_fine, 1e-300);
    d.relative_change =
        std::max(std::abs(d.eps - d.eps_coarse), std::abs(d.eps_fine - d.eps)) / scale;
    d.grid_sensitive = d.relative_change > 0.01;
    cert.grid_diagnostic = d;
  }

  cert.eval_times = linspace(mcase.problem.domain, options.eval_points);
  for (int cells : options.partition_levels) {
    LevelResult level;
    level.profile = profile_from_table(table, cells, p, options.grid_per_cell);
    level.curve = bound_curve(mcase.problem, level.profile, cert.eval_times, options.threads);
    cert.levels.push_back(std::move(level));
  }

  if (cert.has_exact) {
    cert.error_curve = measure_error_curve(mcase, candidate, cert.eval_times, options.threads);
    bool violated = false;
    for (const LevelResult& level : cert.levels) {
      for (size_t i = 0; i < cert.eval_times.size(); ++i) {
        if (cert.error_curve[i] > level.curve.values[i] + options.verification_slack) {
          violated = true;
          cert.diagnostic = "error " + fmt17(cert.error_curve[i]) + " exceeds bound " +
                            fmt17(level.curve.values[i]) + " at t = " + fmt17(cert.eval_times[i]) +
                            " (level " + std::to_string(level.profile.partition.cells()) + ")";
          break;
        }
      }
      if (violated) break;
    }
    cert.verdict = violated ? Verdict::Violation : Verdict::CertifiedAndVerified;
  } else {
    cert.verdict = Verdict::CertifiedOnly;
  }
  return cert;
}

Certificate run_case(const ManufacturedCase& mcase, const TrainConfig& train_config,
                     const CertifyOptions& options, ReparametrizedMlp* trained_out) {
  TrainConfig tc = train_config;
  tc.threads = options.threads;
  auto [candidate, report] = train_case(mcase, tc);
  Certificate cert = run_case(mcase, candidate, options);
  if (report.diverged) {
    cert.diverged = true;
    cert.verdict = Verdict::CertifiedOnly;
    cert.diagnostic = "training diverged (non-finite loss) after " +
                      std::to_string(report.loss_history.size()) +
                      " epochs; certified the last finite snapshot";
  }
  if (trained_out) *trained_out = std::move(candidate);
  return cert;
}

namespace {

ordered_json level_json(const LevelResult& level) {
  ordered_json j;
  j["cells"] = level.profile.partition.cells();
  j["grid_per_cell"] = level.profile.grid_per_cell;
  j["theorem_tag"] = level.curve.theorem_tag;
  j["max_eps"] = level.profile.max_eps();
  j["eps"] = level.profile.eps;
  double max_bound = 0.0;
  for (double v : level.curve.values) max_bound = std::max(max_bound, v);
  j["max_bound"] = max_bound;
  return j;
}

}  // namespace

std::string certificate_json(const Certificate& cert) {
  ordered_json j;
  j["schema_version"] = Certificate::kSchemaVersion;
  j["case"] = cert.case_name;
  j["problem_kind"] = cert.problem_kind;
  j["domain"] = {cert.domain.t0, cert.domain.t1};
  j["candidate_digest"] = cert.candidate_digest;
  j["grid_per_cell"] = cert.grid_per_cell;
  j["eval_points"] = cert.eval_times.size();
  j["verdict"] = to_string(cert.verdict);
  j["has_exact"] = cert.has_exact;
  j["diverged"] = cert.diverged;
  if (!cert.diagnostic.empty()) j["diagnostic"] = cert.diagnostic;
  ordered_json diag;
  diag["eps_at_half_grid"] = cert.grid_diagnostic.eps_coarse;
  diag["eps_at_grid"] = cert.grid_diagnostic.eps;
  diag["eps_at_double_grid"] = cert.grid_diagnostic.eps_fine;
  diag["relative_change"] = cert.grid_diagnostic.relative_change;
  diag["grid_sensitive"] = cert.grid_diagnostic.grid_sensitive;
  j["grid_diagnostic"] = diag;
  j["levels"] = ordered_json::array();
  for (const LevelResult& level : cert.levels) j["levels"].push_back(level_json(level));
  if (cert.has_exact) {
    double max_err = 0.0;
    for (double e : cert.error_curve) max_err = std::max(max_err, e);
    j["max_error"] = max_err;
  }
  return j.dump(2) + "\n";
}

void write_certificate_json(const Certificate& cert, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << certificate_json(cert);
}

std::string certificate_csv(const Certificate& cert) {
  std::string header = "t";
  for (const LevelResult& level : cert.levels) {
    header += ",bound_" + std::to_string(level.profile.partition.cells());
  }
  header += ",abs_error\n";
  std::string out = std::move(header);
  for (size_t i = 0; i < cert.eval_times.size(); ++i) {
    out += fmt17(cert.eval_times[i]);
    for (const LevelResult& level : cert.levels) {
      out += ",";
      out += fmt17(level.curve.values[i]);
    }
    out += ",";
    if (cert.has_exact) out += fmt17(cert.error_curve[i]);
    out += "\n";
  }
  return out;
}

void write_certificate_files(const Certificate& cert, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream f(fs::path(dir) / "bounds.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write bounds.csv under '" + dir + "'");
    f << certificate_csv(cert);
  }
  for (const LevelResult& level : cert.levels) {
    const std::string suffix = "_L" + std::to_string(level.profile.partition.cells()) + ".csv";
    write_bound_curve_csv(level.curve, (fs::path(dir) / ("bound" + suffix)).string());
    write_profile_csv(level.profile, (fs::path(dir) / ("profile" + suffix)).string());
  }
  write_certificate_json(cert, (fs::path(dir) / "certificate.json").string());
}

std::string train_report_json(const TrainReport& report) {
  ordered_json j;
  j["epochs_run"] = report.loss_history.size();
  j["best_epoch"] = report.best_epoch;
  if (std::isfinite(report.best_validation_loss)) {
    j["best_validation_loss"] = report.best_validation_loss;
  } else {
    j["best_validation_loss"] = nullptr;
  }
  j["diverged"] = report.diverged;
  j["wall_time_seconds"] = report.wall_time_seconds;
  j["loss_history"] = report.loss_history;
  j["validation_history"] = report.validation_history;
  return j.dump(2) + "\n";
}

SuiteResult run_suite(const std::vector<ManufacturedCase>& suite, const SuiteOptions& options) {
  namespace fs = std::filesystem;
  fs::create_directories(options.out_dir);

  SuiteResult result;
  result.certificates.resize(suite.size());

  const int workers = std::max(1, options.case_workers);
  const int inner = std::max(1, options.certify.threads / workers);
  parallel_for(suite.size(), workers, [&](std::size_t i) {
    TrainConfig tc = options.train;
    tc.seed = options.train.seed + i;  // independent, reproducible streams
    CertifyOptions co = options.certify;
    co.threads = inner;
    Certificate cert = run_case(suite[i], tc, co);
    write_certificate_files(cert, (fs::path(options.out_dir) / suite[i].name).string());
    result.certificates[i] = std::move(cert);
  });

  std::string summary = "case,verdict,global_eps,max_error,grid_sensitive,diverged\n";
  bool all_ok = true;
  for (const Certificate& cert : result.certificates) {
    double max_err = 0.0;
    for (double e : cert.error_curve) max_err = std::max(max_err, e);
    summary += cert.case_name + "," + to_string(cert.verdict) + "," +
               fmt17(cert.levels.front().profile.max_eps()) + "," +
               (cert.has_exact ? fmt17(max_err) : std::string()) + "," +
               (cert.grid_diagnostic.grid_sensitive ? "true" : "false") + "," +
               (cert.diverged ? "true" : "false") + "\n";
    all_ok = all_ok && cert.verdict == Verdict::CertifiedAndVerified;
  }
  {
    std::ofstream f(fs::path(options.out_dir) / "summary.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write summary.csv");
    f << summary;
  }
  result.all_verified = all_ok;
  return result;
}

}  // namespace odecert
