// Command-line driver: trains network candidates on the manufactured
// suite (or user config files), certifies error bounds from residual
// profiles, and verifies true error against the certified bound.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "odecert/certify.hpp"
#include "odecert/config.hpp"
#include "odecert/parallel.hpp"
#include "odecert/quadrature.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct ResolvedCase {
  odecert::ManufacturedCase mcase;
  bool has_exact = false;
  bool has_train_defaults = false;
  odecert::TrainConfig train_defaults;
};

ResolvedCase resolve_case(const std::string& name_or_path, unsigned suite_seed) {
  const auto suite = odecert::manufactured_suite(suite_seed);
  for (const auto& c : suite) {
    if (c.name == name_or_path) {
      ResolvedCase r;
      r.mcase = c;
      r.has_exact = true;
      return r;
    }
  }
  if (std::filesystem::exists(name_or_path)) {
    odecert::LoadedCase loaded = odecert::load_case_config(name_or_path);
    ResolvedCase r;
    r.mcase = std::move(loaded.mcase);
    r.has_exact = loaded.has_exact;
    r.has_train_defaults = loaded.has_train;
    r.train_defaults = loaded.train;
    return r;
  }
  throw CLI::ValidationError("case", "'" + name_or_path +
                                         "' is neither a suite case nor a config file (try "
                                         "'odecert list')");
}

std::vector<int> parse_cells(const std::string& spec) {
  std::vector<int> cells;
  size_t pos = 0;
  while (pos < spec.size()) {
    size_t comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    cells.push_back(std::stoi(spec.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  if (cells.empty()) throw CLI::ValidationError("--cells", "empty partition list");
  return cells;
}

void print_certificate_summary(const odecert::Certificate& cert) {
  std::printf("%-14s %-22s eps=%-12.5g", cert.case_name.c_str(),
              odecert::to_string(cert.verdict).c_str(),
              cert.levels.front().profile.max_eps());
  if (cert.has_exact) {
    double max_err = 0.0;
    for (double e : cert.error_curve) max_err = std::max(max_err, e);
    std::printf(" max|u-u*|=%-12.5g", max_err);
  }
  if (cert.grid_diagnostic.grid_sensitive) std::printf(" [grid-sensitive]");
  if (cert.diverged) std::printf(" [training-diverged]");
  std::printf("\n");
}

int verdict_exit(const odecert::Certificate& cert) {
  return cert.verdict == odecert::Verdict::Violation ? kExitViolation : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified a-posteriori error bounds for network ODE solutions"};
  app.require_subcommand(1);

  unsigned suite_seed = 42;
  app.add_option("--suite-seed", suite_seed, "seed for the suite's random orthogonal system");

  // ---- list ----
  auto* cmd_list = app.add_subcommand("list", "print the manufactured case catalog");

  // ---- train ----
  auto* cmd_train = app.add_subcommand("train", "train an MLP candidate for a case");
  std::string train_case_name, train_out = "candidate.ckpt";
  int train_epochs = 1000;
  std::uint64_t train_seed = 0;
  int train_width = 0;
  double train_lr = 1e-3;
  int train_samples = 1024;
  cmd_train->add_option("case", train_case_name, "suite case name or config path")->required();
  cmd_train->add_option("--epochs", train_epochs, "training epochs");
  cmd_train->add_option("--seed", train_seed, "RNG seed (weights + sampling)");
  cmd_train->add_option("--out", train_out, "checkpoint output path");
  cmd_train->add_option("--width", train_width, "hidden width override");
  cmd_train->add_option("--lr", train_lr, "Adam learning rate");
  cmd_train->add_option("--samples", train_samples, "sample points per epoch");

  // ---- certify ----
  auto* cmd_certify = app.add_subcommand("certify", "compute bound curves for a candidate");
  std::string certify_case, certify_candidate, certify_cells = "1,10,100",
                            certify_out = "certify_out", certify_p;
  int certify_grid = 256, certify_eval = 1000;
  bool certify_relative = false;
  cmd_certify->add_option("case", certify_case, "suite case name or config path")->required();
  cmd_certify->add_option("--candidate", certify_candidate, "candidate checkpoint")->required();
  cmd_certify->add_option("--cells", certify_cells, "nested partition levels, e.g. 1,10,100");
  cmd_certify->add_option("--grid", certify_grid, "residual grid points per cell");
  cmd_certify->add_option("--eval-points", certify_eval, "bound-curve evaluation grid");
  cmd_certify->add_option("--p", certify_p, "override system residual norm (1, 2, inf)");
  cmd_certify->add_option("--out", certify_out, "output directory");
  cmd_certify->add_flag("--relative", certify_relative,
                        "also emit the relative bound (first-order, lambda < 0)");

  // ---- verify ----
  auto* cmd_verify = app.add_subcommand("verify", "certify and check true error <= bound");
  std::string verify_case, verify_candidate;
  int verify_grid = 256;
  std::string verify_cells = "1,10,100";
  cmd_verify->add_option("case", verify_case, "suite case name (exact solution required)")
      ->required();
  cmd_verify->add_option("--candidate", verify_candidate, "candidate checkpoint")->required();
  cmd_verify->add_option("--cells", verify_cells, "nested partition levels");
  cmd_verify->add_option("--grid", verify_grid, "residual grid points per cell");

  // ---- suite ----
  auto* cmd_suite = app.add_subcommand("suite", "run every manufactured case end to end");
  bool suite_quick = false;
  std::string suite_out = "suite_out";
  std::uint64_t suite_train_seed = 0;
  int suite_epochs = -1;
  cmd_suite->add_flag("--quick", suite_quick, "100 training epochs instead of 1000");
  cmd_suite->add_option("--out", suite_out, "output directory");
  cmd_suite->add_option("--seed", suite_train_seed, "base training seed");
  cmd_suite->add_option("--epochs", suite_epochs, "override epoch count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  const int threads = odecert::thread_budget();
  try {
    if (cmd_list->parsed()) {
      const auto suite = odecert::manufactured_suite(suite_seed);
      std::printf("%-14s %-26s %s\n", "name", "class", "description");
      for (const auto& c : suite) {
        std::printf("%-14s %-26s %s\n", c.name.c_str(), c.problem.kind_name(), c.notes.c_str());
      }
      return kExitOk;
    }

    if (cmd_train->parsed()) {
      ResolvedCase rc = resolve_case(train_case_name, suite_seed);
      odecert::TrainConfig config = rc.has_train_defaults ? rc.train_defaults
                                                          : odecert::TrainConfig{};
      config.epochs = train_epochs;
      config.seed = train_seed;
      config.learning_rate = train_lr;
      config.samples_per_epoch = train_samples;
      config.threads = threads;
      if (train_width > 0) rc.mcase.hints.hidden_width = train_width;
      auto [candidate, report] = odecert::train_case(rc.mcase, config);
      odecert::save_snapshot(candidate, train_out);
      std::ofstream rf(train_out + ".train.json", std::ios::binary);
      rf << odecert::train_report_json(report);
      std::printf("trained %s: %zu epochs, best validation loss %.6g (epoch %d), %.1fs\n",
                  rc.mcase.name.c_str(), report.loss_history.size(),
                  report.best_validation_loss, report.best_epoch, report.wall_time_seconds);
      std::printf("checkpoint: %s (digest %s)\n", train_out.c_str(),
                  candidate.digest().c_str());
      if (report.diverged) {
        std::printf("warning: training diverged; checkpoint holds the last finite snapshot\n");
      }
      return kExitOk;
    }

    if (cmd_certify->parsed()) {
      ResolvedCase rc = resolve_case(certify_case, suite_seed);
      if (!certify_p.empty()) {
        if (auto* sys = std::get_if<odecert::LinearSystem>(&rc.mcase.problem.kind)) {
          sys->norm_p = odecert::norm_p_from_string(certify_p);
        } else {
          throw CLI::ValidationError("--p", "norm override applies to system problems only");
        }
      }
      odecert::ReparametrizedMlp candidate = odecert::load_snapshot(certify_candidate);
      odecert::CertifyOptions options;
      options.partition_levels = parse_cells(certify_cells);
      options.grid_per_cell = certify_grid;
      options.eval_points = certify_eval;
      options.threads = threads;
      odecert::Certificate cert = odecert::run_case(rc.mcase, candidate, options);
      odecert::write_certificate_files(cert, certify_out);
      if (certify_relative) {
        const auto& finest = cert.levels.back();
        odecert::BoundCurve rel = odecert::relative_bound_curve(rc.mcase.problem, finest.profile,
                                                                cert.eval_times);
        odecert::write_bound_curve_csv(
            rel, (std::filesystem::path(certify_out) / "bound_relative.csv").string());
      }
      print_certificate_summary(cert);
      std::printf("artifacts in %s\n", certify_out.c_str());
      return verdict_exit(cert);
    }

    if (cmd_verify->parsed()) {
      ResolvedCase rc = resolve_case(verify_case, suite_seed);
      if (!rc.has_exact) {
        throw CLI::ValidationError("case", "verify requires a case with a known exact solution");
      }
      odecert::ReparametrizedMlp candidate = odecert::load_snapshot(verify_candidate);
      odecert::CertifyOptions options;
      options.partition_levels = parse_cells(verify_cells);
      options.grid_per_cell = verify_grid;
      options.threads = threads;
      odecert::Certificate cert = odecert::run_case(rc.mcase, candidate, options);
      print_certificate_summary(cert);
      return cert.verdict == odecert::Verdict::CertifiedAndVerified ? kExitOk : kExitViolation;
    }

    if (cmd_suite->parsed()) {
      odecert::SuiteOptions options;
      options.train.epochs = suite_epochs > 0 ? suite_epochs : (suite_quick ? 100 : 1000);
      options.train.seed = suite_train_seed;
      options.certify.threads = threads;
      options.out_dir = suite_out;
      options.case_workers = std::clamp(threads / 2, 1, 4);
      const auto suite = odecert::manufactured_suite(suite_seed);
      const odecert::SuiteResult result = odecert::run_suite(suite, options);
      for (const auto& cert : result.certificates) print_certificate_summary(cert);
      std::printf("suite: %zu cases, %s; artifacts in %s\n", result.certificates.size(),
                  result.all_verified ? "all verified" : "NOT all verified", suite_out.c_str());
      return result.all_verified ? kExitOk : kExitViolation;
    }
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const odecert::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const odecert::CertificationRefused& e) {
    std::cerr << "certification refused: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const odecert::QuadratureError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
