// Microbenchmarks for the hot paths: jet-mode network evaluation, the
// auxiliary bound kernels, residual tabulation and full bound curves.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "odecert/bounds.hpp"
#include "odecert/manufactured.hpp"
#include "odecert/residual.hpp"
#include "odecert/trainer.hpp"

namespace {

const std::vector<odecert::ManufacturedCase>& suite() {
  static const auto s = odecert::manufactured_suite();
  return s;
}

void BM_MlpJetEval(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  const int order = static_cast<int>(state.range(1));
  odecert::Mlp mlp({width, width}, 1, 42);
  odecert::Reparametrization rp{odecert::ReparamKind::ExpFirstOrder, 0.0, {2.0}, {}};
  odecert::ReparametrizedMlp cand(std::move(mlp), rp);
  double t = 0.0;
  for (auto _ : state) {
    t += 1e-6;
    benchmark::DoNotOptimize(odecert::jet_eval(cand, t, order));
  }
}
BENCHMARK(BM_MlpJetEval)->Args({32, 2})->Args({32, 3})->Args({512, 1});

void BM_LossGradient(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  const auto& c = odecert::find_case(suite(), "fo-poly");
  const auto reparam = odecert::make_reparametrization(c.problem, c.hints.reparam);
  odecert::Mlp mlp({width, width}, 1, 7);
  std::vector<double> pts(256);
  for (size_t i = 0; i < pts.size(); ++i) pts[i] = 3.0 * (i + 0.5) / pts.size();
  std::vector<double> grad(mlp.param_count());
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        odecert::loss_and_gradient(c.problem, reparam, mlp, pts, 3.0, grad));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(pts.size()));
}
BENCHMARK(BM_LossGradient)->Arg(32)->Arg(128);

void BM_PhiN(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> lam;
  for (int i = 0; i < n; ++i) lam.push_back(0.5 + 1.3 * i);
  double x = 0.1;
  for (auto _ : state) {
    x += 1e-7;
    benchmark::DoNotOptimize(odecert::phi_n(x, lam));
  }
}
BENCHMARK(BM_PhiN)->Arg(2)->Arg(4)->Arg(6);

void BM_PhiNClustered(benchmark::State& state) {
  // near-degenerate roots exercising the confluent series path
  std::vector<double> lam{3.0, 3.0 + 1e-8, 3.0 + 2e-8};
  double x = 0.1;
  for (auto _ : state) {
    x += 1e-7;
    benchmark::DoNotOptimize(odecert::phi_n(x, lam));
  }
}
BENCHMARK(BM_PhiNClustered);

void BM_SystemBound(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  const auto& c = odecert::find_case(suite(), "sys-jordan6");
  const auto* sys = std::get_if<odecert::LinearSystem>(&c.problem.kind);
  odecert::ResidualProfile profile;
  profile.partition = odecert::Partition::uniform(c.problem.domain, cells);
  profile.eps.assign(cells, 0.25);
  double t = 1.0;
  for (auto _ : state) {
    t = (t == 1.0) ? 2.5 : 1.0;
    benchmark::DoNotOptimize(odecert::bound_system(*sys, profile, t));
  }
}
BENCHMARK(BM_SystemBound)->Arg(1)->Arg(100);

void BM_ResidualTable(benchmark::State& state) {
  const auto& c = odecert::find_case(suite(), "fo-poly");
  odecert::Mlp mlp({32, 32}, 1, 3);
  const auto reparam = odecert::make_reparametrization(c.problem, c.hints.reparam);
  odecert::ReparametrizedMlp cand(std::move(mlp), reparam);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        odecert::make_residual_table(c.problem, cand, 2550, 1));
  }
  state.SetItemsProcessed(state.iterations() * 2551);
}
BENCHMARK(BM_ResidualTable);

}  // namespace

BENCHMARK_MAIN();
