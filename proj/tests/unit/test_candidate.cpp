#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "odecert/candidate.hpp"
#include "odecert/manufactured.hpp"
#include "odecert/residual.hpp"
#include "oracles.hpp"

using odecert::Jet;
using odecert::Mlp;
using odecert::ReparamKind;
using odecert::Reparametrization;

namespace {
const std::vector<odecert::ManufacturedCase>& suite() {
  static const auto s = odecert::manufactured_suite();
  return s;
}
}  // namespace

TEST_CASE("jet_eval of the fo-poly closed form matches finite differences") {
  const auto& c = odecert::find_case(suite(), "fo-poly");
  odecert::ClosedFormCandidate cand(c.exact, 1, "fo-poly");
  const double t = 1.0;
  const auto jets = odecert::jet_eval(cand, t, 1);
  const double want_v = std::exp(-3.0) + 3.0;  // e^-3 + t^2+t+1 at t=1
  const double want_d = -3.0 * std::exp(-3.0) + 3.0;
  CHECK(jets[0].value() == doctest::Approx(want_v).epsilon(1e-14));
  CHECK(jets[0].derivative(1) == doctest::Approx(want_d).epsilon(1e-14));
  auto f = [&](double x) { return odecert::jet_eval(cand, x, 0)[0].value(); };
  CHECK(oracles::rel_err(jets[0].derivative(1), oracles::central_difference(f, t, 1, 1e-5)) <
        1e-6);
}

TEST_CASE("jet_eval rejects orders beyond the supported maximum") {
  const auto& c = odecert::find_case(suite(), "fo-poly");
  odecert::ClosedFormCandidate cand(c.exact, 1, "fo-poly");
  CHECK_THROWS_AS(odecert::jet_eval(cand, 0.5, 7), std::invalid_argument);
}

TEST_CASE("zero-weight MLP with ExpFirstOrder reparam returns exactly u0 at t0") {
  Mlp mlp({8, 8}, 1, 123);
  for (auto& layer : mlp.layers()) {
    std::fill(layer.w.begin(), layer.w.end(), 0.0);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
  }
  Reparametrization rp{ReparamKind::ExpFirstOrder, 0.5, {2.25}, {}};
  odecert::ReparametrizedMlp cand(std::move(mlp), rp);
  const auto jets = odecert::jet_eval(cand, 0.5, 2);
  CHECK(jets[0].value() == 2.25);
  // zero network: u identically u0
  CHECK(odecert::jet_eval(cand, 2.0, 0)[0].value() == 2.25);
}

TEST_CASE("reparametrizations satisfy initial conditions exactly for any weights") {
  std::mt19937_64 gen(99);
  for (int rep = 0; rep < 10; ++rep) {
    Mlp mlp({16, 16}, 2, gen());
    const double t0 = oracles::uniform(gen, -1.0, 1.0);
    SUBCASE("") {}
    Reparametrization exp1{ReparamKind::ExpFirstOrder, t0, {1.5, -0.5}, {}};
    odecert::ReparametrizedMlp c1(mlp, exp1);
    auto j1 = odecert::jet_eval(c1, t0, 1);
    CHECK(std::abs(j1[0].value() - 1.5) <= 1e-12);
    CHECK(std::abs(j1[1].value() + 0.5) <= 1e-12);

    Reparametrization lag{ReparamKind::LagarisLinear, t0, {1.5, -0.5}, {}};
    odecert::ReparametrizedMlp c2(mlp, lag);
    auto j2 = odecert::jet_eval(c2, t0, 1);
    CHECK(std::abs(j2[0].value() - 1.5) <= 1e-12);
    CHECK(std::abs(j2[1].value() + 0.5) <= 1e-12);

    Reparametrization exp2{ReparamKind::ExpSecondOrder, t0, {1.5, -0.5}, {0.25, 2.0}};
    odecert::ReparametrizedMlp c3(mlp, exp2);
    auto j3 = odecert::jet_eval(c3, t0, 2);
    CHECK(std::abs(j3[0].value() - 1.5) <= 1e-12);
    CHECK(std::abs(j3[1].value() + 0.5) <= 1e-12);
    CHECK(std::abs(j3[0].derivative(1) - 0.25) <= 1e-12);
    CHECK(std::abs(j3[1].derivative(1) - 2.0) <= 1e-12);
  }
}

TEST_CASE("constant network closed forms") {
  // NN == c: ExpFirstOrder gives u0 + (1 - e^{-(t-t0)}) c;
  // LagarisLinear gives u0 + c at t0 + 1.
  Mlp mlp({4}, 1, 7);
  auto& layers = mlp.layers();
  std::fill(layers[0].w.begin(), layers[0].w.end(), 0.0);
  std::fill(layers[0].b.begin(), layers[0].b.end(), 0.0);
  std::fill(layers[1].w.begin(), layers[1].w.end(), 0.0);
  layers[1].b[0] = 0.75;  // output bias -> constant network

  Reparametrization exp1{ReparamKind::ExpFirstOrder, 0.0, {2.0}, {}};
  odecert::ReparametrizedMlp c1(mlp, exp1);
  const double t = 1.3;
  CHECK(odecert::jet_eval(c1, t, 0)[0].value() ==
        doctest::Approx(2.0 + (1.0 - std::exp(-t)) * 0.75).epsilon(1e-15));

  Reparametrization lag{ReparamKind::LagarisLinear, 0.0, {2.0}, {}};
  odecert::ReparametrizedMlp c2(mlp, lag);
  CHECK(odecert::jet_eval(c2, 1.0, 0)[0].value() == doctest::Approx(2.75).epsilon(1e-15));
}

TEST_CASE("ExpSecondOrder requires u0_prime") {
  Mlp mlp({4}, 1, 7);
  Reparametrization bad{ReparamKind::ExpSecondOrder, 0.0, {1.0}, {}};
  odecert::ReparametrizedMlp cand(std::move(mlp), bad);
  CHECK_THROWS_AS(odecert::jet_eval(cand, 0.5, 1), std::invalid_argument);
}

TEST_CASE("MLP jet derivatives match finite differences on random nets") {
  std::mt19937_64 gen(2024);
  for (int net = 0; net < 10; ++net) {
    Mlp mlp({8, 8}, 1, gen());
    Reparametrization rp{ReparamKind::ExpFirstOrder, 0.0, {1.0}, {}};
    odecert::ReparametrizedMlp cand(mlp, rp);
    auto f = [&](double x) { return odecert::jet_eval(cand, x, 0)[0].value(); };
    for (int pt = 0; pt < 50; ++pt) {
      const double t = oracles::uniform(gen, 0.05, 3.0);
      const auto jets = odecert::jet_eval(cand, t, 3);
      for (int k = 1; k <= 3; ++k) {
        const double fd = k == 3 ? oracles::central_difference_refined(f, t, 3, 1e-2)
                                 : oracles::central_difference(f, t, k, k == 2 ? 1e-4 : 1e-5);
        const double got = jets[0].derivative(k);
        CHECK(std::abs(got - fd) <= 1e-5 * std::max(std::abs(fd), 1.0) + 1e-7);
      }
    }
  }
}

TEST_CASE("synthetic constant-residual candidate") {
  const auto& c = odecert::find_case(suite(), "fo-poly");

  SUBCASE("zero perturbation reproduces the exact solution") {
    auto cand = odecert::synthetic_constant_residual_candidate(c, 0.0);
    for (double t : {0.0, 1.0, 2.5}) {
      CHECK(odecert::jet_eval(*cand, t, 0)[0].value() ==
            doctest::Approx(odecert::exact_eval(c, t)[0].real()).epsilon(1e-15));
    }
  }

  SUBCASE("residual is identically epsilon") {
    auto cand = odecert::synthetic_constant_residual_candidate(c, 0.3);
    for (int i = 0; i < 100; ++i) {
      const double t = 3.0 * i / 99.0;
      CHECK(odecert::residual_norm_at(c.problem, *cand, t) ==
            doctest::Approx(0.3).epsilon(1e-10));
    }
  }

  SUBCASE("lambda = 0 deviation grows linearly") {
    // Ad-hoc case u' = f with exact t^2 + 1.
    odecert::OdeProblem p;
    p.kind = odecert::FirstOrderConstant{odecert::ComplexRoot{0.0, 0.0}, odecert::Complex{1.0, 0.0}};
    p.domain = odecert::Interval{0.0, 3.0};
    odecert::VectorFn exact = [](const Jet& t) { return std::vector<Jet>{t * t + 1.0}; };
    auto skeleton = std::make_shared<odecert::OdeProblem>(p);
    p.forcing = [skeleton, exact](double t, std::span<odecert::Complex> out) {
      odecert::apply_operator(*skeleton, t, exact(Jet::variable(t, 1)), out);
    };
    odecert::ManufacturedCase mc{"lin", std::move(p), exact, "", {}};
    auto cand = odecert::synthetic_constant_residual_candidate(mc, 1.0);
    const double dev = odecert::jet_eval(*cand, 2.0, 0)[0].value() -
                       odecert::exact_eval(mc, 2.0)[0].real();
    CHECK(dev == doctest::Approx(2.0).epsilon(1e-14));
  }

  SUBCASE("rejects oscillatory roots") {
    odecert::ManufacturedCase mc = c;
    std::get<odecert::FirstOrderConstant>(mc.problem.kind).root.omega = 1.0;
    CHECK_THROWS_AS(odecert::synthetic_constant_residual_candidate(mc, 0.1),
                    std::invalid_argument);
  }
}

TEST_CASE("snapshot round-trips bit-exactly and digests pin content") {
  std::mt19937_64 gen(5150);
  Mlp mlp({32, 32}, 2, gen());
  Reparametrization rp{ReparamKind::ExpSecondOrder, 0.25, {1.0, 2.0}, {-0.5, 0.125}};
  odecert::ReparametrizedMlp cand(std::move(mlp), rp);

  const std::string path = (std::filesystem::temp_directory_path() / "odecert_snap_test.ckpt")
                               .string();
  odecert::save_snapshot(cand, path);
  odecert::ReparametrizedMlp back = odecert::load_snapshot(path);

  REQUIRE(back.mlp().layers().size() == cand.mlp().layers().size());
  for (size_t l = 0; l < back.mlp().layers().size(); ++l) {
    const auto& a = cand.mlp().layers()[l];
    const auto& b = back.mlp().layers()[l];
    REQUIRE(a.w.size() == b.w.size());
    for (size_t i = 0; i < a.w.size(); ++i) CHECK(a.w[i] == b.w[i]);
    for (size_t i = 0; i < a.b.size(); ++i) CHECK(a.b[i] == b.b[i]);
  }
  CHECK(back.reparam().kind == rp.kind);
  CHECK(back.reparam().t0 == rp.t0);
  CHECK(back.reparam().u0 == rp.u0);
  CHECK(back.reparam().u0_prime == rp.u0_prime);
  CHECK(back.digest() == cand.digest());

  // Any weight change must change the digest.
  back.mlp().layers()[0].w[3] += 1e-16;
  CHECK(back.digest() != cand.digest());
  std::filesystem::remove(path);
}

TEST_CASE("make_reparametrization pulls realified initial data from problems") {
  const auto& ho = odecert::find_case(suite(), "ho-exp-exp");
  const auto rp = odecert::make_reparametrization(ho.problem, ReparamKind::ExpSecondOrder);
  REQUIRE(rp.u0.size() == 1);
  CHECK(rp.u0[0] == 3.0);
  REQUIRE(rp.u0_prime.size() == 1);
  CHECK(rp.u0_prime[0] == -3.0);

  const auto& fo = odecert::find_case(suite(), "fo-poly");
  CHECK_THROWS_AS(odecert::make_reparametrization(fo.problem, ReparamKind::ExpSecondOrder),
                  std::invalid_argument);
}
