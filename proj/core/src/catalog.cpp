#include "odecert/catalog.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace odecert {

struct Catalog::Impl {
  std::map<std::string, ScalarFn> scalars;
  std::map<std::string, std::pair<int, VectorFn>> vectors;
};

namespace {

Jet inv1p(const Jet& t) { return 1.0 / (t + 1.0); }

void register_builtins(Catalog& c) {
  // Primitives a config file may want directly.
  c.register_scalar("zero", [](const Jet& t) { return Jet::constant(0.0, t.order()); });
  c.register_scalar("one", [](const Jet& t) { return Jet::constant(1.0, t.order()); });
  c.register_scalar("t", [](const Jet& t) { return t; });

  // Exact solutions of the manufactured-solution suite. Forcings are not
  // registered: they are always derived by applying the differential
  // operator to the exact solution.
  c.register_scalar("exact.fo-poly",
                    [](const Jet& t) { return jet_exp(-3.0 * t) + t * t + t + 1.0; });
  c.register_scalar("exact.fo-osc", [](const Jet& t) {
    return jet_exp(-3.0 * t) + jet_sin(3.0 * t) + jet_cos(3.0 * t);
  });
  c.register_scalar("exact.fo-exp", [](const Jet& t) { return jet_exp(-3.0 * t) + jet_exp(t); });
  c.register_scalar("exact.fo-log", [](const Jet& t) {
    return jet_exp(-3.0 * t) - 3.0 * jet_log(t + 1.0) + inv1p(t);
  });

  c.register_scalar("exact.ho-osc-exp",
                    [](const Jet& t) { return jet_sin(t) + jet_cos(t) + jet_exp(t); });
  c.register_scalar("exact.ho-osc-poly",
                    [](const Jet& t) { return jet_sin(t) + jet_cos(t) + t * t + t + 1.0; });
  c.register_scalar("exact.ho-osc-log",
                    [](const Jet& t) { return jet_sin(t) + jet_cos(t) + jet_log(t + 1.0); });
  c.register_scalar("exact.ho-osc-sinsq",
                    [](const Jet& t) { return jet_sin(t) + jet_cos(t) + jet_sin(t * t); });
  c.register_scalar("exact.ho-exp-exp", [](const Jet& t) {
    return jet_exp(-t) + jet_exp(-3.0 * t) + jet_exp(t);
  });
  c.register_scalar("exact.ho-exp-poly", [](const Jet& t) {
    return jet_exp(-t) + jet_exp(-3.0 * t) + t * t + t + 1.0;
  });
  c.register_scalar("exact.ho-exp-log", [](const Jet& t) {
    return jet_exp(-t) + jet_exp(-3.0 * t) + jet_log(t + 1.0);
  });
  c.register_scalar("exact.ho-exp-osc", [](const Jet& t) {
    return jet_exp(-t) + jet_exp(-3.0 * t) + jet_sin(t) + jet_cos(t);
  });

  c.register_scalar("exact.nc-tcos", [](const Jet& t) { return inv1p(t) + t * jet_cos(t); });
  c.register_scalar("exact.nc-exp",
                    [](const Jet& t) { return 1.0 / (t * t + 1.0) + jet_exp(t); });
  c.register_scalar("exact.nc-poly",
                    [](const Jet& t) { return 1.0 / (1.0 + jet_sin(t)) + t * t; });
  c.register_scalar("exact.nc-log", [](const Jet& t) {
    return jet_exp(-t) * inv1p(t) + jet_log(t + 1.0);
  });

  // Nonconstant coefficients p(t) and their antiderivatives P(t).
  c.register_scalar("coef.p.nc-tcos", inv1p);
  c.register_scalar("coef.P.nc-tcos", [](const Jet& t) { return jet_log(t + 1.0); });
  c.register_scalar("coef.p.nc-exp", [](const Jet& t) { return 2.0 * t / (t * t + 1.0); });
  c.register_scalar("coef.P.nc-exp", [](const Jet& t) { return jet_log(t * t + 1.0); });
  c.register_scalar("coef.p.nc-poly",
                    [](const Jet& t) { return jet_cos(t) / (1.0 + jet_sin(t)); });
  c.register_scalar("coef.P.nc-poly", [](const Jet& t) { return jet_log(1.0 + jet_sin(t)); });
  c.register_scalar("coef.p.nc-log", [](const Jet& t) { return (t + 2.0) * inv1p(t); });
  c.register_scalar("coef.P.nc-log", [](const Jet& t) { return t + jet_log(t + 1.0); });

  // Modal (M-independent) exact solution of the six-dimensional Jordan
  // system; the assembled problem applies its own modal matrix on top.
  c.register_vector("exact.sys-jordan6.modal", 6, [](const Jet& t) {
    std::vector<Jet> v(6, Jet(t.order()));
    v[0] = jet_sin(t) + (1.0 - t + 0.5 * t * t) * jet_exp(-4.0 * t);
    v[1] = jet_exp(t) - 1.0 + (1.0 - t) * jet_exp(-4.0 * t);
    v[2] = t * t + jet_exp(-4.0 * t);
    v[3] = t * t * t + (1.0 - t) * jet_exp(-3.0 * t);
    v[4] = jet_exp(2.0 * t) - 1.0 + jet_exp(-3.0 * t);
    v[5] = jet_log(t + 1.0) + jet_exp(-2.0 * t);
    return v;
  });
}

}  // namespace

Catalog::Catalog() : impl_(new Impl) {}

Catalog& Catalog::instance() {
  static Catalog c = [] {
    Catalog cat;
    register_builtins(cat);
    return cat;
  }();
  return c;
}

void Catalog::register_scalar(const std::string& name, ScalarFn fn) {
  impl_->scalars[name] = std::move(fn);
}

void Catalog::register_vector(const std::string& name, int dim, VectorFn fn) {
  impl_->vectors[name] = {dim, std::move(fn)};
}

bool Catalog::has_scalar(const std::string& name) const { return impl_->scalars.count(name) > 0; }
bool Catalog::has_vector(const std::string& name) const { return impl_->vectors.count(name) > 0; }

ScalarFn Catalog::scalar(const std::string& name) const {
  auto it = impl_->scalars.find(name);
  if (it == impl_->scalars.end()) {
    throw std::invalid_argument("no catalog function named '" + name + "'");
  }
  return it->second;
}

VectorFn Catalog::vector(const std::string& name, int* dim) const {
  auto it = impl_->vectors.find(name);
  if (it == impl_->vectors.end()) {
    throw std::invalid_argument("no catalog vector function named '" + name + "'");
  }
  if (dim) *dim = it->second.first;
  return it->second.second;
}

std::vector<std::string> Catalog::scalar_names() const {
  std::vector<std::string> names;
  for (const auto& [k, v] : impl_->scalars) names.push_back(k);
  return names;
}

std::vector<std::string> Catalog::vector_names() const {
  std::vector<std::string> names;
  for (const auto& [k, v] : impl_->vectors) names.push_back(k);
  return names;
}

}  // namespace odecert
