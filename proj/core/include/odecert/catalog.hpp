#ifndef ODECERT_CATALOG_HPP
#define ODECERT_CATALOG_HPP

#include <functional>
#include <string>
#include <vector>

#include "odecert/jet.hpp"

namespace odecert {

/// Scalar function of time, evaluated in jet arithmetic so that exact
/// derivatives are available to any order the input jet carries.
using ScalarFn = std::function<Jet(const Jet&)>;

/// Vector-valued function of time; one jet per (realified) state component.
using VectorFn = std::function<std::vector<Jet>(const Jet&)>;

/// Named registry of the functions a config file may reference for exact
/// solutions, forcings and nonconstant coefficients. Problems constructed
/// in host code can use arbitrary callables; the catalog only exists so
/// that config files stay data, not code.
class Catalog {
 public:
  static Catalog& instance();

  void register_scalar(const std::string& name, ScalarFn fn);
  void register_vector(const std::string& name, int dim, VectorFn fn);

  bool has_scalar(const std::string& name) const;
  bool has_vector(const std::string& name) const;
  ScalarFn scalar(const std::string& name) const;  // throws if missing
  VectorFn vector(const std::string& name, int* dim = nullptr) const;

  std::vector<std::string> scalar_names() const;
  std::vector<std::string> vector_names() const;

 private:
  Catalog();
  struct Impl;
  Impl* impl_;
};

}  // namespace odecert

#endif  // ODECERT_CATALOG_HPP
