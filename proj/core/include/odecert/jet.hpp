#ifndef ODECERT_JET_HPP
#define ODECERT_JET_HPP

#include <array>
#include <cassert>
#include <cstdint>

namespace odecert {

/// Truncated Taylor series of a scalar function at a point (a "jet").
///
/// coeff(k) stores u^(k)(t)/k!, so arithmetic on jets is exact truncated
/// power-series arithmetic and derivative(k) recovers the exact k-th
/// derivative of any composite expression built from the operations below.
/// The order is fixed per jet; mixing orders in a binary op is a programming
/// error (asserted in debug builds).
class Jet {
 public:
  static constexpr int kMaxOrder = 6;

  Jet() = default;
  explicit Jet(int order) : order_(order) {
    assert(order >= 0 && order <= kMaxOrder);
    c_.fill(0.0);
  }

  /// Jet of the identity function t -> t at the point t.
  static Jet variable(double t, int order) {
    Jet j(order);
    j.c_[0] = t;
    if (order >= 1) j.c_[1] = 1.0;
    return j;
  }

  static Jet constant(double v, int order) {
    Jet j(order);
    j.c_[0] = v;
    return j;
  }

  int order() const { return order_; }
  double value() const { return c_[0]; }

  /// Exact k-th derivative: coeff(k) * k!.
  double derivative(int k) const;

  double coeff(int k) const {
    assert(k >= 0 && k <= order_);
    return c_[k];
  }
  double& coeff(int k) {
    assert(k >= 0 && k <= order_);
    return c_[k];
  }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }
  Jet& operator-=(double s) {
    c_[0] -= s;
    return *this;
  }
  Jet& operator*=(double s);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, const Jet& a);
  friend Jet operator-(const Jet& a);
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator/(Jet a, double s) { return a *= 1.0 / s; }
  friend Jet operator/(double s, const Jet& b);

 private:
  int order_ = 0;
  std::array<double, kMaxOrder + 1> c_{};
};

Jet jet_exp(const Jet& x);
Jet jet_log(const Jet& x);  // requires x.value() > 0
Jet jet_sin(const Jet& x);
Jet jet_cos(const Jet& x);
Jet jet_tanh(const Jet& x);
Jet jet_pow_int(const Jet& x, int n);  // n >= 0

}  // namespace odecert

#endif  // ODECERT_JET_HPP
