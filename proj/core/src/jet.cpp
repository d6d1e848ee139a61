#include "odecert/jet.hpp"

#include <cmath>

namespace odecert {

namespace {

double factorial(int k) {
  static const double table[] = {1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0};
  return table[k];
}

}  // namespace

double Jet::derivative(int k) const {
  assert(k >= 0 && k <= order_);
  return c_[k] * factorial(k);
}

Jet& Jet::operator+=(const Jet& o) {
  assert(order_ == o.order_);
  for (int k = 0; k <= order_; ++k) c_[k] += o.c_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  assert(order_ == o.order_);
  for (int k = 0; k <= order_; ++k) c_[k] -= o.c_[k];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (int k = 0; k <= order_; ++k) c_[k] *= s;
  return *this;
}

Jet operator-(double s, const Jet& a) {
  Jet r = -a;
  r.c_[0] += s;
  return r;
}

Jet operator-(const Jet& a) {
  Jet r(a.order_);
  for (int k = 0; k <= a.order_; ++k) r.c_[k] = -a.c_[k];
  return r;
}

// Cauchy product, truncated at the common order.
Jet operator*(const Jet& a, const Jet& b) {
  assert(a.order_ == b.order_);
  Jet r(a.order_);
  for (int k = 0; k <= a.order_; ++k) {
    double s = 0.0;
    for (int j = 0; j <= k; ++j) s += a.c_[j] * b.c_[k - j];
    r.c_[k] = s;
  }
  return r;
}

// q = a/b solved coefficient by coefficient from a = q*b.
Jet operator/(const Jet& a, const Jet& b) {
  assert(a.order_ == b.order_);
  Jet q(a.order_);
  const double inv_b0 = 1.0 / b.c_[0];
  for (int k = 0; k <= a.order_; ++k) {
    double s = a.c_[k];
    for (int j = 0; j < k; ++j) s -= q.c_[j] * b.c_[k - j];
    q.c_[k] = s * inv_b0;
  }
  return q;
}

Jet operator/(double s, const Jet& b) {
  return Jet::constant(s, b.order()) / b;
}

// y' = y * x'  =>  y_k = (1/k) sum_{j=1..k} j * x_j * y_{k-j}
Jet jet_exp(const Jet& x) {
  const int n = x.order();
  Jet y(n);
  y.coeff(0) = std::exp(x.coeff(0));
  for (int k = 1; k <= n; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * x.coeff(j) * y.coeff(k - j);
    y.coeff(k) = s / k;
  }
  return y;
}

// x y' = x' - y in coefficient form: y_k = (x_k - (1/k) sum j y_j x_{k-j}) / x_0
Jet jet_log(const Jet& x) {
  const int n = x.order();
  Jet y(n);
  y.coeff(0) = std::log(x.coeff(0));
  const double inv_x0 = 1.0 / x.coeff(0);
  for (int k = 1; k <= n; ++k) {
    double s = x.coeff(k);
    for (int j = 1; j < k; ++j) s -= (static_cast<double>(j) / k) * y.coeff(j) * x.coeff(k - j);
    y.coeff(k) = s * inv_x0;
  }
  return y;
}

namespace {

// s' = c x', c' = -s x', advanced jointly.
void jet_sincos(const Jet& x, Jet& s, Jet& c) {
  const int n = x.order();
  s = Jet(n);
  c = Jet(n);
  s.coeff(0) = std::sin(x.coeff(0));
  c.coeff(0) = std::cos(x.coeff(0));
  for (int k = 1; k <= n; ++k) {
    double as = 0.0, ac = 0.0;
    for (int j = 1; j <= k; ++j) {
      as += j * x.coeff(j) * c.coeff(k - j);
      ac += j * x.coeff(j) * s.coeff(k - j);
    }
    s.coeff(k) = as / k;
    c.coeff(k) = -ac / k;
  }
}

}  // namespace

Jet jet_sin(const Jet& x) {
  Jet s, c;
  jet_sincos(x, s, c);
  return s;
}

Jet jet_cos(const Jet& x) {
  Jet s, c;
  jet_sincos(x, s, c);
  return c;
}

// y' = (1 - y^2) x'. The auxiliary series w = 1 - y^2 is advanced in
// lockstep: w_k only needs y up to order k, y_{k} only w up to k-1.
Jet jet_tanh(const Jet& x) {
  const int n = x.order();
  Jet y(n);
  std::array<double, Jet::kMaxOrder + 1> w{};
  y.coeff(0) = std::tanh(x.coeff(0));
  w[0] = 1.0 - y.coeff(0) * y.coeff(0);
  for (int k = 1; k <= n; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * x.coeff(j) * w[k - j];
    y.coeff(k) = s / k;
    double ws = 0.0;
    for (int j = 0; j <= k; ++j) ws += y.coeff(j) * y.coeff(k - j);
    w[k] = -ws;
  }
  return y;
}

Jet jet_pow_int(const Jet& x, int n) {
  assert(n >= 0);
  Jet r = Jet::constant(1.0, x.order());
  Jet base = x;
  int e = n;
  while (e > 0) {
    if (e & 1) r = r * base;
    base = base * base;
    e >>= 1;
  }
  return r;
}

}  // namespace odecert
