#include "odecert/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace odecert {

std::string to_string(NormP p) {
  switch (p) {
    case NormP::One: return "1";
    case NormP::Two: return "2";
    case NormP::Inf: return "inf";
  }
  return "?";
}

NormP norm_p_from_string(const std::string& s) {
  if (s == "1") return NormP::One;
  if (s == "2") return NormP::Two;
  if (s == "inf" || s == "Inf" || s == "INF") return NormP::Inf;
  throw std::invalid_argument("unknown p-norm '" + s + "' (expected 1, 2 or inf)");
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  assert(a.cols() == b.rows());
  Matrix r(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      for (int j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
    }
  }
  return r;
}

std::vector<Complex> Matrix::operator*(const std::vector<Complex>& x) const {
  assert(static_cast<int>(x.size()) == cols_);
  std::vector<Complex> y(rows_);
  for (int i = 0; i < rows_; ++i) {
    Complex s = 0.0;
    for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Matrix inverse(const Matrix& m) {
  assert(m.rows() == m.cols());
  const int n = m.rows();
  Matrix a = m;
  Matrix inv = Matrix::identity(n);

  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
  const double pivot_floor = 1e-13 * std::max(scale, 1e-300);

  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (std::abs(a(pivot, col)) < pivot_floor) {
      throw SingularMatrixError("matrix numerically singular: pivot " +
                                std::to_string(std::abs(a(pivot, col))) + " below " +
                                std::to_string(pivot_floor));
    }
    if (pivot != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(a(col, j), a(pivot, j));
        std::swap(inv(col, j), inv(pivot, j));
      }
    }
    const Complex d = 1.0 / a(col, col);
    for (int j = 0; j < n; ++j) {
      a(col, j) *= d;
      inv(col, j) *= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const Complex f = a(r, col);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

namespace {

// Largest eigenvalue of the Hermitian PSD matrix H by cyclic Jacobi.
double max_eigenvalue_hermitian(Matrix h) {
  const int n = h.rows();
  if (n == 1) return h(0, 0).real();
  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (int i = 0; i < n; ++i) {
      diag += std::abs(h(i, i));
      for (int j = i + 1; j < n; ++j) off += std::abs(h(i, j));
    }
    if (off <= 1e-12 * std::max(diag, 1e-300)) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const Complex hpq = h(p, q);
        if (std::abs(hpq) == 0.0) continue;
        // Unitary 2x2 rotation J with J^H H J diagonal in the (p,q) plane:
        // phase-rotate to make the coupling real, then a real Jacobi angle.
        const double app = h(p, p).real();
        const double aqq = h(q, q).real();
        const double apq = std::abs(hpq);
        const Complex phase = hpq / apq;
        const double theta = 0.5 * std::atan2(2.0 * apq, aqq - app);
        const double c = std::cos(theta);
        const Complex s = std::sin(theta) * phase;
        for (int k = 0; k < n; ++k) {
          const Complex hkp = h(k, p);
          const Complex hkq = h(k, q);
          h(k, p) = c * hkp - std::conj(s) * hkq;
          h(k, q) = s * hkp + c * hkq;
        }
        for (int k = 0; k < n; ++k) {
          const Complex hpk = h(p, k);
          const Complex hqk = h(q, k);
          h(p, k) = c * hpk - s * hqk;
          h(q, k) = std::conj(s) * hpk + c * hqk;
        }
      }
    }
  }
  double lam = 0.0;
  for (int i = 0; i < n; ++i) lam = std::max(lam, h(i, i).real());
  return lam;
}

}  // namespace

double induced_norm(const Matrix& m, NormP p) {
  const int rows = m.rows(), cols = m.cols();
  switch (p) {
    case NormP::One: {
      double best = 0.0;
      for (int j = 0; j < cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < rows; ++i) s += std::abs(m(i, j));
        best = std::max(best, s);
      }
      return best;
    }
    case NormP::Inf: {
      double best = 0.0;
      for (int i = 0; i < rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < cols; ++j) s += std::abs(m(i, j));
        best = std::max(best, s);
      }
      return best;
    }
    case NormP::Two: {
      Matrix h(cols, cols);
      for (int i = 0; i < cols; ++i) {
        for (int j = 0; j < cols; ++j) {
          Complex s = 0.0;
          for (int k = 0; k < rows; ++k) s += std::conj(m(k, i)) * m(k, j);
          h(i, j) = s;
        }
      }
      return std::sqrt(std::max(0.0, max_eigenvalue_hermitian(h)));
    }
  }
  return 0.0;
}

double cond(const Matrix& m, NormP p) {
  return induced_norm(m, p) * induced_norm(inverse(m), p);
}

double vector_norm(const std::vector<double>& v, NormP p) {
  switch (p) {
    case NormP::One: {
      double s = 0.0;
      for (double x : v) s += std::abs(x);
      return s;
    }
    case NormP::Two: {
      double s = 0.0;
      for (double x : v) s += x * x;
      return std::sqrt(s);
    }
    case NormP::Inf: {
      double s = 0.0;
      for (double x : v) s = std::max(s, std::abs(x));
      return s;
    }
  }
  return 0.0;
}

double vector_norm(const std::vector<Complex>& v, NormP p) {
  switch (p) {
    case NormP::One: {
      double s = 0.0;
      for (const Complex& x : v) s += std::abs(x);
      return s;
    }
    case NormP::Two: {
      double s = 0.0;
      for (const Complex& x : v) s += std::norm(x);
      return std::sqrt(s);
    }
    case NormP::Inf: {
      double s = 0.0;
      for (const Complex& x : v) s = std::max(s, std::abs(x));
      return s;
    }
  }
  return 0.0;
}

}  // namespace odecert
