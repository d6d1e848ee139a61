#ifndef ODECERT_LINALG_HPP
#define ODECERT_LINALG_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace odecert {

using Complex = std::complex<double>;

/// Vector p-norm selector shared by the residual and bound modules.
enum class NormP { One, Two, Inf };

std::string to_string(NormP p);
NormP norm_p_from_string(const std::string& s);

/// Dense row-major complex matrix. Sized for the bound engine's needs
/// (modal matrices of small ODE systems, n <= 16); nothing here is tuned
/// for large n.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}

  static Matrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  Complex& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  const Complex& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  std::vector<Complex> operator*(const std::vector<Complex>& x) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Complex> a_;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inverse by Gauss-Jordan elimination with partial pivoting. Throws
/// SingularMatrixError when a pivot falls below 1e-13 * matrix scale.
Matrix inverse(const Matrix& m);

/// Induced operator p-norm. One: max column abs sum; Inf: max row abs sum;
/// Two: largest singular value, computed from the Hermitian matrix M^H M by
/// cyclic Jacobi rotations driven to relative tolerance 1e-12.
double induced_norm(const Matrix& m, NormP p);

double cond(const Matrix& m, NormP p);

double vector_norm(const std::vector<double>& v, NormP p);
double vector_norm(const std::vector<Complex>& v, NormP p);

}  // namespace odecert

#endif  // ODECERT_LINALG_HPP
