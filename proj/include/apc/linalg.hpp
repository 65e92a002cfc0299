#pragma once

// Dense real linear algebra kernels.
//
// Everything here is small-scale and dense: the systems handled by this
// toolkit have n in the low thousands at most, so matrices are stored
// row-major in a single contiguous buffer.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace apc {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  // Rows [first, first + count) as a new matrix.
  Matrix row_block(std::size_t first, std::size_t count) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Vector helpers

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
Vector subtract(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Matrix products

Vector mat_vec(const Matrix& m, std::span<const double> v);
Vector transpose_mat_vec(const Matrix& m, std::span<const double> v);
Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
// A * A^T
Matrix gram_rows(const Matrix& a);
// A^T * A
Matrix gram_cols(const Matrix& a);

double frobenius_norm(const Matrix& m);
double trace(const Matrix& m);
// max |m(i,j) - m(j,i)|, or +inf for a non-square matrix
double asymmetry(const Matrix& m);

// ---------------------------------------------------------------------------
// Cholesky

// Lower-triangular factor L with L L^T = M.
class SpdFactor {
 public:
  SpdFactor() = default;
  explicit SpdFactor(Matrix lower) : lower_(std::move(lower)) {}

  std::size_t dimension() const noexcept { return lower_.rows(); }
  const Matrix& lower() const noexcept { return lower_; }

 private:
  Matrix lower_;
};

// Throws NotSymmetric or NotPositiveDefinite (pivot <= n * eps * ||M||_F).
SpdFactor cholesky_spd(const Matrix& m);
Vector solve_spd(const SpdFactor& f, std::span<const double> v);
// Solves in place; v.size() must equal f.dimension().
void solve_spd_inplace(const SpdFactor& f, std::span<double> v);

// ---------------------------------------------------------------------------
// Symmetric eigenproblems (cyclic Jacobi)

struct SymEigen {
  Vector values;   // ascending
  Matrix vectors;  // column k is the eigenvector for values[k]
};

// Eigenvalues of a symmetric matrix in ascending order.
Vector sym_eigs(const Matrix& m);
SymEigen sym_eigen_decompose(const Matrix& m);

// ---------------------------------------------------------------------------
// Quadratics

// Roots of lambda^2 + b1 * lambda + c0 with real coefficients.
struct ComplexPair {
  std::complex<double> first;
  std::complex<double> second;

  double max_magnitude() const { return std::max(std::abs(first), std::abs(second)); }
  bool real() const { return first.imag() == 0.0 && second.imag() == 0.0; }
};

ComplexPair quadratic_roots(double b1, double c0);

// Root magnitudes of lambda^2 + b1 * lambda + c0, larger first. A
// discriminant that is zero up to rounding is treated as an exact double
// root, so the magnitudes do not pick up the sqrt(eps) splitting that
// quadratic_roots exhibits there.
std::pair<double, double> quadratic_root_magnitudes(double b1, double c0);

// Largest root magnitude of lambda^2 + b1 * lambda + c0, same conventions.
double quadratic_radius(double b1, double c0);

}  // namespace apc
