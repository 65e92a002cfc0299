#include "apc/linalg.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "apc/error.hpp"

namespace apc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::DimensionMismatch, what);
}

void require_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::NotSymmetric,
                "matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  const double scale = frobenius_norm(m);
  if (asymmetry(m) > 1e-12 * std::max(scale, std::numeric_limits<double>::min())) {
    throw Error(ErrorCode::NotSymmetric, "asymmetry exceeds 1e-12 relative");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    require(row.size() == c, "ragged initializer");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix Matrix::row_block(std::size_t first, std::size_t count) const {
  require(first + count <= rows_, "row block out of range");
  Matrix out(count, cols_);
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(first * cols_), count * cols_,
              out.data_.begin());
  return out;
}

// ---------------------------------------------------------------------------
// Vectors

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) {
  // Scaled accumulation so huge diverging iterates still yield a finite norm.
  double scale = 0.0;
  double ssq = 1.0;
  for (double x : v) {
    if (x == 0.0) continue;
    const double ax = std::abs(x);
    if (!std::isfinite(ax)) return ax;
    if (scale < ax) {
      ssq = 1.0 + ssq * (scale / ax) * (scale / ax);
      scale = ax;
    } else {
      ssq += (ax / scale) * (ax / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "subtract: length mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

// ---------------------------------------------------------------------------
// Products

Vector mat_vec(const Matrix& m, std::span<const double> v) {
  require(m.cols() == v.size(), "mat_vec: " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()) + " times " +
                                    std::to_string(v.size()));
  Vector out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * v[j];
    out[i] = s;
  }
  return out;
}

Vector transpose_mat_vec(const Matrix& m, std::span<const double> v) {
  require(m.rows() == v.size(), "transpose_mat_vec: " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()) + " transposed times " +
                                    std::to_string(v.size()));
  Vector out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    const double vi = v[i];
    for (std::size_t j = 0; j < row.size(); ++j) out[j] += row[j] * vi;
  }
  return out;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "multiply: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const auto brow = b.row(k);
      for (std::size_t j = 0; j < brow.size(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  return out;
}

Matrix gram_rows(const Matrix& a) {
  Matrix out(a.rows(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double s = dot(a.row(i), a.row(j));
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return out;
}

Matrix gram_cols(const Matrix& a) {
  const std::size_t n = a.cols();
  Matrix out(n, n);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    for (std::size_t i = 0; i < n; ++i) {
      const double ri = row[i];
      if (ri == 0.0) continue;
      auto orow = out.row(i);
      for (std::size_t j = i; j < n; ++j) orow[j] += ri * row[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) out(i, j) = out(j, i);
  return out;
}

double frobenius_norm(const Matrix& m) { return norm2(m.data()); }

double trace(const Matrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) s += m(i, i);
  return s;
}

double asymmetry(const Matrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) worst = std::max(worst, std::abs(m(i, j) - m(j, i)));
  return worst;
}

// ---------------------------------------------------------------------------
// Cholesky

SpdFactor cholesky_spd(const Matrix& m) {
  require_symmetric(m);
  const std::size_t n = m.rows();
  const double floor = static_cast<double>(n) * kEps * frobenius_norm(m);
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > floor)) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "pivot " + std::to_string(j) + " is " + std::to_string(d));
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return SpdFactor(std::move(l));
}

void solve_spd_inplace(const SpdFactor& f, std::span<double> v) {
  const std::size_t n = f.dimension();
  require(v.size() == n, "solve_spd: factor is " + std::to_string(n) + ", vector is " +
                             std::to_string(v.size()));
  const Matrix& l = f.lower();
  for (std::size_t i = 0; i < n; ++i) {
    double s = v[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * v[k];
    v[i] = s / l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = v[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * v[k];
    v[i] = s / l(i, i);
  }
}

Vector solve_spd(const SpdFactor& f, std::span<const double> v) {
  Vector out(v.begin(), v.end());
  solve_spd_inplace(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi

namespace {

SymEigen jacobi(const Matrix& m, bool want_vectors) {
  require_symmetric(m);
  const std::size_t n = m.rows();
  Matrix a = m;
  Matrix v = want_vectors ? Matrix::identity(n) : Matrix();
  // Entries below this are treated as converged even when the adjacent
  // diagonal is tiny (singular input).
  const double abs_floor = 1e-3 * kEps * frobenius_norm(m);

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double app = a(p, p);
        const double aqq = a(q, q);
        if (std::abs(apq) <= abs_floor ||
            std::abs(apq) <= kEps * std::sqrt(std::abs(app) * std::abs(aqq))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        rotated = true;
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        auto rp = a.row(p);
        auto rq = a.row(q);
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double g = rp[r];
          const double h = rq[r];
          const double np = g - s * (h + g * tau);
          const double nq = h + s * (g - h * tau);
          rp[r] = np;
          rq[r] = nq;
          a(r, p) = np;
          a(r, q) = nq;
        }
        if (want_vectors) {
          for (std::size_t r = 0; r < n; ++r) {
            const double g = v(r, p);
            const double h = v(r, q);
            v(r, p) = g - s * (h + g * tau);
            v(r, q) = h + s * (g - h * tau);
          }
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  SymEigen out;
  out.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.values[k] = a(order[k], order[k]);
  if (want_vectors) {
    out.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

}  // namespace

Vector sym_eigs(const Matrix& m) { return jacobi(m, false).values; }

SymEigen sym_eigen_decompose(const Matrix& m) { return jacobi(m, true); }

// ---------------------------------------------------------------------------
// Quadratics

ComplexPair quadratic_roots(double b1, double c0) {
  const double disc = b1 * b1 - 4.0 * c0;
  if (disc >= 0.0) {
    // Cancellation-free pair: the larger root from the formula, the other by Vieta.
    const double q = -0.5 * (b1 + std::copysign(std::sqrt(disc), b1));
    if (q == 0.0) return {{0.0, 0.0}, {0.0, 0.0}};
    return {{q, 0.0}, {c0 / q, 0.0}};
  }
  const double re = -0.5 * b1;
  const double im = 0.5 * std::sqrt(-disc);
  return {{re, im}, {re, -im}};
}

std::pair<double, double> quadratic_root_magnitudes(double b1, double c0) {
  const double disc = b1 * b1 - 4.0 * c0;
  const double slack = 16.0 * kEps * (b1 * b1 + 4.0 * std::abs(c0));
  if (std::abs(disc) <= slack) {
    const double r = 0.5 * std::abs(b1);
    return {r, r};
  }
  if (disc < 0.0) {
    const double r = std::sqrt(std::abs(c0));
    return {r, r};
  }
  const ComplexPair roots = quadratic_roots(b1, c0);
  const double a = std::abs(roots.first);
  const double b = std::abs(roots.second);
  return {std::max(a, b), std::min(a, b)};
}

double quadratic_radius(double b1, double c0) { return quadratic_root_magnitudes(b1, c0).first; }

}  // namespace apc
