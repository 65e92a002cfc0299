#include <doctest.h>

#include <cmath>

#include "apc/error.hpp"
#include "apc/ingest.hpp"
#include "apc/linalg.hpp"

using namespace apc;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an apc::Error");
  return ErrorCode::Usage;
}

}  // namespace

TEST_CASE("cholesky of a hand-checkable 2x2") {
  const SpdFactor f = cholesky_spd(Matrix::from_rows({{4, 2}, {2, 3}}));
  const Matrix& l = f.lower();
  CHECK(l(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(l(0, 1) == 0.0);
  CHECK(l(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(l(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("cholesky of the identity is the identity") {
  CHECK(cholesky_spd(Matrix::identity(3)).lower() == Matrix::identity(3));
}

TEST_CASE("cholesky rejects indefinite and asymmetric input") {
  CHECK(code_of([] { cholesky_spd(Matrix::from_rows({{1, 2}, {2, 1}})); }) == ErrorCode::NotPositiveDefinite);
  CHECK(code_of([] { cholesky_spd(Matrix::from_rows({{2, 1}, {0, 2}})); }) == ErrorCode::NotSymmetric);
}

TEST_CASE("solve_spd examples") {
  const Vector v{3.5, -1.25, 2.0};
  CHECK(solve_spd(cholesky_spd(Matrix::identity(3)), v) == v);

  const Vector w = solve_spd(cholesky_spd(Matrix::from_rows({{2, 0}, {0, 4}})), Vector{2, 4});
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(w[1] == doctest::Approx(1.0));

  const Vector u = solve_spd(cholesky_spd(Matrix::from_rows({{4, 2}, {2, 3}})), Vector{6, 5});
  CHECK(u[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(u[1] == doctest::Approx(1.0).epsilon(1e-14));

  CHECK(code_of([] { solve_spd(cholesky_spd(Matrix::identity(2)), Vector{1, 2, 3}); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("solve_spd residual on random SPD matrices") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t n = 2 + seed % 9;
    const SyntheticSystem s = synth_gaussian(n, n + 3, 0.0, seed);
    const Matrix m = gram_cols(s.a);
    const Vector v = s.x_star;
    const Vector w = solve_spd(cholesky_spd(m), v);
    const Vector r = subtract(mat_vec(m, w), v);
    CHECK(norm2(r) <= 1e-10 * norm2(v));
  }
}

TEST_CASE("sym_eigs examples") {
  Matrix d(3, 3);
  d(0, 0) = 3;
  d(1, 1) = 1;
  d(2, 2) = 2;
  CHECK(sym_eigs(d) == Vector{1, 2, 3});

  const Vector x = sym_eigs(Matrix::from_rows({{0.75, 0.25}, {0.25, 0.25}}));
  CHECK(x[0] == doctest::Approx(0.5 - std::sqrt(0.125)).epsilon(1e-13));
  CHECK(x[1] == doctest::Approx(0.5 + std::sqrt(0.125)).epsilon(1e-13));

  const Vector g = sym_eigs(Matrix::from_rows({{2, 1}, {1, 1}}));
  CHECK(g[0] == doctest::Approx((3 - std::sqrt(5.0)) / 2).epsilon(1e-13));
  CHECK(g[1] == doctest::Approx((3 + std::sqrt(5.0)) / 2).epsilon(1e-13));

  CHECK(code_of([] { sym_eigs(Matrix::from_rows({{1, 2}, {0, 1}})); }) == ErrorCode::NotSymmetric);
}

TEST_CASE("sym_eigs preserves the trace and diagonalizes") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::size_t n = 3 + seed;
    const Matrix m = gram_cols(synth_gaussian(n, 2 * n, 0.5, seed).a);
    const SymEigen e = sym_eigen_decompose(m);
    double sum = 0.0;
    for (double v : e.values) sum += v;
    CHECK(std::abs(sum - trace(m)) <= 1e-8 * std::abs(trace(m)));
    for (std::size_t k = 1; k < n; ++k) CHECK(e.values[k - 1] <= e.values[k]);
    // M v_k = lambda_k v_k
    for (std::size_t k = 0; k < n; ++k) {
      Vector v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = e.vectors(i, k);
      Vector mv = mat_vec(m, v);
      axpy(-e.values[k], v, mv);
      CHECK(norm2(mv) <= 1e-10 * frobenius_norm(m));
    }
  }
}

TEST_CASE("quadratic_roots examples") {
  ComplexPair r = quadratic_roots(0.0, -1.0);
  CHECK(r.real());
  CHECK(std::max(r.first.real(), r.second.real()) == doctest::Approx(1.0));
  CHECK(std::min(r.first.real(), r.second.real()) == doctest::Approx(-1.0));

  r = quadratic_roots(-0.75, 0.0);
  CHECK(std::max(r.first.real(), r.second.real()) == doctest::Approx(0.75));
  CHECK(std::min(r.first.real(), r.second.real()) == doctest::Approx(0.0));

  r = quadratic_roots(0.0, 0.25);
  CHECK_FALSE(r.real());
  CHECK(std::abs(r.first.imag()) == doctest::Approx(0.5));
  CHECK(r.first.imag() == doctest::Approx(-r.second.imag()));
  CHECK(std::abs(r.first) == doctest::Approx(0.5));
  CHECK(std::abs(r.second) == doctest::Approx(0.5));
}

TEST_CASE("quadratic_roots satisfies Vieta's identities") {
  Xoshiro256 rng(99);
  for (int k = 0; k < 500; ++k) {
    const double b1 = 6.0 * (rng.uniform_open0() - 0.5);
    const double c0 = 6.0 * (rng.uniform_open0() - 0.5);
    const ComplexPair r = quadratic_roots(b1, c0);
    const auto sum = r.first + r.second;
    const auto prod = r.first * r.second;
    CHECK(std::abs(sum + b1) <= 1e-12 * std::max(1.0, std::abs(b1)));
    CHECK(std::abs(prod - c0) <= 1e-12 * std::max(1.0, std::abs(c0)));
  }
}

TEST_CASE("mat_vec and transpose_mat_vec examples") {
  const Vector v{0.5, -2.0, 7.0};
  CHECK(mat_vec(Matrix::identity(3), v) == v);
  const Matrix a = Matrix::from_rows({{1, 0}, {1, 1}});
  CHECK(mat_vec(a, Vector{1, 1}) == Vector{1, 2});
  CHECK(transpose_mat_vec(a, Vector{1, 2}) == Vector{3, 2});
  CHECK(code_of([&] { mat_vec(a, v); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { transpose_mat_vec(a, v); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("gram products") {
  const Matrix a = Matrix::from_rows({{1, 2, 0}, {0, 1, 3}});
  CHECK(gram_rows(a) == Matrix::from_rows({{5, 2}, {2, 10}}));
  CHECK(gram_cols(a) == multiply(transpose(a), a));
}
