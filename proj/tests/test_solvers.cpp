#include <doctest.h>

#include <cmath>
#include <numbers>

#include "apc/error.hpp"
#include "apc/solvers.hpp"
#include "apc/trace.hpp"
#include "helpers.hpp"

using namespace apc;
using apc::testing::close_rel;
using apc::testing::e1_system;
using apc::testing::random_system;

namespace {

const double kSqrt2 = std::numbers::sqrt2;

MethodParams apc_with(double gamma, double eta) {
  MethodParams p;
  p.method = Method::Apc;
  p.gamma = gamma;
  p.eta = eta;
  p.rho_predicted = 0.5;
  p.t_predicted = convergence_time(0.5);
  return p;
}

Budget fixed_rounds(std::size_t n) {
  Budget b;
  b.max_iters = n;
  b.run_full_budget = true;
  return b;
}

Budget starting_at_solution(const PartitionedSystem& sys, std::size_t n) {
  Budget b = fixed_rounds(n);
  b.initial = *sys.x_star;
  return b;
}

PartitionedSystem orthogonal_blocks() {
  return partition_rows(Matrix::identity(4), Vector{1, -2, 3, 0.5}, 2, Vector{1, -2, 3, 0.5});
}

}  // namespace

TEST_CASE("init_worker starts at the minimum-norm solution") {
  Matrix a1 = Matrix::from_rows({{1, 0}});
  Vector b1{1};
  CHECK(init_worker(a1, b1).x == Vector{1, 0});

  Matrix a2 = Matrix::from_rows({{1, 1}});
  Vector b2{2};
  const Vector x2 = init_worker(a2, b2).x;
  CHECK(x2[0] == doctest::Approx(1.0));
  CHECK(x2[1] == doctest::Approx(1.0));

  Matrix id = Matrix::identity(3);
  Vector b3{4, 5, 6};
  CHECK(init_worker(id, b3).x == b3);

  Matrix dup = Matrix::from_rows({{1, 2}, {2, 4}});
  Vector bd{1, 2};
  CHECK_THROWS_AS(init_worker(dup, bd), Error);
}

TEST_CASE("worker_step_apc examples") {
  Matrix a = Matrix::from_rows({{1, 0}});
  Vector b{1};
  WorkerState w = init_worker(a, b);
  CHECK(worker_step_apc(w, Vector{1, 0}, 1.0) == Vector{1, 0});
  CHECK(worker_step_apc(w, Vector{0, 4}, 1.0) == Vector{1, 4});

  WorkerState h = init_worker(a, b);
  CHECK(worker_step_apc(h, Vector{0, 4}, 0.5) == Vector{1, 2});
}

TEST_CASE("worker iterates stay on their block's solution set") {
  const PartitionedSystem sys = random_system(6, 12, 3, 4);
  for (const Block& blk : sys.blocks) {
    WorkerState w = init_worker(blk.a, blk.b);
    Xoshiro256 rng(8);
    for (int t = 0; t < 20; ++t) {
      Vector xb(6);
      for (double& v : xb) v = 5 * rng.gaussian();
      worker_step_apc(w, xb, 0.3 + 0.08 * t);
      const Vector r = subtract(mat_vec(blk.a, w.x), blk.b);
      CHECK(norm2(r) <= 1e-10 * (1 + norm2(blk.b)));
    }
  }
}

TEST_CASE("projectors are idempotent with eigenvalues in {0, 1}") {
  const PartitionedSystem sys = random_system(5, 10, 2, 6);
  for (const Block& blk : sys.blocks) {
    const BlockProjector pr(blk.a, blk.b);
    Matrix p(5, 5);
    for (std::size_t j = 0; j < 5; ++j) {
      Vector e(5, 0.0);
      e[j] = 1.0;
      const Vector col = pr.project_nullspace(e);
      for (std::size_t i = 0; i < 5; ++i) p(i, j) = col[i];
    }
    Matrix sym = p;
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) sym(i, j) = 0.5 * (p(i, j) + p(j, i));
    for (double ev : sym_eigs(sym)) CHECK((std::abs(ev) < 1e-10 || std::abs(ev - 1) < 1e-10));

    Xoshiro256 rng(3);
    Vector v(5);
    for (double& x : v) x = rng.gaussian();
    const Vector once = pr.project_nullspace(v);
    const Vector twice = pr.project_nullspace(once);
    CHECK(norm2(subtract(once, twice)) <= 1e-12 * norm2(v));
    const Vector s1 = pr.project_solution_set(v);
    CHECK(norm2(subtract(s1, pr.project_solution_set(s1))) <= 1e-12 * norm2(v));
  }
}

TEST_CASE("master_step_apc examples") {
  const std::vector<Vector> its{{1, 0}, {0, 1}};
  MasterState avg{Vector{7, 7}, 1.0, 1.0, 0};
  CHECK(master_step_apc(avg, its) == Vector{0.5, 0.5});

  MasterState frozen{Vector{7, 7}, 1.0, 0.0, 0};
  CHECK(master_step_apc(frozen, its) == Vector{7, 7});

  MasterState over{Vector{1, 1}, 1.0, 2.0, 0};
  CHECK(master_step_apc(over, its) == Vector{0, 0});
}

TEST_CASE("run_apc on E1 at the optimum") {
  const IterationTrace t = run_apc(e1_system(), apc_with(4 - 2 * kSqrt2, 2.0), fixed_rounds(200));
  CHECK(close_rel(t.fitted_rate, kSqrt2 - 1, 0.05));
}

TEST_CASE("run_apc on orthogonal blocks converges in three rounds") {
  Budget b;
  b.max_iters = 50;
  const IterationTrace t = run_apc(orthogonal_blocks(), apc_with(1.0, 2.0), b);
  CHECK(t.status == RunStatus::Converged);
  CHECK(t.rounds() <= 3);
  CHECK(t.final_error() <= 1e-10);
}

TEST_CASE("run_apc outside the stability set diverges") {
  Budget b;
  b.max_iters = 2000;
  const IterationTrace t = run_apc(e1_system(), apc_with(1.0, 30.0), b);
  CHECK(t.status == RunStatus::Diverged);
}

TEST_CASE("engines reject mismatched parameters") {
  MethodParams p = apc_with(1, 1);
  CHECK_THROWS_AS(run_dgd(e1_system(), p, fixed_rounds(3)), Error);
  p.method = Method::Admm;
  p.xi = 0.0;
  CHECK_THROWS_AS(run_admm(e1_system(), p, fixed_rounds(3)), Error);
}

TEST_CASE("gradient engines on E1") {
  const PartitionedSystem sys = e1_system();

  MethodParams dgd;
  dgd.method = Method::Dgd;
  dgd.alpha = 2.0 / 3.0;
  CHECK(close_rel(run_dgd(sys, dgd, fixed_rounds(400)).fitted_rate, 0.745356, 0.05));

  MethodParams frozen = dgd;
  frozen.alpha = 0.0;
  const IterationTrace still = run_dgd(sys, frozen, fixed_rounds(10));
  for (double e : still.errors) CHECK(e == still.errors.front());

  const IterationTrace fixed = run_dgd(sys, dgd, starting_at_solution(sys, 10));
  for (double r : fixed.residuals) CHECK(r == 0.0);

  const SpectralSummary s = compute_x(sys);
  const MethodParams nag = dnag_params(s.lambda_ata);
  CHECK(close_rel(run_dnag(sys, nag, fixed_rounds(400)).fitted_rate, 0.569293, 0.05));
  const MethodParams hbm = dhbm_params(s.lambda_ata);
  CHECK(close_rel(run_dhbm(sys, hbm, fixed_rounds(400)).fitted_rate, 1 / std::sqrt(5.0), 0.05));

  for (const MethodParams& p : {nag, hbm}) {
    const IterationTrace at = run_method(sys, p, starting_at_solution(sys, 10));
    for (double e : at.errors) CHECK(e == 0.0);
  }
}

TEST_CASE("zero momentum reduces to gradient descent") {
  const PartitionedSystem sys = random_system(5, 10, 5, 12);
  MethodParams dgd;
  dgd.method = Method::Dgd;
  dgd.alpha = dgd_params(compute_x(sys).lambda_ata).alpha;
  const IterationTrace base = run_dgd(sys, dgd, fixed_rounds(30));

  MethodParams nag = dgd;
  nag.method = Method::Dnag;
  nag.beta = 0.0;
  CHECK(run_dnag(sys, nag, fixed_rounds(30)).errors == base.errors);

  MethodParams hbm = nag;
  hbm.method = Method::Dhbm;
  CHECK(run_dhbm(sys, hbm, fixed_rounds(30)).errors == base.errors);
}

TEST_CASE("ADMM on E1") {
  const PartitionedSystem sys = e1_system();
  MethodParams p;
  p.method = Method::Admm;
  p.xi = 1.0;
  CHECK(close_rel(run_admm(sys, p, fixed_rounds(400)).fitted_rate, 11.0 / 12.0, 0.05));
  const IterationTrace at = run_admm(sys, p, starting_at_solution(sys, 10));
  for (double e : at.errors) CHECK(e <= 1e-15);
}

TEST_CASE("ADMM step matches the direct inverse") {
  const PartitionedSystem sys = random_system(4, 4, 2, 31);
  const double xi = 0.7;
  Budget b = fixed_rounds(1);
  b.record_iterates = true;
  MethodParams p;
  p.method = Method::Admm;
  p.xi = xi;
  const IterationTrace t = run_admm(sys, p, b);
  const Vector& x0 = t.iterates[0];

  // x_i = (A_i^T A_i + xi I)^{-1} (A_i^T b_i + xi x0), averaged
  Vector expected(4, 0.0);
  for (const Block& blk : sys.blocks) {
    Matrix m = gram_cols(blk.a);
    for (std::size_t i = 0; i < 4; ++i) m(i, i) += xi;
    Vector rhs = transpose_mat_vec(blk.a, blk.b);
    axpy(xi, x0, rhs);
    axpy(0.5, solve_spd(cholesky_spd(m), rhs), expected);
  }
  CHECK(norm2(subtract(t.iterates[1], expected)) <= 1e-10 * norm2(expected));
}

TEST_CASE("Cimmino on E1 and its equivalence with APC") {
  const PartitionedSystem sys = e1_system();
  const MethodParams cim = cimmino_params(compute_x(sys).mu, 2);
  CHECK(close_rel(run_cimmino(sys, cim, fixed_rounds(300)).fitted_rate, 1 / kSqrt2, 0.05));
  const IterationTrace at = run_cimmino(sys, cim, starting_at_solution(sys, 5));
  for (double e : at.errors) CHECK(e <= 1e-15);

  Budget b = fixed_rounds(60);
  b.record_iterates = true;
  const IterationTrace c = run_cimmino(sys, cim, b);
  const IterationTrace a = run_apc(sys, apc_with(1.0, 2.0 * cim.nu), b);
  REQUIRE(c.iterates.size() == a.iterates.size());
  for (std::size_t t = 0; t < c.iterates.size(); ++t)
    CHECK(norm2(subtract(c.iterates[t], a.iterates[t])) <= 1e-12);
}

TEST_CASE("preconditioning examples") {
  const double c = std::cos(0.7), s = std::sin(0.7);
  const Matrix q = Matrix::from_rows({{c, -s, 0}, {s, c, 0}, {0, 0, 1}});
  const PartitionedSystem ortho = partition_rows(q, mat_vec(q, Vector{1, 2, 3}), 3, Vector{1, 2, 3});
  const PrecondSystem po = build_preconditioned(ortho);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(po.c(i, j) == doctest::Approx(q(i, j)).epsilon(1e-14));

  const PartitionedSystem e1 = e1_system();
  const PrecondSystem pe = build_preconditioned(e1);
  const Matrix ctc = gram_cols(pe.c);
  CHECK(ctc(0, 0) == doctest::Approx(1.5));
  CHECK(ctc(0, 1) == doctest::Approx(0.5));
  CHECK(ctc(1, 1) == doctest::Approx(0.5));
  CHECK(condition_number(sym_eigs(ctc)) == doctest::Approx(compute_x(e1).kappa_x).epsilon(1e-10));

  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const PartitionedSystem sys = random_system(6, 12, 3, seed);
    const Matrix g = gram_cols(build_preconditioned(sys).c);
    const Matrix& x = compute_x(sys).x;
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(g(i, j) - 3.0 * x(i, j)) <= 1e-10);
  }
}

TEST_CASE("preconditioned heavy ball") {
  const IterationTrace t = run_precond_dhbm(e1_system(), fixed_rounds(200));
  CHECK(t.method == Method::PrecondDhbm);
  CHECK(close_rel(t.fitted_rate, kSqrt2 - 1, 0.05));

  Budget b;
  b.max_iters = 50;
  const IterationTrace o = run_precond_dhbm(orthogonal_blocks(), b);
  CHECK(o.status == RunStatus::Converged);
  CHECK(o.rounds() <= 3);
}

TEST_CASE("default budget uses the predicted time") {
  Budget b;
  CHECK(resolve_max_iters(b, 1.2) == 120);
  CHECK(resolve_max_iters(b, 0.01) == 10);
  CHECK(resolve_max_iters(b, std::numeric_limits<double>::infinity()) == 10000);
  b.max_iters = 7;
  CHECK(resolve_max_iters(b, 1.2) == 7);
}

TEST_CASE("fit_rate examples") {
  std::vector<double> geo(60);
  for (std::size_t t = 0; t < geo.size(); ++t) geo[t] = std::pow(0.5, static_cast<double>(t));
  CHECK(std::abs(fit_rate(geo, RateWindow{.floor = 0.0}) - 0.5) <= 1e-12);
  CHECK(std::abs(fit_rate(geo) - 0.5) <= 1e-12);

  std::vector<double> wobble(60);
  for (std::size_t t = 0; t < wobble.size(); ++t)
    wobble[t] = std::pow(0.5, static_cast<double>(t)) * (1 + 0.01 * (t % 2 == 0 ? 1 : -1));
  CHECK(close_rel(fit_rate(wobble), 0.5, 0.01));

  CHECK(fit_rate(std::vector<double>(40, 3.0)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_rate(std::vector<double>(10, 1.0)), Error);

  // Stops at the rounding floor instead of fitting the flat tail.
  std::vector<double> floored(80);
  for (std::size_t t = 0; t < floored.size(); ++t) floored[t] = std::max(std::pow(0.3, static_cast<double>(t)), 1e-16);
  CHECK(close_rel(fit_rate(floored), 0.3, 1e-9));
}
