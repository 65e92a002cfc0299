#include "apc/solvers.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "apc/error.hpp"
#include "apc/format.hpp"

namespace apc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sum of the responses in ascending block order.
Vector sum_responses(std::span<const Vector> responses) {
  Vector s(responses.front().size(), 0.0);
  for (const Vector& r : responses)
    for (std::size_t j = 0; j < s.size(); ++j) s[j] += r[j];
  return s;
}

Vector initial_estimate(const PartitionedSystem& sys, const std::vector<BlockProjector>& blocks,
                        const Budget& budget) {
  if (budget.initial) {
    if (budget.initial->size() != sys.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "initial point has " + std::to_string(budget.initial->size()) +
                                                    " entries, need " + std::to_string(sys.cols()));
    }
    return *budget.initial;
  }
  if (budget.zero_init) return Vector(sys.cols(), 0.0);
  Vector s(sys.cols(), 0.0);
  for (const auto& blk : blocks) {
    const Vector x0 = blk.min_norm_solution();
    for (std::size_t j = 0; j < s.size(); ++j) s[j] += x0[j];
  }
  const double inv_m = 1.0 / static_cast<double>(blocks.size());
  for (double& v : s) v *= inv_m;
  return s;
}

std::vector<BlockProjector> projectors(const PartitionedSystem& sys) {
  std::vector<BlockProjector> out;
  out.reserve(sys.blocks.size());
  for (std::size_t i = 0; i < sys.blocks.size(); ++i) out.emplace_back(sys.blocks[i].a, sys.blocks[i].b, i);
  return out;
}

// --- APC -------------------------------------------------------------------

class ApcWorkerProgram final : public WorkerProgram {
 public:
  ApcWorkerProgram(WorkerState state, double gamma) : state_(std::move(state)), gamma_(gamma) {}
  Vector respond(std::span<const double> x_bar) override { return worker_step_apc(state_, x_bar, gamma_); }

 private:
  WorkerState state_;
  double gamma_;
};

class ApcMasterProgram final : public MasterProgram {
 public:
  explicit ApcMasterProgram(MasterState state) : state_(std::move(state)) {}
  const Vector& broadcast() const override { return state_.x_bar; }
  void absorb(std::span<const Vector> responses) override { master_step_apc(state_, responses); }
  const Vector& estimate() const override { return state_.x_bar; }

 private:
  MasterState state_;
};

// --- Gradient family ---------------------------------------------------------

class GradientWorkerProgram final : public WorkerProgram {
 public:
  explicit GradientWorkerProgram(const Block& blk) : blk_(blk) {}
  // A_i^T (A_i x - b_i)
  Vector respond(std::span<const double> x) override {
    Vector r = mat_vec(blk_.a, x);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] -= blk_.b[k];
    return transpose_mat_vec(blk_.a, r);
  }

 private:
  const Block& blk_;
};

class DgdMasterProgram final : public MasterProgram {
 public:
  DgdMasterProgram(Vector x0, double alpha) : x_(std::move(x0)), alpha_(alpha) {}
  const Vector& broadcast() const override { return x_; }
  void absorb(std::span<const Vector> responses) override {
    const Vector g = sum_responses(responses);
    for (std::size_t j = 0; j < x_.size(); ++j) x_[j] -= alpha_ * g[j];
  }
  const Vector& estimate() const override { return x_; }

 private:
  Vector x_;
  double alpha_;
};

class DnagMasterProgram final : public MasterProgram {
 public:
  DnagMasterProgram(Vector x0, double alpha, double beta)
      : x_(x0), y_(std::move(x0)), alpha_(alpha), beta_(beta) {}
  const Vector& broadcast() const override { return x_; }
  void absorb(std::span<const Vector> responses) override {
    const Vector g = sum_responses(responses);
    for (std::size_t j = 0; j < x_.size(); ++j) {
      const double y_next = x_[j] - alpha_ * g[j];
      x_[j] = (1.0 + beta_) * y_next - beta_ * y_[j];
      y_[j] = y_next;
    }
  }
  const Vector& estimate() const override { return x_; }

 private:
  Vector x_;
  Vector y_;
  double alpha_;
  double beta_;
};

class DhbmMasterProgram final : public MasterProgram {
 public:
  DhbmMasterProgram(Vector x0, double alpha, double beta)
      : x_(std::move(x0)), z_(x_.size(), 0.0), alpha_(alpha), beta_(beta) {}
  const Vector& broadcast() const override { return x_; }
  void absorb(std::span<const Vector> responses) override {
    const Vector g = sum_responses(responses);
    for (std::size_t j = 0; j < x_.size(); ++j) {
      z_[j] = beta_ * z_[j] + g[j];
      x_[j] -= alpha_ * z_[j];
    }
  }
  const Vector& estimate() const override { return x_; }

 private:
  Vector x_;
  Vector z_;
  double alpha_;
  double beta_;
};

// --- ADMM --------------------------------------------------------------------

class AdmmWorkerProgram final : public WorkerProgram {
 public:
  AdmmWorkerProgram(const Block& blk, double xi, bool dual_updates)
      : blk_(blk), xi_(xi), dual_updates_(dual_updates), y_(blk.a.cols(), 0.0) {
    Matrix k = gram_rows(blk.a);
    for (std::size_t i = 0; i < k.rows(); ++i) k(i, i) += xi;
    factor_ = cholesky_spd(k);
  }

  Vector respond(std::span<const double> x_bar) override {
    if (!dual_updates_) {
      // (A^T A + xi I)^{-1} (A^T b + xi x_bar) = x_bar + A^T (A A^T + xi I)^{-1} (b - A x_bar)
      Vector r = mat_vec(blk_.a, x_bar);
      for (std::size_t k = 0; k < r.size(); ++k) r[k] = blk_.b[k] - r[k];
      solve_spd_inplace(factor_, r);
      Vector x = transpose_mat_vec(blk_.a, r);
      for (std::size_t j = 0; j < x.size(); ++j) x[j] += x_bar[j];
      return x;
    }
    // y_i(t) = y_i(t-1) + xi (x_i(t) - x_bar(t)) now that x_bar(t) is known.
    if (!last_x_.empty())
      for (std::size_t j = 0; j < y_.size(); ++j) y_[j] += xi_ * (last_x_[j] - x_bar[j]);
    Vector u = transpose_mat_vec(blk_.a, blk_.b);
    for (std::size_t j = 0; j < u.size(); ++j) u[j] += xi_ * x_bar[j] - y_[j];
    // (A^T A + xi I)^{-1} u = (u - A^T (A A^T + xi I)^{-1} A u) / xi
    Vector w = mat_vec(blk_.a, u);
    solve_spd_inplace(factor_, w);
    const Vector corr = transpose_mat_vec(blk_.a, w);
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = (u[j] - corr[j]) / xi_;
    last_x_ = u;
    return u;
  }

 private:
  const Block& blk_;
  double xi_;
  bool dual_updates_;
  SpdFactor factor_;
  Vector y_;
  Vector last_x_;
};

class AveragingMasterProgram final : public MasterProgram {
 public:
  explicit AveragingMasterProgram(Vector x0) : x_(std::move(x0)) {}
  const Vector& broadcast() const override { return x_; }
  void absorb(std::span<const Vector> responses) override {
    const Vector s = sum_responses(responses);
    const double inv_m = 1.0 / static_cast<double>(responses.size());
    for (std::size_t j = 0; j < x_.size(); ++j) x_[j] = inv_m * s[j];
  }
  const Vector& estimate() const override { return x_; }

 private:
  Vector x_;
};

// --- Block Cimmino -------------------------------------------------------------

class CimminoWorkerProgram final : public WorkerProgram {
 public:
  explicit CimminoWorkerProgram(BlockProjector projector) : projector_(std::move(projector)) {}
  // r_i = A_i^+ (b_i - A_i x_bar)
  Vector respond(std::span<const double> x_bar) override {
    Vector r = mat_vec(projector_.a(), x_bar);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = projector_.b()[k] - r[k];
    return projector_.pseudo_inverse(r);
  }

 private:
  BlockProjector projector_;
};

class CimminoMasterProgram final : public MasterProgram {
 public:
  CimminoMasterProgram(Vector x0, double nu) : x_(std::move(x0)), nu_(nu) {}
  const Vector& broadcast() const override { return x_; }
  void absorb(std::span<const Vector> responses) override {
    const Vector s = sum_responses(responses);
    for (std::size_t j = 0; j < x_.size(); ++j) x_[j] += nu_ * s[j];
  }
  const Vector& estimate() const override { return x_; }

 private:
  Vector x_;
  double nu_;
};

IterationTrace run_sequential(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget) {
  DistributedProgram prog = make_program(sys, params, budget);
  auto round = [&](std::span<const double> broadcast, std::vector<Vector>& responses) {
    for (std::size_t i = 0; i < prog.workers.size(); ++i) responses[i] = prog.workers[i]->respond(broadcast);
  };
  return drive(sys, *prog.master, prog.workers.size(), params, budget, round);
}

void require_method(const MethodParams& params, std::initializer_list<Method> allowed, const char* engine) {
  for (Method m : allowed)
    if (params.method == m) return;
  throw Error(ErrorCode::Usage,
              std::string(engine) + " cannot run parameters tagged " + std::string(to_string(params.method)));
}

}  // namespace

// ---------------------------------------------------------------------------
// BlockProjector

BlockProjector::BlockProjector(const Matrix& a, const Vector& b, std::size_t index)
    : a_(&a), b_(&b), index_(index) {
  if (a.rows() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "block " + std::to_string(index) + ": A_i has " +
                                                  std::to_string(a.rows()) + " rows, b_i has " +
                                                  std::to_string(b.size()));
  }
  try {
    factor_ = cholesky_spd(gram_rows(a));
  } catch (const Error& e) {
    throw Error(ErrorCode::RankDeficientBlock, "block " + std::to_string(index) + ": " + e.what());
  }
}

Vector BlockProjector::pseudo_inverse(std::span<const double> v) const {
  return transpose_mat_vec(*a_, solve_spd(factor_, v));
}

Vector BlockProjector::project_nullspace(std::span<const double> v) const {
  const Vector u = pseudo_inverse(mat_vec(*a_, v));
  return subtract(v, u);
}

Vector BlockProjector::project_solution_set(std::span<const double> x) const {
  Vector r = mat_vec(*a_, x);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = (*b_)[k] - r[k];
  Vector out = pseudo_inverse(r);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += x[j];
  return out;
}

Vector BlockProjector::min_norm_solution() const { return pseudo_inverse(*b_); }

// ---------------------------------------------------------------------------
// APC steps

WorkerState init_worker(const Matrix& a, const Vector& b, std::size_t index) {
  BlockProjector projector(a, b, index);
  Vector x0 = projector.min_norm_solution();
  return WorkerState{std::move(projector), std::move(x0)};
}

const Vector& worker_step_apc(WorkerState& w, std::span<const double> x_bar, double gamma) {
  if (x_bar.size() != w.x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "broadcast has " + std::to_string(x_bar.size()) +
                                                  " entries, worker holds " + std::to_string(w.x.size()));
  }
  const Vector v = subtract(x_bar, w.x);
  const Vector pv = w.projector.project_nullspace(v);
  for (std::size_t j = 0; j < w.x.size(); ++j) w.x[j] += gamma * pv[j];
  return w.x;
}

const Vector& master_step_apc(MasterState& ms, std::span<const Vector> worker_iterates) {
  if (worker_iterates.empty()) throw Error(ErrorCode::DimensionMismatch, "no worker iterates");
  const Vector s = sum_responses(worker_iterates);
  const double scale = ms.eta / static_cast<double>(worker_iterates.size());
  const double keep = 1.0 - ms.eta;
  for (std::size_t j = 0; j < ms.x_bar.size(); ++j) ms.x_bar[j] = scale * s[j] + keep * ms.x_bar[j];
  ++ms.t;
  return ms.x_bar;
}

// ---------------------------------------------------------------------------
// Programs

DistributedProgram make_program(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget) {
  DistributedProgram prog;
  const PartitionedSystem* target = &sys;
  if (params.method == Method::PrecondDhbm) {
    prog.owned_system = std::make_shared<const PartitionedSystem>(build_preconditioned(sys).system);
    target = prog.owned_system.get();
  }
  std::vector<BlockProjector> blocks = projectors(*target);
  Vector x0 = initial_estimate(*target, blocks, budget);

  switch (params.method) {
    case Method::Apc:
    case Method::Consensus: {
      const double gamma = params.method == Method::Consensus ? 1.0 : params.gamma;
      const double eta = params.method == Method::Consensus ? 1.0 : params.eta;
      for (auto& blk : blocks) {
        Vector xi = budget.initial ? blk.project_solution_set(x0) : blk.min_norm_solution();
        prog.workers.push_back(
            std::make_unique<ApcWorkerProgram>(WorkerState{std::move(blk), std::move(xi)}, gamma));
      }
      prog.master = std::make_unique<ApcMasterProgram>(MasterState{std::move(x0), gamma, eta, 0});
      break;
    }
    case Method::Dgd:
    case Method::Dnag:
    case Method::Dhbm:
    case Method::PrecondDhbm:
      for (const auto& blk : target->blocks) prog.workers.push_back(std::make_unique<GradientWorkerProgram>(blk));
      if (params.method == Method::Dgd) {
        prog.master = std::make_unique<DgdMasterProgram>(std::move(x0), params.alpha);
      } else if (params.method == Method::Dnag) {
        prog.master = std::make_unique<DnagMasterProgram>(std::move(x0), params.alpha, params.beta);
      } else {
        prog.master = std::make_unique<DhbmMasterProgram>(std::move(x0), params.alpha, params.beta);
      }
      break;
    case Method::Admm:
      if (!(params.xi > 0.0)) throw Error(ErrorCode::OutOfDomain, "ADMM needs xi > 0");
      for (const auto& blk : target->blocks)
        prog.workers.push_back(std::make_unique<AdmmWorkerProgram>(blk, params.xi, budget.admm_dual_updates));
      prog.master = std::make_unique<AveragingMasterProgram>(std::move(x0));
      break;
    case Method::Cimmino:
      for (auto& blk : blocks) prog.workers.push_back(std::make_unique<CimminoWorkerProgram>(std::move(blk)));
      prog.master = std::make_unique<CimminoMasterProgram>(std::move(x0), params.nu);
      break;
  }
  return prog;
}

std::size_t resolve_max_iters(const Budget& budget, double t_predicted) {
  std::size_t n = budget.max_iters;
  if (n == 0) {
    if (!std::isfinite(t_predicted) || 100.0 * t_predicted > 1e15) {
      n = std::isfinite(t_predicted) ? std::numeric_limits<std::size_t>::max() : 10000;
    } else {
      n = std::max<std::size_t>(10, static_cast<std::size_t>(std::ceil(100.0 * t_predicted)));
    }
  }
  if (budget.iteration_cap > 0) n = std::min(n, budget.iteration_cap);
  return n;
}

IterationTrace drive(const PartitionedSystem& sys, MasterProgram& master, std::size_t workers,
                     const MethodParams& params, const Budget& budget, const RoundExecutor& round) {
  IterationTrace trace;
  trace.method = params.method;
  trace.params = params;
  trace.t_predicted = params.t_predicted;
  trace.error_is_residual = !sys.x_star.has_value();

  const double b_norm = norm2(sys.b);
  const double x_norm = sys.x_star ? norm2(*sys.x_star) : 0.0;
  auto record = [&](const Vector& est) {
    const Vector r = subtract(mat_vec(sys.a, est), sys.b);
    const double residual = b_norm > 0.0 ? norm2(r) / b_norm : norm2(r);
    double error = residual;
    if (sys.x_star) {
      const double diff = norm2(subtract(est, *sys.x_star));
      error = x_norm > 0.0 ? diff / x_norm : diff;
    }
    trace.errors.push_back(error);
    trace.residuals.push_back(residual);
    if (budget.record_iterates) trace.iterates.push_back(est);
    return error;
  };

  const std::size_t max_iters = resolve_max_iters(budget, params.t_predicted);
  const double e0 = record(master.estimate());
  const double blowup = 1e12 * (e0 > 0.0 ? e0 : 1.0);
  trace.status = RunStatus::MaxIterations;
  if (!budget.run_full_budget && e0 <= budget.tol) {
    trace.status = RunStatus::Converged;
  } else {
    std::vector<Vector> responses(workers);
    for (std::size_t t = 1; t <= max_iters; ++t) {
      round(master.broadcast(), responses);
      master.absorb(responses);
      const double e = record(master.estimate());
      if (!std::isfinite(e) || e > blowup) {
        trace.status = RunStatus::Diverged;
        break;
      }
      if (!budget.run_full_budget && e <= budget.tol) {
        trace.status = RunStatus::Converged;
        break;
      }
    }
  }

  try {
    trace.fitted_rate = fit_rate(trace.errors);
  } catch (const Error&) {
    trace.fitted_rate = kNaN;
  }
  trace.t_empirical = std::isnan(trace.fitted_rate) ? kNaN : convergence_time(trace.fitted_rate);
  return trace;
}

// ---------------------------------------------------------------------------
// Engines

IterationTrace run_method(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget) {
  return run_sequential(sys, params, budget);
}

IterationTrace run_apc(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget) {
  require_method(params, {Method::Apc, Method::Consensus}, "run_apc");
  return run_sequential(sys, params, budget);
}

IterationTrace run_dgd(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget) {
  require_method(params, {Method::Dgd}, "run_dgd");
  return run_sequential(sys, params, budget);
}

IterationTrace run_dnag(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget) {
  require_method(params, {Method::Dnag}, "run_dnag");
  return run_sequential(sys, params, budget);
}

IterationTrace run_dhbm(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget) {
  require_method(params, {Method::Dhbm, Method::PrecondDhbm}, "run_dhbm");
  return run_sequential(sys, params, budget);
}

IterationTrace run_admm(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget) {
  require_method(params, {Method::Admm}, "run_admm");
  return run_sequential(sys, params, budget);
}

IterationTrace run_cimmino(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget) {
  require_method(params, {Method::Cimmino}, "run_cimmino");
  return run_sequential(sys, params, budget);
}

// ---------------------------------------------------------------------------
// Preconditioning

PrecondSystem build_preconditioned(const PartitionedSystem& sys) {
  const std::size_t n = sys.cols();
  PrecondSystem out;
  out.c = Matrix(sys.rows(), n);
  out.d.reserve(sys.rows());
  std::size_t row = 0;
  for (std::size_t bi = 0; bi < sys.blocks.size(); ++bi) {
    const Block& blk = sys.blocks[bi];
    const SymEigen eig = sym_eigen_decompose(gram_rows(blk.a));
    if (!(eig.values.front() > 1e-10 * eig.values.back())) {
      throw Error(ErrorCode::RankDeficientBlock, "block " + std::to_string(bi) + " is not full row rank");
    }
    const std::size_t p = blk.a.rows();
    Matrix t(p, p);
    for (std::size_t k = 0; k < p; ++k) {
      const double s = 1.0 / std::sqrt(eig.values[k]);
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) t(i, j) += eig.vectors(i, k) * s * eig.vectors(j, k);
    }
    const Matrix ci = multiply(t, blk.a);
    const Vector di = mat_vec(t, blk.b);
    for (std::size_t i = 0; i < p; ++i, ++row) std::ranges::copy(ci.row(i), out.c.row(row).begin());
    out.d.insert(out.d.end(), di.begin(), di.end());
    out.transforms.push_back(std::move(t));
  }
  out.system = partition_rows(out.c, out.d, sys.m, sys.x_star);
  return out;
}

IterationTrace run_precond_dhbm(const PartitionedSystem& sys, const Budget& budget) {
  const PrecondSystem pre = build_preconditioned(sys);
  MethodParams params = dhbm_params(sym_eigs(gram_cols(pre.c)));
  params.method = Method::PrecondDhbm;
  return run_sequential(sys, params, budget);
}

// ---------------------------------------------------------------------------
// Tuning

MethodParams optimal_params(const PartitionedSystem& sys, const SpectralSummary& summary, Method method,
                            std::size_t admm_grid) {
  switch (method) {
    case Method::Apc:
      return apc_optimal_params(summary.mu_min, summary.mu_max);
    case Method::Consensus:
      return consensus_params(summary.mu);
    case Method::Dgd:
      return dgd_params(summary.lambda_ata);
    case Method::Dnag:
      return dnag_params(summary.lambda_ata);
    case Method::Dhbm:
      return dhbm_params(summary.lambda_ata);
    case Method::Admm:
      return admm_tune(sys, admm_default_range(summary.lambda_ata), admm_grid);
    case Method::Cimmino:
      return cimmino_params(summary.mu, sys.m);
    case Method::PrecondDhbm: {
      const PrecondSystem pre = build_preconditioned(sys);
      MethodParams p = dhbm_params(sym_eigs(gram_cols(pre.c)));
      p.method = Method::PrecondDhbm;
      return p;
    }
  }
  throw Error(ErrorCode::Usage, "unknown method");
}

}  // namespace apc
