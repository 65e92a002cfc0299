#pragma once

// Iterative engines for the distributed solvers.
//
// Every method is written as a master program plus m worker programs. One
// round is: the master broadcasts a vector, each worker answers with one
// vector computed from its own block, and the master folds the answers in
// ascending block order. The sequential engines below and the simulated
// network in simnet.hpp drive the very same programs, which is what makes
// their traces bit-identical.

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "apc/ingest.hpp"
#include "apc/linalg.hpp"
#include "apc/spectral.hpp"
#include "apc/trace.hpp"

namespace apc {

// Cached factorization of A_i A_i^T for one block. Applying the
// pseudoinverse or the nullspace projector costs two p x n products and one
// p x p triangular solve pair; P_i is never formed.
class BlockProjector {
 public:
  BlockProjector(const Matrix& a, const Vector& b, std::size_t index = 0);

  const Matrix& a() const noexcept { return *a_; }
  const Vector& b() const noexcept { return *b_; }
  std::size_t index() const noexcept { return index_; }

  // A_i^T (A_i A_i^T)^{-1} v for v of length p.
  Vector pseudo_inverse(std::span<const double> v) const;
  // P_i v = v - A_i^+ A_i v
  Vector project_nullspace(std::span<const double> v) const;
  // x + A_i^+ (b_i - A_i x): closest point to x with A_i y = b_i.
  Vector project_solution_set(std::span<const double> x) const;
  Vector min_norm_solution() const;

 private:
  const Matrix* a_;
  const Vector* b_;
  std::size_t index_;
  SpdFactor factor_;
};

// Local state of one APC worker.
struct WorkerState {
  BlockProjector projector;
  Vector x;  // x_i(t)
};

// x_i(0) = A_i^+ b_i. Throws RankDeficientBlock.
WorkerState init_worker(const Matrix& a, const Vector& b, std::size_t index = 0);

// x_i(t+1) = x_i(t) + gamma P_i (x_bar - x_i(t)); updates w.x and returns it.
const Vector& worker_step_apc(WorkerState& w, std::span<const double> x_bar, double gamma);

struct MasterState {
  Vector x_bar;
  double gamma = 1.0;
  double eta = 1.0;
  std::size_t t = 0;
};

// x_bar(t+1) = (eta/m) sum_i x_i(t+1) + (1 - eta) x_bar(t), summed in
// ascending block order; increments t.
const Vector& master_step_apc(MasterState& ms, std::span<const Vector> worker_iterates);

// ---------------------------------------------------------------------------
// Distributed programs

class WorkerProgram {
 public:
  virtual ~WorkerProgram() = default;
  virtual Vector respond(std::span<const double> broadcast) = 0;
};

class MasterProgram {
 public:
  virtual ~MasterProgram() = default;
  // Vector sent to every worker at the start of the current round.
  virtual const Vector& broadcast() const = 0;
  // Consume the m responses (index = block) and advance one round.
  virtual void absorb(std::span<const Vector> responses) = 0;
  // Current solution estimate, the quantity the trace measures.
  virtual const Vector& estimate() const = 0;
};

struct DistributedProgram {
  std::unique_ptr<MasterProgram> master;
  std::vector<std::unique_ptr<WorkerProgram>> workers;
  // Transformed system the workers reference (preconditioned D-HBM only).
  std::shared_ptr<const PartitionedSystem> owned_system;
};

// Builds the program for params.method (Consensus runs as APC). The program
// keeps references into sys, which must outlive it.
DistributedProgram make_program(const PartitionedSystem& sys, const MethodParams& params,
                                const Budget& budget);

// One round: fill responses[i] from worker i given the broadcast.
using RoundExecutor = std::function<void(std::span<const double>, std::vector<Vector>&)>;

// Runs rounds until tol, divergence (error > 1e12 x initial, or non-finite)
// or the iteration cap, measuring master estimates against sys.
IterationTrace drive(const PartitionedSystem& sys, MasterProgram& master, std::size_t workers,
                     const MethodParams& params, const Budget& budget, const RoundExecutor& round);

std::size_t resolve_max_iters(const Budget& budget, double t_predicted);

// ---------------------------------------------------------------------------
// Sequential engines

IterationTrace run_method(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget);

IterationTrace run_apc(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget);
IterationTrace run_dgd(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget);
IterationTrace run_dnag(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget);
IterationTrace run_dhbm(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget);
IterationTrace run_admm(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget);
IterationTrace run_cimmino(const PartitionedSystem& sys, const MethodParams& params, const Budget& budget);

// ---------------------------------------------------------------------------
// Distributed preconditioning

struct PrecondSystem {
  Matrix c;
  Vector d;
  // (A_i A_i^T)^{-1/2} per block
  std::vector<Matrix> transforms;
  // (C, d) split into the same blocks, x* carried over.
  PartitionedSystem system;
};

// Each block is premultiplied by the symmetric inverse square root of
// A_i A_i^T (via its eigendecomposition), so every C_i has orthonormal rows.
PrecondSystem build_preconditioned(const PartitionedSystem& sys);

// Tunes heavy-ball on the spectrum of C^T C and runs it on (C, d).
IterationTrace run_precond_dhbm(const PartitionedSystem& sys, const Budget& budget);

// ---------------------------------------------------------------------------
// Tuning

// Optimal parameters for one method given the system and its spectrum.
// ADMM uses admm_tune over the default range with `admm_grid` points.
MethodParams optimal_params(const PartitionedSystem& sys, const SpectralSummary& summary, Method method,
                            std::size_t admm_grid = 200);

}  // namespace apc
