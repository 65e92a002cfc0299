#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "apc/linalg.hpp"
#include "apc/spectral.hpp"

namespace apc {

struct Budget {
  // 0 selects ceil(100 * T_predicted), at least 10; 10000 when T is infinite.
  std::size_t max_iters = 0;
  // Upper bound applied to the resolved iteration count; 0 for none.
  std::size_t iteration_cap = 0;
  double tol = 1e-10;
  // Ignore tol and run all max_iters rounds.
  bool run_full_budget = false;
  // Keep every master iterate (x-bar(t)) in the trace.
  bool record_iterates = false;
  // x-bar(0) = 0 instead of the average of the block minimum-norm solutions.
  bool zero_init = false;
  // Explicit x-bar(0); APC workers then start from its projection onto their
  // block's solution set.
  std::optional<Vector> initial;
  // Unmodified consensus ADMM (dual variables updated). No rate claims.
  bool admm_dual_updates = false;
};

enum class RunStatus { Converged, MaxIterations, Diverged };

std::string_view to_string(RunStatus s);

struct IterationTrace {
  Method method = Method::Apc;
  MethodParams params;
  // errors[t] is the relative error of x-bar(t) against x* when x* is known,
  // otherwise the relative residual. t = 0 is the initial point.
  std::vector<double> errors;
  std::vector<double> residuals;
  std::vector<Vector> iterates;
  bool error_is_residual = false;
  RunStatus status = RunStatus::MaxIterations;
  double fitted_rate = 0.0;  // NaN when too few iterations were recorded
  double t_empirical = 0.0;
  double t_predicted = 0.0;

  std::size_t rounds() const noexcept { return errors.empty() ? 0 : errors.size() - 1; }
  double final_error() const noexcept { return errors.empty() ? 0.0 : errors.back(); }
};

struct RateWindow {
  std::size_t skip = 10;
  double tail_fraction = 0.5;
  std::size_t min_points = 20;
  // Values at or below this level are treated as rounding noise.
  double floor = 1e-12;
};

// exp(slope) of a least-squares line through ln(error) over the tail window:
// the last tail_fraction of the recorded values, never earlier than `skip`.
// Values at or after the first entry at or below window.floor are ignored. Throws
// InsufficientData with fewer than min_points usable values.
double fit_rate(std::span<const double> errors, const RateWindow& window = {});

// "iter,error,residual" with a header row.
void write_trace_csv(std::ostream& out, const IterationTrace& trace);

}  // namespace apc
