#pragma once

// Spectral analysis: the matrix X = (1/m) sum_i A_i^T (A_i A_i^T)^{-1} A_i,
// the APC stability region and optimal (gamma, eta), and the analytic
// optimal tuning of every comparison method.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "apc/ingest.hpp"
#include "apc/linalg.hpp"

namespace apc {

enum class Method { Apc, Consensus, Dgd, Dnag, Dhbm, Admm, Cimmino, PrecondDhbm };

inline constexpr Method kAllMethods[] = {Method::Dgd,     Method::Dnag, Method::Dhbm,
                                         Method::Admm,    Method::Cimmino, Method::Apc,
                                         Method::PrecondDhbm, Method::Consensus};

std::string_view to_string(Method m);
// Accepts the CLI names: apc, consensus, dgd, dnag, dhbm, admm, cimmino, pdhbm.
std::optional<Method> parse_method(std::string_view name);

struct SpectralSummary {
  Matrix x;
  Vector mu;  // ascending
  double mu_min = 0.0;
  double mu_max = 0.0;
  double kappa_x = 0.0;
  Vector lambda_ata;  // ascending
  double kappa_ata = 0.0;
};

// Tuning parameters for one method. Only the fields the method uses are
// meaningful; the rest stay zero.
struct MethodParams {
  Method method = Method::Apc;
  double gamma = 0.0;
  double eta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double xi = 0.0;
  double nu = 0.0;
  double rho_predicted = 0.0;
  double t_predicted = 0.0;
};

struct StabilityVerdict {
  double gamma = 0.0;
  double eta = 0.0;
  // Per mu_i, the two root magnitudes of p_i (larger first).
  std::vector<std::pair<double, double>> root_magnitudes;
  double spectral_radius = 0.0;
  bool stable = false;
  // gamma in [0, 2] and stable.
  bool in_s = false;
};

// Condition number max/min, +inf when the smallest value is not positive.
double condition_number(const Vector& ascending);

SpectralSummary compute_x(const PartitionedSystem& sys);

// Spectral radius of the APC error iteration: max of |1 - gamma| and the root
// magnitudes of lambda^2 + (-eta*gamma*(1-mu) + gamma - 1 + eta - 1) lambda
// + (gamma-1)(eta-1) over all mu.
StabilityVerdict apc_spectral_radius(double gamma, double eta, std::span<const double> mu);

// Closed-form optimum: rho = (sqrt(k)-1)/(sqrt(k)+1), k = mu_max/mu_min,
// gamma*eta = (1+rho)^2/mu_max, gamma+eta = gamma*eta + 1 - rho^2. gamma is
// the smaller root. Throws DegenerateSpectrum for mu_min <= 0.
MethodParams apc_optimal_params(double mu_min, double mu_max);

// Residuals of the two optimality equations
//   mu_max*gamma*eta = (1 + sqrt((gamma-1)(eta-1)))^2
//   mu_min*gamma*eta = (1 - sqrt((gamma-1)(eta-1)))^2
std::pair<double, double> apc_optimality_residuals(double gamma, double eta, double mu_min,
                                                   double mu_max);

MethodParams dgd_params(std::span<const double> lambda_ata);

// Spectral radius of the Nesterov iteration for quadratic curvature values.
double dnag_spectral_radius(double alpha, double beta, std::span<const double> lambda_ata);
// Numerical minimax tuning. Throws TuningFailed if the achieved radius misses
// 1 - 2/sqrt(3k+1) by more than 1e-4 relative.
MethodParams dnag_params(std::span<const double> lambda_ata);

double dhbm_spectral_radius(double alpha, double beta, std::span<const double> lambda_ata);
MethodParams dhbm_params(std::span<const double> lambda_ata);

// Iteration matrix of modified ADMM: G = (xi/m) sum_i (A_i^T A_i + xi I)^{-1}.
Matrix admm_iteration_matrix(const PartitionedSystem& sys, double xi);
double admm_spectral_radius(const PartitionedSystem& sys, double xi);
// [1e-4 * lambda_max, 1e4 * lambda_max]
std::pair<double, double> admm_default_range(std::span<const double> lambda_ata);
// Log grid plus golden-section refinement. Throws TuningFailed when no xi in
// range gives a radius below 1.
MethodParams admm_tune(const PartitionedSystem& sys, std::pair<double, double> xi_range,
                       std::size_t grid_points = 200);

MethodParams cimmino_params(std::span<const double> mu, std::size_t m);
// APC with gamma = eta = 1.
MethodParams consensus_params(std::span<const double> mu);
double consensus_rate(double mu_min);

// T = 1 / (-ln rho); 0 for rho <= 0 and +inf for rho >= 1.
double convergence_time(double rho);

// Minimizes a scalar function on [lo, hi]: a uniform grid (in log space if
// requested) locates the basin, golden-section refines inside the bracket
// around the best grid point.
struct ScalarMin {
  double x = 0.0;
  double value = 0.0;
};
template <class F>
ScalarMin grid_golden_minimize(F&& f, double lo, double hi, std::size_t grid_points, bool log_scale);

}  // namespace apc

#include "apc/detail/grid_golden.hpp"
