#include "apc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "apc/error.hpp"
#include "apc/format.hpp"

namespace apc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Extremes {
  double min;
  double max;
};

Extremes extremes(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::DegenerateSpectrum, "empty spectrum");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {*lo, *hi};
}

Extremes positive_extremes(std::span<const double> values, std::string_view what) {
  const Extremes e = extremes(values);
  if (!(e.min > 0.0)) {
    throw Error(ErrorCode::DegenerateSpectrum,
                std::string(what) + ": smallest eigenvalue " + format_double(e.min) + " is not positive");
  }
  return e;
}

MethodParams with_rate(MethodParams p, double rho) {
  p.rho_predicted = rho;
  p.t_predicted = convergence_time(rho);
  return p;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Apc: return "apc";
    case Method::Consensus: return "consensus";
    case Method::Dgd: return "dgd";
    case Method::Dnag: return "dnag";
    case Method::Dhbm: return "dhbm";
    case Method::Admm: return "admm";
    case Method::Cimmino: return "cimmino";
    case Method::PrecondDhbm: return "pdhbm";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : kAllMethods)
    if (to_string(m) == name) return m;
  return std::nullopt;
}

double condition_number(const Vector& ascending) {
  if (ascending.empty() || !(ascending.front() > 0.0)) return kInf;
  return ascending.back() / ascending.front();
}

SpectralSummary compute_x(const PartitionedSystem& sys) {
  const std::size_t n = sys.cols();
  SpectralSummary out;
  out.x = Matrix(n, n);
  const double inv_m = 1.0 / static_cast<double>(sys.m);
  for (std::size_t bi = 0; bi < sys.blocks.size(); ++bi) {
    const Matrix& a = sys.blocks[bi].a;
    SpdFactor factor;
    try {
      factor = cholesky_spd(gram_rows(a));
    } catch (const Error& e) {
      throw Error(ErrorCode::RankDeficientBlock, "block " + std::to_string(bi) + ": " + e.what());
    }
    // W = (A_i A_i^T)^{-1} A_i, column by column.
    Matrix w(a.rows(), n);
    Vector col(a.rows());
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t r = 0; r < a.rows(); ++r) col[r] = a(r, j);
      solve_spd_inplace(factor, col);
      for (std::size_t r = 0; r < a.rows(); ++r) w(r, j) = col[r];
    }
    // X += (1/m) A_i^T W
    for (std::size_t r = 0; r < a.rows(); ++r) {
      const auto arow = a.row(r);
      const auto wrow = w.row(r);
      for (std::size_t j = 0; j < n; ++j) {
        const double s = inv_m * arow[j];
        if (s == 0.0) continue;
        auto xrow = out.x.row(j);
        for (std::size_t k = 0; k < n; ++k) xrow[k] += s * wrow[k];
      }
    }
  }
  // Symmetrize away rounding so the eigensolver's symmetry precondition holds.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double v = 0.5 * (out.x(i, j) + out.x(j, i));
      out.x(i, j) = v;
      out.x(j, i) = v;
    }

  out.mu = sym_eigs(out.x);
  out.mu_min = out.mu.front();
  out.mu_max = out.mu.back();
  out.kappa_x = condition_number(out.mu);
  out.lambda_ata = sym_eigs(gram_cols(sys.a));
  out.kappa_ata = condition_number(out.lambda_ata);
  return out;
}

// ---------------------------------------------------------------------------
// APC

StabilityVerdict apc_spectral_radius(double gamma, double eta, std::span<const double> mu) {
  StabilityVerdict v;
  v.gamma = gamma;
  v.eta = eta;
  v.root_magnitudes.reserve(mu.size());
  double radius = std::abs(1.0 - gamma);
  const double c0 = (gamma - 1.0) * (eta - 1.0);
  for (double mu_i : mu) {
    const double b1 = -eta * gamma * (1.0 - mu_i) + gamma - 1.0 + eta - 1.0;
    const auto mags = quadratic_root_magnitudes(b1, c0);
    v.root_magnitudes.push_back(mags);
    radius = std::max(radius, mags.first);
  }
  v.spectral_radius = radius;
  v.stable = radius < 1.0;
  v.in_s = v.stable && gamma >= 0.0 && gamma <= 2.0;
  return v;
}

std::pair<double, double> apc_optimality_residuals(double gamma, double eta, double mu_min,
                                                   double mu_max) {
  const double root = std::sqrt(std::max(0.0, (gamma - 1.0) * (eta - 1.0)));
  const double prod = gamma * eta;
  return {mu_max * prod - (1.0 + root) * (1.0 + root), mu_min * prod - (1.0 - root) * (1.0 - root)};
}

MethodParams apc_optimal_params(double mu_min, double mu_max) {
  if (!(mu_min > 0.0)) {
    throw Error(ErrorCode::DegenerateSpectrum, "mu_min = " + format_double(mu_min));
  }
  if (!(mu_max >= mu_min) || mu_max > 1.0 + 1e-10) {
    throw Error(ErrorCode::DegenerateSpectrum,
                "need mu_min <= mu_max <= 1, got " + format_double(mu_min) + ", " + format_double(mu_max));
  }
  const double sqrt_kappa = std::sqrt(mu_max / mu_min);
  const double rho = (sqrt_kappa - 1.0) / (sqrt_kappa + 1.0);
  const double prod = (1.0 + rho) * (1.0 + rho) / mu_max;
  const double sum = prod + 1.0 - rho * rho;
  // z^2 - sum z + prod = 0, larger root first then Vieta for the smaller one.
  const double disc = std::max(0.0, sum * sum - 4.0 * prod);
  const double larger = 0.5 * (sum + std::sqrt(disc));
  const double smaller = prod / larger;

  MethodParams p;
  p.method = Method::Apc;
  p.gamma = smaller;
  p.eta = larger;
  const auto [r1, r2] = apc_optimality_residuals(p.gamma, p.eta, mu_min, mu_max);
  if (std::abs(r1) > 1e-10 || std::abs(r2) > 1e-10) {
    throw Error(ErrorCode::TuningFailed, "optimality residuals " + format_double(r1) + ", " +
                                             format_double(r2) + " exceed 1e-10");
  }
  return with_rate(p, rho);
}

// ---------------------------------------------------------------------------
// Gradient methods

MethodParams dgd_params(std::span<const double> lambda_ata) {
  const auto [lmin, lmax] = positive_extremes(lambda_ata, "A^T A");
  MethodParams p;
  p.method = Method::Dgd;
  p.alpha = 2.0 / (lmax + lmin);
  const double kappa = lmax / lmin;
  const double rho = (kappa - 1.0) / (kappa + 1.0);
  const double lo = std::abs(1.0 - p.alpha * lmin);
  const double hi = std::abs(1.0 - p.alpha * lmax);
  if (std::abs(lo - rho) > 1e-10 || std::abs(hi - rho) > 1e-10) {
    throw Error(ErrorCode::TuningFailed, "step size does not balance the spectrum ends");
  }
  return with_rate(p, rho);
}

double dnag_spectral_radius(double alpha, double beta, std::span<const double> lambda_ata) {
  // Per curvature lambda, with q = 1 - alpha*lambda the error obeys
  // z^2 - q(1+beta) z + q beta = 0.
  double radius = 0.0;
  for (double lambda : lambda_ata) {
    const double q = 1.0 - alpha * lambda;
    radius = std::max(radius, quadratic_radius(-q * (1.0 + beta), q * beta));
  }
  return radius;
}

MethodParams dnag_params(std::span<const double> lambda_ata) {
  const auto [lmin, lmax] = positive_extremes(lambda_ata, "A^T A");
  const double kappa = lmax / lmin;
  const double rho_predicted = 1.0 - 2.0 / std::sqrt(3.0 * kappa + 1.0);

  // The radius is a max over the spectrum; only distinct values matter.
  Vector distinct(lambda_ata.begin(), lambda_ata.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  constexpr std::size_t kGrid = 64;
  constexpr double kBetaMax = 1.0 - 1e-15;
  auto best_beta = [&](double alpha) {
    return grid_golden_minimize([&](double beta) { return dnag_spectral_radius(alpha, beta, distinct); },
                                0.0, kBetaMax, kGrid, false);
  };
  const ScalarMin outer = grid_golden_minimize([&](double alpha) { return best_beta(alpha).value; },
                                               1e-6 * (2.0 / lmax), 2.0 / lmax, kGrid, false);
  const ScalarMin inner = best_beta(outer.x);

  MethodParams p;
  p.method = Method::Dnag;
  p.alpha = outer.x;
  p.beta = inner.x;
  const double achieved = dnag_spectral_radius(p.alpha, p.beta, distinct);
  const double scale = std::max(rho_predicted, 1e-12);
  if (std::abs(achieved - rho_predicted) > 1e-4 * scale && rho_predicted > 0.0) {
    throw Error(ErrorCode::TuningFailed, "D-NAG search reached " + format_double(achieved) +
                                             ", predicted " + format_double(rho_predicted));
  }
  if (rho_predicted <= 0.0 && achieved > 1e-6) {
    throw Error(ErrorCode::TuningFailed, "D-NAG search reached " + format_double(achieved) + ", predicted 0");
  }
  return with_rate(p, rho_predicted);
}

double dhbm_spectral_radius(double alpha, double beta, std::span<const double> lambda_ata) {
  // z^2 - (1 + beta - alpha*lambda) z + beta = 0
  double radius = 0.0;
  for (double lambda : lambda_ata)
    radius = std::max(radius, quadratic_radius(-(1.0 + beta - alpha * lambda), beta));
  return radius;
}

MethodParams dhbm_params(std::span<const double> lambda_ata) {
  const auto [lmin, lmax] = positive_extremes(lambda_ata, "A^T A");
  const double sqrt_kappa = std::sqrt(lmax / lmin);
  const double rho = (sqrt_kappa - 1.0) / (sqrt_kappa + 1.0);
  MethodParams p;
  p.method = Method::Dhbm;
  const double s = 2.0 / (std::sqrt(lmax) + std::sqrt(lmin));
  p.alpha = s * s;
  p.beta = rho * rho;
  const double achieved = dhbm_spectral_radius(p.alpha, p.beta, lambda_ata);
  if (std::abs(achieved - rho) > 1e-8) {
    throw Error(ErrorCode::TuningFailed,
                "heavy-ball radius " + format_double(achieved) + " differs from " + format_double(rho));
  }
  return with_rate(p, rho);
}

// ---------------------------------------------------------------------------
// Modified ADMM

Matrix admm_iteration_matrix(const PartitionedSystem& sys, double xi) {
  // xi (A_i^T A_i + xi I)^{-1} = I - A_i^T (A_i A_i^T + xi I)^{-1} A_i
  const std::size_t n = sys.cols();
  Matrix g = Matrix::identity(n);
  const double inv_m = 1.0 / static_cast<double>(sys.m);
  for (const auto& blk : sys.blocks) {
    Matrix k = gram_rows(blk.a);
    for (std::size_t i = 0; i < k.rows(); ++i) k(i, i) += xi;
    const SpdFactor f = cholesky_spd(k);
    Vector col(blk.a.rows());
    Matrix w(blk.a.rows(), n);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t r = 0; r < blk.a.rows(); ++r) col[r] = blk.a(r, j);
      solve_spd_inplace(f, col);
      for (std::size_t r = 0; r < blk.a.rows(); ++r) w(r, j) = col[r];
    }
    for (std::size_t r = 0; r < blk.a.rows(); ++r) {
      for (std::size_t j = 0; j < n; ++j) {
        const double s = inv_m * blk.a(r, j);
        if (s == 0.0) continue;
        auto grow = g.row(j);
        const auto wrow = w.row(r);
        for (std::size_t c = 0; c < n; ++c) grow[c] -= s * wrow[c];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double v = 0.5 * (g(i, j) + g(j, i));
      g(i, j) = v;
      g(j, i) = v;
    }
  return g;
}

double admm_spectral_radius(const PartitionedSystem& sys, double xi) {
  const Vector eig = sym_eigs(admm_iteration_matrix(sys, xi));
  return std::max(std::abs(eig.front()), std::abs(eig.back()));
}

std::pair<double, double> admm_default_range(std::span<const double> lambda_ata) {
  const double lmax = extremes(lambda_ata).max;
  return {1e-4 * lmax, 1e4 * lmax};
}

MethodParams admm_tune(const PartitionedSystem& sys, std::pair<double, double> xi_range,
                       std::size_t grid_points) {
  const auto [lo, hi] = xi_range;
  if (!(lo > 0.0) || !(hi >= lo)) {
    throw Error(ErrorCode::OutOfDomain, "xi range [" + format_double(lo) + ", " + format_double(hi) + "]");
  }
  const ScalarMin best =
      lo == hi ? ScalarMin{lo, admm_spectral_radius(sys, lo)}
               : grid_golden_minimize([&](double xi) { return admm_spectral_radius(sys, xi); }, lo, hi,
                                      grid_points, true);
  if (!(best.value < 1.0)) {
    throw Error(ErrorCode::TuningFailed,
                "ADMM radius " + format_double(best.value) + " >= 1 across the xi range");
  }
  MethodParams p;
  p.method = Method::Admm;
  p.xi = best.x;
  return with_rate(p, best.value);
}

// ---------------------------------------------------------------------------
// Projection methods

MethodParams cimmino_params(std::span<const double> mu, std::size_t m) {
  const auto [mu_min, mu_max] = positive_extremes(mu, "X");
  const double eta = 2.0 / (mu_max + mu_min);
  const double kappa = mu_max / mu_min;
  MethodParams p;
  p.method = Method::Cimmino;
  p.eta = eta;
  p.nu = eta / static_cast<double>(m);
  return with_rate(p, (kappa - 1.0) / (kappa + 1.0));
}

MethodParams consensus_params(std::span<const double> mu) {
  const auto [mu_min, mu_max] = positive_extremes(mu, "X");
  MethodParams p;
  p.method = Method::Consensus;
  p.gamma = 1.0;
  p.eta = 1.0;
  return with_rate(p, consensus_rate(mu_min));
}

double consensus_rate(double mu_min) { return 1.0 - mu_min; }

double convergence_time(double rho) {
  if (std::isnan(rho)) return rho;
  if (rho <= 0.0) return 0.0;
  if (rho >= 1.0) return kInf;
  return 1.0 / (-std::log(rho));
}

}  // namespace apc
