#include "apc/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "apc/error.hpp"
#include "apc/format.hpp"
#include "apc/ingest.hpp"

namespace apc {

namespace {

using Complex = std::complex<double>;

constexpr double kAcceptNorm = 1e8;

// Solves (B - lambda I) z = r by Gaussian elimination with partial pivoting.
// Returns +inf when a pivot collapses below n * eps * ||B - lambda I||_F.
double shifted_solve_norm(const Matrix& b, Complex lambda, std::span<const double> r, bool& collapsed) {
  const std::size_t n = b.rows();
  std::vector<Complex> a(n * n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Complex v = b(i, j);
      if (i == j) v -= lambda;
      a[i * n + j] = v;
      scale += std::norm(v);
    }
  scale = std::sqrt(scale);
  const double floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;

  std::vector<Complex> z(r.begin(), r.end());
  collapsed = false;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
    if (std::abs(a[piv * n + k]) <= floor) {
      collapsed = true;
      return std::numeric_limits<double>::infinity();
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
      std::swap(z[k], z[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = a[i * n + k] / a[k * n + k];
      if (f == Complex{}) continue;
      for (std::size_t j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
      z[i] -= f * z[k];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    Complex s = z[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i * n + j] * z[j];
    z[i] = s / a[i * n + i];
  }
  double norm = 0.0;
  for (const Complex& v : z) norm += std::norm(v);
  return std::sqrt(norm);
}

// Explicit P_i = I - A_i^T (A_i A_i^T)^{-1} A_i, verification scale only.
Matrix explicit_projector(const Block& blk) {
  const std::size_t n = blk.a.cols();
  const SpdFactor f = cholesky_spd(gram_rows(blk.a));
  Matrix p = Matrix::identity(n);
  Vector col(blk.a.rows());
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t r = 0; r < blk.a.rows(); ++r) col[r] = blk.a(r, j);
    solve_spd_inplace(f, col);
    const Vector u = transpose_mat_vec(blk.a, col);
    for (std::size_t i = 0; i < n; ++i) p(i, j) -= u[i];
  }
  return p;
}

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

// ---------------------------------------------------------------------------
// Block matrix

BlockIterationMatrix assemble_block_matrix(const PartitionedSystem& sys, double gamma, double eta) {
  const std::size_t m = sys.m;
  const std::size_t n = sys.cols();
  const std::size_t size = (m + 1) * n;
  if (size > 2000) {
    throw Error(ErrorCode::TooLarge, "block matrix would be " + std::to_string(size) + " wide (limit 2000)");
  }
  BlockIterationMatrix out;
  out.gamma = gamma;
  out.eta = eta;
  out.m = m;
  out.n = n;
  out.b = Matrix(size, size);
  out.m_block = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) out.m_block(i, i) = 1.0 - eta;

  const double md = static_cast<double>(m);
  const std::size_t bar = m * n;
  for (std::size_t blk = 0; blk < m; ++blk) {
    const Matrix p = explicit_projector(sys.blocks[blk]);
    const std::size_t off = blk * n;
    for (std::size_t i = 0; i < n; ++i) {
      out.b(off + i, off + i) = 1.0 - gamma;
      out.b(bar + i, off + i) = eta * (1.0 - gamma) / md;
      for (std::size_t j = 0; j < n; ++j) {
        out.b(off + i, bar + j) = gamma * p(i, j);
        out.m_block(i, j) += eta * gamma / md * p(i, j);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.b(bar + i, bar + j) = out.m_block(i, j);
  return out;
}

std::vector<std::complex<double>> predicted_spectrum(double gamma, double eta, std::span<const double> mu,
                                                     std::size_t m) {
  std::vector<Complex> out;
  const std::size_t n = mu.size();
  out.reserve((m + 1) * n);
  for (std::size_t k = 0; k < (m - 1) * n; ++k) out.emplace_back(1.0 - gamma, 0.0);
  const double c0 = (gamma - 1.0) * (eta - 1.0);
  for (double mu_i : mu) {
    const ComplexPair roots = quadratic_roots(-eta * gamma * (1.0 - mu_i) + gamma - 1.0 + eta - 1.0, c0);
    out.push_back(roots.first);
    out.push_back(roots.second);
  }
  return out;
}

std::size_t SpectrumReport::rejected() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const EigenCheck& c) { return !c.accepted; }));
}

SpectrumReport verify_spectrum(const BlockIterationMatrix& bim, std::span<const std::complex<double>> predicted,
                               std::uint64_t seed) {
  const std::size_t size = bim.b.rows();
  Xoshiro256 rng(seed);
  Vector r(size);
  for (double& v : r) v = rng.gaussian();
  const double rn = norm2(r);
  for (double& v : r) v /= rn;

  SpectrumReport report;
  report.checks.reserve(predicted.size());
  for (const Complex& lambda : predicted) {
    EigenCheck check;
    check.lambda = lambda;
    check.solution_norm = shifted_solve_norm(bim.b, lambda, r, check.pivot_collapse);
    check.accepted = check.pivot_collapse || check.solution_norm >= kAcceptNorm;
    report.checks.push_back(check);
  }
  return report;
}

void require_verified(const SpectrumReport& report) {
  if (report.all_accepted()) return;
  std::string list;
  for (const auto& c : report.checks) {
    if (c.accepted) continue;
    if (!list.empty()) list += ", ";
    list += format_double(c.lambda.real()) + (c.lambda.imag() < 0 ? "-" : "+") +
            format_double(std::abs(c.lambda.imag())) + "i";
  }
  throw Error(ErrorCode::VerificationFailed, "not eigenvalues: " + list);
}

// ---------------------------------------------------------------------------
// Comparison

const ComparisonRow* ComparisonTable::find(Method method) const {
  for (const auto& row : rows)
    if (row.method == method) return &row;
  return nullptr;
}

ComparisonTable build_comparison(const PartitionedSystem& sys, std::span<const Method> methods, const Budget& budget,
                                 const ComparisonOptions& options) {
  if (methods.empty()) throw Error(ErrorCode::Usage, "empty method set");
  ComparisonTable table;
  table.m = sys.m;
  table.rows_n = sys.rows();
  table.cols_n = sys.cols();
  const SpectralSummary summary = compute_x(sys);
  table.kappa_x = summary.kappa_x;
  table.kappa_ata = summary.kappa_ata;

  for (Method method : methods) {
    ComparisonRow row;
    row.method = method;
    try {
      row.params = optimal_params(sys, summary, method, options.admm_grid);
      row.rho = row.params.rho_predicted;
      row.t_predicted = row.params.t_predicted;
      if (!options.run) {
        row.t_empirical = std::numeric_limits<double>::quiet_NaN();
        table.rows.push_back(std::move(row));
        continue;
      }
      row.trace = options.simulate ? run_simulated(sys, row.params, budget).trace : run_method(sys, row.params, budget);
      row.t_empirical = row.trace.t_empirical;
      row.iterations = row.trace.rounds();
      row.status = row.trace.status;
      if (row.status == RunStatus::Diverged) {
        row.failed = true;
        row.error = "Diverged: error exceeded 1e12 times its initial value";
      }
    } catch (const Error& e) {
      row.failed = true;
      row.error = e.what();
    }
    table.rows.push_back(std::move(row));
  }

  ComparisonRow* best = nullptr;
  for (auto& row : table.rows) {
    if (row.failed && row.status != RunStatus::Diverged) continue;
    if (best == nullptr || row.t_predicted < best->t_predicted) best = &row;
  }
  if (best != nullptr) best->fastest = true;
  return table;
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table) {
  out << "method,rho,T_predicted,T_empirical,iters\n";
  for (const auto& row : table.rows) {
    out << to_string(row.method) << ',' << format_double(row.rho) << ',' << format_double(row.t_predicted) << ','
        << format_double(row.t_empirical) << ',' << row.iterations << '\n';
  }
}

nlohmann::json params_to_json(const MethodParams& p) {
  nlohmann::json j;
  switch (p.method) {
    case Method::Apc:
    case Method::Consensus:
      j["gamma"] = p.gamma;
      j["eta"] = p.eta;
      break;
    case Method::Dgd:
      j["alpha"] = p.alpha;
      break;
    case Method::Dnag:
    case Method::Dhbm:
    case Method::PrecondDhbm:
      j["alpha"] = p.alpha;
      j["beta"] = p.beta;
      break;
    case Method::Admm:
      j["xi"] = p.xi;
      break;
    case Method::Cimmino:
      j["nu"] = p.nu;
      j["eta"] = p.eta;
      break;
  }
  j["rho"] = number(p.rho_predicted);
  j["T"] = number(p.t_predicted);
  return j;
}

nlohmann::json summary_to_json(const SpectralSummary& s) {
  return {{"n", s.mu.size()},
          {"mu", s.mu},
          {"mu_min", s.mu_min},
          {"mu_max", s.mu_max},
          {"kappa_X", number(s.kappa_x)},
          {"lambda_AtA", s.lambda_ata},
          {"kappa_AtA", number(s.kappa_ata)}};
}

nlohmann::json comparison_to_json(const ComparisonTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r = {{"method", to_string(row.method)},
                        {"params", params_to_json(row.params)},
                        {"rho", number(row.rho)},
                        {"T_predicted", number(row.t_predicted)},
                        {"T_empirical", number(row.t_empirical)},
                        {"iters", row.iterations},
                        {"status", to_string(row.status)},
                        {"fastest", row.fastest}};
    if (row.failed) r["error"] = row.error;
    rows.push_back(std::move(r));
  }
  return {{"m", table.m},
          {"N", table.rows_n},
          {"n", table.cols_n},
          {"kappa_X", number(table.kappa_x)},
          {"kappa_AtA", number(table.kappa_ata)},
          {"rows", rows}};
}

}  // namespace apc
