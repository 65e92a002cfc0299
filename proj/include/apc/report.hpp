#pragma once

// Verification and benchmarking on top of the solvers.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "apc/simnet.hpp"
#include "apc/solvers.hpp"
#include "apc/spectral.hpp"
#include "apc/trace.hpp"

namespace apc {

// ---------------------------------------------------------------------------
// Block iteration matrix of APC
//
// Stacking e = (e_1, ..., e_m, e_bar) with e_i = x_i - x*, one APC round is
//
//   [ (1-g) I_mn          g [P_1; ...; P_m] ]
//   [ (e(1-g)/m) [I .. I]  M                 ]   M = (e g / m) sum P_i + (1-e) I
//
// for g = gamma, e = eta.

struct BlockIterationMatrix {
  Matrix b;
  Matrix m_block;
  double gamma = 0.0;
  double eta = 0.0;
  std::size_t m = 0;
  std::size_t n = 0;
};

// Throws TooLarge when (m+1) n > 2000.
BlockIterationMatrix assemble_block_matrix(const PartitionedSystem& sys, double gamma, double eta);

// (m-1) n copies of 1 - gamma followed by both roots of p_i for every mu_i.
std::vector<std::complex<double>> predicted_spectrum(double gamma, double eta, std::span<const double> mu,
                                                     std::size_t m);

struct EigenCheck {
  std::complex<double> lambda;
  double solution_norm = 0.0;  // ||z|| for (B - lambda I) z = r, +inf on pivot collapse
  bool pivot_collapse = false;
  bool accepted = false;
};

struct SpectrumReport {
  std::vector<EigenCheck> checks;

  std::size_t rejected() const;
  bool all_accepted() const { return rejected() == 0; }
};

// Certifies each predicted value as an eigenvalue of B by showing B - lambda I
// is numerically singular: the solve against a seeded random unit vector
// either collapses a pivot or returns ||z|| >= 1e8.
SpectrumReport verify_spectrum(const BlockIterationMatrix& bim, std::span<const std::complex<double>> predicted,
                               std::uint64_t seed = 1);

// Throws VerificationFailed listing the rejected values.
void require_verified(const SpectrumReport& report);

// ---------------------------------------------------------------------------
// Comparison tables

struct ComparisonRow {
  Method method = Method::Apc;
  MethodParams params;
  double rho = 0.0;
  double t_predicted = 0.0;
  double t_empirical = 0.0;
  std::size_t iterations = 0;
  RunStatus status = RunStatus::MaxIterations;
  bool failed = false;
  bool fastest = false;
  std::string error;
  IterationTrace trace;
};

struct ComparisonTable {
  std::size_t m = 0;
  std::size_t rows_n = 0;
  std::size_t cols_n = 0;
  double kappa_x = 0.0;
  double kappa_ata = 0.0;
  std::vector<ComparisonRow> rows;

  const ComparisonRow* find(Method method) const;
};

struct ComparisonOptions {
  bool simulate = false;
  std::size_t admm_grid = 200;
  // When false, only tuning is performed and the run columns stay empty.
  bool run = true;
};

// Tunes and runs each method. A failing method yields a failed row carrying
// the error message; the rest of the table is still produced. The row with
// the smallest predicted T is flagged fastest.
ComparisonTable build_comparison(const PartitionedSystem& sys, std::span<const Method> methods, const Budget& budget,
                                 const ComparisonOptions& options = {});

// "method,rho,T_predicted,T_empirical,iters"
void write_comparison_csv(std::ostream& out, const ComparisonTable& table);
nlohmann::json comparison_to_json(const ComparisonTable& table);

nlohmann::json params_to_json(const MethodParams& params);
nlohmann::json summary_to_json(const SpectralSummary& summary);

}  // namespace apc
