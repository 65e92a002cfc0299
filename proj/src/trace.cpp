#include "apc/trace.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "apc/error.hpp"
#include "apc/format.hpp"

namespace apc {

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::MaxIterations: return "max_iterations";
    case RunStatus::Diverged: return "diverged";
  }
  return "unknown";
}

double fit_rate(std::span<const double> errors, const RateWindow& window) {
  std::size_t usable = 0;
  while (usable < errors.size() && errors[usable] > window.floor && std::isfinite(errors[usable])) ++usable;
  if (usable < window.min_points) {
    throw Error(ErrorCode::InsufficientData, std::to_string(usable) + " usable values, need " +
                                                 std::to_string(window.min_points));
  }
  const auto tail = static_cast<std::size_t>(std::floor(window.tail_fraction * static_cast<double>(usable)));
  const std::size_t first = std::max(window.skip, usable - tail);
  if (usable - first < 2) {
    throw Error(ErrorCode::InsufficientData, "tail window holds fewer than two values");
  }

  const double count = static_cast<double>(usable - first);
  double mean_t = 0.0;
  double mean_y = 0.0;
  for (std::size_t t = first; t < usable; ++t) {
    mean_t += static_cast<double>(t);
    mean_y += std::log(errors[t]);
  }
  mean_t /= count;
  mean_y /= count;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t t = first; t < usable; ++t) {
    const double dt = static_cast<double>(t) - mean_t;
    sxy += dt * (std::log(errors[t]) - mean_y);
    sxx += dt * dt;
  }
  return std::exp(sxy / sxx);
}

void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  out << "iter,error,residual\n";
  for (std::size_t t = 0; t < trace.errors.size(); ++t) {
    out << t << ',' << format_double(trace.errors[t]) << ',';
    if (t < trace.residuals.size()) out << format_double(trace.residuals[t]);
    out << '\n';
  }
}

}  // namespace apc
