#pragma once

#include <cmath>
#include <cstddef>

namespace apc {

template <class F>
ScalarMin grid_golden_minimize(F&& f, double lo, double hi, std::size_t grid_points, bool log_scale) {
  const std::size_t count = grid_points < 3 ? 3 : grid_points;
  const double a = log_scale ? std::log(lo) : lo;
  const double b = log_scale ? std::log(hi) : hi;
  auto at = [&](double u) { return log_scale ? std::exp(u) : u; };
  const double step = (b - a) / static_cast<double>(count - 1);

  std::size_t best = 0;
  double best_value = f(at(a));
  for (std::size_t k = 1; k < count; ++k) {
    const double v = f(at(a + step * static_cast<double>(k)));
    if (v < best_value) {
      best_value = v;
      best = k;
    }
  }

  double left = a + step * static_cast<double>(best == 0 ? 0 : best - 1);
  double right = a + step * static_cast<double>(best + 1 >= count ? count - 1 : best + 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = right - inv_phi * (right - left);
  double x2 = left + inv_phi * (right - left);
  double f1 = f(at(x1));
  double f2 = f(at(x2));
  for (int it = 0; it < 200 && right - left > 1e-15 * (std::abs(left) + std::abs(right) + 1e-300); ++it) {
    if (f1 <= f2) {
      right = x2;
      x2 = x1;
      f2 = f1;
      x1 = right - inv_phi * (right - left);
      f1 = f(at(x1));
    } else {
      left = x1;
      x1 = x2;
      f1 = f2;
      x2 = left + inv_phi * (right - left);
      f2 = f(at(x2));
    }
  }

  ScalarMin out{at(a + step * static_cast<double>(best)), best_value};
  if (f1 < out.value) out = {at(x1), f1};
  if (f2 < out.value) out = {at(x2), f2};
  return out;
}

}  // namespace apc
