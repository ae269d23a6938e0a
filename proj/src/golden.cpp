#include "twinmigrate/golden.hpp"

#include <cmath>

namespace twinmigrate {

ScalarMax golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                  double tol, std::size_t max_iters) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  ScalarMax out;
  if (!(hi > lo)) {
    out.x = lo;
    out.value = f(lo);
    out.evaluations = 1;
    return out;
  }
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  out.evaluations = 2;
  for (std::size_t it = 0; it < max_iters && (b - a) > tol; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++out.evaluations;
  }
  if (fc >= fd) {
    out.x = c;
    out.value = fc;
  } else {
    out.x = d;
    out.value = fd;
  }
  return out;
}

ScalarMax grid_golden_maximize(const std::function<double(double)>& f, double lo, double hi,
                               std::size_t grid_points, double tol) {
  ScalarMax best;
  if (!(hi > lo) || grid_points < 2) {
    best.x = lo;
    best.value = f(lo);
    best.evaluations = 1;
    return best;
  }
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  std::size_t best_k = 0;
  best.value = -INFINITY;
  for (std::size_t k = 0; k < grid_points; ++k) {
    const double x = k + 1 == grid_points ? hi : lo + step * static_cast<double>(k);
    const double v = f(x);
    if (v > best.value) {
      best.value = v;
      best.x = x;
      best_k = k;
    }
  }
  best.evaluations = grid_points;

  const double a = best_k == 0 ? lo : lo + step * static_cast<double>(best_k - 1);
  const double b = best_k + 1 >= grid_points ? hi : lo + step * static_cast<double>(best_k + 1);
  const ScalarMax refined = golden_section_maximize(f, a, b, tol);
  best.evaluations += refined.evaluations;
  if (refined.value > best.value) {
    best.x = refined.x;
    best.value = refined.value;
  }
  // Concave objectives with a boundary optimum: the golden bracket never
  // touches the endpoint itself, so the grid point stays the answer.
  return best;
}

}  // namespace twinmigrate
