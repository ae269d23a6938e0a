#pragma once

#include <cstddef>
#include <functional>

namespace twinmigrate {

struct ScalarMax {
  double x = 0.0;
  double value = 0.0;
  std::size_t evaluations = 0;
};

// Golden-section search for the maximum of a unimodal function on [lo, hi].
// Stops once the bracket is narrower than `tol`.
ScalarMax golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                  double tol = 1e-12, std::size_t max_iters = 200);

// Evaluates f on `grid_points` evenly spaced points of [lo, hi] (endpoints
// included), then refines with golden-section on the two cells around the best
// grid point. Never returns a value below the grid maximum; ties go to the
// lowest x.
ScalarMax grid_golden_maximize(const std::function<double(double)>& f, double lo, double hi,
                               std::size_t grid_points, double tol = 1e-12);

}  // namespace twinmigrate
