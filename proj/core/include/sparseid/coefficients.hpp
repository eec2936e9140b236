#pragma once

#include <vector>

#include "sparseid/errors.hpp"

namespace sparseid {

/// Piecewise-constant diffusivity/advection data on an axis-aligned rectangle.
/// Rectangles are closed; a node on a shared edge belongs to the first region
/// that contains it, in declaration order.
struct CoefficientRegion {
  double x0 = 0.0, y0 = 0.0;
  double x1 = 0.0, y1 = 0.0;
  double d = 0.0;   // diffusivity, must be > 0
  double vx = 0.0;  // advection velocity
  double vy = 0.0;

  bool contains(double x, double y) const {
    return x0 <= x && x <= x1 && y0 <= y && y <= y1;
  }
};

struct Coefficients {
  std::vector<CoefficientRegion> regions;

  /// First region containing (x,y); throws CoverageGap if none does.
  const CoefficientRegion& at(double x, double y) const {
    for (const auto& r : regions) {
      if (r.contains(x, y)) return r;
    }
    throw CoverageGap("Coefficients: no region covers the requested node");
  }

  /// Single region covering all of space.
  static Coefficients uniform(double d, double vx, double vy) {
    Coefficients c;
    c.regions.push_back({-1e300, -1e300, 1e300, 1e300, d, vx, vy});
    return c;
  }
};

}  // namespace sparseid
