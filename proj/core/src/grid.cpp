#include "sparseid/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sparseid {

Grid2D make_grid(double lx, double ly, double dx, double dy) {
  if (!(lx > 0.0) || !(ly > 0.0) || !(dx > 0.0) || !(dy > 0.0)) {
    throw NonTilingMesh("make_grid: lx, ly, dx, dy must all be positive");
  }

  auto intervals = [](double len, double h, char axis) -> int {
    const double q = len / h;
    const double rounded = std::round(q);
    if (std::abs(q - rounded) > 1e-9 * std::max(1.0, std::abs(q))) {
      std::ostringstream msg;
      msg << "make_grid: mesh size does not tile the domain along " << axis
          << " (" << len << "/" << h << " = " << q << " is not integral)";
      throw NonTilingMesh(msg.str());
    }
    return static_cast<int>(rounded);
  };

  const int mx = intervals(lx, dx, 'x');
  const int my = intervals(ly, dy, 'y');
  if (mx < 2 || my < 2) {
    throw NonTilingMesh("make_grid: mesh leaves no interior nodes");
  }

  Grid2D g;
  g.lx = lx;
  g.ly = ly;
  g.nx = mx - 1;
  g.ny = my - 1;
  // Snap so the tiling invariant holds exactly.
  g.dx = lx / mx;
  g.dy = ly / my;
  return g;
}

bool Field::all_finite() const {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

double inner_product(const Field& f, const Field& g) {
  if (f.grid != g.grid) {
    throw GridMismatch("inner_product: fields live on different grids");
  }
  double acc = 0.0;
  const size_t n = f.values.size();
  for (size_t k = 0; k < n; ++k) {
    acc += f.values[k] * g.values[k];
  }
  return f.grid.cell_area() * acc;
}

double norm(const Field& f, NormKind kind) {
  switch (kind) {
    case NormKind::L2:
      return std::sqrt(inner_product(f, f));
    case NormKind::Linf: {
      double m = 0.0;
      for (double v : f.values) m = std::max(m, std::abs(v));
      return m;
    }
  }
  return 0.0;  // unreachable
}

}  // namespace sparseid
