#pragma once

#include <vector>

#include "sparseid/errors.hpp"

namespace sparseid {

/// Uniform rectangular grid over (0,lx) x (0,ly) with homogeneous Dirichlet
/// boundary. Only interior nodes are stored: node (i,j), 1 <= i <= nx,
/// 1 <= j <= ny, sits at (i*dx, j*dy); boundary values are identically zero.
struct Grid2D {
  double lx = 0.0;
  double ly = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  int nx = 0;
  int ny = 0;

  double x(int i) const { return i * dx; }
  double y(int j) const { return j * dy; }
  double cell_area() const { return dx * dy; }
  int size() const { return nx * ny; }

  /// Flat offset of node (i,j); i varies fastest.
  int index(int i, int j) const { return (j - 1) * nx + (i - 1); }

  bool operator==(const Grid2D&) const = default;
};

/// Builds a grid, requiring dx and dy to tile the domain exactly.
/// The stored mesh sizes are snapped to lx/(nx+1), ly/(ny+1) so that
/// dx*(nx+1) == lx holds to machine precision.
Grid2D make_grid(double lx, double ly, double dx, double dy);

/// Scalar grid function on interior nodes, stored with i fastest-varying.
struct Field {
  Grid2D grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid2D& g) : grid(g), values(static_cast<size_t>(g.size()), 0.0) {}

  double& at(int i, int j) { return values[static_cast<size_t>(grid.index(i, j))]; }
  double at(int i, int j) const { return values[static_cast<size_t>(grid.index(i, j))]; }

  bool all_finite() const;
};

enum class NormKind { L2, Linf };

/// Cell-area-weighted discrete L2 pairing: dx*dy * sum_ij f_ij g_ij.
double inner_product(const Field& f, const Field& g);

double norm(const Field& f, NormKind kind);
inline double norm_l2(const Field& f) { return norm(f, NormKind::L2); }
inline double norm_linf(const Field& f) { return norm(f, NormKind::Linf); }

}  // namespace sparseid
