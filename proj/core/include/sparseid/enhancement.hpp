#pragma once

#include <filesystem>
#include <vector>

#include "sparseid/operator.hpp"

namespace sparseid {

struct GridNode {
  int i = 0;
  int j = 0;
  bool operator==(const GridNode&) const = default;
  auto operator<=>(const GridNode&) const = default;  // lexicographic (i, j)
};

struct SourceAtom {
  double x = 0.0;
  double y = 0.0;
  double intensity = 0.0;
};

/// Finite combination of point sources, sorted lexicographically by (x, y).
struct SparseSource {
  std::vector<SourceAtom> atoms;

  void sort();
};

/// Sum of discrete deltas for all atoms on the given grid.
Field source_to_field(const SparseSource& src, const Grid2D& grid);

/// Local maxima of |u0| above rel_threshold * max|u0|, using 8-neighborhoods
/// truncated at the boundary. A maximum must dominate all neighbors and
/// strictly exceed at least one; a plateau of equal values reports only its
/// lexicographically smallest node.
std::vector<GridNode> find_local_maxima(const Field& u0, double rel_threshold);

/// Final states of unit deltas placed at the candidate locations; one
/// forward solve per column.
struct ResponseMatrix {
  Grid2D grid;
  std::vector<GridNode> locations;
  std::vector<Field> columns;
};

ResponseMatrix build_response_matrix(const TimeStepOperator& op,
                                     const std::vector<GridNode>& locations);

/// Solves the normal equation (L^T L) alpha = L^T uT with the weighted Gram
/// matrix; rejects near-singular systems (condition estimate > 1e12).
std::vector<double> solve_intensities(const ResponseMatrix& R, const Field& uT);

/// Composition: locate maxima of |u0_star|, build the response matrix, and
/// fit intensities by least squares.
SparseSource enhance(const Field& u0_star, const TimeStepOperator& op,
                     const Field& uT, double rel_threshold = 0.1);

/// Text serialization: header `# atoms <l>` then `x,y,intensity` lines with
/// 17 significant digits.
void dump_source(const SparseSource& src, const std::filesystem::path& path);
SparseSource load_source(const std::filesystem::path& path);

}  // namespace sparseid
