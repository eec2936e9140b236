#include "sparseid/enhancement.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

namespace sparseid {

void SparseSource::sort() {
  std::sort(atoms.begin(), atoms.end(), [](const SourceAtom& a, const SourceAtom& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
}

Field source_to_field(const SparseSource& src, const Grid2D& grid) {
  Field f(grid);
  for (const auto& atom : src.atoms) {
    const Field d = discrete_delta(grid, atom.x, atom.y, atom.intensity);
    for (size_t k = 0; k < f.values.size(); ++k) f.values[k] += d.values[k];
  }
  return f;
}

std::vector<GridNode> find_local_maxima(const Field& u0, double rel_threshold) {
  if (!(rel_threshold > 0.0) || !(rel_threshold < 1.0)) {
    throw SemanticError("find_local_maxima: rel_threshold must lie in (0,1)");
  }
  const Grid2D& g = u0.grid;
  const double peak = norm_linf(u0);
  if (peak == 0.0) {
    throw EmptyField("find_local_maxima: field is identically zero");
  }
  const double floor = rel_threshold * peak;

  auto mag = [&](int i, int j) { return std::abs(u0.at(i, j)); };

  std::vector<GridNode> candidates;
  for (int j = 1; j <= g.ny; ++j) {
    for (int i = 1; i <= g.nx; ++i) {
      const double m = mag(i, j);
      if (!(m > floor)) continue;
      bool dominates = true;
      bool strict = false;
      int neighbors = 0;
      for (int dj = -1; dj <= 1 && dominates; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          const int ni = i + di;
          const int nj = j + dj;
          if (ni < 1 || ni > g.nx || nj < 1 || nj > g.ny) continue;
          ++neighbors;
          const double nm = mag(ni, nj);
          if (nm > m) {
            dominates = false;
            break;
          }
          if (nm < m) strict = true;
        }
      }
      if (dominates && (strict || neighbors == 0)) {
        candidates.push_back({i, j});
      }
    }
  }
  if (candidates.empty()) {
    throw NoMaxima("find_local_maxima: threshold excludes every candidate node");
  }

  // Collapse plateaus: keep only the lexicographically smallest node of each
  // 8-connected component of equal-magnitude candidates.
  std::set<GridNode> candidate_set(candidates.begin(), candidates.end());
  std::set<GridNode> visited;
  std::vector<GridNode> result;
  for (const GridNode& seed : candidates) {
    if (visited.count(seed)) continue;
    const double m0 = mag(seed.i, seed.j);
    GridNode best = seed;
    std::deque<GridNode> queue{seed};
    visited.insert(seed);
    while (!queue.empty()) {
      const GridNode cur = queue.front();
      queue.pop_front();
      if (cur < best) best = cur;
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          const GridNode nb{cur.i + di, cur.j + dj};
          if (!candidate_set.count(nb) || visited.count(nb)) continue;
          if (mag(nb.i, nb.j) != m0) continue;
          visited.insert(nb);
          queue.push_back(nb);
        }
      }
    }
    result.push_back(best);
  }
  std::sort(result.begin(), result.end());
  return result;
}

ResponseMatrix build_response_matrix(const TimeStepOperator& op,
                                     const std::vector<GridNode>& locations) {
  if (locations.empty()) {
    throw SemanticError("build_response_matrix: location list is empty");
  }
  std::set<GridNode> unique(locations.begin(), locations.end());
  if (unique.size() != locations.size()) {
    throw SemanticError("build_response_matrix: duplicate locations");
  }
  const Grid2D& g = op.grid();
  ResponseMatrix R;
  R.grid = g;
  R.locations = locations;
  R.columns.reserve(locations.size());
  for (const GridNode& node : locations) {
    R.columns.push_back(op.forward_solve(discrete_delta(g, g.x(node.i), g.y(node.j), 1.0)));
  }
  return R;
}

std::vector<double> solve_intensities(const ResponseMatrix& R, const Field& uT) {
  const int l = static_cast<int>(R.columns.size());
  Eigen::MatrixXd gram(l, l);
  Eigen::VectorXd rhs(l);
  for (int a = 0; a < l; ++a) {
    for (int b = a; b < l; ++b) {
      gram(a, b) = gram(b, a) = inner_product(R.columns[a], R.columns[b]);
    }
    rhs(a) = inner_product(R.columns[a], uT);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || lmax / lmin > 1e12) {
    std::ostringstream msg;
    msg << "solve_intensities: Gram matrix is numerically singular (condition estimate ";
    if (lmin > 0.0) {
      msg << lmax / lmin;
    } else {
      msg << "infinite";
    }
    msg << "); response columns are nearly coincident";
    throw SingularGram(msg.str());
  }

  const Eigen::VectorXd alpha = Eigen::LLT<Eigen::MatrixXd>(gram).solve(rhs);
  return {alpha.data(), alpha.data() + l};
}

SparseSource enhance(const Field& u0_star, const TimeStepOperator& op,
                     const Field& uT, double rel_threshold) {
  const std::vector<GridNode> nodes = find_local_maxima(u0_star, rel_threshold);
  const ResponseMatrix R = build_response_matrix(op, nodes);
  const std::vector<double> alpha = solve_intensities(R, uT);

  const Grid2D& g = op.grid();
  SparseSource src;
  src.atoms.reserve(nodes.size());
  for (size_t k = 0; k < nodes.size(); ++k) {
    src.atoms.push_back({g.x(nodes[k].i), g.y(nodes[k].j), alpha[k]});
  }
  src.sort();
  return src;
}

void dump_source(const SparseSource& src, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoFailure("dump_source: cannot open '" + path.string() + "' for writing");
  }
  out << "# atoms " << src.atoms.size() << "\n";
  char buf[128];
  for (const auto& a : src.atoms) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", a.x, a.y, a.intensity);
    out << buf;
  }
  out.flush();
  if (!out) {
    throw IoFailure("dump_source: write to '" + path.string() + "' failed");
  }
}

SparseSource load_source(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoFailure("load_source: cannot open '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatViolation("load_source: empty file '" + path.string() + "'");
  }
  size_t count = 0;
  if (std::sscanf(line.c_str(), "# atoms %zu", &count) != 1) {
    throw FormatViolation("load_source: bad header: " + line);
  }
  SparseSource src;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    SourceAtom a;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a.x, &a.y, &a.intensity) != 3) {
      throw FormatViolation("load_source: bad atom line: " + line);
    }
    src.atoms.push_back(a);
  }
  if (src.atoms.size() != count) {
    std::ostringstream msg;
    msg << "load_source: header declares " << count << " atoms, found " << src.atoms.size();
    throw FormatViolation(msg.str());
  }
  return src;
}

}  // namespace sparseid
