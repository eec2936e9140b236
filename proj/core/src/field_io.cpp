#include "sparseid/field_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sparseid {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string sanitize_name(const std::string& name) {
  std::string out = name.empty() ? std::string("field") : name;
  for (char& c : out) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') c = '_';
  }
  return out;
}

}  // namespace

void dump_field(const Field& f, const std::string& name, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoFailure("dump_field: cannot open '" + path.string() + "' for writing");
  }
  const Grid2D& g = f.grid;
  out << "# grid lx=" << fmt17(g.lx) << " ly=" << fmt17(g.ly)
      << " dx=" << fmt17(g.dx) << " dy=" << fmt17(g.dy)
      << " nx=" << g.nx << " ny=" << g.ny << "\n";
  out << "# field " << sanitize_name(name) << "\n";
  for (int j = 1; j <= g.ny; ++j) {
    for (int i = 1; i <= g.nx; ++i) {
      out << i << ',' << j << ',' << fmt17(f.at(i, j)) << "\n";
    }
  }
  out.flush();
  if (!out) {
    throw IoFailure("dump_field: write to '" + path.string() + "' failed");
  }
}

Field load_field(const std::filesystem::path& path, std::string* name_out) {
  std::ifstream in(path);
  if (!in) {
    throw IoFailure("load_field: cannot open '" + path.string() + "'");
  }

  std::string line;
  if (!std::getline(in, line)) {
    throw FormatViolation("load_field: empty file '" + path.string() + "'");
  }
  double lx, ly, dx, dy;
  int nx, ny;
  if (std::sscanf(line.c_str(), "# grid lx=%lf ly=%lf dx=%lf dy=%lf nx=%d ny=%d",
                  &lx, &ly, &dx, &dy, &nx, &ny) != 6) {
    throw FormatViolation("load_field: bad grid header: " + line);
  }

  Grid2D grid;
  try {
    grid = make_grid(lx, ly, dx, dy);
  } catch (const NonTilingMesh& e) {
    throw FormatViolation(std::string("load_field: header describes an invalid grid: ") + e.what());
  }
  if (grid.nx != nx || grid.ny != ny) {
    std::ostringstream msg;
    msg << "load_field: declared node counts (" << nx << "," << ny
        << ") do not match the grid derived from lx,ly,dx,dy ("
        << grid.nx << "," << grid.ny << ")";
    throw FormatViolation(msg.str());
  }

  if (!std::getline(in, line)) {
    throw FormatViolation("load_field: missing field-name header");
  }
  {
    std::istringstream hs(line);
    std::string hash, kw, name;
    hs >> hash >> kw >> name;
    if (hash != "#" || kw != "field" || name.empty()) {
      throw FormatViolation("load_field: bad field header: " + line);
    }
    if (name_out) *name_out = name;
  }

  Field f(grid);
  int count = 0;
  const int total = grid.size();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int i, j;
    double v;
    if (std::sscanf(line.c_str(), "%d,%d,%lf", &i, &j, &v) != 3) {
      throw FormatViolation("load_field: bad data line: " + line);
    }
    if (count >= total) {
      throw FormatViolation("load_field: more data lines than nx*ny nodes");
    }
    const int expect_i = count % grid.nx + 1;
    const int expect_j = count / grid.nx + 1;
    if (i != expect_i || j != expect_j) {
      std::ostringstream msg;
      msg << "load_field: node order violation at line for (" << i << "," << j
          << "); expected (" << expect_i << "," << expect_j << ")";
      throw FormatViolation(msg.str());
    }
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "load_field: non-finite value at node (" << i << "," << j << ")";
      throw FormatViolation(msg.str());
    }
    f.at(i, j) = v;
    ++count;
  }
  if (count != total) {
    std::ostringstream msg;
    msg << "load_field: expected " << total << " values, found " << count;
    throw FormatViolation(msg.str());
  }
  return f;
}

}  // namespace sparseid
