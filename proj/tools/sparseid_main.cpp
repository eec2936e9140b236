// Command-line front end: identify | forward | bench | meshstudy.
//
// Exit codes: 0 success, 1 usage/config error, 2 non-convergence,
// 3 empty recovery, 4 internal numeric failure.

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <thread>
#include <vector>

#include "sparseid/config.hpp"
#include "sparseid/experiments.hpp"
#include "sparseid/field_io.hpp"

namespace fs = std::filesystem;
using namespace sparseid;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitEmptyRecovery = 3;
constexpr int kExitNumeric = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config file")->required();
  cmd->add_option("--out", args.out_dir, "output directory (created if missing)");
  cmd->add_option("--set", args.overrides, "override config entries as key=value");
  cmd->add_flag("--quiet", args.quiet, "suppress provenance notes");
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) {
    throw IoFailure("cannot create output directory '" + dir + "': " + ec.message());
  }
  return p;
}

void print_provenance(const ExperimentSpec& spec, bool quiet) {
  if (quiet) return;
  for (const std::string& note : spec.provenance) {
    std::clog << "[config] " << note << "\n";
  }
}

/// Plot-ready data: `x y value` rows, one blank line between y-slices.
void dump_plot_data(const Field& f, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open '" + path.string() + "' for writing");
  const Grid2D& g = f.grid;
  char buf[96];
  for (int j = 1; j <= g.ny; ++j) {
    for (int i = 1; i <= g.nx; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", g.x(i), g.y(j), f.at(i, j));
      out << buf;
    }
    out << "\n";
  }
}

void write_plot_stub(const fs::path& dir) {
  std::ofstream out(dir / "plot.gp");
  out << "# gnuplot stub for the emitted .dat surfaces\n"
         "# usage: gnuplot -e \"datafile='u0_star.dat'\" plot.gp\n"
         "if (!exists(\"datafile\")) datafile = 'u0_star.dat'\n"
         "set view map\n"
         "set size ratio -1\n"
         "splot datafile using 1:2:3 with pm3d notitle\n"
         "pause -1\n";
}

/// Runs fn(0..n-1) on a bounded pool; artifact emission stays in the caller.
void run_indexed_parallel(size_t n, const std::function<void(size_t)>& fn) {
  if (n == 0) return;
  const size_t workers = std::min<size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
  if (workers == 1) {
    for (size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (size_t k = next.fetch_add(1); k < n; k = next.fetch_add(1)) fn(k);
    });
  }
  for (auto& t : pool) t.join();
}

int report_exit_code(const Report& rep) {
  if (rep.error_kind == "config") return kExitConfig;
  if (rep.error_kind == "empty_recovery") return kExitEmptyRecovery;
  if (rep.error_kind == "numeric") return kExitNumeric;
  return rep.converged ? kExitOk : kExitNoConvergence;
}

int cmd_identify(const CommonArgs& args) {
  const ExperimentSpec spec = parse_config(args.config_path, args.overrides);
  print_provenance(spec, args.quiet);
  const fs::path out = prepare_out_dir(args.out_dir);

  ExperimentArtifacts artifacts;
  const Report rep = run_experiment(spec.problem, &artifacts);

  {
    std::ofstream rout(out / "report.json");
    if (!rout) throw IoFailure("cannot write report.json");
    rout << report_to_json(rep) << "\n";
  }
  if (artifacts.target) {
    dump_field(*artifacts.target, "target", out / "target.csv");
    dump_plot_data(*artifacts.target, out / "target.dat");
  }
  if (artifacts.u0_star) {
    dump_field(*artifacts.u0_star, "u0_star", out / "u0_star.csv");
    dump_plot_data(*artifacts.u0_star, out / "u0_star.dat");
  }
  if (artifacts.final_state) {
    dump_field(*artifacts.final_state, "final_state", out / "final_state.csv");
    dump_plot_data(*artifacts.final_state, out / "final_state.dat");
  }
  if (!rep.empty_recovery && rep.error.empty()) {
    dump_source(rep.recovered, out / "source.txt");
  }
  write_plot_stub(out);

  if (!rep.error.empty()) {
    std::cerr << "identify: " << rep.error << "\n";
  }
  std::cout << "identify: case " << rep.case_label << ", " << rep.scenario << ", "
            << rep.algorithm << ": " << rep.iterations << " iterations, "
            << (rep.converged ? "converged" : "not converged") << ", "
            << rep.recovered.atoms.size() << " atoms recovered\n";
  if (rep.metrics) {
    std::cout << "  final misfit " << std::scientific << std::setprecision(3)
              << rep.metrics->final_misfit << ", location error "
              << rep.metrics->location_error_cells << " cells\n";
  }
  std::cout << "artifacts written to " << out.string() << "\n";
  return report_exit_code(rep);
}

int cmd_forward(const CommonArgs& args) {
  const ExperimentSpec spec = parse_config(args.config_path, args.overrides);
  print_provenance(spec, args.quiet);
  const fs::path out = prepare_out_dir(args.out_dir);

  const ProblemConfig& cfg = spec.problem;
  const TimeStepOperator op = assemble_operator(cfg.grid(), cfg.coeffs, cfg.dt, cfg.nsteps());
  const Field uT = make_target(cfg, op);

  dump_field(uT, "target", out / "target.csv");
  dump_plot_data(uT, out / "target.dat");
  write_plot_stub(out);
  std::cout << "forward: wrote " << (out / "target.csv").string() << " (" << cfg.nsteps()
            << " steps, "
            << (cfg.scenario.kind == ScenarioSpec::Kind::Noisy ? "noisy" : "reachable") << ")\n";
  return kExitOk;
}

struct VariantRow {
  std::string name;
  Report report;
};

int cmd_bench(const CommonArgs& args) {
  const ExperimentSpec spec = parse_config(args.config_path, args.overrides);
  print_provenance(spec, args.quiet);
  const fs::path out = prepare_out_dir(args.out_dir);

  std::vector<VariantRow> rows(spec.bench_variants.size());
  std::vector<ProblemConfig> configs(spec.bench_variants.size());
  for (size_t k = 0; k < spec.bench_variants.size(); ++k) {
    const std::string& name = spec.bench_variants[k];
    std::vector<std::string> ov = args.overrides;
    if (name == "cp") {
      ov.push_back("algorithm=pdhg");
      ov.push_back("pdhg.rho=1.0");
      ov.push_back("pdhg.sigma=1.0");
    } else if (name == "alg1") {
      ov.push_back("algorithm=pdhg");
    } else {
      ov.push_back("algorithm=gd");
    }
    configs[k] = parse_config(args.config_path, ov).problem;
    rows[k].name = name;
  }

  run_indexed_parallel(rows.size(), [&](size_t k) { rows[k].report = run_experiment(configs[k]); });

  std::ofstream csv(out / "bench.csv");
  if (!csv) throw IoFailure("cannot write bench.csv");
  csv << "variant,iterations,final_residual,cpu_s,converged,error\n";
  std::cout << "variant   iter   err        cpu[s]   status\n";
  size_t ok = 0;
  for (const VariantRow& row : rows) {
    const Report& r = row.report;
    const double err = r.residual_history.empty() ? 0.0 : r.residual_history.back();
    csv << row.name << ',' << r.iterations << ',' << std::scientific << std::setprecision(6)
        << err << ',' << r.wall_time_s << ',' << (r.converged ? 1 : 0) << ",\"" << r.error
        << "\"\n";
    std::cout << std::left << std::setw(10) << row.name << std::right << std::setw(4)
              << r.iterations << "   " << std::scientific << std::setprecision(2) << err << "   "
              << std::fixed << std::setprecision(3) << r.wall_time_s << "    "
              << (r.error.empty() ? (r.converged ? "converged" : "kmax reached")
                                  : ("failed: " + r.error))
              << "\n";
    if (r.error.empty()) ++ok;
  }
  std::cout << "table written to " << (out / "bench.csv").string() << "\n";
  return ok > 0 ? kExitOk : kExitNumeric;
}

int cmd_meshstudy(const CommonArgs& args) {
  const ExperimentSpec spec = parse_config(args.config_path, args.overrides);
  print_provenance(spec, args.quiet);
  const fs::path out = prepare_out_dir(args.out_dir);

  struct MeshRow {
    double dt = 0.0, dx = 0.0;
    Report report;
    std::string error;
  };
  std::vector<MeshRow> rows(spec.mesh_pairs.size());
  std::vector<ProblemConfig> configs(spec.mesh_pairs.size());
  for (size_t k = 0; k < spec.mesh_pairs.size(); ++k) {
    rows[k].dt = spec.mesh_pairs[k].first;
    rows[k].dx = spec.mesh_pairs[k].second;
    std::vector<std::string> ov = args.overrides;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "pde.dt=%.17g", rows[k].dt);
    ov.push_back(buf);
    std::snprintf(buf, sizeof(buf), "grid.dx=%.17g", rows[k].dx);
    ov.push_back(buf);
    std::snprintf(buf, sizeof(buf), "grid.dy=%.17g", rows[k].dx);
    ov.push_back(buf);
    try {
      configs[k] = parse_config(args.config_path, ov).problem;
    } catch (const Error& e) {
      rows[k].error = e.what();
    }
  }

  run_indexed_parallel(rows.size(), [&](size_t k) {
    if (rows[k].error.empty()) rows[k].report = run_experiment(configs[k]);
  });

  std::ofstream csv(out / "meshstudy.csv");
  if (!csv) throw IoFailure("cannot write meshstudy.csv");
  csv << "dt,dx,iterations,converged,error\n";
  std::cout << "dt       dx        iter   status\n";
  for (const MeshRow& row : rows) {
    const std::string err = !row.error.empty() ? row.error : row.report.error;
    csv << row.dt << ',' << row.dx << ',' << row.report.iterations << ','
        << (row.report.converged ? 1 : 0) << ",\"" << err << "\"\n";
    std::cout << std::fixed << std::setprecision(4) << row.dt << "   " << row.dx << "   "
              << std::setw(4) << row.report.iterations << "   "
              << (err.empty() ? (row.report.converged ? "converged" : "kmax reached")
                              : ("failed: " + err))
              << "\n";
  }
  std::cout << "table written to " << (out / "meshstudy.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse initial-source identification for 2D diffusion-advection problems"};
  app.require_subcommand(1);

  CommonArgs identify_args, forward_args, bench_args, mesh_args;
  CLI::App* identify = app.add_subcommand("identify", "run the two-stage identification pipeline");
  add_common(identify, identify_args);
  CLI::App* forward = app.add_subcommand("forward", "generate the target observation field");
  add_common(forward, forward_args);
  CLI::App* bench = app.add_subcommand("bench", "compare solver variants on one problem");
  add_common(bench, bench_args);
  CLI::App* mesh = app.add_subcommand("meshstudy", "iteration counts across mesh sizes");
  add_common(mesh, mesh_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (identify->parsed()) return cmd_identify(identify_args);
    if (forward->parsed()) return cmd_forward(forward_args);
    if (bench->parsed()) return cmd_bench(bench_args);
    if (mesh->parsed()) return cmd_meshstudy(mesh_args);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SemanticError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnknownCase& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NonTilingMesh& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitConfig;
}
