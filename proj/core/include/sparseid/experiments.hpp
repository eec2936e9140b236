#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sparseid/enhancement.hpp"
#include "sparseid/gd.hpp"
#include "sparseid/pdhg.hpp"

namespace sparseid {

enum class CaseId { I, II, III };

std::string to_string(CaseId c);

struct ScenarioSpec {
  enum class Kind { Reachable, Noisy };
  Kind kind = Kind::Reachable;
  double level = 0.0;       // relative L2 noise level in [0,1)
  std::uint64_t seed = 0;   // mt19937_64 seed for the noise draw
};

enum class AlgorithmKind { Pdhg, Gd };

/// Reference initial datum used throughout the experiments:
/// 100 d(1.5,0.5) + 85 d(1,0.75) + 60 d(0.5,0.5) + 90 d(0.75,0.25).
SparseSource reference_source();

/// Fully resolved description of one identification experiment.
struct ProblemConfig {
  double lx = 2.0, ly = 1.0;
  double dx = 0.05, dy = 0.05;
  double dt = 0.05;
  double T = 0.1;
  Coefficients coeffs;
  std::optional<CaseId> case_id;
  SparseSource reference;
  ScenarioSpec scenario;
  AlgorithmKind algorithm = AlgorithmKind::Pdhg;
  PdhgParams pdhg;
  GdParams gd;
  double enhance_rel_threshold = 0.1;
  bool diagnostics = false;
  std::optional<std::string> init_u0_path;  // field file; default zero
  std::optional<std::string> init_p_path;

  int nsteps() const;  // T/dt, integral within 1e-9; throws SemanticError
  Grid2D grid() const { return make_grid(lx, ly, dx, dy); }
};

/// Coefficient layouts of the three standard cases, with the reference
/// source attached and default algorithm parameters (beta = dx^4).
ProblemConfig make_case(CaseId id, double lx, double ly, double dx, double dy,
                        double dt, double T);
ProblemConfig make_case(CaseId id);  // reference geometry and mesh

/// Target observation: the reachable final state of the reference source,
/// plus (for noisy scenarios) a seeded Gaussian perturbation rescaled so
/// that ||uT - L u0|| = level * ||L u0|| exactly.
Field make_target(const ProblemConfig& config);
Field make_target(const ProblemConfig& config, const TimeStepOperator& op);

struct Metrics {
  bool atom_count_match = false;
  double location_error_cells = 0.0;  // max over reference atoms, +inf if unmatched
  std::vector<double> intensity_rel_errors;
  double final_misfit = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
};

/// Greedy closest-pair matching from reference to recovered atoms; distances
/// are Chebyshev node distances in mesh cells.
Metrics evaluate(const SparseSource& recovered, const SparseSource& reference,
                 const Field& uT, const TimeStepOperator& op);

struct Report {
  std::string case_label;       // "I", "II", "III" or "custom"
  std::string scenario;         // "reachable" or "noisy"
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  Grid2D grid;
  double dt = 0.0;
  double T = 0.0;
  int nsteps = 0;
  std::string algorithm;        // "pdhg" or "gd"
  PdhgParams pdhg;              // effective values (s resolved) when algorithm == pdhg
  GdParams gd;                  // effective values (eta resolved) when algorithm == gd
  double opnorm = 0.0;
  bool opnorm_converged = false;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;
  std::optional<std::vector<double>> diag_knorm_history;
  SparseSource recovered;
  bool empty_recovery = false;
  std::optional<Metrics> metrics;
  double wall_time_s = 0.0;
  std::string error;            // empty on success
  std::string error_kind;       // "", "empty_recovery", "numeric", "config"
};

/// Grid-function outputs of a pipeline run, for artifact emission.
struct ExperimentArtifacts {
  std::optional<Field> target;       // uT actually used
  std::optional<Field> u0_star;      // optimizer output
  std::optional<Field> final_state;  // forward solve of the recovered source
};

/// Full pipeline: target generation -> optimizer -> enhancement -> metrics.
/// Component failures are captured in the report rather than thrown, so
/// sibling runs in a batch are unaffected.
Report run_experiment(const ProblemConfig& config, ExperimentArtifacts* artifacts = nullptr);

/// JSON serialization of a report (schema documented in the README).
std::string report_to_json(const Report& report);
Report report_from_json(const std::string& text);

}  // namespace sparseid
