#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sparseid/experiments.hpp"

namespace sparseid {

/// A parsed experiment description plus the batch settings used by the
/// bench and meshstudy commands.
struct ExperimentSpec {
  ProblemConfig problem;
  std::vector<std::string> bench_variants;           // subset of {cp, alg1, gd}
  std::vector<std::pair<double, double>> mesh_pairs;  // (dt, dx) rows
  std::vector<std::string> provenance;                // one note per applied default
};

/// Parses the dotted key=value config format (see README) and applies
/// `overrides` ("key=value" strings) on top of the file content. Every
/// default that fires is recorded in the returned provenance notes.
ExperimentSpec parse_config(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides = {});

/// Same, but from an in-memory string (used by tests).
ExperimentSpec parse_config_text(const std::string& text,
                                 const std::vector<std::string>& overrides = {});

}  // namespace sparseid
