#pragma once

#include <filesystem>
#include <string>

#include "sparseid/grid.hpp"

namespace sparseid {

/// Writes a field as CSV: a grid header line, a field-name line, then
/// nx*ny lines of `i,j,value` with i fastest-varying and values printed
/// with 17 significant digits (lossless for double).
void dump_field(const Field& f, const std::string& name, const std::filesystem::path& path);

/// Reads a field written by dump_field. The loaded values round-trip
/// bit-exactly. If `name_out` is non-null it receives the stored name.
Field load_field(const std::filesystem::path& path, std::string* name_out = nullptr);

}  // namespace sparseid
