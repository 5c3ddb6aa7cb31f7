#pragma once

#include <span>
#include <string>

namespace metamat::cli {

// One row of the reference design tables, kept at its printed 4-digit precision.
struct ReferenceRow {
  int table;
  double k;
  double epsilon;
  int m;
  double M;
  double a;
  double ratio;
  double E;
};

std::span<const ReferenceRow> reference_rows();

// Preset used by each table: ex1..ex4.
std::string table_preset(int table);

// Relative tolerances for comparisons against the reference rows.
inline constexpr double kStructureTolerance = 2e-3;  // m, M, a
inline constexpr double kErrorTolerance = 1e-2;      // E

}  // namespace metamat::cli
