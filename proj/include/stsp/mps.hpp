#pragma once

#include <map>
#include <string>

#include "stsp/milp.hpp"

namespace stsp {

struct MpsResult {
  std::string text;
  // mangled -> original, for every name that had to be rewritten to fit the
  // 8-character fixed-format fields. Empty when nothing was renamed.
  std::map<std::string, std::string> renamed;
};

// Fixed-format MPS with NAME/OBJSENSE/ROWS/COLUMNS/RHS/RANGES/BOUNDS/ENDATA.
// One (row, value) pair per COLUMNS line; integer variables wrapped in
// INTORG/INTEND markers. export -> parse -> export is byte-identical.
MpsResult export_mps(const MilpModel& model);

MilpModel parse_mps(const std::string& text);

}  // namespace stsp
