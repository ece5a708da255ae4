#pragma once

#include "campopt/milp/model.hpp"

#include <iosfwd>
#include <string>

namespace campopt::milp {

// Emits the model as industry-standard LP-format text (Minimize / Subject To
// / Bounds / Generals / End). Coefficients are printed with enough digits to
// round-trip doubles exactly. Variable names are sanitized to the LP-safe
// character set; a name map comment is emitted when sanitization changed one.
std::string export_model(const MilpModel& model);

// Parses LP-format text produced by export_model (and the common hand-written
// dialect: minimize objective, <=/=/>= rows, bounds, generals, binaries).
// Throws std::runtime_error with a line number on malformed input.
MilpModel parse_lp_text(const std::string& text);

MilpModel load_lp_file(const std::string& path);
void save_lp_file(const MilpModel& model, const std::string& path);

} // namespace campopt::milp
