#pragma once

#include <iosfwd>

namespace unetaf::cli {

/// Runs the desk-scale invariant suite, printing one PASS/FAIL line per
/// property. Returns true when every property holds.
bool run_selftest(bool single_precision, std::ostream& out);

} // namespace unetaf::cli
