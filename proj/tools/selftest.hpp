#ifndef SEPSTEIN_TOOLS_SELFTEST_HPP
#define SEPSTEIN_TOOLS_SELFTEST_HPP

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>

namespace sepstein::cli {

// Runs every library invariant suite under the given seed and returns the
// summary (per-suite pass flag, check count, slack extrema, failure notes).
// Sets *all_pass accordingly. level is "full" or "quick".
nlohmann::json run_selftest(std::uint64_t seed, const std::string& level, bool* all_pass);

}  // namespace sepstein::cli

#endif
