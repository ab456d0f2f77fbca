#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace expfam {

struct VerifyOptions {
  std::string suite = "all";  // convexity | identities | legendre | deformation | all
  std::string family;         // empty: every built-in family
  std::uint64_t seed = 13;
};

// Runs the named identity/property suites and returns a deterministic JSON
// summary: one row per named check with the maximum observed error, its
// tolerance and a pass flag. Identical options produce identical output.
nlohmann::json run_verify(const VerifyOptions& options);

}  // namespace expfam
