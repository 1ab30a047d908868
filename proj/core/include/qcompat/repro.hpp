#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Reproduction suite: each case regenerates one desk-scale number or
// qualitative claim end to end and compares it against the expected value at
// a fixed tolerance.

namespace qcompat {

struct CaseResult {
  std::string name;
  bool pass = false;
  std::string expected;
  std::string computed;
  std::string tolerance;
  std::string details;
  double seconds = 0.0;
};

std::vector<std::string> repro_case_names();

// Throws std::invalid_argument for unknown names.
CaseResult run_repro_case(const std::string& name, std::uint64_t seed = 0);

std::vector<CaseResult> run_all_repro_cases(std::uint64_t seed = 0);

}  // namespace qcompat
