#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace stoptime {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

// The verification suites behind `verify --suite ...`:
//   norms          antichain census, norm-engine equivalence, duality,
//                  dual-unit summability
//   operators      embedding operator certificates
//   ramsey         monochromatic subtree searches
//   game           reproducibility games, sign selection, diagonal dichotomy
//   factorization  the diagonalisation pipeline
//   all            everything above
std::vector<CriterionResult> run_verify_suite(const std::string& suite, std::uint64_t seed);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace stoptime
