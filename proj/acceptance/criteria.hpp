#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cogmac::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Run the requested criteria (all of them when ids is empty). Scratch space
/// is used by the determinism criterion for its output files.
std::vector<CriterionResult> run_criteria(const std::vector<int>& ids,
                                          const std::string& scratch_dir);

/// One line per criterion; returns the number of failures.
int print_results(const std::vector<CriterionResult>& results, std::ostream& out);

}  // namespace cogmac::acceptance
