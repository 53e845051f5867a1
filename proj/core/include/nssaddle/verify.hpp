#pragma once

#include <string>
#include <vector>

namespace nssaddle {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;   // deterministic measured values
  double seconds = 0;   // wall time, reporting only (never serialized)
};

struct VerifyOptions {
  std::vector<int> criteria;  // empty = all
  int jobs = 0;
  bool quick = false;         // reduced deterministic grids
  std::string artifact_dir;   // when nonempty, CSV/SVG artifacts are written here
};

struct VerificationReport {
  std::vector<CriterionResult> results;
  bool all_pass = false;
  std::string combined_csv;   // deterministic concatenation of criterion CSVs

  // Machine-readable summary; deterministic (timings excluded).
  std::string to_json() const;
};

VerificationReport run_verification(const VerifyOptions& opts);

}  // namespace nssaddle
