#pragma once

#include <string>
#include <utility>
#include <vector>

namespace semidisc::cli {

struct AcceptanceOptions {
  double newton_tol = 1e-12;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;  ///< runtime limit; exceeding it fails the criterion
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

/// "PASS  4  energy behaviour  (0.93 s / 30 s)  detail"
std::string format_result(const CriterionResult& r);

/// Built-in reference configurations, as (file name, JSON text). The files
/// under configs/ carry the same documents.
const std::vector<std::pair<std::string, std::string>>& reference_configs();

}  // namespace semidisc::cli
