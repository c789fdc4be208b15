#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace scriptdrift {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 0;
  std::set<int> only;                       // empty = all criteria
  std::optional<double> threshold_override;  // replaces the calibrated threshold in the EVM benchmark
  std::filesystem::path work_dir;           // scratch space for the pipeline reruns
  unsigned jobs = 1;
};

/// Runs the synthetic acceptance criteria in order, reporting each as it finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

std::string format_result(const CriterionResult& result);

}  // namespace scriptdrift
