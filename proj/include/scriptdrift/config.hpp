#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "scriptdrift/evm.hpp"
#include "scriptdrift/metrics.hpp"
#include "scriptdrift/runner.hpp"
#include "scriptdrift/testgen.hpp"

namespace scriptdrift {

inline constexpr int kConfigSchemaVersion = 1;

/// Tool-wide settings: built-in defaults, then the config file, then
/// SCRIPTDRIFT_<SECTION>_<KEY> environment variables (values parsed as JSON,
/// falling back to a plain string). Unknown keys are rejected at every layer.
class Config {
public:
  Config();

  static nlohmann::ordered_json defaults();

  void merge_file(const std::filesystem::path& path);
  void merge_json(const nlohmann::json& overrides, const std::string& origin);
  void merge_environment(const std::map<std::string, std::string>& env);

  /// Reads SCRIPTDRIFT_* variables from the process environment.
  static std::map<std::string, std::string> process_environment();

  const nlohmann::ordered_json& effective() const { return values_; }

  std::uint64_t seed() const;
  unsigned jobs() const;
  EvmHyperparams evm() const;
  TestgenConfig testgen() const;
  RunnerConfig runner() const;
  NmiVariant nmi_variant() const;
  std::size_t evaluation_window() const;
  std::string extractor() const;

  void set_seed(std::uint64_t seed) { values_["seed"] = seed; }
  void set_jobs(unsigned jobs) { values_["jobs"] = jobs; }

private:
  nlohmann::ordered_json values_;
};

}  // namespace scriptdrift
