#pragma once

#include <stdexcept>
#include <string>

namespace scriptdrift {

/// Runtime failure tagged with the module that raised it. `what()` renders
/// as "module: message", which is what the CLI prints on exit code 1.
class Error : public std::runtime_error {
public:
  Error(std::string module, const std::string& message)
      : std::runtime_error(module + ": " + message), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

private:
  std::string module_;
};

}  // namespace scriptdrift
