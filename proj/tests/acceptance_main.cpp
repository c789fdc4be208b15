// Prints one PASS/FAIL line per acceptance criterion; exit status is the gate.
#include <cstdlib>
#include <iostream>

#include "scriptdrift/acceptance.hpp"

int main(int argc, char** argv) {
  scriptdrift::AcceptanceOptions options;
  options.work_dir = std::filesystem::temp_directory_path() / "scriptdrift-acceptance-ctest";
  options.jobs = 2;
  for (int i = 1; i < argc; ++i) options.only.insert(std::atoi(argv[i]));
  int failed = 0;
  scriptdrift::run_acceptance(options, [&](const scriptdrift::CriterionResult& r) {
    std::cout << scriptdrift::format_result(r) << std::flush;
    failed += !r.pass;
  });
  std::cout << (failed ? std::to_string(failed) + " criteria failed\n" : "all criteria passed\n");
  return failed ? 1 : 0;
}
