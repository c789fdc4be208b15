#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "scriptdrift/cli.hpp"
#include "scriptdrift/config.hpp"
#include "scriptdrift/error.hpp"
#include "scriptdrift/synthetic.hpp"
#include "scriptdrift/util.hpp"

using namespace scriptdrift;

namespace {

int cli(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  std::ostringstream o, e;
  const int code = run_cli(args, o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

}  // namespace

TEST_CASE("config layering") {
  Config c;
  CHECK(c.evm().tail_size == 1000);
  c.merge_json({{"evm", {{"tail_size", 50}}}}, "test");
  CHECK(c.evm().tail_size == 50);
  c.merge_environment({{"SCRIPTDRIFT_EVM_TAIL_SIZE", "70"}, {"SCRIPTDRIFT_SEED", "12"}});
  CHECK(c.evm().tail_size == 70);
  CHECK(c.seed() == 12);
  CHECK_THROWS_AS(c.merge_json({{"evm", {{"tail", 1}}}}, "test"), Error);
  CHECK_THROWS_AS(c.merge_json({{"evm", {{"tail_size", "many"}}}}, "test"), Error);
  CHECK_THROWS_AS(c.merge_environment({{"SCRIPTDRIFT_NOPE", "1"}}), Error);
}

TEST_CASE("cli usage errors exit 2") {
  std::string err;
  CHECK(cli({"measure", "--bogus"}, nullptr, &err) == 2);
  CHECK(err.find("usage") != std::string::npos);
  CHECK(cli({}) == 2);
  std::string out;
  CHECK(cli({"--version"}, &out) == 0);
  CHECK(out.find(kToolVersion) != std::string::npos);
}

TEST_CASE("cli train writes an EVM1 model and gen-tests honours --specs-only") {
  const auto dir = scratch("cli");
  write_synthetic_corpus(dir / "c", {3, 1, 6, 3, 2});
  const auto m = (dir / "c" / "manifest.jsonl").string();
  REQUIRE(cli({"featurize", "--manifest", m, "--out", (dir / "f.bin").string()}) == 0);
  REQUIRE(cli({"train", "--features", (dir / "f.bin").string(), "--labels", m, "--out", (dir / "m.evm").string()}) ==
          0);
  const auto bytes = read_file_bytes(dir / "m.evm", "test");
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "EVM1");
  REQUIRE(cli({"gen-tests", "--specs-only", "--out", (dir / "t").string()}) == 0);
  const auto specs = read_text_file(dir / "t" / "specs.jsonl", "test");
  CHECK(std::count(specs.begin(), specs.end(), '\n') == 3888);
  std::string err;
  CHECK(cli({"measure", "--manifest", (dir / "missing.jsonl").string(), "--out", (dir / "s.csv").string()}, nullptr,
            &err) != 0);
}
