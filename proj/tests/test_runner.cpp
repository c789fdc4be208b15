#include <doctest.h>

#include "helpers.hpp"
#include "scriptdrift/error.hpp"
#include "scriptdrift/runner.hpp"
#include "scriptdrift/util.hpp"

using namespace scriptdrift;

namespace {

struct Scripted {
  std::vector<std::string> ids;
  std::map<std::string, double> scores;
};

Scripted stream(std::uint64_t seed, int length, int intro, double pre_mean, double post_mean) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> pre(pre_mean, 0.05), post(post_mean, 0.05);
  Scripted s;
  for (int i = 0; i < length; ++i) {
    s.ids.push_back("s" + std::to_string(i));
    s.scores[s.ids.back()] = i < intro ? pre(rng) : post(rng);
  }
  return s;
}

}  // namespace

TEST_CASE("detection after a shift") {
  int timely = 0;
  for (int t = 0; t < 50; ++t) {
    const auto s = stream(derive_seed(7, std::uint64_t(t)), 512, 256, 0.2, 0.8);
    const auto records = run_test(ScriptedAgent(s.scores, 0.5), s.ids, RunnerConfig{});
    int first = -1;
    for (const auto& r : records) {
      if (r.world_changed) {
        first = r.position;
        break;
      }
    }
    timely += first >= 256 && first <= 272;
  }
  CHECK(timely >= 48);
}

TEST_CASE("no shift, no alarm") {
  const auto s = stream(3, 512, 512, 0.2, 0.2);
  for (const auto& r : run_test(ScriptedAgent(s.scores, 0.5), s.ids, RunnerConfig{})) CHECK_FALSE(r.world_changed);
}

TEST_CASE("identity weighting") {
  RunnerConfig c;
  c.w_pre = 1.0;
  const auto s = stream(4, 300, 150, 0.2, 0.8);
  for (const auto& r : run_test(ScriptedAgent(s.scores, 0.5), s.ids, c)) CHECK(r.weighted_score == r.raw_score);
  CHECK(novelty_weight(c, std::nullopt, 10) == 1.0);
}

TEST_CASE("records never look ahead") {
  const auto s = stream(5, 400, 200, 0.2, 0.8);
  const ScriptedAgent agent(s.scores, 0.5);
  const auto full = run_test(agent, s.ids, RunnerConfig{});
  for (std::size_t p : {1u, 17u, 100u, 230u, 399u}) {
    const auto prefix = run_test(agent, std::span(s.ids).first(p), RunnerConfig{});
    for (std::size_t i = 0; i < p; ++i) CHECK(prefix[i] == full[i]);
  }
}

TEST_CASE("transcript novelty") {
  std::set<char32_t> ascii;
  for (char32_t c = 0x20; c < 0x7f; ++c) ascii.insert(c);
  ascii.erase(U'#');
  CHECK_FALSE(transcript_novelty(U"hello", ascii));
  CHECK(transcript_novelty(U"he#lo", ascii));
  CHECK(transcript_novelty(utf8_decode("h\xc3\xa9llo"), ascii));
}

TEST_CASE("external predictions") {
  const auto dir = scratch("runner");
  write_text_file(dir / "p.jsonl",
                  "{\"id\":\"a\",\"transcript\":\"x\"}\n{\"id\":\"b\",\"transcript\":\"y\"}\n"
                  "{\"id\":\"c\",\"transcript\":\"z\"}\n",
                  "test");
  CHECK(ingest_external_predictions(dir / "p.jsonl").size() == 3);
  write_text_file(dir / "d.jsonl", "{\"id\":\"a\",\"transcript\":\"x\"}\n{\"id\":\"a\",\"transcript\":\"y\"}\n", "test");
  CHECK_THROWS_AS(ingest_external_predictions(dir / "d.jsonl"), Error);
  const std::set<std::string> valid{"a", "b"};
  try {
    ingest_external_predictions(dir / "p.jsonl", &valid);
    FAIL("stray id accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("\"c\"") != std::string::npos);
  }
}

TEST_CASE("records round-trip") {
  const auto dir = scratch("records");
  const auto s = stream(6, 100, 50, 0.2, 0.8);
  const auto records = run_test(ScriptedAgent(s.scores, 0.5), s.ids, RunnerConfig{});
  write_text_file(dir / "r.jsonl", records_jsonl(records), "test");
  CHECK(read_records(dir / "r.jsonl") == records);
}
