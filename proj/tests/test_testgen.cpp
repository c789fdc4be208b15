#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "helpers.hpp"
#include "scriptdrift/error.hpp"
#include "scriptdrift/testgen.hpp"
#include "scriptdrift/util.hpp"

using namespace scriptdrift;

namespace {

std::vector<std::string> ids(const char* prefix, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

double mean_position(const TestStream& s) {
  double sum = 0;
  for (std::size_t p = 0; p < s.ids.size(); ++p) {
    if (s.is_novel[p]) sum += double(p);
  }
  return sum / s.novel_count();
}

}  // namespace

TEST_CASE("spec enumeration") {
  TestgenConfig c;
  CHECK(enumerate_specs(c).size() == 3888);
  c.novelty_types.push_back(NoveltyType::Pen);
  CHECK(enumerate_specs(c).size() == 5184);
  TestgenConfig one;
  one.introduction_points = {0.5};
  one.densities = {0.1};
  one.novelty_types = {NoveltyType::Writer};
  one.difficulties = {Difficulty::Easy};
  one.distributions = {DistributionType::Flat};
  one.lengths = {512};
  const auto specs = enumerate_specs(one);
  REQUIRE(specs.size() == 1);
  CHECK(TestSpec::from_json(specs[0].to_json()) == specs[0]);
}

TEST_CASE("novel counts and placement") {
  TestgenConfig c;
  c.jitter = 0;
  const TestSpec spec{0.5, 0.5, NoveltyType::Writer, Difficulty::Easy, DistributionType::Flat, 1024, 1, 0};
  const int intro = introduction_index(spec, c);
  CHECK(intro == 512);
  CHECK(novel_count(spec, intro) == 256);
  const auto s = generate(spec, c, ids("k", 2000), ids("n", 2000));
  CHECK(s.novel_count() == 256);
  for (int p = 0; p < s.introduction_index; ++p) CHECK_FALSE(s.is_novel[p]);
}

TEST_CASE("High places novelty earlier than Flat") {
  TestgenConfig c;
  int earlier = 0;
  for (int seed = 0; seed < 50; ++seed) {
    TestSpec spec{0.5, 0.2, NoveltyType::Writer, Difficulty::Easy, DistributionType::Flat, 512,
                  derive_seed(99, std::uint64_t(seed)), 0};
    const auto flat = generate(spec, c, ids("k", 600), ids("n", 600));
    spec.distribution = DistributionType::High;
    const auto high = generate(spec, c, ids("k", 600), ids("n", 600));
    earlier += mean_position(high) < mean_position(flat);
  }
  CHECK(earlier >= 45);
}

TEST_CASE("reorder contract") {
  TestgenConfig c;
  const TestSpec spec{0.6, 0.3, NoveltyType::Letter, Difficulty::Hard, DistributionType::Mid, 768, 5, 0};
  const auto s = generate(spec, c, ids("k", 800), ids("n", 800));
  const auto r = reorder(s, 3);
  CHECK(r.is_novel == s.is_novel);
  CHECK(r.ids != s.ids);
  auto a = s.ids, b = r.ids;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
  CHECK(reorder(s, 3).ids == r.ids);
}

TEST_CASE("infeasible pools are reported") {
  TestgenConfig c;
  const TestSpec spec{0.5, 0.5, NoveltyType::Writer, Difficulty::Easy, DistributionType::Flat, 512, 1, 0};
  CHECK_THROWS_AS(generate(spec, c, ids("k", 10), ids("n", 10)), Error);
}

TEST_CASE("oracle files carry a seal") {
  const auto dir = scratch("testgen");
  TestgenConfig c;
  const TestSpec spec{0.5, 0.2, NoveltyType::Writer, Difficulty::Easy, DistributionType::Flat, 512, 1, 0};
  const auto s = generate(spec, c, ids("k", 600), ids("n", 600));
  write_text_file(dir / "o.json", oracle_json("t", s).dump(), "test");
  const auto o = read_oracle(dir / "o.json");
  CHECK(o.introduction_index == s.introduction_index);
  auto j = nlohmann::json::parse(read_text_file(dir / "o.json", "test"));
  j["payload"]["introduction_index"] = 3;
  write_text_file(dir / "o.json", j.dump(), "test");
  CHECK_THROWS_AS(read_oracle(dir / "o.json"), Error);
}
