#include <doctest.h>

#include "scriptdrift/error.hpp"
#include "scriptdrift/ontology.hpp"

using namespace scriptdrift;

namespace {

StyleVector pen(double p, double slant = 0, double spacing = 10, double size = 20) {
  StyleVector s;
  s.pen_pressure = p;
  s.slant_angle = slant;
  s.word_spacing = spacing;
  s.character_size = size;
  return s;
}

}  // namespace

TEST_CASE("equal-frequency bins") {
  std::vector<StyleVector> styles;
  for (int i = 1; i <= 6; ++i) styles.push_back(pen(10.0 * i, -45 + 15 * i, i, 2 * i));
  const auto b = fit_bins(styles);
  CHECK(b.bin_count(StyleAttribute::PenPressure) == 3);
  CHECK(b.bin_count(StyleAttribute::SlantAngle) == 4);
  std::vector<int> occupancy(3);
  for (const auto& s : styles) ++occupancy[b.bin_of(StyleAttribute::PenPressure, s.pen_pressure)];
  CHECK(occupancy == std::vector<int>{2, 2, 2});
  CHECK_THROWS_AS(fit_bins(std::vector<StyleVector>(6, pen(5))), Error);
}

TEST_CASE("modal writer edges and consistency") {
  std::vector<StyleVector> styles;
  std::vector<SampleRef> refs;
  std::map<std::string, StyleVector> by_id;
  for (int i = 0; i < 9; ++i) {
    const auto s = pen(10.0 * i, -40 + 10 * i, i, i);
    styles.push_back(s);
    const std::string id = "s" + std::to_string(i);
    refs.push_back({id, i < 3 ? "a" : "b"});
    by_id[id] = s;
  }
  const auto bins = fit_bins(styles);
  const auto g = build_graph(refs, by_id, bins);
  const auto wa = *g.writer_node("a");
  for (auto attr : kStyleAttributes) CHECK(g.linked_bin(wa, attr) == 0);
  const auto c = consistency(g);
  CHECK(c.fraction < 1.0);
  CHECK(c.fraction == doctest::Approx(1.0 - double(c.mismatches.size()) / (9 * 4)));
  const std::vector<SampleRef> single{{"s0", "a"}};
  CHECK(consistency(build_graph(single, by_id, bins)).fraction == 1.0);
}

TEST_CASE("writer distances") {
  std::map<std::string, std::vector<StyleVector>> same{{"a", {pen(10)}}, {"b", {pen(10)}}};
  for (double d : writer_distances(same).distances) CHECK(d == 0);
  std::map<std::string, std::vector<StyleVector>> three{
      {"a", {pen(0, 0, 0, 0)}}, {"b", {pen(40, 0, 0, 0)}}, {"c", {pen(100, 0, 0, 0)}}};
  const auto m = writer_distances(three);
  CHECK(m.at(0, 1) == doctest::Approx(0.4));
  CHECK(m.at(1, 0) == m.at(0, 1));
}

TEST_CASE("difficulty tertiles") {
  const std::vector<double> scores{0.1, 0.5, 0.9};
  CHECK(tertile_difficulty(scores) == std::vector<Difficulty>{Difficulty::Hard, Difficulty::Medium, Difficulty::Easy});
  DifficultyContext ctx;
  DifficultyInput white{NoveltyType::Background, {}, 255.0};
  CHECK(difficulty_score(white, ctx) == 0);
}
