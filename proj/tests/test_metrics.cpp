#include <doctest.h>

#include <cmath>

#include "scriptdrift/error.hpp"
#include "scriptdrift/metrics.hpp"

using namespace scriptdrift;

namespace {

// Mutual information straight from the contingency table.
double contingency_nmi(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = double(a.size());
  std::map<int, double> pa, pb;
  std::map<std::pair<int, int>, double> pab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1 / n;
    pb[b[i]] += 1 / n;
    pab[{a[i], b[i]}] += 1 / n;
  }
  double mi = 0, ha = 0, hb = 0;
  for (auto [k, p] : pab) mi += p * std::log(p / (pa[k.first] * pb[k.second]));
  for (auto [_, p] : pa) ha -= p * std::log(p);
  for (auto [_, p] : pb) hb -= p * std::log(p);
  return mi / std::sqrt(ha * hb);
}

}  // namespace

TEST_CASE("character and word accuracy") {
  CHECK(char_accuracy(U"abc", U"abc") == 1.0);
  CHECK(char_accuracy(U"abc", U"") == 0.0);
  CHECK(char_accuracy(U"kitten", U"sitting") == doctest::Approx(1 - 3.0 / 7));
  CHECK(char_accuracy(U"sitting", U"kitten") == char_accuracy(U"kitten", U"sitting"));
  const std::vector<std::string> t{"a", "b", "c", "d"}, p{"a", "x", "c", "d"}, none;
  CHECK(word_accuracy(t, t) == 1.0);
  CHECK(word_accuracy(t, p) == 0.75);
  CHECK(word_accuracy(none, std::vector<std::string>{"a", "b", "c"}) == 0.0);
}

TEST_CASE("nmi and purity") {
  const std::vector<int> a{0, 0, 1, 1}, b{1, 1, 0, 0}, one{0, 0, 0, 0};
  CHECK(nmi(std::span<const int>(a), std::span<const int>(b)) == doctest::Approx(1.0));
  CHECK(nmi(std::span<const int>(one), std::span<const int>(a)) == 0.0);
  const std::vector<int> x{0, 0, 1, 1, 1, 0}, y{0, 0, 0, 1, 1, 1};
  CHECK(std::abs(nmi(std::span<const int>(x), std::span<const int>(y)) - contingency_nmi(x, y)) <= 1e-12);
  const std::vector<int> clusters{0, 0, 0, 1, 1, 1};
  const std::vector<std::string> pure{"a", "a", "a", "b", "b", "b"}, mixed{"a", "a", "b", "b", "b", "a"};
  CHECK(purity(clusters, pure) == 1.0);
  CHECK(purity(clusters, mixed) == doctest::Approx(4.0 / 6));
  const std::vector<int> single(4, 0);
  const std::vector<std::string> half{"a", "a", "b", "b"};
  CHECK(purity(single, half) == 0.5);
}

TEST_CASE("top-k accuracy") {
  const std::vector<std::vector<std::string>> preds{{"a", "b", "c"}, {"b", "c", "a"}, {"c", "b", "x"}};
  const std::vector<std::string> truth{"a", "a", "a"};
  CHECK(topk_accuracy(preds, truth, 1) == doctest::Approx(1.0 / 3));
  CHECK(topk_accuracy(preds, truth, 3) == doctest::Approx(2.0 / 3));
}

TEST_CASE("correlation") {
  const std::vector<double> x{1, 2, 3, 4, 5}, y2{2, 4, 6, 8, 10}, neg{-1, -2, -3, -4, -5}, z{2, 1, 4, 3, 7};
  CHECK(pearson(x, y2) == doctest::Approx(1.0));
  CHECK(pearson(x, neg) == doctest::Approx(-1.0));
  // cov = 3.6/4 ... computed by hand over deviations {-2,-1,0,1,2} and {-1.4,-2.4,0.6,-0.4,3.6}
  const double cov = (2.8 + 2.4 + 0 - 0.4 + 7.2), sx = 10, sy = 1.96 + 5.76 + 0.36 + 0.16 + 12.96;
  CHECK(std::abs(pearson(x, z) - cov / std::sqrt(sx * sy)) <= 1e-12);
  CHECK(spearman(x, neg) == doctest::Approx(-1.0));
}

TEST_CASE("k-means degenerates on identical points") {
  const std::vector<std::vector<double>> same(10, {1.0, 2.0});
  const auto r = kmeans(same, 3, 1);
  CHECK(r.k_effective == 1);
  const std::vector<std::vector<double>> three{{0}, {0.1}, {10}, {10.1}, {20}, {20.1}};
  const auto t = kmeans(three, 3, 1);
  CHECK(t.k_effective == 3);
  CHECK(t.assignments[0] == t.assignments[1]);
  CHECK(t.assignments[2] != t.assignments[0]);
}

TEST_CASE("report") {
  TestSpec spec;
  spec.length = 4;
  spec.novelty_density = 0.5;
  OracleFile oracle{"t0", spec, 2, {false, false, true, true}};
  ReportContext ctx;
  ctx.known_writers = {"w1", "w2"};
  ctx.truth["a"] = {"w1", NoveltyType::None, "", std::u32string(U"ab")};
  ctx.truth["b"] = {"w2", NoveltyType::None, "", std::u32string(U"cd")};
  ctx.truth["c"] = {"w9", NoveltyType::Writer, "Novel Writer", std::u32string(U"ef")};
  ctx.truth["d"] = {"w9", NoveltyType::Writer, "Novel Writer", std::u32string(U"gh")};
  std::vector<PredictionRecord> records(4);
  const char* ids[] = {"a", "b", "c", "d"};
  const char* top[] = {"w1", "w2", "NOVEL", "NOVEL"};
  const char32_t* text[] = {U"ab", U"cd", U"ef", U"gh"};
  for (int i = 0; i < 4; ++i) {
    records[i].id = ids[i];
    records[i].position = i;
    records[i].top_k = {top[i]};
    records[i].novelty_decision = i >= 2;
    records[i].transcript = text[i];
  }
  const ScoredTest test{oracle, records};
  const auto report = build_report(std::span(&test, 1), ctx, 1);
  for (const auto& row : report.is_novel_split) {
    CHECK(row.detection_accuracy == 1.0);
    CHECK(*row.char_accuracy == 1.0);
    CHECK(row.writer_accuracy == 1.0);
  }
  const auto csv = report.table_csv(report.by_type);
  CHECK(csv.rfind("group,samples,Novelty Detection Acc.,Mean Char. Acc.,NMI,Writer ID Acc.\n", 0) == 0);
  REQUIRE(report.false_positives.size() == 1);
  CHECK(report.false_positives[0].mean_false_positives == 0);
}
