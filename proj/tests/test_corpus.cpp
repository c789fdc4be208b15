#include <doctest.h>

#include "helpers.hpp"
#include "scriptdrift/corpus.hpp"
#include "scriptdrift/error.hpp"
#include "scriptdrift/synthetic.hpp"
#include "scriptdrift/util.hpp"

using namespace scriptdrift;

namespace {

std::string line(const std::string& id, const std::string& writer, const std::string& transcript = "ab") {
  return R"({"id":")" + id + R"(","image":"x.png","writer":")" + writer + R"(","transcript":")" + transcript +
         R"("})" "\n";
}

}  // namespace

TEST_CASE("manifest parsing") {
  const auto m = parse_manifest(line("a01", "w1") + line("a02", "w1") + line("a03", "w2"), ".", false);
  CHECK(m.records.size() == 3);
  CHECK(m.known_writers == std::set<std::string>{"w1", "w2"});

  try {
    parse_manifest(line("a01", "w1") + line("a01", "w2"), ".", false);
    FAIL("duplicate id accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("a01") != std::string::npos);
  }
}

TEST_CASE("unknown characters are flagged, not rejected") {
  const std::string text =
      R"({"format":"scriptdrift-manifest","version":1,"alphabet":"abc","known_writers":["w1"]})" "\n" +
      line("a", "w1", "abc") + line("b", "w1", "abz");
  const auto m = parse_manifest(text, ".", false);
  CHECK_FALSE(m.records[0].has_unknown_characters);
  CHECK(m.records[1].has_unknown_characters);
}

TEST_CASE("ground truth novelty") {
  std::set<char32_t> ascii;
  for (char32_t c = 0x20; c < 0x7f; ++c) ascii.insert(c);
  SampleLabels l;
  l.writer_id = "w51";
  l.transcript = utf8_decode("cafe");
  std::set<std::string> known;
  for (int i = 1; i <= 50; ++i) known.insert("w" + std::to_string(i));
  auto g = ground_truth_novelty(l, ascii, known, {});
  CHECK(g.character == NoveltyVerdict::Known);
  CHECK(g.writer == NoveltyVerdict::Novel);
  CHECK(g.appearance == NoveltyVerdict::Unlabeled);
  l.transcript = utf8_decode("caf\xc3\xa9");
  CHECK(ground_truth_novelty(l, ascii, known, {}).character == NoveltyVerdict::Novel);
  l.transcript.reset();
  CHECK(ground_truth_novelty(l, ascii, known, {}).character == NoveltyVerdict::Unlabeled);
}

TEST_CASE("writer-disjoint folds") {
  Manifest m;
  for (int w = 0; w < 10; ++w) {
    const auto wid = "w" + std::to_string(w);
    m.known_writers.insert(wid);
    for (int l = 0; l < 6; ++l) {
      ManifestRecord r;
      r.id = wid + "-" + std::to_string(l);
      r.image = r.id + ".png";
      r.labels.writer_id = wid;
      m.records.push_back(r);
    }
  }
  const auto folds = split_folds(m, 5, 7);
  REQUIRE(folds.size() == 5);
  for (const auto& f : folds) {
    bool unseen = false;
    for (const auto& r : f.test.records) unseen = unseen || !f.train.known_writers.contains(r.labels.writer_id);
    CHECK(unseen);
  }
  const auto again = split_folds(m, 5, 7);
  for (std::size_t i = 0; i < folds.size(); ++i) {
    CHECK(serialize_manifest(folds[i].train) == serialize_manifest(again[i].train));
    CHECK(serialize_manifest(folds[i].test) == serialize_manifest(again[i].test));
  }
}

TEST_CASE("synthetic corpus round-trips through its manifest") {
  const auto dir = scratch("corpus");
  const auto m = write_synthetic_corpus(dir, {2, 1, 3, 2, 11});
  const auto back = load_manifest(dir / "manifest.jsonl");
  CHECK(back.records == m.records);
  CHECK(serialize_manifest(back) == serialize_manifest(m));
  CHECK(back.records.back().labels.novelty_type == NoveltyType::Writer);
  CHECK(back.load_sample(back.records[0]).image.height() > 0);
}

TEST_CASE("fold writer counts at corpus scale") {
  Manifest m;
  for (int w = 0; w < 432; ++w) {
    const auto wid = "w" + std::to_string(w);
    m.known_writers.insert(wid);
    for (int l = 0; l < 10; ++l) {
      ManifestRecord r;
      r.id = wid + "-" + std::to_string(l);
      r.image = r.id + ".png";
      r.labels.writer_id = wid;
      m.records.push_back(r);
    }
  }
  double train = 0, val = 0, test = 0;
  const auto folds = split_folds(m, 5, 1);
  for (const auto& f : folds) {
    train += f.train.writers().size();
    val += f.val.writers().size();
    test += f.test.writers().size();
  }
  CHECK(train / 5 == doctest::Approx(354).epsilon(0.1));
  CHECK(val / 5 == doctest::Approx(251).epsilon(0.1));
  CHECK(test / 5 == doctest::Approx(259).epsilon(0.1));
}
