#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "scriptdrift/error.hpp"
#include "scriptdrift/features.hpp"
#include "scriptdrift/util.hpp"

using namespace scriptdrift;

TEST_CASE("hog on constant and step images") {
  const auto flat = hog_grid(LineImage(64, 64, 128));
  for (const auto& c : flat.cells) {
    for (double v : c) CHECK(v == 0);
  }
  LineImage step(64, 64, 255);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 32; ++x) step.at(x, y) = 0;
  }
  const auto g = hog_grid(step);
  double bin0 = 0, rest = 0;
  for (const auto& c : g.cells) {
    for (std::size_t b = 0; b < c.size(); ++b) (b == 0 ? bin0 : rest) += c[b];
  }
  CHECK(bin0 > 0);
  CHECK(rest == doctest::Approx(0.0));
  CHECK(hog_grid(step).blocks == g.blocks);
  CHECK_THROWS_AS(hog_grid(LineImage(8, 64)), Error);
}

TEST_CASE("mean hog dimensions") {
  for (int w : {64, 320, 1024}) {
    LineImage img(w, 64, 200);
    for (int x = 0; x < w; x += 7) {
      for (int y = 10; y < 50; ++y) img.at(x, y) = 20;
    }
    CHECK(mean_hog(img).dimension() == kHogBlockDim);
    if (w >= 320) CHECK(m_mean_hog(img).dimension() == 11 * kHogBlockDim);
    else CHECK_THROWS_AS(m_mean_hog(img), Error);
  }
  CHECK(extractor_dimension(kMMeanHog) == 396);
  for (double v : m_mean_hog(LineImage(200, 64, 90)).values) CHECK(v == 0);
  LineImage img(128, 64, 250);
  for (int x = 3; x < 128; x += 9) {
    for (int y = 5; y < 60; ++y) img.at(x, y) = 10;
  }
  const auto one = m_mean_hog(img, 1).values;
  REQUIRE(one.size() == 72);
  for (int i = 0; i < 36; ++i) CHECK(one[i] == doctest::Approx(one[36 + i]).epsilon(1e-12));
}

TEST_CASE("mirror keeps the mean hog norm") {
  std::mt19937_64 rng(12);
  const auto img = random_image(rng, 200, 64);
  LineImage mirror(200, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 200; ++x) mirror.at(x, y) = img.at(199 - x, y);
  }
  auto norm = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  CHECK(std::abs(norm(mean_hog(img).values) - norm(mean_hog(mirror).values)) <= 1e-6);
}

TEST_CASE("mean hog is tiling invariant away from borders") {
  // Rows vary, columns repeat: every block column sees the same pixels, so tiling changes nothing.
  LineImage tile(256, 64, 240), doubled(512, 64, 240);
  for (int x = 0; x < 512; ++x) {
    for (int y = 0; y < 64; ++y) {
      const std::uint8_t v = (y % 16 < 5) ? 20 : 240;
      if (x < 256) tile.at(x, y) = v;
      doubled.at(x, y) = v;
    }
  }
  const auto a = mean_hog(tile).values, b = mean_hog(doubled).values;
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-6));
}

TEST_CASE("feature files round-trip and detect truncation") {
  const auto dir = scratch("features");
  FeatureMatrix f{std::string(kMeanHog), 3, {}, {}};
  f.add("a", {1, 2, 3});
  f.add("b", {0.1, 1e-300, -4});
  for (const char* name : {"f.bin", "f.json"}) {
    save_features(dir / name, f);
    const auto back = load_features(dir / name);
    CHECK(back.rows == f.rows);
    CHECK(back.ids == f.ids);
  }
  auto bytes = read_file_bytes(dir / "f.bin", "test");
  bytes.resize(bytes.size() - 3);
  write_file_bytes(dir / "g.bin", bytes, "test");
  CHECK_THROWS_AS(load_features(dir / "g.bin"), Error);
}
