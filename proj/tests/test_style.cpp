#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "scriptdrift/error.hpp"
#include "scriptdrift/style_metrics.hpp"
#include "scriptdrift/synthetic.hpp"

using namespace scriptdrift;

namespace {

// Exhaustive Otsu: maximize between-class variance over every cut.
int otsu_scan(const LineImage& img) {
  int best = 0;
  double best_var = -1;
  for (int t = 0; t < 256; ++t) {
    double w0 = 0, w1 = 0, s0 = 0, s1 = 0;
    for (auto p : img.pixels()) (p <= t ? (w0 += 1, s0 += p) : (w1 += 1, s1 += p));
    if (w0 == 0 || w1 == 0) continue;
    const double d = s0 / w0 - s1 / w1;
    const double v = w0 * w1 * d * d;
    if (v > best_var) best_var = v, best = t;
  }
  return best;
}

LineImage blobs(std::initializer_list<std::pair<int, int>> spans, int width, int height = 20) {
  LineImage img(width, height, 240);
  for (auto [x0, x1] : spans) {
    for (int x = x0; x < x1; ++x) {
      for (int y = 0; y < height; ++y) img.at(x, y) = 20;
    }
  }
  return img;
}

}  // namespace

TEST_CASE("foreground mask") {
  CHECK(foreground_mask(LineImage(8, 8, 255)).count() == 0);
  CHECK(foreground_mask(LineImage(8, 8, 0)).count() == 64);
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.3);
  LineImage img(30, 20);
  for (auto& p : img.pixels()) p = coin(rng) ? 30 : 220;
  const auto mask = foreground_mask(img);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 30; ++x) CHECK(mask.at(x, y) == (img.at(x, y) == 30));
  }
  for (int t = 0; t < 20; ++t) {
    const auto r = random_image(rng, 16, 9);
    const int oracle = otsu_scan(r);
    const auto m = foreground_mask(r);
    for (int y = 0; y < 9; ++y) {
      for (int x = 0; x < 16; ++x) CHECK(m.at(x, y) == (r.at(x, y) <= oracle));
    }
  }
}

TEST_CASE("pen pressure") {
  LineImage img(4, 1, 255);
  img.at(0, 0) = 100;
  img.at(1, 0) = 200;
  ForegroundMask m(4, 1);
  m.set(0, 0, true);
  m.set(1, 0, true);
  CHECK(pen_pressure(img, m) == 150);
  try {
    pen_pressure(img, ForegroundMask(4, 1));
    FAIL("empty mask accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("no ink") != std::string::npos);
  }
}

TEST_CASE("slant angle") {
  for (int a : {0, 20, 45, -45, -20}) {
    const auto img = slanted_bars(a, 4, 30, 20, 230);
    CHECK(slant_angle(img, foreground_mask(img)) == a);
  }
}

TEST_CASE("word spacing and character size") {
  CHECK(word_spacing(blobs({{5, 40}}, 60), foreground_mask(blobs({{5, 40}}, 60))) == 0);
  const auto two = blobs({{0, 20}, {50, 70}}, 70);
  CHECK(word_spacing(two, foreground_mask(two)) == 30);
  const auto three = blobs({{0, 20}, {50, 70}, {110, 130}}, 130);
  CHECK(word_spacing(three, foreground_mask(three)) == 35);

  LineImage bar(40, 30, 240);
  for (int x = 0; x < 40; ++x) {
    for (int y = 10; y < 20; ++y) bar.at(x, y) = 10;
  }
  CHECK(character_size(bar, foreground_mask(bar)) == 10);
  LineImage cols(2, 10, 240);
  for (int y = 0; y < 4; ++y) cols.at(0, y) = 10;
  for (int y = 0; y < 8; ++y) cols.at(1, y) = 10;
  CHECK(character_size(cols, foreground_mask(cols)) == 6);
}

TEST_CASE("entropy and style vector") {
  const std::uint64_t one[] = {5, 0, 0};
  const std::uint64_t two[] = {3, 3};
  CHECK(histogram_entropy(one) == 0);
  CHECK(histogram_entropy(two) == doctest::Approx(1.0));
  const auto bars = slanted_bars(0, 3, 24, 40, 220);
  const auto s = style_vector(bars);
  CHECK(s.background_entropy == 0);
  CHECK(s.pen_entropy == 0);
  CHECK(s.pen_pressure == 40);
  CHECK(style_vector(bars) == s);
  CHECK_THROWS_AS(style_vector(LineImage(20, 20, 255)), Error);
}
