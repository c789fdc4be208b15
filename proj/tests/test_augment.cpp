#include <doctest.h>

#include "helpers.hpp"
#include "scriptdrift/augment.hpp"
#include "scriptdrift/error.hpp"
#include "scriptdrift/style_metrics.hpp"
#include "scriptdrift/synthetic.hpp"
#include "scriptdrift/util.hpp"

using namespace scriptdrift;

TEST_CASE("pixel transforms") {
  std::mt19937_64 rng(9);
  const auto img = random_image(rng, 23, 17);
  CHECK(reflect_horizontal_axis(reflect_horizontal_axis(img)) == img);
  CHECK(reflect_vertical_axis(reflect_vertical_axis(img)) == img);
  const auto inv = invert_color(img);
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(inv.pixels()[i] == 255 - img.pixels()[i]);
  CHECK(shear_image(img, 0, 255) == img);
  CHECK(gaussian_noise(img, 10, 4) == gaussian_noise(img, 10, 4));
}

TEST_CASE("dilation grows any non-full mask") {
  std::mt19937_64 rng(2);
  std::bernoulli_distribution coin(0.2);
  for (int t = 0; t < 50; ++t) {
    ForegroundMask m(8, 8);
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) m.set(x, y, coin(rng));
    }
    if (m.count() == 0 || m.count() == 64) continue;
    CHECK(dilate_mask(m, 1).count() > m.count());
  }
}

TEST_CASE("pipeline naming and validation") {
  CHECK(compose({Transform::shear(30), Transform::dilate(1)}).subtype_name() == "Slant w/ Dilate");
  CHECK_THROWS_AS(compose({}), Error);
  CHECK_THROWS_AS(compose({Transform::background("a"), Transform::antique("b")}), Error);
  CHECK_THROWS_AS(Transform::from_json({{"kind", "Dilate"}, {"radius", 1}, {"bogus", 2}}), Error);
  const auto t = Transform::from_json({{"kind", "GaussianNoise"}});
  CHECK(t.sigma == 25.0);
  LineSample s{"x", render_line(writer_style(1, 0), "abc"), {}};
  const auto twice = apply(s, compose({Transform::reflect_vertical(), Transform::reflect_vertical()}), AssetLibrary{});
  CHECK(twice.image == s.image);
}

TEST_CASE("novel pool counts and determinism") {
  const auto dir = scratch("pool");
  const auto base = write_synthetic_corpus(dir / "corpus", {4, 2, 5, 3, 21});
  write_synthetic_assets(dir / "assets", 21);
  const auto assets = AssetLibrary::load_directory(dir / "assets");
  const auto recipe = PoolRecipe::from_json(nlohmann::json::parse(R"({"types":[
    {"type":"Background","count":10,"subtypes":[[{"kind":"BackgroundTexture","asset":"Gold Texture"}]]},
    {"type":"Pen","count":5,"subtypes":[[{"kind":"PenTexture","asset":"Gold Ink"}]]},
    {"type":"Writer","count":4}]})"));
  const auto a = build_novel_pool(base, recipe, assets, 3);
  const auto b = build_novel_pool(base, recipe, assets, 3);
  std::map<NoveltyType, int> counts;
  for (const auto& r : a.manifest.records) ++counts[r.labels.novelty_type];
  CHECK(counts[NoveltyType::Background] == 10);
  CHECK(counts[NoveltyType::Pen] == 5);
  CHECK(counts[NoveltyType::Writer] == 4);
  CHECK(serialize_manifest(a.manifest) == serialize_manifest(b.manifest));
  CHECK(a.images == b.images);
  for (const auto& r : a.manifest.records) CHECK(r.labels.difficulty != Difficulty::Unassigned);
}

TEST_CASE("background compositing keeps the ink") {
  LineImage tex(50, 50);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> px(180, 250);
  for (auto& p : tex.pixels()) p = static_cast<std::uint8_t>(px(rng));
  const auto line = render_line(writer_style(4, 2), "hello there");
  const auto mask = foreground_mask(line);
  const auto out = composite_background(line, {"t", tex, "test", true}, 5);
  CHECK(pen_pressure(out, mask) == pen_pressure(line, mask));
}
