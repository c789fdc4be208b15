#include "scriptdrift/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scriptdrift/augment.hpp"
#include "scriptdrift/error.hpp"
#include "scriptdrift/util.hpp"

namespace scriptdrift {

namespace {

void fill_rect(LineImage& img, int x0, int y0, int w, int h, std::uint8_t v) {
  for (int y = std::max(0, y0); y < std::min(img.height(), y0 + h); ++y) {
    for (int x = std::max(0, x0); x < std::min(img.width(), x0 + w); ++x) img.at(x, y) = v;
  }
}

// Glyph shapes keyed off the letter so the same text renders the same way.
int glyph_width(const WriterStyle& s, char c) { return s.stroke + (c % 3) * (s.x_height / 4) + s.x_height / 3; }

void draw_glyph(LineImage& img, const WriterStyle& s, char c, int x, int baseline) {
  const int w = glyph_width(s, c);
  const int top = baseline - s.x_height;
  const int ascender = (c % 4 == 0) ? s.x_height / 2 : 0;
  fill_rect(img, x, top - ascender, s.stroke, s.x_height + ascender, s.ink);
  if (c % 2 == 0) fill_rect(img, x + w - s.stroke, top, s.stroke, s.x_height, s.ink);
  if (c % 3 != 1) fill_rect(img, x, baseline - s.stroke, w, s.stroke, s.ink);
  if (c % 5 == 0) fill_rect(img, x, top, w, s.stroke, s.ink);
}

}  // namespace

LineImage render_line(const WriterStyle& s, std::string_view text, int height) {
  if (text.empty()) throw Error("synthetic", "empty text");
  const int pad = static_cast<int>(std::ceil(std::abs(std::tan(s.slant * std::numbers::pi / 180.0)) * height / 2)) + 4;
  int width = 2 * pad;
  for (char c : text) width += c == ' ' ? s.word_gap : glyph_width(s, c) + s.letter_gap;
  LineImage img(width, height, s.paper);
  const int baseline = height / 2 + s.x_height / 2;
  int x = pad;
  for (char c : text) {
    if (c == ' ') {
      x += s.word_gap;
      continue;
    }
    draw_glyph(img, s, c, x, baseline);
    x += glyph_width(s, c) + s.letter_gap;
  }
  return s.slant == 0 ? img : shear_image(img, s.slant, s.paper);
}

LineImage slanted_bars(double degrees, int bars, int bar_height, std::uint8_t ink, std::uint8_t paper) {
  const int height = bar_height + 8;
  const int pad = static_cast<int>(std::ceil(std::abs(std::tan(degrees * std::numbers::pi / 180.0)) * height / 2)) + 4;
  LineImage img(2 * pad + bars * 12, height, paper);
  for (int b = 0; b < bars; ++b) fill_rect(img, pad + b * 12 + 4, 4, 2, bar_height, ink);
  return degrees == 0 ? img : shear_image(img, degrees, paper);
}

WriterStyle writer_style(std::uint64_t seed, int k) {
  std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
  static constexpr double slants[] = {-20, -15, -5, 0, 5, 15, 20};
  WriterStyle s;
  s.slant = slants[std::uniform_int_distribution<int>(0, 6)(rng)];
  s.ink = static_cast<std::uint8_t>(std::uniform_int_distribution<int>(10, 110)(rng));
  s.paper = static_cast<std::uint8_t>(std::uniform_int_distribution<int>(215, 250)(rng));
  s.x_height = std::uniform_int_distribution<int>(10, 20)(rng);
  s.stroke = std::uniform_int_distribution<int>(1, 3)(rng);
  s.letter_gap = std::uniform_int_distribution<int>(2, 4)(rng);
  s.word_gap = std::uniform_int_distribution<int>(12, 26)(rng);
  return s;
}

Manifest write_synthetic_corpus(const std::filesystem::path& dir, const SyntheticCorpusOptions& o) {
  Manifest m;
  m.base_dir = dir;
  std::mt19937_64 rng(derive_seed(o.seed, "synthetic.text"));
  std::uniform_int_distribution<int> letter(0, 25), length(2, 7);
  const int total = o.known_writers + o.unseen_writers;
  for (int w = 0; w < total; ++w) {
    char wid[16];
    std::snprintf(wid, sizeof wid, "w%02d", w);
    if (w < o.known_writers) m.known_writers.insert(wid);
    const auto style = writer_style(o.seed, w);
    for (int l = 0; l < o.lines_per_writer; ++l) {
      std::string text;
      for (int k = 0; k < o.words_per_line; ++k) {
        if (k) text += ' ';
        const int n = length(rng);
        for (int c = 0; c < n; ++c) text += static_cast<char>('a' + letter(rng));
      }
      ManifestRecord r;
      r.id = std::string(wid) + "-" + std::to_string(l);
      r.image = "images/" + r.id + ".png";
      r.labels.writer_id = wid;
      r.labels.transcript = utf8_decode(text);
      r.labels.appearance = Appearance{AppearanceKind::OriginalWhite, {}};
      if (w >= o.known_writers) r.labels.novelty_type = NoveltyType::Writer;
      write_png(dir / r.image, render_line(style, text));
      for (char c : text) m.alphabet.insert(static_cast<char32_t>(c));
      m.records.push_back(std::move(r));
    }
  }
  write_manifest(dir / "manifest.jsonl", m);
  return m;
}

void write_synthetic_assets(const std::filesystem::path& dir, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, "synthetic.assets"));
  std::normal_distribution<double> grain(0.0, 6.0);
  auto clamp = [](double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); };
  // Backgrounds stay light so ink remains the darker class.
  LineImage antique(256, 96), gold(64, 64), pen_gold(64, 64), pen_grain(64, 64);
  for (int y = 0; y < 96; ++y) {
    for (int x = 0; x < 256; ++x) antique.at(x, y) = clamp(200 + 20 * std::sin(x / 17.0) + 10 * std::cos(y / 9.0) + grain(rng));
  }
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      gold.at(x, y) = clamp(190 + 25 * std::sin((x + y) * std::numbers::pi / 16.0) + grain(rng));
      pen_gold.at(x, y) = clamp(150 + 40 * std::sin(x * std::numbers::pi / 8.0));
      pen_grain.at(x, y) = clamp(60 + 3 * grain(rng));
    }
  }
  write_png(dir / "background" / "Antique Paper.png", antique);
  write_png(dir / "background" / "Gold Texture.png", gold);
  write_png(dir / "pen" / "Gold Ink.png", pen_gold);
  write_png(dir / "pen" / "Grain Ink.png", pen_grain);
}

}  // namespace scriptdrift
