#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "scriptdrift/corpus.hpp"
#include "scriptdrift/image.hpp"

namespace scriptdrift {

/// Rendering parameters of one synthetic writer.
struct WriterStyle {
  double slant = 0;          // degrees, positive leans right
  std::uint8_t ink = 40;
  std::uint8_t paper = 235;
  int x_height = 14;         // glyph body height in px
  int stroke = 2;            // stroke width in px
  int letter_gap = 3;
  int word_gap = 14;
};

/// Draws a stroke-glyph line for `text` (spaces separate words). Glyphs are
/// built from upright bars and connectors, then sheared by the slant. Pixels
/// are exactly `ink` or `paper`.
LineImage render_line(const WriterStyle& style, std::string_view text, int height = 48);

/// Upright bars of the given height sheared by `degrees` about the center row.
LineImage slanted_bars(double degrees, int bars, int bar_height, std::uint8_t ink, std::uint8_t paper);

/// A style drawn deterministically for writer index `k`.
WriterStyle writer_style(std::uint64_t seed, int k);

struct SyntheticCorpusOptions {
  int known_writers = 6;
  int unseen_writers = 3;
  int lines_per_writer = 12;
  int words_per_line = 4;
  std::uint64_t seed = 0;
};

/// Writes images/<id>.png plus manifest.jsonl (with header) under `dir`.
/// Writers w00.. are known; the trailing `unseen_writers` are not.
Manifest write_synthetic_corpus(const std::filesystem::path& dir, const SyntheticCorpusOptions& options);

/// Writes background/<id>.png and pen/<id>.png texture assets under `dir`.
void write_synthetic_assets(const std::filesystem::path& dir, std::uint64_t seed);

}  // namespace scriptdrift
