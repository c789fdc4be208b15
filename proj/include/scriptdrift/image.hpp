#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace scriptdrift {

/// Row-major 8-bit grayscale image. Storage type bounds every intensity to
/// [0,255]; the constructor enforces width*height == pixel count.
class LineImage {
public:
  LineImage() = default;
  LineImage(int width, int height, std::uint8_t fill = 255);
  LineImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  std::uint8_t at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  friend bool operator==(const LineImage&, const LineImage&) = default;

private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Reads an 8-bit PGM (P2/P5) or PNG. Color PNGs are reduced to luminance
/// with BT.601 weights, alpha is dropped, 16-bit samples are narrowed.
LineImage read_image(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const LineImage& image);
void write_png(const std::filesystem::path& path, const LineImage& image);

/// Writes PNG or PGM depending on the extension.
void write_image(const std::filesystem::path& path, const LineImage& image);

/// Bilinear resampling with pixel-center alignment.
LineImage resize_bilinear(const LineImage& image, int width, int height);

}  // namespace scriptdrift
