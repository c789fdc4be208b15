#include "scriptdrift/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include <png.h>

#include "scriptdrift/error.hpp"
#include "scriptdrift/util.hpp"

namespace scriptdrift {

LineImage::LineImage(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw Error("image", "dimensions must be positive");
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

LineImage::LineImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) throw Error("image", "dimensions must be positive");
  if (pixels_.size() != static_cast<std::size_t>(width) * height) {
    throw Error("image", "pixel count does not match dimensions");
  }
}

namespace {

LineImage read_pgm(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path, "image");
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space();
    long v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      any = true;
      ++pos;
      if (v > (1L << 30)) break;
    }
    if (!any) throw Error("image", "malformed PGM header in " + path.string());
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) {
    throw Error("image", "not a PGM file: " + path.string());
  }
  const bool binary = bytes[1] == '5';
  pos = 2;
  const long w = read_int();
  const long h = read_int();
  const long maxval = read_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw Error("image", "unsupported PGM (need 8-bit) in " + path.string());
  }
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w * h));
  if (binary) {
    ++pos;  // single whitespace after maxval
    if (bytes.size() < pos + px.size()) throw Error("image", "truncated PGM " + path.string());
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), px.size(), px.begin());
  } else {
    for (auto& p : px) p = static_cast<std::uint8_t>(std::min<long>(read_int(), maxval));
  }
  if (maxval != 255) {
    for (auto& p : px) p = static_cast<std::uint8_t>(std::lround(p * 255.0 / maxval));
  }
  return LineImage(static_cast<int>(w), static_cast<int>(h), std::move(px));
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

LineImage read_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error("image", "cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("image", "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("image", "libpng init failed");
  }
  std::vector<std::uint8_t> px;
  png_uint_32 w = 0, h = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("image", "corrupt PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray(png, PNG_ERROR_ACTION_NONE, 0.299, 0.587);
  }
  png_read_update_info(png, info);
  w = png_get_image_width(png, info);
  h = png_get_image_height(png, info);
  if (png_get_channels(png, info) != 1) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("image", "unexpected channel layout in " + path.string());
  }
  px.resize(static_cast<std::size_t>(w) * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = px.data() + static_cast<std::size_t>(y) * w;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return LineImage(static_cast<int>(w), static_cast<int>(h), std::move(px));
}

}  // namespace

LineImage read_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw Error("image", "cannot open " + path.string());
  char magic[8] = {};
  probe.read(magic, 8);
  if (probe.gcount() >= 2 && magic[0] == 'P' && (magic[1] == '5' || magic[1] == '2')) return read_pgm(path);
  if (probe.gcount() == 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(magic), 0, 8) == 0) {
    return read_png(path);
  }
  throw Error("image", "unrecognized image format: " + path.string());
}

void write_pgm(const std::filesystem::path& path, const LineImage& image) {
  std::ostringstream header;
  header << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  ByteWriter out;
  out.raw(header.str());
  out.bytes().insert(out.bytes().end(), image.pixels().begin(), image.pixels().end());
  write_file_bytes(path, out.bytes(), "image");
}

void write_png(const std::filesystem::path& path, const LineImage& image) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "wb"));
  if (!file) throw Error("image", "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error("image", "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("image", "PNG encode failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height(); ++y) {
    png_write_row(png, image.pixels().data() + static_cast<std::size_t>(y) * image.width());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_image(const std::filesystem::path& path, const LineImage& image) {
  const auto ext = path.extension().string();
  if (ext == ".pgm") {
    write_pgm(path, image);
  } else if (ext == ".png") {
    write_png(path, image);
  } else {
    throw Error("image", "unsupported output extension '" + ext + "'");
  }
}

LineImage resize_bilinear(const LineImage& image, int width, int height) {
  if (width <= 0 || height <= 0) throw Error("image", "resize target must be positive");
  if (width == image.width() && height == image.height()) return image;
  LineImage out(width, height);
  const double sx = static_cast<double>(image.width()) / width;
  const double sy = static_cast<double>(image.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double ty = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const double tx = fx - x0;
      const double top = image.at(x0, y0) * (1 - tx) + image.at(x1, y0) * tx;
      const double bottom = image.at(x0, y1) * (1 - tx) + image.at(x1, y1) * tx;
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(top * (1 - ty) + bottom * ty), 0L, 255L));
    }
  }
  return out;
}

}  // namespace scriptdrift
