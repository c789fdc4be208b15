#include "scriptdrift/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "scriptdrift/error.hpp"
#include "scriptdrift/util.hpp"

namespace scriptdrift {

namespace {

constexpr std::uint32_t kFeatureVersion = 1;
constexpr double kClip = 0.2;
constexpr double kEps = 1e-5;

void l2_normalize(std::array<double, kHogBlockDim>& v) {
  double ss = 0;
  for (double x : v) ss += x * x;
  const double n = std::sqrt(ss + kEps * kEps);
  for (double& x : v) x /= n;
}

}  // namespace

LineImage normalize_height(const LineImage& image) {
  if (image.empty()) throw Error("features", "empty image");
  if (image.height() == kHogHeight) return image;
  const int width = std::max(1, static_cast<int>(std::lround(image.width() * double(kHogHeight) / image.height())));
  return resize_bilinear(image, width, kHogHeight);
}

HogGrid hog_grid(const LineImage& image) {
  const int w = image.width();
  const int h = image.height();
  HogGrid g;
  g.cell_cols = w / kHogCell;
  g.cell_rows = h / kHogCell;
  if (g.cell_cols < 2 || g.cell_rows < 2) {
    throw Error("features", "image " + std::to_string(w) + "x" + std::to_string(h) +
                                " is too small for one 2x2-cell block (needs at least 16 px each way)");
  }
  g.cells.assign(static_cast<std::size_t>(g.cell_cols) * g.cell_rows, {});
  constexpr double bin_width = 180.0 / kHogBins;
  for (int y = 0; y < g.cell_rows * kHogCell; ++y) {
    for (int x = 0; x < g.cell_cols * kHogCell; ++x) {
      const double gx = double(image.at(std::min(x + 1, w - 1), y)) - image.at(std::max(x - 1, 0), y);
      const double gy = double(image.at(x, std::min(y + 1, h - 1))) - image.at(x, std::max(y - 1, 0));
      const double mag = std::hypot(gx, gy);
      if (mag == 0) continue;
      double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      if (angle < 0) angle += 180.0;
      if (angle >= 180.0) angle -= 180.0;
      // Bin centers sit at 0, 20, ..., 160 degrees; votes split linearly between neighbors.
      const double pos = angle / bin_width;
      const int lo = static_cast<int>(std::floor(pos)) % kHogBins;
      const int hi = (lo + 1) % kHogBins;
      const double frac = pos - std::floor(pos);
      auto& hist = g.cells[static_cast<std::size_t>(y / kHogCell) * g.cell_cols + x / kHogCell];
      hist[lo] += mag * (1 - frac);
      hist[hi] += mag * frac;
    }
  }
  g.block_cols = g.cell_cols - 1;
  g.block_rows = g.cell_rows - 1;
  g.blocks.resize(static_cast<std::size_t>(g.block_cols) * g.block_rows);
  for (int bx = 0; bx < g.block_cols; ++bx) {
    for (int by = 0; by < g.block_rows; ++by) {
      std::array<double, kHogBlockDim> v{};
      std::size_t k = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          for (double x : g.cell(bx + dx, by + dy)) v[k++] = x;
        }
      }
      l2_normalize(v);
      for (double& x : v) x = std::min(x, kClip);
      l2_normalize(v);
      g.blocks[static_cast<std::size_t>(bx) * g.block_rows + by] = v;
    }
  }
  return g;
}

HogGrid hog_cells(const LineImage& image) { return hog_grid(normalize_height(image)); }

namespace {

std::vector<double> mean_blocks(const HogGrid& g, int col_begin, int col_end) {
  std::vector<double> mean(kHogBlockDim, 0.0);
  const std::size_t begin = static_cast<std::size_t>(col_begin) * g.block_rows;
  const std::size_t end = static_cast<std::size_t>(col_end) * g.block_rows;
  for (std::size_t b = begin; b < end; ++b) {
    for (std::size_t i = 0; i < kHogBlockDim; ++i) mean[i] += g.blocks[b][i];
  }
  for (double& x : mean) x /= static_cast<double>(end - begin);
  return mean;
}

}  // namespace

FeatureVector mean_hog(const LineImage& image) {
  const auto g = hog_cells(image);
  return {std::string(kMeanHog), mean_blocks(g, 0, g.block_cols)};
}

FeatureVector m_mean_hog(const LineImage& image, int sections) {
  if (sections < 1) throw Error("features", "section count must be >= 1");
  const auto g = hog_cells(image);
  if (g.block_cols < sections) {
    throw Error("features", "image has " + std::to_string(g.block_cols) + " block columns, fewer than " +
                                std::to_string(sections) + " sections");
  }
  FeatureVector out{std::string(kMMeanHog), mean_blocks(g, 0, g.block_cols)};
  const int base = g.block_cols / sections;
  const int extra = g.block_cols % sections;
  int col = 0;
  for (int s = 0; s < sections; ++s) {
    const int len = base + (s < extra ? 1 : 0);
    const auto m = mean_blocks(g, col, col + len);
    out.values.insert(out.values.end(), m.begin(), m.end());
    col += len;
  }
  return out;
}

std::size_t extractor_dimension(std::string_view extractor) {
  if (extractor == kMeanHog) return kHogBlockDim;
  if (extractor == kMMeanHog) return 11 * kHogBlockDim;
  throw Error("features", "unknown extractor '" + std::string(extractor) + "'");
}

FeatureVector extract_features(const LineImage& image, std::string_view extractor) {
  if (extractor == kMeanHog) return mean_hog(image);
  if (extractor == kMMeanHog) return m_mean_hog(image);
  throw Error("features", "unknown extractor '" + std::string(extractor) + "'");
}

void FeatureMatrix::add(std::string id, std::vector<double> values) {
  if (rows.empty() && dimension == 0) dimension = values.size();
  if (values.size() != dimension) {
    throw Error("features", "vector '" + id + "' has dimension " + std::to_string(values.size()) + ", expected " +
                                std::to_string(dimension));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw Error("features", "vector '" + id + "' has a non-finite value");
  }
  ids.push_back(std::move(id));
  rows.push_back(std::move(values));
}

std::ptrdiff_t FeatureMatrix::index_of(std::string_view id) const {
  const auto it = std::find(ids.begin(), ids.end(), id);
  return it == ids.end() ? -1 : it - ids.begin();
}

void save_features(const std::filesystem::path& path, const FeatureMatrix& m) {
  if (path.extension() == ".json") {
    nlohmann::ordered_json j;
    j["extractor"] = m.extractor;
    j["dimension"] = m.dimension;
    auto& recs = j["records"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < m.ids.size(); ++i) recs.push_back({{"id", m.ids[i]}, {"values", m.rows[i]}});
    write_text_file(path, j.dump() + "\n", "features");
    return;
  }
  ByteWriter w;
  w.raw("FVEC");
  w.u32(kFeatureVersion);
  w.str(m.extractor);
  w.u64(m.dimension);
  w.u64(m.ids.size());
  for (std::size_t i = 0; i < m.ids.size(); ++i) {
    w.str(m.ids[i]);
    for (double v : m.rows[i]) w.f64(v);
  }
  w.u32(crc32(w.bytes()));
  write_file_bytes(path, w.bytes(), "features");
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  FeatureMatrix m;
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(path, "features"));
      m.extractor = j.at("extractor").get<std::string>();
      m.dimension = j.at("dimension").get<std::size_t>();
      for (const auto& r : j.at("records")) m.add(r.at("id").get<std::string>(), r.at("values").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
      throw Error("features", path.string() + ": malformed feature file: " + e.what());
    }
    return m;
  }
  const auto bytes = read_file_bytes(path, "features");
  if (bytes.size() < 8 || std::string(bytes.begin(), bytes.begin() + 4) != "FVEC") {
    throw Error("features", path.string() + ": not a feature file");
  }
  const std::span<const std::uint8_t> body(bytes.data(), bytes.size() - 4);
  ByteReader trailer(std::span<const std::uint8_t>(bytes).subspan(bytes.size() - 4), "features");
  if (trailer.u32() != crc32(body)) throw Error("features", path.string() + ": checksum mismatch");
  ByteReader r(body, "features");
  r.raw(4);
  const auto version = r.u32();
  if (version != kFeatureVersion) throw Error("features", "unsupported feature file version " + std::to_string(version));
  m.extractor = r.str();
  m.dimension = r.u64();
  const auto count = r.u64();
  for (std::uint64_t i = 0; i < count; ++i) {
    auto id = r.str();
    std::vector<double> values(m.dimension);
    for (auto& v : values) v = r.f64();
    m.add(std::move(id), std::move(values));
  }
  return m;
}

FeatureMatrix featurize(const Manifest& manifest, std::string_view extractor, unsigned jobs) {
  const auto dim = extractor_dimension(extractor);
  std::vector<std::vector<double>> rows(manifest.records.size());
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    const auto& rec = manifest.records[i];
    try {
      rows[i] = extract_features(read_image(manifest.image_path(rec)), extractor).values;
    } catch (const Error& e) {
      throw Error("features", "sample '" + rec.id + "': " + e.what());
    }
  });
  FeatureMatrix m{std::string(extractor), dim, {}, {}};
  for (std::size_t i = 0; i < rows.size(); ++i) m.add(manifest.records[i].id, std::move(rows[i]));
  return m;
}

}  // namespace scriptdrift
