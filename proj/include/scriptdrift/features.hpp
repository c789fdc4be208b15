#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "scriptdrift/corpus.hpp"
#include "scriptdrift/image.hpp"

namespace scriptdrift {

inline constexpr int kHogCell = 8;
inline constexpr int kHogBins = 9;
inline constexpr int kHogHeight = 64;
inline constexpr std::size_t kHogBlockDim = 4 * kHogBins;  // 2x2 cells

inline constexpr std::string_view kMeanHog = "mean-hog";
inline constexpr std::string_view kMMeanHog = "m-mean-hog";

/// Cell histograms and L2-Hys normalized 2x2 block descriptors.
/// Blocks are stored column-major so a column section is contiguous.
struct HogGrid {
  int cell_cols = 0;
  int cell_rows = 0;
  std::vector<std::array<double, kHogBins>> cells;  // row-major
  int block_cols = 0;
  int block_rows = 0;
  std::vector<std::array<double, kHogBlockDim>> blocks;  // [col * block_rows + row]

  const std::array<double, kHogBins>& cell(int cx, int cy) const {
    return cells[static_cast<std::size_t>(cy) * cell_cols + cx];
  }
};

/// Scales to 64 px tall, keeping the aspect ratio.
LineImage normalize_height(const LineImage& image);

/// HOG over an image taken as-is (no resizing). Needs at least 2x2 cells.
HogGrid hog_grid(const LineImage& image);

/// Height-normalizes then computes the grid.
HogGrid hog_cells(const LineImage& image);

struct FeatureVector {
  std::string extractor;
  std::vector<double> values;

  std::size_t dimension() const { return values.size(); }
};

FeatureVector mean_hog(const LineImage& image);
FeatureVector m_mean_hog(const LineImage& image, int sections = 10);

/// Feature dimension of a known extractor id; throws on an unknown id.
std::size_t extractor_dimension(std::string_view extractor);
FeatureVector extract_features(const LineImage& image, std::string_view extractor);

/// id -> vector records sharing one extractor.
struct FeatureMatrix {
  std::string extractor;
  std::size_t dimension = 0;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;

  void add(std::string id, std::vector<double> values);
  std::ptrdiff_t index_of(std::string_view id) const;
};

/// Binary when the extension is not ".json": "FVEC", u32 version, extractor,
/// dimension, count, (id, f64 values) records, crc32 trailer.
void save_features(const std::filesystem::path& path, const FeatureMatrix& matrix);
FeatureMatrix load_features(const std::filesystem::path& path);

/// Featurizes every record of a manifest in order.
FeatureMatrix featurize(const Manifest& manifest, std::string_view extractor, unsigned jobs);

}  // namespace scriptdrift
