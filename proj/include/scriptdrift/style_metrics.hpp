#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "scriptdrift/corpus.hpp"
#include "scriptdrift/image.hpp"

namespace scriptdrift {

/// Binary ink mask with the dimensions of its source image.
class ForegroundMask {
public:
  ForegroundMask() = default;
  ForegroundMask(int width, int height, bool fill = false)
      : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, fill ? 1 : 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }

  friend bool operator==(const ForegroundMask&, const ForegroundMask&) = default;

private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Candidate slant angles in degrees, in scan order.
inline constexpr std::array<int, 11> kSlantCandidates = {-45, -30, -20, -15, -5, 0, 5, 15, 20, 30, 45};

struct StyleVector {
  double pen_pressure = 0;
  double slant_angle = 0;
  double word_spacing = 0;
  double character_size = 0;
  double background_entropy = 0;
  double pen_entropy = 0;

  friend bool operator==(const StyleVector&, const StyleVector&) = default;
};

enum class Region { Foreground, Background };

/// Otsu threshold: the value t maximizing between-class variance for the
/// split {v <= t} / {v > t}; the first maximum wins. Single-level images
/// return -1 when that level is >= 128 (nothing is ink) and 255 otherwise.
int otsu_threshold(const LineImage& image);

/// Ink = intensity <= otsu_threshold.
ForegroundMask foreground_mask(const LineImage& image);

/// Mean intensity over ink pixels. Throws "no ink" on an empty mask.
double pen_pressure(const LineImage& image, const ForegroundMask& mask);

/// Integer row offset applied by a shear of `degrees`, relative to `pivot_row`.
/// Positive angles move rows above the pivot to the right.
int shear_offset(int row, double pivot_row, double degrees);

/// Shears a mask by per-row integer shifts, widening it so nothing is clipped.
ForegroundMask shear_mask(const ForegroundMask& mask, double degrees);

/// Verticality score: sum over columns of h^2 where the column's ink is one
/// contiguous run of height h.
double shear_score(const ForegroundMask& mask);

/// The candidate angle whose inverse shear maximizes shear_score. Ties go to
/// the smaller magnitude, then the negative angle.
double slant_angle(const LineImage& image, const ForegroundMask& mask);

/// Per-column ink counts and their space labeling.
struct ColumnProfile {
  std::vector<int> counts;
  std::vector<bool> is_space;
  int first_ink = -1;
  int last_ink = -1;
  double quantile = 0;  // 30% nearest-rank quantile over [first_ink, last_ink]
};

ColumnProfile column_profile(const ForegroundMask& mask, double quantile = 0.3);

/// Mean ink per non-space column. Throws when every column is a space.
double character_size(const LineImage& image, const ForegroundMask& mask);

/// Mean width of inter-word gaps (runs of space columns between ink runs
/// whose width >= max(0.5 * character_size, 3)); 0 when there are none.
double word_spacing(const LineImage& image, const ForegroundMask& mask);

/// Shannon entropy (bits) of the 256-level histogram over the region.
double region_entropy(const LineImage& image, const ForegroundMask& mask, Region region);

double histogram_entropy(std::span<const std::uint64_t> histogram);

/// All six measures. Errors name the failing measure.
StyleVector style_vector(const LineImage& image);
StyleVector style_vector(const LineSample& sample);

}  // namespace scriptdrift
