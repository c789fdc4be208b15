#include "scriptdrift/style_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "scriptdrift/error.hpp"

namespace scriptdrift {

std::size_t ForegroundMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

int otsu_threshold(const LineImage& image) {
  std::array<std::uint64_t, 256> hist{};
  for (auto v : image.pixels()) ++hist[v];
  const auto total = static_cast<double>(image.size());
  double total_sum = 0;
  for (int v = 0; v < 256; ++v) total_sum += static_cast<double>(v) * static_cast<double>(hist[v]);

  double below_count = 0;
  double below_sum = 0;
  double best = -1;
  int best_t = -2;
  for (int t = 0; t < 255; ++t) {
    below_count += static_cast<double>(hist[t]);
    below_sum += static_cast<double>(t) * static_cast<double>(hist[t]);
    const double above_count = total - below_count;
    if (below_count == 0 || above_count == 0) continue;
    const double diff = total * below_sum - below_count * total_sum;
    const double between = diff * diff / (below_count * above_count);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  if (best_t == -2) {
    // Single intensity level: dark uniform images are all ink, light ones blank.
    const int level = image.pixels().empty() ? 255 : image.pixels()[0];
    return level < 128 ? 255 : -1;
  }
  return best_t;
}

ForegroundMask foreground_mask(const LineImage& image) {
  const int t = otsu_threshold(image);
  ForegroundMask mask(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) mask.set(x, y, image.at(x, y) <= t);
  }
  return mask;
}

namespace {

void require_ink(const ForegroundMask& mask, const char* measure) {
  if (mask.empty()) throw Error("style_metrics", std::string(measure) + ": no ink");
}

}  // namespace

double pen_pressure(const LineImage& image, const ForegroundMask& mask) {
  require_ink(mask, "pen_pressure");
  std::uint64_t sum = 0;
  std::uint64_t n = 0;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (mask.at(x, y)) {
        sum += image.at(x, y);
        ++n;
      }
    }
  }
  return static_cast<double>(sum) / static_cast<double>(n);
}

int shear_offset(int row, double pivot_row, double degrees) {
  const double t = std::tan(degrees * std::numbers::pi / 180.0);
  return static_cast<int>(std::lround((pivot_row - row) * t));
}

ForegroundMask shear_mask(const ForegroundMask& mask, double degrees) {
  const double pivot = (mask.height() - 1) / 2.0;
  int lo = 0;
  int hi = 0;
  std::vector<int> offsets(static_cast<std::size_t>(mask.height()));
  for (int y = 0; y < mask.height(); ++y) {
    offsets[y] = shear_offset(y, pivot, degrees);
    lo = std::min(lo, offsets[y]);
    hi = std::max(hi, offsets[y]);
  }
  ForegroundMask out(mask.width() + hi - lo, mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y)) out.set(x + offsets[y] - lo, y, true);
    }
  }
  return out;
}

double shear_score(const ForegroundMask& mask) {
  double score = 0;
  for (int x = 0; x < mask.width(); ++x) {
    int top = -1;
    int bottom = -1;
    int n = 0;
    for (int y = 0; y < mask.height(); ++y) {
      if (!mask.at(x, y)) continue;
      if (top < 0) top = y;
      bottom = y;
      ++n;
    }
    if (n == 0) continue;
    const int h = bottom - top + 1;
    if (n == h) score += static_cast<double>(h) * h;
  }
  return score;
}

double slant_angle(const LineImage& /*image*/, const ForegroundMask& mask) {
  require_ink(mask, "slant_angle");
  std::array<int, kSlantCandidates.size()> order{};
  std::copy(kSlantCandidates.begin(), kSlantCandidates.end(), order.begin());
  std::stable_sort(order.begin(), order.end(), [](int a, int b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
    return a < b;
  });
  double best_score = -1;
  int best = 0;
  for (int angle : order) {
    const double s = shear_score(shear_mask(mask, -angle));
    if (s > best_score) {
      best_score = s;
      best = angle;
    }
  }
  return best;
}

ColumnProfile column_profile(const ForegroundMask& mask, double quantile) {
  ColumnProfile p;
  p.counts.assign(static_cast<std::size_t>(mask.width()), 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) p.counts[x] += mask.at(x, y) ? 1 : 0;
  }
  for (int x = 0; x < mask.width(); ++x) {
    if (p.counts[x] > 0) {
      if (p.first_ink < 0) p.first_ink = x;
      p.last_ink = x;
    }
  }
  p.is_space.assign(p.counts.size(), true);
  if (p.first_ink < 0) return p;
  std::vector<int> span(p.counts.begin() + p.first_ink, p.counts.begin() + p.last_ink + 1);
  std::sort(span.begin(), span.end());
  const auto rank = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(span.size())));
  p.quantile = span[std::max<std::size_t>(rank, 1) - 1];
  for (std::size_t x = 0; x < p.counts.size(); ++x) {
    p.is_space[x] = p.counts[x] == 0 || p.counts[x] < p.quantile;
  }
  return p;
}

namespace {

double character_size_from(const ColumnProfile& p) {
  std::uint64_t sum = 0;
  std::uint64_t n = 0;
  for (std::size_t x = 0; x < p.counts.size(); ++x) {
    if (!p.is_space[x]) {
      sum += static_cast<std::uint64_t>(p.counts[x]);
      ++n;
    }
  }
  if (n == 0) throw Error("style_metrics", "character_size: every column is a space");
  return static_cast<double>(sum) / static_cast<double>(n);
}

}  // namespace

double character_size(const LineImage& /*image*/, const ForegroundMask& mask) {
  require_ink(mask, "character_size");
  return character_size_from(column_profile(mask));
}

double word_spacing(const LineImage& /*image*/, const ForegroundMask& mask) {
  require_ink(mask, "word_spacing");
  const auto p = column_profile(mask);
  const double cutoff = std::max(0.5 * character_size_from(p), 3.0);
  const auto n = static_cast<int>(p.counts.size());
  int first = 0;
  while (first < n && p.is_space[first]) ++first;
  int last = n - 1;
  while (last >= 0 && p.is_space[last]) --last;
  double total = 0;
  int gaps = 0;
  int run = 0;
  for (int x = first; x <= last; ++x) {
    if (p.is_space[x]) {
      ++run;
      continue;
    }
    if (run >= cutoff) {
      total += run;
      ++gaps;
    }
    run = 0;
  }
  return gaps == 0 ? 0.0 : total / gaps;
}

double histogram_entropy(std::span<const std::uint64_t> histogram) {
  const double total = std::accumulate(histogram.begin(), histogram.end(), 0.0,
                                       [](double acc, std::uint64_t c) { return acc + static_cast<double>(c); });
  if (total == 0) return 0;
  double h = 0;
  for (auto c : histogram) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return std::max(0.0, h);
}

double region_entropy(const LineImage& image, const ForegroundMask& mask, Region region) {
  std::array<std::uint64_t, 256> hist{};
  std::uint64_t n = 0;
  const bool want_ink = region == Region::Foreground;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (mask.at(x, y) == want_ink) {
        ++hist[image.at(x, y)];
        ++n;
      }
    }
  }
  if (n == 0) {
    throw Error("style_metrics", want_ink ? "pen_entropy: empty foreground region"
                                          : "background_entropy: empty background region");
  }
  return histogram_entropy(hist);
}

StyleVector style_vector(const LineImage& image) {
  const auto mask = foreground_mask(image);
  StyleVector s;
  s.pen_pressure = pen_pressure(image, mask);
  s.slant_angle = slant_angle(image, mask);
  s.word_spacing = word_spacing(image, mask);
  s.character_size = character_size(image, mask);
  s.background_entropy = region_entropy(image, mask, Region::Background);
  s.pen_entropy = region_entropy(image, mask, Region::Foreground);
  return s;
}

StyleVector style_vector(const LineSample& sample) {
  try {
    return style_vector(sample.image);
  } catch (const Error& e) {
    throw Error("style_metrics", "sample \"" + sample.id + "\": " + std::string(e.what()).substr(e.module().size() + 2));
  }
}

}  // namespace scriptdrift
