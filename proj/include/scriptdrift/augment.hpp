#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "scriptdrift/corpus.hpp"
#include "scriptdrift/image.hpp"
#include "scriptdrift/style_metrics.hpp"

namespace scriptdrift {

enum class TransformKind {
  GaussianNoise,
  AntiqueBackground,
  ReflectHorizontalAxis,
  ReflectVerticalAxis,
  GaussianBlur,
  InvertColor,
  Dilate,
  Erode,
  Shear,
  Resize,
  PenColor,
  PenTexture,
  BackgroundTexture,
};

std::string_view to_string(TransformKind kind);
TransformKind parse_transform_kind(std::string_view text);

/// One novelty-injection step. Only the parameters relevant to `kind` are read:
/// sigma (GaussianNoise, GaussianBlur), radius (Dilate, Erode), degrees (Shear),
/// scale (Resize), gray (PenColor), asset (AntiqueBackground, PenTexture,
/// BackgroundTexture). `label` overrides the generated subtype name.
struct Transform {
  TransformKind kind = TransformKind::InvertColor;
  double sigma = 0;
  int radius = 1;
  double degrees = 0;
  double scale = 1;
  int gray = 0;
  std::string asset;
  std::string label;
  std::uint64_t seed = 0;

  static Transform noise(double sigma = 25.0) { return {.kind = TransformKind::GaussianNoise, .sigma = sigma}; }
  static Transform blur(double sigma = 1.5) { return {.kind = TransformKind::GaussianBlur, .sigma = sigma}; }
  static Transform reflect_horizontal() { return {.kind = TransformKind::ReflectHorizontalAxis}; }
  static Transform reflect_vertical() { return {.kind = TransformKind::ReflectVerticalAxis}; }
  static Transform invert() { return {.kind = TransformKind::InvertColor}; }
  static Transform dilate(int radius = 1) { return {.kind = TransformKind::Dilate, .radius = radius}; }
  static Transform erode(int radius = 1) { return {.kind = TransformKind::Erode, .radius = radius}; }
  static Transform shear(double degrees) { return {.kind = TransformKind::Shear, .degrees = degrees}; }
  static Transform resize(double scale = 1.5) { return {.kind = TransformKind::Resize, .scale = scale}; }
  static Transform pen_color(int gray) { return {.kind = TransformKind::PenColor, .gray = gray}; }
  static Transform pen_texture(std::string asset) { return {.kind = TransformKind::PenTexture, .asset = std::move(asset)}; }
  static Transform antique(std::string asset) {
    return {.kind = TransformKind::AntiqueBackground, .asset = std::move(asset)};
  }
  static Transform background(std::string asset) {
    return {.kind = TransformKind::BackgroundTexture, .asset = std::move(asset)};
  }

  /// Throws Error on out-of-range parameters.
  void validate() const;

  /// Subtype name of this transform on its own ("Big Right Slant", "Dilate", ...).
  std::string subtype_name() const;
  /// Name used inside a composition ("Slant w/ Dilate").
  std::string short_name() const;

  NoveltyType novelty_type() const;
  bool replaces_background() const;

  nlohmann::json to_json() const;
  static Transform from_json(const nlohmann::json& j);
};

struct BackgroundAsset {
  std::string id;
  LineImage image;
  std::string provenance;
  bool tileable = true;
};

/// Textures keyed by id; loaded from assets/background/*.png and assets/pen/*.png.
class AssetLibrary {
public:
  void add(BackgroundAsset asset);
  const BackgroundAsset& get(const std::string& id) const;
  bool contains(const std::string& id) const { return assets_.contains(id); }

  static AssetLibrary load_directory(const std::filesystem::path& root);

private:
  std::map<std::string, BackgroundAsset> assets_;
};

/// Ordered transform chain applied left to right.
struct Pipeline {
  std::vector<Transform> steps;
  std::string label;  // overrides the composed subtype name when set

  std::string subtype_name() const;
  NoveltyType novelty_type() const;
};

/// Builds a pipeline; rejects empty lists and more than one background replacement.
Pipeline compose(std::vector<Transform> transforms);

// Mask morphology with a 4-connected (diamond) structuring element of the
// given radius. Pixels outside the image never contribute to dilation and
// are ignored by erosion.
ForegroundMask dilate_mask(const ForegroundMask& mask, int radius);
ForegroundMask erode_mask(const ForegroundMask& mask, int radius);

LineImage reflect_horizontal_axis(const LineImage& image);  // upside down
LineImage reflect_vertical_axis(const LineImage& image);    // mirror
LineImage invert_color(const LineImage& image);
LineImage gaussian_blur(const LineImage& image, double sigma);
LineImage gaussian_noise(const LineImage& image, double sigma, std::uint64_t seed);
LineImage shear_image(const LineImage& image, double degrees, std::uint8_t fill);

/// Lays the ink pixels of `image` (its Otsu mask) over a crop of the asset.
/// Ink pixels keep their intensity exactly.
LineImage composite_background(const LineImage& image, const BackgroundAsset& asset, std::uint64_t seed);

/// Applies one transform, returning a new sample with updated labels.
LineSample apply(const LineSample& sample, const Transform& transform, const AssetLibrary& assets);
LineSample apply(const LineSample& sample, const Pipeline& pipeline, const AssetLibrary& assets);

/// Per-type generation request.
struct PoolRecipeEntry {
  NoveltyType type = NoveltyType::Background;
  std::size_t count = 0;
  std::vector<Pipeline> subtypes;  // empty for Writer novelty (drawn from unseen writers)
};

struct PoolRecipe {
  std::vector<PoolRecipeEntry> entries;
  bool with_replacement = false;

  static PoolRecipe from_json(const nlohmann::json& j);
};

/// One planned novel sample: which base record and which subtype pipeline.
struct PoolItem {
  std::string id;
  std::size_t base_index = 0;
  NoveltyType type = NoveltyType::None;
  std::optional<Pipeline> pipeline;
  std::uint64_t seed = 0;
};

/// Deterministic selection of base samples and subtypes per recipe entry.
/// Writer entries draw from base records whose writer is not known.
std::vector<PoolItem> plan_novel_pool(const Manifest& base, const PoolRecipe& recipe, std::uint64_t seed);

struct NovelPool {
  Manifest manifest;
  std::vector<LineImage> images;  // parallel to manifest.records
};

/// Renders a planned pool and assigns difficulty tertiles against the known
/// writers of `base`. Record image paths are "images/<id>.png".
NovelPool build_novel_pool(const Manifest& base, const PoolRecipe& recipe, const AssetLibrary& assets,
                           std::uint64_t seed, unsigned jobs = 1);

}  // namespace scriptdrift
