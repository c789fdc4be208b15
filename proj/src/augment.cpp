#include "scriptdrift/augment.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "scriptdrift/error.hpp"
#include "scriptdrift/ontology.hpp"
#include "scriptdrift/util.hpp"

namespace scriptdrift {

using nlohmann::json;

namespace {

constexpr std::pair<TransformKind, std::string_view> kKindNames[] = {
    {TransformKind::GaussianNoise, "GaussianNoise"},
    {TransformKind::AntiqueBackground, "AntiqueBackground"},
    {TransformKind::ReflectHorizontalAxis, "ReflectHorizontalAxis"},
    {TransformKind::ReflectVerticalAxis, "ReflectVerticalAxis"},
    {TransformKind::GaussianBlur, "GaussianBlur"},
    {TransformKind::InvertColor, "InvertColor"},
    {TransformKind::Dilate, "Dilate"},
    {TransformKind::Erode, "Erode"},
    {TransformKind::Shear, "Shear"},
    {TransformKind::Resize, "Resize"},
    {TransformKind::PenColor, "PenColor"},
    {TransformKind::PenTexture, "PenTexture"},
    {TransformKind::BackgroundTexture, "BackgroundTexture"},
};

std::uint8_t clamp_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

bool needs_asset(TransformKind kind) {
  return kind == TransformKind::AntiqueBackground || kind == TransformKind::PenTexture ||
         kind == TransformKind::BackgroundTexture;
}

}  // namespace

std::string_view to_string(TransformKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

TransformKind parse_transform_kind(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  throw Error("augment", "unknown transform kind '" + std::string(text) + "'");
}

void Transform::validate() const {
  switch (kind) {
    case TransformKind::GaussianNoise:
    case TransformKind::GaussianBlur:
      if (!(sigma > 0)) throw Error("augment", std::string(to_string(kind)) + ": sigma must be > 0");
      break;
    case TransformKind::Dilate:
    case TransformKind::Erode:
      if (radius < 1) throw Error("augment", std::string(to_string(kind)) + ": radius must be >= 1");
      break;
    case TransformKind::Shear:
      if (!(std::abs(degrees) <= 60)) throw Error("augment", "Shear: |degrees| must be <= 60");
      break;
    case TransformKind::Resize:
      if (!(scale > 0)) throw Error("augment", "Resize: scale must be > 0");
      break;
    case TransformKind::PenColor:
      if (gray < 0 || gray > 255) throw Error("augment", "PenColor: gray must be in [0,255]");
      break;
    default: break;
  }
  if (needs_asset(kind) && asset.empty()) throw Error("augment", std::string(to_string(kind)) + ": missing asset id");
}

std::string Transform::subtype_name() const {
  if (!label.empty()) return label;
  switch (kind) {
    case TransformKind::GaussianNoise: return "Gaussian Noise";
    case TransformKind::AntiqueBackground: return "Antique";
    case TransformKind::ReflectHorizontalAxis: return "Reflect0";
    case TransformKind::ReflectVerticalAxis: return "Reflect1";
    case TransformKind::GaussianBlur: return "Blur";
    case TransformKind::InvertColor: return "Inverted";
    case TransformKind::Dilate: return "Dilate";
    case TransformKind::Erode: return "Erode";
    case TransformKind::Shear:
      if (degrees >= 30) return "Big Right Slant";
      if (degrees <= -30) return "Big Left Slant";
      if (degrees == 0) return "Slant";
      return "Small Slant";
    case TransformKind::Resize: return scale > 1 ? "Increase Size" : scale < 1 ? "Decrease Size" : "Resize";
    case TransformKind::PenColor: return "Pen Color " + std::to_string(gray);
    case TransformKind::PenTexture:
    case TransformKind::BackgroundTexture: return asset;
  }
  return "?";
}

std::string Transform::short_name() const {
  if (!label.empty()) return label;
  return kind == TransformKind::Shear ? "Slant" : subtype_name();
}

NoveltyType Transform::novelty_type() const {
  switch (kind) {
    case TransformKind::GaussianNoise:
    case TransformKind::AntiqueBackground:
    case TransformKind::BackgroundTexture: return NoveltyType::Background;
    case TransformKind::InvertColor:
    case TransformKind::Dilate:
    case TransformKind::Erode:
    case TransformKind::Shear:
    case TransformKind::Resize: return NoveltyType::Letter;
    case TransformKind::PenColor:
    case TransformKind::PenTexture: return NoveltyType::Pen;
    case TransformKind::ReflectHorizontalAxis:
    case TransformKind::ReflectVerticalAxis:
    case TransformKind::GaussianBlur: return NoveltyType::None;
  }
  return NoveltyType::None;
}

bool Transform::replaces_background() const {
  return kind == TransformKind::AntiqueBackground || kind == TransformKind::BackgroundTexture;
}

json Transform::to_json() const {
  json j;
  j["kind"] = std::string(to_string(kind));
  switch (kind) {
    case TransformKind::GaussianNoise:
    case TransformKind::GaussianBlur: j["sigma"] = sigma; break;
    case TransformKind::Dilate:
    case TransformKind::Erode: j["radius"] = radius; break;
    case TransformKind::Shear: j["degrees"] = degrees; break;
    case TransformKind::Resize: j["scale"] = scale; break;
    case TransformKind::PenColor: j["gray"] = gray; break;
    default: break;
  }
  if (needs_asset(kind)) j["asset"] = asset;
  if (!label.empty()) j["label"] = label;
  return j;
}

Transform Transform::from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw Error("augment", "transform must be an object with 'kind'");
  Transform t;
  t.kind = parse_transform_kind(j.at("kind").get<std::string>());
  if (t.kind == TransformKind::GaussianNoise) t.sigma = 25.0;
  if (t.kind == TransformKind::GaussianBlur) t.sigma = 1.5;
  if (t.kind == TransformKind::Resize) t.scale = 1.5;
  static const std::set<std::string> known = {"kind", "sigma", "radius", "degrees", "scale", "gray", "asset", "label"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw Error("augment", "unknown transform field '" + key + "'");
  }
  t.sigma = j.value("sigma", t.sigma);
  t.radius = j.value("radius", t.radius);
  t.degrees = j.value("degrees", t.degrees);
  t.scale = j.value("scale", t.scale);
  t.gray = j.value("gray", t.gray);
  t.asset = j.value("asset", std::string());
  t.label = j.value("label", std::string());
  t.validate();
  return t;
}

void AssetLibrary::add(BackgroundAsset asset) {
  if (asset.image.empty()) throw Error("augment", "asset '" + asset.id + "' has an empty image");
  const auto id = asset.id;
  assets_.insert_or_assign(id, std::move(asset));
}

const BackgroundAsset& AssetLibrary::get(const std::string& id) const {
  const auto it = assets_.find(id);
  if (it == assets_.end()) throw Error("augment", "missing asset id '" + id + "'");
  return it->second;
}

AssetLibrary AssetLibrary::load_directory(const std::filesystem::path& root) {
  AssetLibrary lib;
  for (const char* sub : {"background", "pen"}) {
    const auto dir = root / sub;
    if (!std::filesystem::is_directory(dir)) continue;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) lib.add({f.stem().string(), read_image(f), f.string(), true});
  }
  return lib;
}

std::string Pipeline::subtype_name() const {
  if (!label.empty()) return label;
  if (steps.size() == 1) return steps.front().subtype_name();
  std::string name;
  for (const auto& s : steps) {
    if (!name.empty()) name += " w/ ";
    name += s.short_name();
  }
  return name;
}

NoveltyType Pipeline::novelty_type() const {
  for (const auto& s : steps) {
    if (s.novelty_type() != NoveltyType::None) return s.novelty_type();
  }
  return NoveltyType::None;
}

Pipeline compose(std::vector<Transform> transforms) {
  if (transforms.empty()) throw Error("augment", "cannot compose an empty transform list");
  int backgrounds = 0;
  for (const auto& t : transforms) {
    t.validate();
    backgrounds += t.replaces_background() ? 1 : 0;
  }
  if (backgrounds > 1) throw Error("augment", "incompatible combination: more than one background replacement");
  return {std::move(transforms), {}};
}

ForegroundMask dilate_mask(const ForegroundMask& mask, int radius) {
  ForegroundMask cur = mask;
  const int w = mask.width();
  const int h = mask.height();
  for (int step = 0; step < radius; ++step) {
    ForegroundMask next = cur;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (cur.at(x, y)) continue;
        if ((x > 0 && cur.at(x - 1, y)) || (x + 1 < w && cur.at(x + 1, y)) || (y > 0 && cur.at(x, y - 1)) ||
            (y + 1 < h && cur.at(x, y + 1))) {
          next.set(x, y, true);
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

ForegroundMask erode_mask(const ForegroundMask& mask, int radius) {
  ForegroundMask cur = mask;
  const int w = mask.width();
  const int h = mask.height();
  for (int step = 0; step < radius; ++step) {
    ForegroundMask next = cur;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!cur.at(x, y)) continue;
        if ((x > 0 && !cur.at(x - 1, y)) || (x + 1 < w && !cur.at(x + 1, y)) || (y > 0 && !cur.at(x, y - 1)) ||
            (y + 1 < h && !cur.at(x, y + 1))) {
          next.set(x, y, false);
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

LineImage reflect_horizontal_axis(const LineImage& image) {
  LineImage out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) out.at(x, image.height() - 1 - y) = image.at(x, y);
  }
  return out;
}

LineImage reflect_vertical_axis(const LineImage& image) {
  LineImage out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) out.at(image.width() - 1 - x, y) = image.at(x, y);
  }
  return out;
}

LineImage invert_color(const LineImage& image) {
  LineImage out = image;
  for (auto& p : out.pixels()) p = static_cast<std::uint8_t>(255 - p);
  return out;
}

LineImage gaussian_blur(const LineImage& image, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3 * sigma)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += kernel[i + radius];
  }
  for (auto& k : kernel) k /= total;
  const int w = image.width();
  const int h = image.height();
  std::vector<double> tmp(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * image.at(std::clamp(x + i, 0, w - 1), y);
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  LineImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[i + radius] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
      }
      out.at(x, y) = clamp_u8(acc);
    }
  }
  return out;
}

LineImage gaussian_noise(const LineImage& image, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  LineImage out = image;
  for (auto& p : out.pixels()) p = clamp_u8(p + noise(rng));
  return out;
}

LineImage shear_image(const LineImage& image, double degrees, std::uint8_t fill) {
  LineImage out(image.width(), image.height(), fill);
  const double pivot = (image.height() - 1) / 2.0;
  for (int y = 0; y < image.height(); ++y) {
    const int off = shear_offset(y, pivot, degrees);
    for (int x = 0; x < image.width(); ++x) {
      const int src = x - off;
      if (src >= 0 && src < image.width()) out.at(x, y) = image.at(src, y);
    }
  }
  return out;
}

namespace {

struct InkStats {
  ForegroundMask mask;
  std::uint8_t ink = 0;
  std::uint8_t paper = 255;
};

InkStats ink_stats(const LineImage& image) {
  InkStats s{foreground_mask(image)};
  double ink_sum = 0, paper_sum = 0;
  std::size_t ink_n = 0, paper_n = 0;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (s.mask.at(x, y)) {
        ink_sum += image.at(x, y);
        ++ink_n;
      } else {
        paper_sum += image.at(x, y);
        ++paper_n;
      }
    }
  }
  if (ink_n > 0) s.ink = clamp_u8(ink_sum / static_cast<double>(ink_n));
  if (paper_n > 0) s.paper = clamp_u8(paper_sum / static_cast<double>(paper_n));
  return s;
}

LineImage rerender(const LineImage& image, const InkStats& stats, const ForegroundMask& new_mask) {
  LineImage out = image;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const bool was = stats.mask.at(x, y);
      const bool now = new_mask.at(x, y);
      if (now && !was) out.at(x, y) = stats.ink;
      if (!now && was) out.at(x, y) = stats.paper;
    }
  }
  return out;
}

LineImage resize_keep_height(const LineImage& image, double scale, std::uint8_t fill) {
  const int w = std::max(1, static_cast<int>(std::lround(image.width() * scale)));
  const int h = std::max(1, static_cast<int>(std::lround(image.height() * scale)));
  const LineImage scaled = resize_bilinear(image, w, h);
  LineImage out(w, image.height(), fill);
  const int offset = (h - image.height()) / 2;  // >0 crops, <0 pads
  for (int y = 0; y < image.height(); ++y) {
    const int src = y + offset;
    if (src < 0 || src >= h) continue;
    for (int x = 0; x < w; ++x) out.at(x, y) = scaled.at(x, src);
  }
  return out;
}

/// Texture sample for a line of the given size: cropped at a seeded offset,
/// tiled when the asset is smaller and tileable.
class TextureWindow {
public:
  TextureWindow(const BackgroundAsset& asset, int width, int height, std::uint64_t seed) : asset_(asset) {
    const auto& img = asset.image;
    const bool fits = img.width() >= width && img.height() >= height;
    if (!fits && !asset.tileable) {
      throw Error("augment", "asset '" + asset.id + "' is smaller than the line and not tileable");
    }
    std::mt19937_64 rng(seed);
    const int max_x = fits ? img.width() - width : img.width() - 1;
    const int max_y = fits ? img.height() - height : img.height() - 1;
    ox_ = std::uniform_int_distribution<int>(0, std::max(0, max_x))(rng);
    oy_ = std::uniform_int_distribution<int>(0, std::max(0, max_y))(rng);
  }

  std::uint8_t at(int x, int y) const {
    const auto& img = asset_.image;
    return img.at((x + ox_) % img.width(), (y + oy_) % img.height());
  }

private:
  const BackgroundAsset& asset_;
  int ox_ = 0;
  int oy_ = 0;
};

LineImage blend_pen(const LineImage& image, const std::function<std::uint8_t(int, int)>& target) {
  const auto mask = foreground_mask(image);
  LineImage out = image;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (!mask.at(x, y)) continue;
      const double v = image.at(x, y);
      const double w = (255.0 - v) / 255.0;
      out.at(x, y) = clamp_u8(w * target(x, y) + (1.0 - w) * v);
    }
  }
  return out;
}

LineImage render(const LineImage& image, const Transform& t, const AssetLibrary& assets) {
  t.validate();
  switch (t.kind) {
    case TransformKind::GaussianNoise: return gaussian_noise(image, t.sigma, t.seed);
    case TransformKind::AntiqueBackground:
    case TransformKind::BackgroundTexture: return composite_background(image, assets.get(t.asset), t.seed);
    case TransformKind::ReflectHorizontalAxis: return reflect_horizontal_axis(image);
    case TransformKind::ReflectVerticalAxis: return reflect_vertical_axis(image);
    case TransformKind::GaussianBlur: return gaussian_blur(image, t.sigma);
    case TransformKind::InvertColor: return invert_color(image);
    case TransformKind::Dilate: {
      const auto stats = ink_stats(image);
      return rerender(image, stats, dilate_mask(stats.mask, t.radius));
    }
    case TransformKind::Erode: {
      const auto stats = ink_stats(image);
      return rerender(image, stats, erode_mask(stats.mask, t.radius));
    }
    case TransformKind::Shear: {
      if (t.degrees == 0) return image;
      return shear_image(image, t.degrees, ink_stats(image).paper);
    }
    case TransformKind::Resize: return resize_keep_height(image, t.scale, ink_stats(image).paper);
    case TransformKind::PenColor: {
      const auto gray = static_cast<std::uint8_t>(t.gray);
      return blend_pen(image, [gray](int, int) { return gray; });
    }
    case TransformKind::PenTexture: {
      const TextureWindow window(assets.get(t.asset), image.width(), image.height(), t.seed);
      return blend_pen(image, [&window](int x, int y) { return window.at(x, y); });
    }
  }
  throw Error("augment", "unhandled transform kind");
}

std::optional<Appearance> appearance_after(TransformKind kind) {
  switch (kind) {
    case TransformKind::GaussianNoise: return Appearance{AppearanceKind::Noise, {}};
    case TransformKind::AntiqueBackground: return Appearance{AppearanceKind::Antique, {}};
    case TransformKind::ReflectHorizontalAxis: return Appearance{AppearanceKind::Reflect0, {}};
    case TransformKind::ReflectVerticalAxis: return Appearance{AppearanceKind::Reflect1, {}};
    case TransformKind::GaussianBlur: return Appearance{AppearanceKind::Blur, {}};
    case TransformKind::InvertColor: return Appearance{AppearanceKind::InvertColor, {}};
    default: return std::nullopt;
  }
}

}  // namespace

LineImage composite_background(const LineImage& image, const BackgroundAsset& asset, std::uint64_t seed) {
  const TextureWindow window(asset, image.width(), image.height(), seed);
  const auto mask = foreground_mask(image);
  LineImage out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) out.at(x, y) = mask.at(x, y) ? image.at(x, y) : window.at(x, y);
  }
  return out;
}

LineSample apply(const LineSample& sample, const Pipeline& pipeline, const AssetLibrary& assets) {
  if (pipeline.steps.empty()) throw Error("augment", "empty pipeline");
  LineSample out = sample;
  for (const auto& step : pipeline.steps) {
    out.image = render(out.image, step, assets);
    if (auto a = appearance_after(step.kind)) out.labels.appearance = std::move(a);
  }
  const auto type = pipeline.novelty_type();
  if (type != NoveltyType::None) {
    out.labels.novelty_type = type;
    out.labels.novelty_subtype = pipeline.subtype_name();
    out.labels.difficulty = Difficulty::Unassigned;
  }
  return out;
}

LineSample apply(const LineSample& sample, const Transform& transform, const AssetLibrary& assets) {
  return apply(sample, Pipeline{{transform}, {}}, assets);
}

PoolRecipe PoolRecipe::from_json(const json& j) {
  PoolRecipe recipe;
  recipe.with_replacement = j.value("with_replacement", false);
  if (!j.contains("types") || !j["types"].is_array()) throw Error("augment", "recipe needs a 'types' array");
  for (const auto& entry : j["types"]) {
    PoolRecipeEntry e;
    e.type = parse_novelty_type(entry.at("type").get<std::string>());
    if (e.type == NoveltyType::None) throw Error("augment", "recipe type 'None' is not a novelty");
    e.count = entry.at("count").get<std::size_t>();
    if (entry.contains("subtypes")) {
      for (const auto& sub : entry["subtypes"]) {
        std::vector<Transform> steps;
        std::string label;
        const json* list = &sub;
        if (sub.is_object()) {
          label = sub.value("label", std::string());
          list = &sub.at("steps");
        }
        for (const auto& t : *list) steps.push_back(Transform::from_json(t));
        auto pipeline = compose(std::move(steps));
        pipeline.label = label;
        e.subtypes.push_back(std::move(pipeline));
      }
    }
    if (e.type != NoveltyType::Writer && e.subtypes.empty()) {
      throw Error("augment", "recipe entry '" + std::string(to_string(e.type)) + "' lists no subtypes");
    }
    recipe.entries.push_back(std::move(e));
  }
  return recipe;
}

std::vector<PoolItem> plan_novel_pool(const Manifest& base, const PoolRecipe& recipe, std::uint64_t seed) {
  std::vector<std::size_t> clean;
  std::vector<std::size_t> unseen_writers;
  for (std::size_t i = 0; i < base.records.size(); ++i) {
    const auto& r = base.records[i];
    const auto& w = r.labels.writer_id;
    if (w == kUnknownWriter) continue;
    if (base.known_writers.contains(w)) {
      if (r.labels.novelty_type == NoveltyType::None) clean.push_back(i);
    } else {
      unseen_writers.push_back(i);
    }
  }
  std::vector<PoolItem> items;
  for (const auto& entry : recipe.entries) {
    const auto type_name = std::string(to_string(entry.type));
    const auto& candidates = entry.type == NoveltyType::Writer ? unseen_writers : clean;
    if (entry.count > 0 && candidates.empty()) {
      throw Error("augment", "no base samples available for " + type_name + " novelty");
    }
    if (entry.count > candidates.size() && !recipe.with_replacement) {
      throw Error("augment", "recipe asks for " + std::to_string(entry.count) + " " + type_name +
                                 " samples but only " + std::to_string(candidates.size()) +
                                 " base samples exist (replacement not requested)");
    }
    std::mt19937_64 rng(derive_seed(seed, "augment.pool." + type_name));
    std::vector<std::size_t> chosen;
    if (recipe.with_replacement) {
      std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
      for (std::size_t k = 0; k < entry.count; ++k) chosen.push_back(candidates[pick(rng)]);
    } else {
      chosen = candidates;
      std::shuffle(chosen.begin(), chosen.end(), rng);
      chosen.resize(entry.count);
    }
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      PoolItem item;
      item.base_index = chosen[k];
      item.type = entry.type;
      if (!entry.subtypes.empty()) item.pipeline = entry.subtypes[k % entry.subtypes.size()];
      std::ostringstream id;
      id << base.records[chosen[k]].id << '.' << type_name << '.' << k;
      item.id = id.str();
      item.seed = derive_seed(seed, static_cast<std::uint64_t>(items.size()));
      items.push_back(std::move(item));
    }
  }
  return items;
}

NovelPool build_novel_pool(const Manifest& base, const PoolRecipe& recipe, const AssetLibrary& assets,
                           std::uint64_t seed, unsigned jobs) {
  const auto items = plan_novel_pool(base, recipe, seed);

  // Known-writer reference styles for difficulty scoring.
  std::vector<std::size_t> known_idx;
  for (std::size_t i = 0; i < base.records.size(); ++i) {
    const auto& r = base.records[i];
    if (base.known_writers.contains(r.labels.writer_id) && r.labels.novelty_type == NoveltyType::None) {
      known_idx.push_back(i);
    }
  }
  std::vector<std::optional<StyleVector>> known_styles(known_idx.size());
  parallel_for(known_idx.size(), jobs, [&](std::size_t k) {
    try {
      known_styles[k] = style_vector(base.load_sample(base.records[known_idx[k]]));
    } catch (const Error&) {
      // blank or all-ink reference lines carry no style
    }
  });
  std::map<std::string, std::vector<StyleVector>> by_writer;
  for (std::size_t k = 0; k < known_idx.size(); ++k) {
    if (known_styles[k]) by_writer[base.records[known_idx[k]].labels.writer_id].push_back(*known_styles[k]);
  }
  const auto context = DifficultyContext::from_known(by_writer);

  NovelPool pool;
  pool.manifest.alphabet = base.alphabet;
  pool.manifest.known_writers = base.known_writers;
  pool.manifest.records.resize(items.size());
  pool.images.resize(items.size());
  std::vector<DifficultyInput> inputs(items.size());
  parallel_for(items.size(), jobs, [&](std::size_t i) {
    const auto& item = items[i];
    const auto& src = base.records[item.base_index];
    LineSample sample = base.load_sample(src);
    if (item.pipeline) {
      Pipeline p = *item.pipeline;
      for (std::size_t s = 0; s < p.steps.size(); ++s) p.steps[s].seed = derive_seed(item.seed, s);
      sample = apply(sample, p, assets);
    } else {
      sample.labels.novelty_type = NoveltyType::Writer;
      sample.labels.novelty_subtype = "Novel Writer";
    }
    DifficultyInput in{item.type};
    try {
      if (item.type == NoveltyType::Writer || item.type == NoveltyType::Letter) {
        in.style = style_vector(sample.image);
      } else {
        in.background_mean = background_mean(sample.image);
      }
    } catch (const Error& e) {
      throw Error("augment", "cannot score difficulty of '" + item.id + "': " + e.what());
    }
    inputs[i] = in;
    auto& rec = pool.manifest.records[i];
    rec.id = item.id;
    rec.image = "images/" + item.id + ".png";
    rec.labels = sample.labels;
    pool.images[i] = std::move(sample.image);
  });
  const auto tiers = assign_difficulty(inputs, context);
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto& rec = pool.manifest.records[i];
    rec.labels.difficulty = tiers[i];
    rec.has_unknown_characters =
        rec.labels.transcript && has_characters_outside(*rec.labels.transcript, pool.manifest.alphabet);
  }
  return pool;
}

}  // namespace scriptdrift
