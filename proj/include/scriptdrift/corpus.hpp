#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "scriptdrift/image.hpp"

namespace scriptdrift {

/// Writer id used for documents whose author is not tracked.
inline constexpr std::string_view kUnknownWriter = "UNKNOWN";

enum class AppearanceKind { OriginalWhite, Noise, Antique, Reflect0, Blur, Reflect1, InvertColor, Other };

/// Global document appearance. `Other` carries its free-form tag.
struct Appearance {
  AppearanceKind kind = AppearanceKind::OriginalWhite;
  std::string tag;

  static Appearance parse(std::string_view text);
  std::string name() const;

  friend bool operator==(const Appearance&, const Appearance&) = default;
  friend auto operator<=>(const Appearance& a, const Appearance& b) { return a.name() <=> b.name(); }
};

enum class NoveltyType { None, Writer, Letter, Pen, Background };
enum class Difficulty { Unassigned, Easy, Medium, Hard };

std::string_view to_string(NoveltyType type);
std::string_view to_string(Difficulty difficulty);
NoveltyType parse_novelty_type(std::string_view text);
Difficulty parse_difficulty(std::string_view text);

/// Oracle labels of one line. Absent optionals mean "unlabeled".
struct SampleLabels {
  std::string writer_id;
  std::optional<std::u32string> transcript;
  std::optional<Appearance> appearance;
  NoveltyType novelty_type = NoveltyType::None;
  std::string novelty_subtype;
  Difficulty difficulty = Difficulty::Unassigned;

  /// None ⇒ empty subtype and unassigned difficulty. Throws Error otherwise.
  void validate() const;

  friend bool operator==(const SampleLabels&, const SampleLabels&) = default;
};

struct LineSample {
  std::string id;
  LineImage image;
  SampleLabels labels;
};

struct ManifestRecord {
  std::string id;
  std::string image;  // as written in the manifest, relative to the manifest directory
  SampleLabels labels;
  bool has_unknown_characters = false;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct Manifest {
  std::vector<ManifestRecord> records;
  std::set<char32_t> alphabet;
  std::set<std::string> known_writers;
  std::filesystem::path base_dir;

  std::filesystem::path image_path(const ManifestRecord& record) const { return base_dir / record.image; }
  const ManifestRecord* find(std::string_view id) const;
  LineSample load_sample(const ManifestRecord& record) const;

  /// Writer ids present in the records, sorted.
  std::set<std::string> writers() const;
};

/// Parses a `.jsonl` manifest. The first line may be a header object
/// {"format":"scriptdrift-manifest","version":1,"alphabet":...,"known_writers":[...]};
/// without it the alphabet is the union of transcript characters and every
/// named writer except UNKNOWN is known.
Manifest load_manifest(const std::filesystem::path& path);

/// Parses manifest text. When `check_images` is set, image files must exist under base_dir.
Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir, bool check_images);

/// Canonical serialization: header line then one record per line, fields in fixed order.
std::string serialize_manifest(const Manifest& manifest);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

struct FoldSplit {
  Manifest train;
  Manifest val;
  Manifest test;
};

/// Writer-disjoint k-fold protocol. Writers (UNKNOWN excluded) are shuffled
/// and halved. Half A writers are stratified: each writer's lines are dealt
/// into `folds` chunks, fold f tests on chunk f, validates on chunk f+1, and
/// trains on the rest. Half B is cut into `folds` disjoint writer groups;
/// fold f tests on group f, validates on group f+1, trains on the rest.
/// Every split's known_writers is its training writer set; val/test lines by
/// other writers are relabeled as Writer novelty.
std::vector<FoldSplit> split_folds(const Manifest& manifest, int folds, std::uint64_t seed);

enum class NoveltyVerdict { Known, Novel, Unlabeled };

struct GroundTruthNovelty {
  NoveltyVerdict character = NoveltyVerdict::Unlabeled;
  NoveltyVerdict writer = NoveltyVerdict::Unlabeled;
  NoveltyVerdict appearance = NoveltyVerdict::Unlabeled;
};

/// Per-category oracle novelty. Characters are compared per Unicode scalar.
GroundTruthNovelty ground_truth_novelty(const SampleLabels& labels, const std::set<char32_t>& alphabet,
                                        const std::set<std::string>& known_writers,
                                        const std::set<Appearance>& training_appearances);

bool has_characters_outside(std::u32string_view text, const std::set<char32_t>& alphabet);

}  // namespace scriptdrift
