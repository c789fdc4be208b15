#include "scriptdrift/corpus.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "scriptdrift/error.hpp"
#include "scriptdrift/util.hpp"

namespace scriptdrift {

using nlohmann::ordered_json;

namespace {

constexpr std::pair<AppearanceKind, std::string_view> kAppearanceNames[] = {
    {AppearanceKind::OriginalWhite, "OriginalWhite"}, {AppearanceKind::Noise, "Noise"},
    {AppearanceKind::Antique, "Antique"},             {AppearanceKind::Reflect0, "Reflect0"},
    {AppearanceKind::Blur, "Blur"},                   {AppearanceKind::Reflect1, "Reflect1"},
    {AppearanceKind::InvertColor, "InvertColor"},
};

constexpr std::pair<NoveltyType, std::string_view> kNoveltyNames[] = {
    {NoveltyType::None, "None"},     {NoveltyType::Writer, "Writer"},
    {NoveltyType::Letter, "Letter"}, {NoveltyType::Pen, "Pen"},
    {NoveltyType::Background, "Background"},
};

constexpr std::pair<Difficulty, std::string_view> kDifficultyNames[] = {
    {Difficulty::Unassigned, "Unassigned"}, {Difficulty::Easy, "Easy"},
    {Difficulty::Medium, "Medium"},         {Difficulty::Hard, "Hard"},
};

constexpr std::string_view kHeaderFormat = "scriptdrift-manifest";

}  // namespace

Appearance Appearance::parse(std::string_view text) {
  for (const auto& [kind, name] : kAppearanceNames) {
    if (text == name) return {kind, {}};
  }
  return {AppearanceKind::Other, std::string(text)};
}

std::string Appearance::name() const {
  if (kind == AppearanceKind::Other) return tag;
  for (const auto& [k, name] : kAppearanceNames) {
    if (k == kind) return std::string(name);
  }
  return {};
}

std::string_view to_string(NoveltyType type) {
  for (const auto& [t, name] : kNoveltyNames) {
    if (t == type) return name;
  }
  return "None";
}

std::string_view to_string(Difficulty difficulty) {
  for (const auto& [d, name] : kDifficultyNames) {
    if (d == difficulty) return name;
  }
  return "Unassigned";
}

NoveltyType parse_novelty_type(std::string_view text) {
  for (const auto& [t, name] : kNoveltyNames) {
    if (text == name) return t;
  }
  if (text == "Style" || text == "Letter/Style") return NoveltyType::Letter;
  throw Error("corpus", "unknown novelty type '" + std::string(text) + "'");
}

Difficulty parse_difficulty(std::string_view text) {
  for (const auto& [d, name] : kDifficultyNames) {
    if (text == name) return d;
  }
  throw Error("corpus", "unknown difficulty '" + std::string(text) + "'");
}

void SampleLabels::validate() const {
  if (novelty_type == NoveltyType::None) {
    if (!novelty_subtype.empty()) throw Error("corpus", "non-novel sample carries a novelty subtype");
    if (difficulty != Difficulty::Unassigned) throw Error("corpus", "non-novel sample carries a difficulty");
  }
}

const ManifestRecord* Manifest::find(std::string_view id) const {
  for (const auto& r : records) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

LineSample Manifest::load_sample(const ManifestRecord& record) const {
  return {record.id, read_image(image_path(record)), record.labels};
}

std::set<std::string> Manifest::writers() const {
  std::set<std::string> out;
  for (const auto& r : records) out.insert(r.labels.writer_id);
  return out;
}

bool has_characters_outside(std::u32string_view text, const std::set<char32_t>& alphabet) {
  return std::any_of(text.begin(), text.end(), [&](char32_t c) { return !alphabet.contains(c); });
}

namespace {

std::string string_field(const ordered_json& obj, const char* key, bool required) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) throw std::invalid_argument(std::string("missing field '") + key + "'");
    return {};
  }
  if (!it->is_string()) throw std::invalid_argument(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

ManifestRecord parse_record(const ordered_json& obj) {
  if (!obj.is_object()) throw std::invalid_argument("record is not a JSON object");
  ManifestRecord r;
  r.id = string_field(obj, "id", true);
  if (r.id.empty()) throw std::invalid_argument("empty id");
  r.image = string_field(obj, "image", true);
  r.labels.writer_id = string_field(obj, "writer", true);
  if (r.labels.writer_id.empty()) throw std::invalid_argument("empty writer");
  if (auto it = obj.find("transcript"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw std::invalid_argument("field 'transcript' must be a string");
    r.labels.transcript = utf8_decode(it->get<std::string>());
  }
  if (auto it = obj.find("appearance"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw std::invalid_argument("field 'appearance' must be a string");
    r.labels.appearance = Appearance::parse(it->get<std::string>());
  }
  if (auto s = string_field(obj, "novelty_type", false); !s.empty()) r.labels.novelty_type = parse_novelty_type(s);
  r.labels.novelty_subtype = string_field(obj, "novelty_subtype", false);
  if (auto s = string_field(obj, "difficulty", false); !s.empty()) r.labels.difficulty = parse_difficulty(s);
  r.labels.validate();
  return r;
}

ordered_json record_json(const ManifestRecord& r) {
  ordered_json o;
  o["id"] = r.id;
  o["image"] = r.image;
  o["writer"] = r.labels.writer_id;
  o["transcript"] = r.labels.transcript ? ordered_json(utf8_encode(*r.labels.transcript)) : ordered_json(nullptr);
  o["appearance"] = r.labels.appearance ? ordered_json(r.labels.appearance->name()) : ordered_json(nullptr);
  o["novelty_type"] = std::string(to_string(r.labels.novelty_type));
  o["novelty_subtype"] = r.labels.novelty_subtype;
  o["difficulty"] = std::string(to_string(r.labels.difficulty));
  return o;
}

}  // namespace

Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir, bool check_images) {
  Manifest m;
  m.base_dir = base_dir;
  bool have_header = false;
  std::unordered_set<std::string> ids;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw Error("corpus", "malformed record at line " + std::to_string(line_no) + ": " + e.what());
    }
    if (obj.is_object() && obj.contains("format")) {
      if (have_header || !m.records.empty()) {
        throw Error("corpus", "header must be the first line (line " + std::to_string(line_no) + ")");
      }
      if (obj["format"] != kHeaderFormat) {
        throw Error("corpus", "unknown manifest format at line " + std::to_string(line_no));
      }
      if (obj.value("version", 0) != 1) throw Error("corpus", "unsupported manifest version");
      try {
        for (char32_t c : utf8_decode(obj.at("alphabet").get<std::string>())) m.alphabet.insert(c);
        for (const auto& w : obj.at("known_writers")) m.known_writers.insert(w.get<std::string>());
      } catch (const Error&) {
        throw;
      } catch (const std::exception& e) {
        throw Error("corpus", "malformed header at line " + std::to_string(line_no) + ": " + e.what());
      }
      have_header = true;
      continue;
    }
    ManifestRecord record;
    try {
      record = parse_record(obj);
    } catch (const Error& e) {
      throw Error("corpus", "malformed record at line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error("corpus", "malformed record at line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!ids.insert(record.id).second) throw Error("corpus", "duplicate id \"" + record.id + "\"");
    if (check_images && !std::filesystem::exists(base_dir / record.image)) {
      throw Error("corpus", "missing image file '" + record.image + "' for id \"" + record.id + "\"");
    }
    m.records.push_back(std::move(record));
  }

  if (!have_header) {
    for (const auto& r : m.records) {
      if (r.labels.transcript) m.alphabet.insert(r.labels.transcript->begin(), r.labels.transcript->end());
      if (r.labels.writer_id != kUnknownWriter && r.labels.novelty_type != NoveltyType::Writer) {
        m.known_writers.insert(r.labels.writer_id);
      }
    }
  } else {
    for (const auto& r : m.records) {
      const auto& w = r.labels.writer_id;
      if (w != kUnknownWriter && !m.known_writers.contains(w) && r.labels.novelty_type != NoveltyType::Writer) {
        throw Error("corpus", "record \"" + r.id + "\" has writer '" + w +
                                  "' that is neither known, UNKNOWN, nor marked as Writer novelty");
      }
    }
  }
  for (auto& r : m.records) {
    r.has_unknown_characters = r.labels.transcript && has_characters_outside(*r.labels.transcript, m.alphabet);
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  const auto text = read_text_file(path, "corpus");
  return parse_manifest(text, path.parent_path(), true);
}

std::string serialize_manifest(const Manifest& manifest) {
  ordered_json header;
  header["format"] = std::string(kHeaderFormat);
  header["version"] = 1;
  header["alphabet"] = utf8_encode(std::u32string(manifest.alphabet.begin(), manifest.alphabet.end()));
  header["known_writers"] = ordered_json::array();
  for (const auto& w : manifest.known_writers) header["known_writers"].push_back(w);
  std::string out = header.dump() + "\n";
  for (const auto& r : manifest.records) out += record_json(r).dump() + "\n";
  return out;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  write_text_file(path, serialize_manifest(manifest), "corpus");
}

std::vector<FoldSplit> split_folds(const Manifest& manifest, int folds, std::uint64_t seed) {
  if (folds < 2) throw Error("corpus", "need at least 2 folds");
  std::map<std::string, std::vector<std::size_t>> by_writer;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& w = manifest.records[i].labels.writer_id;
    if (w != kUnknownWriter) by_writer[w].push_back(i);
  }
  std::vector<std::string> writers;
  for (const auto& [w, _] : by_writer) writers.push_back(w);

  const std::size_t half_b = writers.size() / 2;
  const std::size_t half_a = writers.size() - half_b;
  if (half_a < 2 || half_b < 2 || half_b < static_cast<std::size_t>(folds)) {
    throw Error("corpus", "too few writers (" + std::to_string(writers.size()) + ") for " +
                              std::to_string(folds) + " folds");
  }
  std::mt19937_64 rng(derive_seed(seed, "corpus.split_folds"));
  std::shuffle(writers.begin(), writers.end(), rng);
  const std::vector<std::string> group_a(writers.begin(), writers.begin() + static_cast<std::ptrdiff_t>(half_a));
  const std::vector<std::string> group_b(writers.begin() + static_cast<std::ptrdiff_t>(half_a), writers.end());

  const auto F = static_cast<std::size_t>(folds);
  // chunk[i] = fold-chunk index of record i; -1 for records outside the split.
  std::vector<int> chunk(manifest.records.size(), -1);
  for (const auto& w : group_a) {
    auto lines = by_writer[w];
    std::shuffle(lines.begin(), lines.end(), rng);
    for (std::size_t k = 0; k < lines.size(); ++k) chunk[lines[k]] = static_cast<int>(k % F);
  }
  for (std::size_t k = 0; k < group_b.size(); ++k) {
    for (std::size_t i : by_writer[group_b[k]]) chunk[i] = static_cast<int>(k * F / group_b.size());
  }

  std::vector<FoldSplit> out;
  for (std::size_t f = 0; f < F; ++f) {
    const int test_chunk = static_cast<int>(f);
    const int val_chunk = F >= 3 ? static_cast<int>((f + 1) % F) : -2;
    FoldSplit split;
    for (Manifest* m : {&split.train, &split.val, &split.test}) {
      m->alphabet = manifest.alphabet;
      m->base_dir = manifest.base_dir;
    }
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
      if (chunk[i] < 0) continue;
      Manifest& dest = chunk[i] == test_chunk ? split.test : chunk[i] == val_chunk ? split.val : split.train;
      dest.records.push_back(manifest.records[i]);
    }
    const auto train_writers = split.train.writers();
    for (Manifest* m : {&split.train, &split.val, &split.test}) {
      m->known_writers = train_writers;
      for (auto& r : m->records) {
        if (!train_writers.contains(r.labels.writer_id) && r.labels.novelty_type == NoveltyType::None) {
          r.labels.novelty_type = NoveltyType::Writer;
        }
      }
    }
    out.push_back(std::move(split));
  }
  return out;
}

GroundTruthNovelty ground_truth_novelty(const SampleLabels& labels, const std::set<char32_t>& alphabet,
                                        const std::set<std::string>& known_writers,
                                        const std::set<Appearance>& training_appearances) {
  GroundTruthNovelty out;
  if (labels.transcript) {
    out.character = has_characters_outside(*labels.transcript, alphabet) ? NoveltyVerdict::Novel : NoveltyVerdict::Known;
  }
  if (!labels.writer_id.empty()) {
    out.writer = known_writers.contains(labels.writer_id) ? NoveltyVerdict::Known : NoveltyVerdict::Novel;
  }
  if (labels.appearance) {
    out.appearance = training_appearances.contains(*labels.appearance) ? NoveltyVerdict::Known : NoveltyVerdict::Novel;
  }
  return out;
}

}  // namespace scriptdrift
