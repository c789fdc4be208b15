#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "scriptdrift/corpus.hpp"
#include "scriptdrift/runner.hpp"
#include "scriptdrift/style_metrics.hpp"
#include "scriptdrift/testgen.hpp"

namespace scriptdrift {

/// Truth slot for a writer outside the known set in top-k and NMI scoring.
inline constexpr std::string_view kNovelLabel = "NOVEL";

std::size_t levenshtein(std::u32string_view a, std::u32string_view b);
std::size_t levenshtein(std::span<const std::string> a, std::span<const std::string> b);

/// 1 - L / max(|truth|, |pred|); both empty gives 1.
double char_accuracy(std::u32string_view truth, std::u32string_view pred);
double word_accuracy(std::span<const std::string> truth, std::span<const std::string> pred);
std::vector<std::string> split_words(std::string_view text);

enum class NmiVariant { Geometric, Arithmetic, Min, Max };
NmiVariant parse_nmi_variant(std::string_view text);

/// Mutual information over the label contingency table, normalized by the
/// chosen mean of the two entropies (natural log). Two single-cluster
/// partitions give 1; a single-cluster partition against anything else gives 0.
double nmi(std::span<const std::string> a, std::span<const std::string> b, NmiVariant variant = NmiVariant::Geometric);
double nmi(std::span<const int> a, std::span<const int> b, NmiVariant variant = NmiVariant::Geometric);

/// (1/N) sum over clusters of the cluster's majority truth count.
double purity(std::span<const int> clusters, std::span<const std::string> truth);

/// Fraction of rows whose truth label appears among the first k predictions.
double topk_accuracy(std::span<const std::vector<std::string>> predictions, std::span<const std::string> truth,
                     std::size_t k);

double pearson(std::span<const double> x, std::span<const double> y);
/// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

struct ConfusionMatrix {
  std::vector<std::string> labels;              // sorted; includes NOVEL when present
  std::vector<std::vector<std::uint64_t>> counts;  // [truth][prediction]

  static ConfusionMatrix build(std::span<const std::string> truth, std::span<const std::string> pred);
  std::uint64_t total() const;
  std::string to_csv() const;
};

struct KMeansResult {
  std::vector<int> assignments;
  std::vector<std::vector<double>> centers;
  double inertia = 0;
  int k_effective = 0;
};

/// Lloyd's algorithm with k-means++ seeding; the best of `restarts` runs by
/// inertia. Seeding stops early when every point coincides with a center,
/// so identical inputs collapse to one cluster.
KMeansResult kmeans(std::span<const std::vector<double>> points, int k, std::uint64_t seed, int restarts = 10,
                    int max_iterations = 300, double tolerance = 1e-6);

enum class ClusterGroup { PenPressure, CharacterSize, WordSpacing, SlantAngle, NoveltyCheck };

inline constexpr ClusterGroup kClusterGroups[] = {ClusterGroup::PenPressure, ClusterGroup::CharacterSize,
                                                  ClusterGroup::WordSpacing, ClusterGroup::SlantAngle,
                                                  ClusterGroup::NoveltyCheck};

std::string_view group_code(ClusterGroup group);  // PP, CS, WS, SA, NC
int group_clusters(ClusterGroup group);           // 3, 3, 3, 4, 3

inline constexpr std::string_view kCharacterizationRows[] = {"Style", "Background", "Pen", "No Novelty"};

/// Row a novelty type falls in: Writer and Letter are both style changes.
std::string_view characterization_row(NoveltyType type);

struct CharacterizationSample {
  NoveltyType type = NoveltyType::None;
  std::string truth;           // novelty subtype, "None" for non-novel samples
  StyleVector style;
  std::vector<double> signal;  // agent novelty signal for the NC group
};

struct CharacterizationCell {
  double purity = 0;
  double nmi = 0;
  int k_effective = 0;
  std::size_t samples = 0;
};

struct CharacterizationTable {
  std::vector<std::string> rows;
  std::map<std::string, std::map<std::string, CharacterizationCell>> cells;  // row -> group code -> cell

  std::string to_csv(bool use_nmi = false) const;
};

CharacterizationTable characterize(std::span<const CharacterizationSample> samples, std::uint64_t seed);

/// Last `window` records of a run (all of them when shorter).
std::span<const PredictionRecord> evaluation_window(std::span<const PredictionRecord> records, std::size_t window = 32);

struct SampleTruth {
  std::string writer_id;
  NoveltyType type = NoveltyType::None;
  std::string subtype;
  std::optional<std::u32string> transcript;
};

struct ReportContext {
  std::map<std::string, SampleTruth> truth;
  std::set<std::string> known_writers;

  static ReportContext from_manifests(std::span<const Manifest> manifests);
};

struct ScoredTest {
  OracleFile oracle;
  std::vector<PredictionRecord> records;
};

inline constexpr std::string_view kReportColumns[] = {"Novelty Detection Acc.", "Mean Char. Acc.", "NMI",
                                                      "Writer ID Acc."};

struct ReportRow {
  std::string group;
  std::size_t samples = 0;
  double detection_accuracy = 0;
  std::optional<double> char_accuracy;  // absent without transcripts
  double nmi = 0;
  double writer_accuracy = 0;
};

struct FalsePositivePoint {
  double proportion = 0;
  double mean_false_positives = 0;
  std::size_t tests = 0;
};

struct Report {
  std::vector<ReportRow> by_subtype;
  std::vector<ReportRow> by_type;
  std::vector<ReportRow> is_novel_split;
  std::vector<FalsePositivePoint> false_positives;
  std::vector<std::string> warnings;

  std::string table_csv(std::span<const ReportRow> rows) const;
  std::string false_positive_csv() const;
  nlohmann::ordered_json summary() const;
};

/// Tests are merged in test-id order. A false positive is a non-novel sample
/// flagged novel anywhere in the stream.
Report build_report(std::span<const ScoredTest> tests, const ReportContext& context, int top_k = 3);

/// Line plot of mean false positives against novelty proportion.
std::string false_positive_svg(std::span<const FalsePositivePoint> points);

}  // namespace scriptdrift
