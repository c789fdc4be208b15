#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scriptdrift/corpus.hpp"
#include "scriptdrift/style_metrics.hpp"

namespace scriptdrift {

enum class StyleAttribute { PenPressure, SlantAngle, WordSpacing, CharacterSize };

inline constexpr std::array<StyleAttribute, 4> kStyleAttributes = {
    StyleAttribute::PenPressure, StyleAttribute::SlantAngle, StyleAttribute::WordSpacing,
    StyleAttribute::CharacterSize};

std::string_view to_string(StyleAttribute attribute);
double attribute_value(const StyleVector& style, StyleAttribute attribute);
int default_bin_count(StyleAttribute attribute);

/// Equal-frequency bins per style attribute. Each attribute stores its
/// inner edges (bin count - 1 of them); bin i holds edge[i-1] < v <= edge[i].
struct BinningScheme {
  std::array<std::vector<double>, 4> edges;

  int bin_count(StyleAttribute attribute) const {
    return static_cast<int>(edges[static_cast<int>(attribute)].size()) + 1;
  }
  int bin_of(StyleAttribute attribute, double value) const;
};

/// Nearest-rank quantile edges. When duplicate values collapse two edges the
/// edges are recomputed over the distinct values. Throws if an attribute has
/// fewer distinct values than bins.
BinningScheme fit_bins(std::span<const StyleVector> styles);

enum class NodeKind { Sample, AttributeBin, Writer };

struct GraphNode {
  NodeKind kind;
  std::string id;                                     // sample or writer id
  StyleAttribute attribute = StyleAttribute::PenPressure;  // AttributeBin only
  int bin = -1;                                       // AttributeBin only
};

struct GraphEdge {
  std::size_t from;
  std::size_t to;
  bool modal;  // Writer -> AttributeBin when true, Sample -> AttributeBin otherwise
};

struct SampleRef {
  std::string id;
  std::string writer_id;
};

class KnowledgeGraph {
public:
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }

  std::optional<std::size_t> sample_node(std::string_view id) const;
  std::optional<std::size_t> writer_node(std::string_view id) const;
  std::size_t bin_node(StyleAttribute attribute, int bin) const;

  std::vector<std::size_t> out_edges(std::size_t node) const;
  std::vector<std::size_t> in_edges(std::size_t node) const;

  /// Bin the sample (or writer, modal) was linked to for an attribute.
  int linked_bin(std::size_t node, StyleAttribute attribute) const;

  const std::string& writer_of(std::size_t sample_node) const { return sample_writer_.at(sample_node); }

private:
  friend KnowledgeGraph build_graph(std::span<const SampleRef>, const std::map<std::string, StyleVector>&,
                                    const BinningScheme&);

  std::size_t add_node(GraphNode node);

  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::map<std::string, std::size_t, std::less<>> samples_;
  std::map<std::string, std::size_t, std::less<>> writers_;
  std::map<std::pair<int, int>, std::size_t> bins_;
  std::map<std::size_t, std::string> sample_writer_;
};

/// Sample edges from binned measures; writer edges to the most frequent bin
/// among that writer's samples (ties to the lower bin index).
KnowledgeGraph build_graph(std::span<const SampleRef> samples, const std::map<std::string, StyleVector>& styles,
                           const BinningScheme& bins);

struct StyleMismatch {
  std::string sample_id;
  StyleAttribute attribute;
  int sample_bin;
  int modal_bin;
};

struct ConsistencyReport {
  double fraction = 1.0;
  std::vector<StyleMismatch> mismatches;
};

/// Share of sample edges agreeing with the writer's modal bin; mismatches are
/// the edges drawn in red on the style graph.
ConsistencyReport consistency(const KnowledgeGraph& graph);

struct WriterDistanceMatrix {
  std::vector<std::string> writers;
  std::vector<double> distances;  // row-major, writers.size()^2

  double at(std::size_t i, std::size_t j) const { return distances[i * writers.size() + j]; }
  std::string to_csv() const;
};

/// Per-writer mean of the four style attributes, min-max normalized over
/// writers per attribute (constant attributes normalize to 0).
struct StyleNormalizer {
  std::array<double, 4> min{};
  std::array<double, 4> max{};

  std::array<double, 4> apply(const std::array<double, 4>& raw) const;
};

std::array<double, 4> style_attributes(const StyleVector& style);
std::array<double, 4> mean_style(std::span<const StyleVector> styles);

WriterDistanceMatrix writer_distances(const std::map<std::string, std::vector<StyleVector>>& styles_by_writer);

/// Known-writer reference for difficulty scoring.
struct DifficultyContext {
  std::vector<std::array<double, 4>> known_means;  // raw, unnormalized
  StyleNormalizer normalizer;

  static DifficultyContext from_known(const std::map<std::string, std::vector<StyleVector>>& styles_by_writer);
};

struct DifficultyInput {
  NoveltyType type = NoveltyType::None;
  std::optional<StyleVector> style;        // Writer / Letter
  std::optional<double> background_mean;   // Pen / Background
};

/// Raw separation score: min normalized L1 distance to any known writer for
/// Writer/Letter novelty, 255 - mean background intensity for Pen/Background.
double difficulty_score(const DifficultyInput& input, const DifficultyContext& context);

/// Tertile binning of a score population: the tertile of item i is
/// floor(3 * #{j : s_j < s_i} / n); the top tertile is Easy.
std::vector<Difficulty> tertile_difficulty(std::span<const double> scores);

/// Scores each input and bins tertiles separately per novelty type.
std::vector<Difficulty> assign_difficulty(std::span<const DifficultyInput> inputs, const DifficultyContext& context);

/// Mean intensity of non-ink pixels. Throws when the image is all ink.
double background_mean(const LineImage& image);

}  // namespace scriptdrift
