#include "scriptdrift/ontology.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <sstream>

#include "scriptdrift/error.hpp"

namespace scriptdrift {

std::string_view to_string(StyleAttribute attribute) {
  switch (attribute) {
    case StyleAttribute::PenPressure: return "pen_pressure";
    case StyleAttribute::SlantAngle: return "slant_angle";
    case StyleAttribute::WordSpacing: return "word_spacing";
    case StyleAttribute::CharacterSize: return "character_size";
  }
  return "?";
}

double attribute_value(const StyleVector& style, StyleAttribute attribute) {
  switch (attribute) {
    case StyleAttribute::PenPressure: return style.pen_pressure;
    case StyleAttribute::SlantAngle: return style.slant_angle;
    case StyleAttribute::WordSpacing: return style.word_spacing;
    case StyleAttribute::CharacterSize: return style.character_size;
  }
  return 0;
}

int default_bin_count(StyleAttribute attribute) { return attribute == StyleAttribute::SlantAngle ? 4 : 3; }

int BinningScheme::bin_of(StyleAttribute attribute, double value) const {
  const auto& e = edges[static_cast<int>(attribute)];
  return static_cast<int>(std::lower_bound(e.begin(), e.end(), value) - e.begin());
}

namespace {

std::vector<double> rank_edges(const std::vector<double>& sorted, int bins) {
  std::vector<double> edges;
  const auto n = static_cast<double>(sorted.size());
  for (int k = 1; k < bins; ++k) {
    const auto rank = static_cast<std::size_t>(std::ceil(k * n / bins));
    edges.push_back(sorted[std::max<std::size_t>(rank, 1) - 1]);
  }
  return edges;
}

bool strictly_increasing(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

}  // namespace

BinningScheme fit_bins(std::span<const StyleVector> styles) {
  BinningScheme scheme;
  for (auto attribute : kStyleAttributes) {
    const int bins = default_bin_count(attribute);
    std::vector<double> values;
    values.reserve(styles.size());
    for (const auto& s : styles) values.push_back(attribute_value(s, attribute));
    std::sort(values.begin(), values.end());
    std::vector<double> distinct = values;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < static_cast<std::size_t>(bins)) {
      throw Error("ontology", "too few distinct values for " + std::string(to_string(attribute)) + " (" +
                                  std::to_string(distinct.size()) + " < " + std::to_string(bins) + " bins)");
    }
    auto edges = rank_edges(values, bins);
    if (!strictly_increasing(edges) || edges.back() >= values.back()) edges = rank_edges(distinct, bins);
    scheme.edges[static_cast<int>(attribute)] = std::move(edges);
  }
  return scheme;
}

std::size_t KnowledgeGraph::add_node(GraphNode node) {
  nodes_.push_back(std::move(node));
  out_.emplace_back();
  in_.emplace_back();
  return nodes_.size() - 1;
}

std::optional<std::size_t> KnowledgeGraph::sample_node(std::string_view id) const {
  const auto it = samples_.find(id);
  if (it == samples_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> KnowledgeGraph::writer_node(std::string_view id) const {
  const auto it = writers_.find(id);
  if (it == writers_.end()) return std::nullopt;
  return it->second;
}

std::size_t KnowledgeGraph::bin_node(StyleAttribute attribute, int bin) const {
  return bins_.at({static_cast<int>(attribute), bin});
}

std::vector<std::size_t> KnowledgeGraph::out_edges(std::size_t node) const { return out_.at(node); }
std::vector<std::size_t> KnowledgeGraph::in_edges(std::size_t node) const { return in_.at(node); }

int KnowledgeGraph::linked_bin(std::size_t node, StyleAttribute attribute) const {
  for (std::size_t e : out_.at(node)) {
    const auto& target = nodes_[edges_[e].to];
    if (target.attribute == attribute) return target.bin;
  }
  return -1;
}

KnowledgeGraph build_graph(std::span<const SampleRef> samples, const std::map<std::string, StyleVector>& styles,
                           const BinningScheme& bins) {
  KnowledgeGraph g;
  for (auto attribute : kStyleAttributes) {
    for (int b = 0; b < bins.bin_count(attribute); ++b) {
      g.bins_[{static_cast<int>(attribute), b}] = g.add_node({NodeKind::AttributeBin, {}, attribute, b});
    }
  }
  auto add_edge = [&g](std::size_t from, std::size_t to, bool modal) {
    g.edges_.push_back({from, to, modal});
    g.out_[from].push_back(g.edges_.size() - 1);
    g.in_[to].push_back(g.edges_.size() - 1);
  };

  // writer -> attribute -> per-bin sample counts
  std::map<std::string, std::array<std::vector<int>, 4>> tallies;
  for (const auto& s : samples) {
    const auto style = styles.find(s.id);
    if (style == styles.end()) throw Error("ontology", "sample \"" + s.id + "\" has no style vector");
    if (s.writer_id.empty()) throw Error("ontology", "sample \"" + s.id + "\" has no writer id");
    if (g.samples_.contains(s.id)) throw Error("ontology", "duplicate sample \"" + s.id + "\"");
    const auto node = g.add_node({NodeKind::Sample, s.id});
    g.samples_[s.id] = node;
    g.sample_writer_[node] = s.writer_id;
    auto& tally = tallies[s.writer_id];
    for (auto attribute : kStyleAttributes) {
      const int b = bins.bin_of(attribute, attribute_value(style->second, attribute));
      add_edge(node, g.bin_node(attribute, b), false);
      auto& counts = tally[static_cast<int>(attribute)];
      counts.resize(static_cast<std::size_t>(bins.bin_count(attribute)), 0);
      ++counts[b];
    }
  }
  for (const auto& [writer, tally] : tallies) {
    const auto node = g.add_node({NodeKind::Writer, writer});
    g.writers_[writer] = node;
    for (auto attribute : kStyleAttributes) {
      const auto& counts = tally[static_cast<int>(attribute)];
      const auto modal = std::max_element(counts.begin(), counts.end()) - counts.begin();  // first max = lowest bin
      add_edge(node, g.bin_node(attribute, static_cast<int>(modal)), true);
    }
  }
  return g;
}

ConsistencyReport consistency(const KnowledgeGraph& graph) {
  ConsistencyReport report;
  std::size_t total = 0;
  for (std::size_t n = 0; n < graph.nodes().size(); ++n) {
    const auto& node = graph.nodes()[n];
    if (node.kind != NodeKind::Sample) continue;
    const auto writer = graph.writer_node(graph.writer_of(n));
    for (auto attribute : kStyleAttributes) {
      ++total;
      const int sample_bin = graph.linked_bin(n, attribute);
      const int modal_bin = graph.linked_bin(*writer, attribute);
      if (sample_bin != modal_bin) report.mismatches.push_back({node.id, attribute, sample_bin, modal_bin});
    }
  }
  if (total > 0) {
    report.fraction = static_cast<double>(total - report.mismatches.size()) / static_cast<double>(total);
  }
  return report;
}

std::string WriterDistanceMatrix::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "writer";
  for (const auto& w : writers) out << ',' << w;
  out << '\n';
  for (std::size_t i = 0; i < writers.size(); ++i) {
    out << writers[i];
    for (std::size_t j = 0; j < writers.size(); ++j) out << ',' << at(i, j);
    out << '\n';
  }
  return out.str();
}

std::array<double, 4> StyleNormalizer::apply(const std::array<double, 4>& raw) const {
  std::array<double, 4> out{};
  for (std::size_t a = 0; a < 4; ++a) {
    const double range = max[a] - min[a];
    out[a] = range > 0 ? (raw[a] - min[a]) / range : 0.0;
  }
  return out;
}

std::array<double, 4> style_attributes(const StyleVector& style) {
  return {style.pen_pressure, style.slant_angle, style.word_spacing, style.character_size};
}

std::array<double, 4> mean_style(std::span<const StyleVector> styles) {
  std::array<double, 4> mean{};
  for (const auto& s : styles) {
    const auto v = style_attributes(s);
    for (std::size_t a = 0; a < 4; ++a) mean[a] += v[a];
  }
  for (auto& m : mean) m /= static_cast<double>(styles.size());
  return mean;
}

namespace {

StyleNormalizer fit_normalizer(const std::vector<std::array<double, 4>>& means) {
  StyleNormalizer norm;
  norm.min.fill(0);
  norm.max.fill(0);
  if (means.empty()) return norm;
  norm.min = means.front();
  norm.max = means.front();
  for (const auto& m : means) {
    for (std::size_t a = 0; a < 4; ++a) {
      norm.min[a] = std::min(norm.min[a], m[a]);
      norm.max[a] = std::max(norm.max[a], m[a]);
    }
  }
  return norm;
}

double l1(const std::array<double, 4>& a, const std::array<double, 4>& b) {
  double d = 0;
  for (std::size_t i = 0; i < 4; ++i) d += std::abs(a[i] - b[i]);
  return d;
}

std::vector<std::array<double, 4>> writer_means(const std::map<std::string, std::vector<StyleVector>>& by_writer) {
  std::vector<std::array<double, 4>> means;
  for (const auto& [writer, styles] : by_writer) {
    if (styles.empty()) throw Error("ontology", "writer '" + writer + "' has no samples");
    means.push_back(mean_style(styles));
  }
  return means;
}

}  // namespace

WriterDistanceMatrix writer_distances(const std::map<std::string, std::vector<StyleVector>>& styles_by_writer) {
  const auto means = writer_means(styles_by_writer);
  const auto norm = fit_normalizer(means);
  std::vector<std::array<double, 4>> normalized;
  for (const auto& m : means) normalized.push_back(norm.apply(m));

  WriterDistanceMatrix out;
  for (const auto& [w, _] : styles_by_writer) out.writers.push_back(w);
  const std::size_t n = out.writers.size();
  out.distances.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = l1(normalized[i], normalized[j]);
      out.distances[i * n + j] = d;
      out.distances[j * n + i] = d;
    }
  }
  return out;
}

DifficultyContext DifficultyContext::from_known(const std::map<std::string, std::vector<StyleVector>>& styles_by_writer) {
  DifficultyContext ctx;
  ctx.known_means = writer_means(styles_by_writer);
  ctx.normalizer = fit_normalizer(ctx.known_means);
  return ctx;
}

double difficulty_score(const DifficultyInput& input, const DifficultyContext& context) {
  switch (input.type) {
    case NoveltyType::Writer:
    case NoveltyType::Letter: {
      if (!input.style) throw Error("ontology", "difficulty: missing style vector");
      if (context.known_means.empty()) throw Error("ontology", "difficulty: no known writers");
      const auto probe = context.normalizer.apply(style_attributes(*input.style));
      double best = std::numeric_limits<double>::infinity();
      for (const auto& m : context.known_means) best = std::min(best, l1(probe, context.normalizer.apply(m)));
      return best;
    }
    case NoveltyType::Pen:
    case NoveltyType::Background:
      if (!input.background_mean) throw Error("ontology", "difficulty: missing background region");
      return 255.0 - *input.background_mean;
    case NoveltyType::None: break;
  }
  throw Error("ontology", "difficulty requested for a non-novel sample");
}

std::vector<Difficulty> tertile_difficulty(std::span<const double> scores) {
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  std::vector<Difficulty> out;
  out.reserve(n);
  for (double s : scores) {
    const auto below = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), s) - sorted.begin());
    const std::size_t tertile = 3 * below / n;
    out.push_back(tertile == 0 ? Difficulty::Hard : tertile == 1 ? Difficulty::Medium : Difficulty::Easy);
  }
  return out;
}

std::vector<Difficulty> assign_difficulty(std::span<const DifficultyInput> inputs, const DifficultyContext& context) {
  std::vector<Difficulty> out(inputs.size(), Difficulty::Unassigned);
  std::map<NoveltyType, std::vector<std::size_t>> groups;
  std::vector<double> scores(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    scores[i] = difficulty_score(inputs[i], context);
    groups[inputs[i].type].push_back(i);
  }
  for (const auto& [type, members] : groups) {
    std::vector<double> group_scores;
    for (auto i : members) group_scores.push_back(scores[i]);
    const auto tiers = tertile_difficulty(group_scores);
    for (std::size_t k = 0; k < members.size(); ++k) out[members[k]] = tiers[k];
  }
  return out;
}

double background_mean(const LineImage& image) {
  const auto mask = foreground_mask(image);
  std::uint64_t sum = 0;
  std::uint64_t n = 0;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (!mask.at(x, y)) {
        sum += image.at(x, y);
        ++n;
      }
    }
  }
  if (n == 0) throw Error("ontology", "image has no background region");
  return static_cast<double>(sum) / static_cast<double>(n);
}

}  // namespace scriptdrift
