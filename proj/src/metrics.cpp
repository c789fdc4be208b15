#include "scriptdrift/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "scriptdrift/error.hpp"
#include "scriptdrift/util.hpp"

namespace scriptdrift {

namespace {

template <typename Seq>
std::size_t edit_distance(const Seq& a, const Seq& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double accuracy_from(std::size_t distance, std::size_t la, std::size_t lb) {
  const auto longest = std::max(la, lb);
  return longest == 0 ? 1.0 : 1.0 - double(distance) / double(longest);
}

template <typename L>
std::vector<int> encode(std::span<const L> labels) {
  std::map<L, int> ids;
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(ids.emplace(l, static_cast<int>(ids.size())).first->second);
  return out;
}

double nmi_encoded(const std::vector<int>& a, const std::vector<int>& b, NmiVariant variant) {
  if (a.size() != b.size()) throw Error("metrics", "nmi: label sequences differ in length");
  if (a.empty()) throw Error("metrics", "nmi: empty label sequences");
  const int ka = *std::max_element(a.begin(), a.end()) + 1;
  const int kb = *std::max_element(b.begin(), b.end()) + 1;
  std::vector<double> table(static_cast<std::size_t>(ka) * kb, 0.0), ra(ka, 0.0), rb(kb, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[static_cast<std::size_t>(a[i]) * kb + b[i]] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  const double n = static_cast<double>(a.size());
  auto entropy = [n](const std::vector<double>& counts) {
    double h = 0;
    for (double c : counts) {
      if (c > 0) h -= c / n * std::log(c / n);
    }
    return h;
  };
  const double ha = entropy(ra);
  const double hb = entropy(rb);
  if (ha == 0 && hb == 0) return 1.0;
  if (ha == 0 || hb == 0) return 0.0;
  double mi = 0;
  for (int i = 0; i < ka; ++i) {
    for (int j = 0; j < kb; ++j) {
      const double c = table[static_cast<std::size_t>(i) * kb + j];
      if (c > 0) mi += c / n * std::log(n * c / (ra[i] * rb[j]));
    }
  }
  double norm = 0;
  switch (variant) {
    case NmiVariant::Geometric: norm = std::sqrt(ha * hb); break;
    case NmiVariant::Arithmetic: norm = 0.5 * (ha + hb); break;
    case NmiVariant::Min: norm = std::min(ha, hb); break;
    case NmiVariant::Max: norm = std::max(ha, hb); break;
  }
  return std::clamp(mi / norm, 0.0, 1.0);
}

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * double(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
    i = j + 1;
  }
  return r;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) { return edit_distance(a, b); }

std::size_t levenshtein(std::span<const std::string> a, std::span<const std::string> b) { return edit_distance(a, b); }

double char_accuracy(std::u32string_view truth, std::u32string_view pred) {
  return accuracy_from(levenshtein(truth, pred), truth.size(), pred.size());
}

double word_accuracy(std::span<const std::string> truth, std::span<const std::string> pred) {
  return accuracy_from(levenshtein(truth, pred), truth.size(), pred.size());
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  if (text.empty()) return words;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(' ', start);
    words.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return words;
}

NmiVariant parse_nmi_variant(std::string_view text) {
  if (text == "geometric") return NmiVariant::Geometric;
  if (text == "arithmetic") return NmiVariant::Arithmetic;
  if (text == "min") return NmiVariant::Min;
  if (text == "max") return NmiVariant::Max;
  throw Error("metrics", "unknown NMI variant '" + std::string(text) + "'");
}

double nmi(std::span<const std::string> a, std::span<const std::string> b, NmiVariant variant) {
  return nmi_encoded(encode(a), encode(b), variant);
}

double nmi(std::span<const int> a, std::span<const int> b, NmiVariant variant) {
  return nmi_encoded(encode(a), encode(b), variant);
}

double purity(std::span<const int> clusters, std::span<const std::string> truth) {
  if (clusters.size() != truth.size()) throw Error("metrics", "purity: every item needs exactly one cluster");
  if (clusters.empty()) throw Error("metrics", "purity: no items");
  std::map<int, std::map<std::string_view, std::size_t>> counts;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (clusters[i] < 0) throw Error("metrics", "purity: unassigned item at index " + std::to_string(i));
    ++counts[clusters[i]][truth[i]];
  }
  std::size_t total = 0;
  for (const auto& [_, labels] : counts) {
    std::size_t best = 0;
    for (const auto& [__, c] : labels) best = std::max(best, c);
    total += best;
  }
  return double(total) / double(clusters.size());
}

double topk_accuracy(std::span<const std::vector<std::string>> predictions, std::span<const std::string> truth,
                     std::size_t k) {
  if (predictions.size() != truth.size()) throw Error("metrics", "top-k: predictions and truth differ in length");
  if (predictions.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].size() < k) {
      throw Error("metrics", "top-" + std::to_string(k) + ": row " + std::to_string(i) + " has only " +
                                 std::to_string(predictions[i].size()) + " predictions");
    }
    if (std::find(predictions[i].begin(), predictions[i].begin() + static_cast<std::ptrdiff_t>(k), truth[i]) !=
        predictions[i].begin() + static_cast<std::ptrdiff_t>(k)) {
      ++hits;
    }
  }
  return double(hits) / double(predictions.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("metrics", "pearson needs two equal series of length >= 2");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) throw Error("metrics", "pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  return pearson(rx, ry);
}

ConfusionMatrix ConfusionMatrix::build(std::span<const std::string> truth, std::span<const std::string> pred) {
  if (truth.size() != pred.size()) throw Error("metrics", "confusion: truth and predictions differ in length");
  ConfusionMatrix m;
  std::set<std::string> labels(truth.begin(), truth.end());
  labels.insert(pred.begin(), pred.end());
  m.labels.assign(labels.begin(), labels.end());
  m.counts.assign(m.labels.size(), std::vector<std::uint64_t>(m.labels.size(), 0));
  auto index = [&](const std::string& l) {
    return static_cast<std::size_t>(std::lower_bound(m.labels.begin(), m.labels.end(), l) - m.labels.begin());
  };
  for (std::size_t i = 0; i < truth.size(); ++i) ++m.counts[index(truth[i])][index(pred[i])];
  return m;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
  return t;
}

std::string ConfusionMatrix::to_csv() const {
  std::string out = "truth\\prediction";
  for (const auto& l : labels) out += "," + l;
  out += "\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += labels[i];
    for (auto c : counts[i]) out += "," + std::to_string(c);
    out += "\n";
  }
  return out;
}

KMeansResult kmeans(std::span<const std::vector<double>> points, int k, std::uint64_t seed, int restarts,
                    int max_iterations, double tolerance) {
  if (k < 1) throw Error("metrics", "k-means needs k >= 1");
  if (points.size() < static_cast<std::size_t>(k)) {
    throw Error("metrics", "k-means: " + std::to_string(points.size()) + " samples are fewer than k = " +
                               std::to_string(k));
  }
  const std::size_t n = points.size();
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    std::vector<std::vector<double>> centers;
    centers.push_back(points[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
    std::vector<double> d2(n);
    while (static_cast<int>(centers.size()) < k) {
      double total = 0;
      for (std::size_t i = 0; i < n; ++i) {
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto& c : centers) best_d = std::min(best_d, sq_dist(points[i], c));
        d2[i] = best_d;
        total += best_d;
      }
      if (total <= 0) break;
      double pick = std::uniform_real_distribution<double>(0.0, total)(rng);
      std::size_t chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0) continue;
        if (pick < d2[i]) {
          chosen = i;
          break;
        }
        pick -= d2[i];
      }
      while (d2[chosen] <= 0) --chosen;  // rounding fallback: last point with positive weight
      centers.push_back(points[chosen]);
    }
    std::vector<int> assign(n, 0);
    double inertia = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iterations; ++it) {
      double cur = 0;
      for (std::size_t i = 0; i < n; ++i) {
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centers.size(); ++c) {
          const double d = sq_dist(points[i], centers[c]);
          if (d < bd) {
            bd = d;
            assign[i] = static_cast<int>(c);
          }
        }
        cur += bd;
      }
      std::vector<std::vector<double>> sums(centers.size(), std::vector<double>(points[0].size(), 0.0));
      std::vector<std::size_t> counts(centers.size(), 0);
      for (std::size_t i = 0; i < n; ++i) {
        ++counts[assign[i]];
        for (std::size_t d = 0; d < points[i].size(); ++d) sums[assign[i]][d] += points[i][d];
      }
      for (std::size_t c = 0; c < centers.size(); ++c) {
        if (counts[c] == 0) continue;
        for (auto& s : sums[c]) s /= double(counts[c]);
        centers[c] = sums[c];
      }
      const bool done = std::isfinite(inertia) && std::abs(inertia - cur) <= tolerance * std::max(inertia, 1e-300);
      inertia = cur;
      if (done || cur == 0) break;
    }
    // Final inertia against the updated centers.
    double final_inertia = 0;
    for (std::size_t i = 0; i < n; ++i) final_inertia += sq_dist(points[i], centers[assign[i]]);
    if (final_inertia < best.inertia) {
      best.inertia = final_inertia;
      best.assignments = assign;
      best.centers = centers;
    }
  }
  std::set<int> used(best.assignments.begin(), best.assignments.end());
  best.k_effective = static_cast<int>(used.size());
  return best;
}

std::string_view group_code(ClusterGroup group) {
  switch (group) {
    case ClusterGroup::PenPressure: return "PP";
    case ClusterGroup::CharacterSize: return "CS";
    case ClusterGroup::WordSpacing: return "WS";
    case ClusterGroup::SlantAngle: return "SA";
    case ClusterGroup::NoveltyCheck: return "NC";
  }
  return "?";
}

int group_clusters(ClusterGroup group) { return group == ClusterGroup::SlantAngle ? 4 : 3; }

std::string_view characterization_row(NoveltyType type) {
  switch (type) {
    case NoveltyType::Writer:
    case NoveltyType::Letter: return "Style";
    case NoveltyType::Background: return "Background";
    case NoveltyType::Pen: return "Pen";
    case NoveltyType::None: return "No Novelty";
  }
  return "?";
}

CharacterizationTable characterize(std::span<const CharacterizationSample> samples, std::uint64_t seed) {
  CharacterizationTable table;
  for (auto row : kCharacterizationRows) {
    std::vector<const CharacterizationSample*> members;
    for (const auto& s : samples) {
      if (characterization_row(s.type) == row) members.push_back(&s);
    }
    if (members.empty()) continue;
    table.rows.emplace_back(row);
    std::vector<std::string> truth;
    for (const auto* s : members) truth.push_back(s->truth);
    for (auto group : kClusterGroups) {
      std::vector<std::vector<double>> points;
      for (const auto* s : members) {
        switch (group) {
          case ClusterGroup::PenPressure: points.push_back({s->style.pen_pressure}); break;
          case ClusterGroup::CharacterSize: points.push_back({s->style.character_size}); break;
          case ClusterGroup::WordSpacing: points.push_back({s->style.word_spacing}); break;
          case ClusterGroup::SlantAngle: points.push_back({s->style.slant_angle}); break;
          case ClusterGroup::NoveltyCheck:
            if (s->signal.empty()) throw Error("metrics", "characterize: NC group needs a novelty signal per sample");
            points.push_back(s->signal);
            break;
        }
      }
      const auto code = std::string(group_code(group));
      const auto km = kmeans(points, group_clusters(group), derive_seed(seed, std::string(row) + "/" + code));
      CharacterizationCell cell;
      cell.purity = purity(km.assignments, truth);
      cell.nmi = nmi(std::span<const int>(km.assignments), std::span<const int>(encode(std::span<const std::string>(truth))));
      cell.k_effective = km.k_effective;
      cell.samples = members.size();
      table.cells[std::string(row)][code] = cell;
    }
  }
  return table;
}

std::string CharacterizationTable::to_csv(bool use_nmi) const {
  std::string out = "row";
  for (auto g : kClusterGroups) out += "," + std::string(group_code(g));
  out += "\n";
  for (const auto& row : rows) {
    out += row;
    for (auto g : kClusterGroups) {
      const auto& cell = cells.at(row).at(std::string(group_code(g)));
      out += "," + fmt(use_nmi ? cell.nmi : cell.purity);
    }
    out += "\n";
  }
  return out;
}

std::span<const PredictionRecord> evaluation_window(std::span<const PredictionRecord> records, std::size_t window) {
  return records.size() <= window ? records : records.subspan(records.size() - window);
}

ReportContext ReportContext::from_manifests(std::span<const Manifest> manifests) {
  ReportContext ctx;
  for (const auto& m : manifests) {
    ctx.known_writers.insert(m.known_writers.begin(), m.known_writers.end());
    for (const auto& r : m.records) {
      ctx.truth[r.id] = {r.labels.writer_id, r.labels.novelty_type, r.labels.novelty_subtype, r.labels.transcript};
    }
  }
  return ctx;
}

namespace {

struct Row {
  std::size_t correct = 0;
  double char_sum = 0;
  std::size_t char_n = 0;
  std::vector<std::string> truth_writer;
  std::vector<std::string> top1;
  std::vector<std::vector<std::string>> topk;
};

ReportRow finish(const std::string& name, const Row& r, std::size_t k) {
  ReportRow out;
  out.group = name;
  out.samples = r.truth_writer.size();
  out.detection_accuracy = double(r.correct) / double(out.samples);
  if (r.char_n > 0) out.char_accuracy = r.char_sum / double(r.char_n);
  out.nmi = nmi(std::span<const std::string>(r.truth_writer), std::span<const std::string>(r.top1));
  std::size_t kk = k;
  for (const auto& t : r.topk) kk = std::min(kk, t.size());
  out.writer_accuracy = topk_accuracy(r.topk, r.truth_writer, kk);
  return out;
}

}  // namespace

Report build_report(std::span<const ScoredTest> tests, const ReportContext& context, int top_k) {
  std::vector<const ScoredTest*> order;
  for (const auto& t : tests) order.push_back(&t);
  std::sort(order.begin(), order.end(),
            [](const ScoredTest* a, const ScoredTest* b) { return a->oracle.test_id < b->oracle.test_id; });

  std::map<std::string, Row> subtype_rows, type_rows, split_rows;
  std::map<double, std::pair<double, std::size_t>> fp_by_density;
  for (const auto* t : order) {
    std::size_t fps = 0;
    for (const auto& rec : t->records) {
      if (rec.position < 0 || static_cast<std::size_t>(rec.position) >= t->oracle.is_novel.size()) {
        throw Error("metrics", t->oracle.test_id + ": record position " + std::to_string(rec.position) +
                                   " is outside the oracle");
      }
      const auto it = context.truth.find(rec.id);
      if (it == context.truth.end()) throw Error("metrics", "no truth for sample \"" + rec.id + "\"");
      const auto& truth = it->second;
      const bool novel = t->oracle.is_novel[static_cast<std::size_t>(rec.position)];
      if (!novel && rec.novelty_decision) ++fps;
      const std::string subtype = novel ? (truth.subtype.empty() ? std::string(to_string(truth.type)) : truth.subtype)
                                        : "No Novelty";
      const std::string type = novel ? std::string(to_string(truth.type)) : "No Novelty";
      const std::string writer = context.known_writers.contains(truth.writer_id) ? truth.writer_id
                                                                                : std::string(kNovelLabel);
      for (Row* row : {&subtype_rows[subtype], &type_rows[type], &split_rows[novel ? "Novel" : "Non-novel"]}) {
        row->correct += rec.novelty_decision == novel ? 1 : 0;
        if (rec.transcript && truth.transcript) {
          row->char_sum += char_accuracy(*truth.transcript, *rec.transcript);
          ++row->char_n;
        }
        row->truth_writer.push_back(writer);
        row->top1.push_back(rec.top_k.empty() ? std::string() : rec.top_k.front());
        row->topk.push_back(rec.top_k);
      }
    }
    auto& fp = fp_by_density[t->oracle.spec.novelty_density];
    fp.first += double(fps);
    ++fp.second;
  }
  Report report;
  const auto k = static_cast<std::size_t>(top_k);
  for (const auto& [name, row] : subtype_rows) report.by_subtype.push_back(finish(name, row, k));
  for (auto type : {NoveltyType::Writer, NoveltyType::Letter, NoveltyType::Pen, NoveltyType::Background,
                    NoveltyType::None}) {
    const std::string name = type == NoveltyType::None ? "No Novelty" : std::string(to_string(type));
    const auto it = type_rows.find(name);
    if (it == type_rows.end()) {
      report.warnings.push_back("no samples for novelty type " + name + "; row omitted");
      continue;
    }
    report.by_type.push_back(finish(name, it->second, k));
  }
  for (const char* name : {"Novel", "Non-novel"}) {
    const auto it = split_rows.find(name);
    if (it == split_rows.end()) {
      report.warnings.push_back(std::string("no ") + name + " samples; row omitted");
      continue;
    }
    report.is_novel_split.push_back(finish(name, it->second, k));
  }
  for (const auto& [density, acc] : fp_by_density) {
    report.false_positives.push_back({density, acc.first / double(acc.second), acc.second});
  }
  return report;
}

std::string Report::table_csv(std::span<const ReportRow> rows) const {
  std::string out = "group,samples";
  for (auto c : kReportColumns) out += "," + std::string(c);
  out += "\n";
  for (const auto& r : rows) {
    out += r.group + "," + std::to_string(r.samples) + "," + fmt(r.detection_accuracy) + "," +
           (r.char_accuracy ? fmt(*r.char_accuracy) : std::string()) + "," + fmt(r.nmi) + "," +
           fmt(r.writer_accuracy) + "\n";
  }
  return out;
}

std::string Report::false_positive_csv() const {
  std::string out = "novelty_proportion,tests,mean_false_positives\n";
  for (const auto& p : false_positives) {
    out += fmt(p.proportion) + "," + std::to_string(p.tests) + "," + fmt(p.mean_false_positives) + "\n";
  }
  return out;
}

nlohmann::ordered_json Report::summary() const {
  auto rows_json = [](const std::vector<ReportRow>& rows) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json j;
      j["group"] = r.group;
      j["samples"] = r.samples;
      j[std::string(kReportColumns[0])] = r.detection_accuracy;
      j[std::string(kReportColumns[1])] = r.char_accuracy ? nlohmann::ordered_json(*r.char_accuracy) : nullptr;
      j[std::string(kReportColumns[2])] = r.nmi;
      j[std::string(kReportColumns[3])] = r.writer_accuracy;
      arr.push_back(j);
    }
    return arr;
  };
  nlohmann::ordered_json j;
  j["by_subtype"] = rows_json(by_subtype);
  j["by_type"] = rows_json(by_type);
  j["is_novel_split"] = rows_json(is_novel_split);
  auto fp = nlohmann::ordered_json::array();
  for (const auto& p : false_positives) {
    fp.push_back({{"novelty_proportion", p.proportion}, {"tests", p.tests}, {"mean_false_positives", p.mean_false_positives}});
  }
  j["false_positives"] = fp;
  j["warnings"] = warnings;
  return j;
}

std::string false_positive_svg(std::span<const FalsePositivePoint> points) {
  constexpr double W = 480, H = 320, L = 60, R = 20, T = 20, B = 50;
  double xmin = 0, xmax = 1, ymax = 1;
  if (!points.empty()) {
    xmin = points.front().proportion;
    xmax = points.back().proportion;
    for (const auto& p : points) ymax = std::max(ymax, p.mean_false_positives);
  }
  if (xmax <= xmin) xmax = xmin + 1;
  auto sx = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto sy = [&](double y) { return H - B - y / ymax * (H - T - B); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">Proportion of novelty</text>\n";
  s << "<text x=\"14\" y=\"" << H / 2 << "\" transform=\"rotate(-90 14 " << H / 2
    << ")\" text-anchor=\"middle\" font-size=\"12\">Mean false positives</text>\n";
  s << "<text x=\"" << L - 6 << "\" y=\"" << T + 4 << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(ymax) << "</text>\n";
  if (!points.empty()) {
    s << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& p : points) s << sx(p.proportion) << "," << sy(p.mean_false_positives) << " ";
    s << "\"/>\n";
    for (const auto& p : points) {
      s << "<circle cx=\"" << sx(p.proportion) << "\" cy=\"" << sy(p.mean_false_positives)
        << "\" r=\"3\" fill=\"steelblue\"/>\n";
      s << "<text x=\"" << sx(p.proportion) << "\" y=\"" << H - B + 14 << "\" text-anchor=\"middle\" font-size=\"10\">"
        << fmt(p.proportion).substr(0, 4) << "</text>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace scriptdrift
