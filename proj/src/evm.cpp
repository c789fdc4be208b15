#include "scriptdrift/evm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scriptdrift/error.hpp"
#include "scriptdrift/util.hpp"

namespace scriptdrift {

namespace {

constexpr std::uint32_t kModelVersion = 1;
constexpr double kMinMargin = 1e-12;
constexpr double kTolerance = 1e-9;
constexpr int kMaxIterations = 200;
// Equal positive margins push the MLE shape to infinity; the fit stops here.
constexpr double kMaxShape = 1e3;

double distance_to(DistanceKind kind, std::span<const double> x, std::span<const float> anchor) {
  if (kind == DistanceKind::Euclidean) {
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - double(anchor[i]);
      ss += d * d;
    }
    return std::sqrt(ss);
  }
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double b = anchor[i];
    dot += x[i] * b;
    na += x[i] * x[i];
    nb += b * b;
  }
  if (na == 0 || nb == 0) return 1.0;
  return std::clamp(1.0 - dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 2.0);
}

}  // namespace

std::string_view to_string(DistanceKind kind) { return kind == DistanceKind::Cosine ? "cosine" : "euclidean"; }

DistanceKind parse_distance_kind(std::string_view text) {
  if (text == "cosine") return DistanceKind::Cosine;
  if (text == "euclidean") return DistanceKind::Euclidean;
  throw Error("evm", "unknown distance '" + std::string(text) + "'");
}

double vector_distance(DistanceKind kind, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("evm", "dimension mismatch");
  if (kind == DistanceKind::Euclidean) {
    double ss = 0;
    for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(ss);
  }
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 1.0;
  return std::clamp(1.0 - dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 2.0);
}

void EvmHyperparams::validate() const {
  if (tail_size < 1) throw Error("evm", "tail_size must be >= 1");
  if (!(cover_threshold > 0 && cover_threshold <= 1)) throw Error("evm", "cover_threshold must be in (0,1]");
  if (!(distance_multiplier > 0 && distance_multiplier <= 1)) {
    throw Error("evm", "distance_multiplier must be in (0,1]");
  }
}

double weibull_psi(double d, double shape, double scale) {
  if (d <= 0) return 1.0;
  return std::exp(-std::exp(shape * std::log(d / scale)));
}

WeibullFit fit_weibull(std::span<const double> data) {
  if (data.empty()) throw Error("evm", "weibull fit needs at least one value");
  double peak = 0;
  for (double v : data) {
    if (!std::isfinite(v) || v < 0) throw Error("evm", "weibull fit needs finite non-negative values");
    peak = std::max(peak, v);
  }
  if (peak == 0) throw Error("evm", "degenerate margins: all zero");
  // Scaling by the maximum keeps x^k within (0,1] for any shape.
  std::vector<double> logs;
  logs.reserve(data.size());
  for (double v : data) logs.push_back(std::log(std::max(v, kMinMargin) / peak));
  const double n = static_cast<double>(logs.size());
  const double mean_log = std::accumulate(logs.begin(), logs.end(), 0.0) / n;
  double var = 0;
  for (double l : logs) var += (l - mean_log) * (l - mean_log);
  var /= n;

  // Profile score g(k) = sum x^k ln x / sum x^k - 1/k - mean ln x; increasing in k.
  auto moments = [&](double k, double& s0, double& s1, double& s2) {
    s0 = s1 = s2 = 0;
    for (double l : logs) {
      const double w = std::exp(k * l);
      s0 += w;
      s1 += w * l;
      s2 += w * l * l;
    }
  };
  auto g = [&](double k) {
    double s0, s1, s2;
    moments(k, s0, s1, s2);
    return s1 / s0 - 1.0 / k - mean_log;
  };

  WeibullFit fit;
  double k;
  if (var <= 0 || g(kMaxShape) <= 0) {
    k = kMaxShape;
  } else {
    double lo = 1e-3, hi = std::min(kMaxShape, std::max(1.0, 1.2 / std::sqrt(var)));
    while (g(lo) > 0) lo /= 2;
    while (g(hi) < 0) hi = std::min(kMaxShape, hi * 2);
    k = std::clamp(1.2 / std::sqrt(var), lo, hi);
    bool converged = false;
    for (int it = 1; it <= kMaxIterations; ++it) {
      double s0, s1, s2;
      moments(k, s0, s1, s2);
      const double gk = s1 / s0 - 1.0 / k - mean_log;
      if (gk < 0) lo = k; else hi = k;
      const double dg = s2 / s0 - (s1 / s0) * (s1 / s0) + 1.0 / (k * k);
      double next = k - gk / dg;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      fit.iterations = it;
      if (std::abs(next - k) <= kTolerance * std::max(1.0, k)) {
        k = next;
        converged = true;
        break;
      }
      k = next;
    }
    if (!converged) {
      throw Error("evm", "weibull fit did not converge after " + std::to_string(kMaxIterations) + " iterations");
    }
  }
  double s0 = 0;
  for (double l : logs) s0 += std::exp(k * l);
  fit.shape = k;
  fit.scale = peak * std::exp(std::log(s0 / n) / k);
  return fit;
}

std::vector<std::string> EvmModel::labels() const {
  std::vector<std::string> out;
  for (const auto& c : classes) out.push_back(c.label);
  return out;
}

std::vector<double> EvmModel::class_scores(std::span<const double> x) const {
  if (x.size() != dimension) {
    throw Error("evm", "feature dimension " + std::to_string(x.size()) + " does not match model dimension " +
                           std::to_string(dimension));
  }
  std::vector<double> scores;
  scores.reserve(classes.size());
  for (const auto& c : classes) {
    double best = 0;
    for (const auto& ev : c.extreme_vectors) {
      best = std::max(best, weibull_psi(distance_to(hyperparams.distance, x, ev.anchor), ev.shape, ev.scale));
    }
    scores.push_back(best);
  }
  return scores;
}

std::vector<double> EvmModel::predict(std::span<const double> x) const {
  if (!novelty_threshold) throw Error("evm", "model is not calibrated; run calibrate first");
  return compose_probabilities(class_scores(x));
}

void EvmModel::check_extractor(std::string_view other) const {
  if (other != extractor) {
    throw Error("evm", "extractor mismatch: model was trained on '" + extractor + "' but features come from '" +
                           std::string(other) + "'");
  }
}

std::vector<std::uint8_t> EvmModel::serialize() const {
  ByteWriter w;
  w.raw("EVM1");
  w.u32(kModelVersion);
  w.u64(hyperparams.tail_size);
  w.f64(hyperparams.cover_threshold);
  w.u8(hyperparams.distance == DistanceKind::Cosine ? 0 : 1);
  w.f64(hyperparams.distance_multiplier);
  w.str(extractor);
  w.u64(dimension);
  w.u8(novelty_threshold ? 1 : 0);
  w.f64(novelty_threshold.value_or(0.0));
  w.u64(classes.size());
  for (const auto& c : classes) {
    w.str(c.label);
    w.u64(c.extreme_vectors.size());
    for (const auto& ev : c.extreme_vectors) {
      for (float v : ev.anchor) w.f32(v);
      w.f64(ev.shape);
      w.f64(ev.scale);
    }
  }
  w.u32(crc32(w.bytes()));
  return w.bytes();
}

EvmModel EvmModel::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::string(bytes.begin(), bytes.begin() + 4) != "EVM1") {
    throw Error("evm", "not an EVM model file");
  }
  const auto body = bytes.first(bytes.size() - 4);
  ByteReader trailer(bytes.subspan(bytes.size() - 4), "evm");
  if (trailer.u32() != crc32(body)) throw Error("evm", "corrupt model file: checksum mismatch");
  ByteReader r(body, "evm");
  r.raw(4);
  const auto version = r.u32();
  if (version != kModelVersion) {
    throw Error("evm", "model version " + std::to_string(version) + " is not supported (expected " +
                           std::to_string(kModelVersion) + ")");
  }
  EvmModel m;
  m.hyperparams.tail_size = r.u64();
  m.hyperparams.cover_threshold = r.f64();
  m.hyperparams.distance = r.u8() == 0 ? DistanceKind::Cosine : DistanceKind::Euclidean;
  m.hyperparams.distance_multiplier = r.f64();
  m.extractor = r.str();
  m.dimension = r.u64();
  const bool calibrated = r.u8() != 0;
  const double threshold = r.f64();
  if (calibrated) m.novelty_threshold = threshold;
  const auto class_count = r.u64();
  for (std::uint64_t c = 0; c < class_count; ++c) {
    EvmClass cls;
    cls.label = r.str();
    const auto n = r.u64();
    for (std::uint64_t i = 0; i < n; ++i) {
      ExtremeVector ev;
      ev.anchor.resize(m.dimension);
      for (auto& v : ev.anchor) v = r.f32();
      ev.shape = r.f64();
      ev.scale = r.f64();
      cls.extreme_vectors.push_back(std::move(ev));
    }
    m.classes.push_back(std::move(cls));
  }
  if (r.remaining() != 0) throw Error("evm", "corrupt model file: trailing bytes");
  return m;
}

void EvmModel::save(const std::filesystem::path& path) const { write_file_bytes(path, serialize(), "evm"); }

EvmModel EvmModel::load(const std::filesystem::path& path) { return deserialize(read_file_bytes(path, "evm")); }

EvmModel fit_evm(const ClassPoints& points, const EvmHyperparams& hp, std::string extractor, unsigned jobs) {
  hp.validate();
  if (points.size() < 2) throw Error("evm", "fit needs at least two classes");
  std::size_t dim = 0;
  struct Point {
    std::size_t cls;
    std::vector<float> f;
    std::vector<double> d;
  };
  std::vector<Point> all;
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> members;
  for (const auto& [label, vecs] : points) {
    if (vecs.empty()) throw Error("evm", "class '" + label + "' has no points");
    members.emplace_back();
    for (const auto& v : vecs) {
      if (dim == 0) dim = v.size();
      if (v.size() != dim || dim == 0) throw Error("evm", "class '" + label + "' has a vector of the wrong dimension");
      Point p{labels.size(), std::vector<float>(v.begin(), v.end()), {}};
      p.d.assign(p.f.begin(), p.f.end());
      members.back().push_back(all.size());
      all.push_back(std::move(p));
    }
    labels.push_back(label);
  }

  EvmModel model;
  model.hyperparams = hp;
  model.extractor = std::move(extractor);
  model.dimension = dim;
  model.classes.resize(labels.size());

  parallel_for(labels.size(), jobs, [&](std::size_t c) {
    const auto& own = members[c];
    std::vector<WeibullFit> fits(own.size());
    std::vector<double> margins;
    for (std::size_t i = 0; i < own.size(); ++i) {
      margins.clear();
      const auto& x = all[own[i]];
      for (const auto& other : all) {
        if (other.cls != c) margins.push_back(distance_to(hp.distance, x.d, other.f));
      }
      const std::size_t tail = std::min(hp.tail_size, margins.size());
      std::partial_sort(margins.begin(), margins.begin() + static_cast<std::ptrdiff_t>(tail), margins.end());
      margins.resize(tail);
      for (double& m : margins) m *= hp.distance_multiplier;
      try {
        fits[i] = fit_weibull(margins);
      } catch (const Error& e) {
        throw Error("evm", "class '" + labels[c] + "': " + e.what());
      }
    }
    // Greedy set cover: v covers u when psi_v(u) >= cover_threshold.
    const std::size_t n = own.size();
    std::vector<std::vector<std::size_t>> covers(n);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t u = 0; u < n; ++u) {
        const double d = distance_to(hp.distance, all[own[u]].d, all[own[v]].f);
        if (u == v || weibull_psi(d, fits[v].shape, fits[v].scale) >= hp.cover_threshold) covers[v].push_back(u);
      }
    }
    std::vector<bool> covered(n, false);
    std::size_t remaining = n;
    auto& cls = model.classes[c];
    cls.label = labels[c];
    while (remaining > 0) {
      std::size_t best = 0, best_gain = 0;
      for (std::size_t v = 0; v < n; ++v) {
        std::size_t gain = 0;
        for (auto u : covers[v]) gain += covered[u] ? 0 : 1;
        if (gain > best_gain) {
          best_gain = gain;
          best = v;
        }
      }
      for (auto u : covers[best]) {
        if (!covered[u]) {
          covered[u] = true;
          --remaining;
        }
      }
      cls.extreme_vectors.push_back({all[own[best]].f, fits[best].shape, fits[best].scale});
    }
  });
  return model;
}

std::vector<double> compose_probabilities(std::span<const double> scores) {
  std::vector<double> out(scores.size() + 1, 0.0);
  double total = 0, km = 0;
  for (double s : scores) {
    total += s;
    km = std::max(km, s);
  }
  if (total <= 0) {
    out.back() = 1.0;
    return out;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] / total * km;
  out.back() = 1.0 - km;
  return out;
}

Calibration calibrate_threshold(std::span<const double> known_km, std::span<const double> novel_km) {
  if (known_km.empty() || novel_km.empty()) {
    throw Error("evm", "calibration needs both known and novel samples");
  }
  std::vector<double> candidates{0.0};
  for (auto set : {known_km, novel_km}) {
    for (double v : set) {
      const double t = std::nextafter(v, std::numeric_limits<double>::infinity());
      if (t <= 1.0) candidates.push_back(t);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  Calibration best;
  double best_gap = std::numeric_limits<double>::infinity();
  for (double t : candidates) {
    const auto fp = std::count_if(known_km.begin(), known_km.end(), [t](double v) { return v < t; });
    const auto fn = std::count_if(novel_km.begin(), novel_km.end(), [t](double v) { return v >= t; });
    const double fpr = double(fp) / double(known_km.size());
    const double fnr = double(fn) / double(novel_km.size());
    const double gap = std::abs(fpr - fnr);
    if (gap < best_gap) {
      best_gap = gap;
      best = {t, fpr, fnr, 0.5 * (fpr + fnr)};
    }
  }
  return best;
}

}  // namespace scriptdrift
