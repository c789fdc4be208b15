#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scriptdrift {

enum class DistanceKind { Cosine, Euclidean };

std::string_view to_string(DistanceKind kind);
DistanceKind parse_distance_kind(std::string_view text);

/// Cosine distance is 1 - cosine similarity; a zero vector is at distance 1.
double vector_distance(DistanceKind kind, std::span<const double> a, std::span<const double> b);

struct EvmHyperparams {
  std::size_t tail_size = 1000;
  double cover_threshold = 0.5;
  DistanceKind distance = DistanceKind::Cosine;
  double distance_multiplier = 0.5;

  void validate() const;
  friend bool operator==(const EvmHyperparams&, const EvmHyperparams&) = default;
};

struct WeibullFit {
  double shape = 1;
  double scale = 1;
  int iterations = 0;
};

/// Two-parameter Weibull MLE. Zeros are clamped to 1e-12; all-zero or
/// non-finite data throws.
WeibullFit fit_weibull(std::span<const double> data);

/// Inclusion probability exp(-(d/scale)^shape).
double weibull_psi(double d, double shape, double scale);

struct ExtremeVector {
  std::vector<float> anchor;
  double shape = 1;
  double scale = 1;
};

struct EvmClass {
  std::string label;
  std::vector<ExtremeVector> extreme_vectors;
};

struct Calibration {
  double threshold = 0;
  double fpr = 0;
  double fnr = 0;
  double eer = 0;
};

class EvmModel {
public:
  EvmHyperparams hyperparams;
  std::string extractor;
  std::size_t dimension = 0;
  std::vector<EvmClass> classes;
  std::optional<double> novelty_threshold;

  std::size_t class_count() const { return classes.size(); }
  std::vector<std::string> labels() const;

  /// Max inclusion probability over each class's extreme vectors.
  std::vector<double> class_scores(std::span<const double> x) const;

  /// K+1 probabilities; requires a calibrated threshold.
  std::vector<double> predict(std::span<const double> x) const;

  /// Throws unless `extractor` matches the one the model was trained on.
  void check_extractor(std::string_view extractor) const;

  void save(const std::filesystem::path& path) const;
  static EvmModel load(const std::filesystem::path& path);

  std::vector<std::uint8_t> serialize() const;
  static EvmModel deserialize(std::span<const std::uint8_t> bytes);
};

/// Points grouped by class label. Classes are processed in label order;
/// points keep their given order, which fixes set-cover tie breaking.
using ClassPoints = std::map<std::string, std::vector<std::vector<double>>>;

EvmModel fit_evm(const ClassPoints& points, const EvmHyperparams& hyperparams, std::string extractor,
                 unsigned jobs = 1);

/// Known scores normalized to sum 1 and scaled by k_m = max score, with
/// 1 - k_m appended as the novel probability. All-zero scores give (0,...,0,1).
std::vector<double> compose_probabilities(std::span<const double> scores);

/// Threshold on k_m minimizing |FPR - FNR| (known flagged novel vs novel
/// passed as known); ties go to the smaller threshold. A sample is novel
/// when k_m < threshold.
Calibration calibrate_threshold(std::span<const double> known_km, std::span<const double> novel_km);

}  // namespace scriptdrift
