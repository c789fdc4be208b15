#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "scriptdrift/evm.hpp"
#include "scriptdrift/image.hpp"

namespace scriptdrift {

/// Marker a transcriber emits for a character it cannot name.
inline constexpr char32_t kNovelCharMarker = U'#';

struct RunnerConfig {
  int batch_size = 16;
  int prior_window = 64;
  double slack = 0.5;        // CUSUM slack in baseline sigmas
  double alarm = 5.0;        // CUSUM alarm level in baseline sigmas
  double min_sigma = 0.01;   // floor for the baseline sigma
  double w_pre = 0.25;
  int ramp = 32;
  int top_k = 3;

  void validate() const;
};

/// One-sided CUSUM over batch means of raw novelty scores. The baseline is
/// taken from the first `prior_window` samples; later batches drive the sum.
class ChangeDetector {
public:
  explicit ChangeDetector(const RunnerConfig& config) : config_(config) {}

  /// Feeds one completed batch that starts at stream position `start`.
  void update(std::span<const double> batch, int start);

  bool detected() const { return detection_.has_value(); }
  /// Position from which the change is acknowledged (end of the alarm batch).
  std::optional<int> detection_position() const { return detection_; }
  double statistic() const { return cusum_; }
  double baseline_mean() const { return mean_; }
  double baseline_sigma() const { return sigma_; }

private:
  RunnerConfig config_;
  std::vector<double> prior_;
  bool baseline_ready_ = false;
  double mean_ = 0;
  double sigma_ = 0;
  double cusum_ = 0;
  std::optional<int> detection_;
};

/// Instance weight at `position` given the detection position (if any).
double novelty_weight(const RunnerConfig& config, std::optional<int> detection, int position);

/// True iff the prediction carries the novel-character marker or any
/// character outside the alphabet.
bool transcript_novelty(std::u32string_view prediction, const std::set<char32_t>& alphabet);

/// Reads {"id":..., "transcript":...} lines. Duplicate ids and ids outside
/// `valid_ids` (when given) are errors.
std::map<std::string, std::u32string> ingest_external_predictions(const std::filesystem::path& path,
                                                                 const std::set<std::string>* valid_ids = nullptr);

struct AgentOutput {
  std::vector<double> probabilities;    // K+1, last = novel
  std::vector<std::string> labels;      // K known labels
  std::optional<std::string> appearance;
};

/// What the runner needs from an agent: per-sample K+1 probabilities and
/// the calibrated threshold. Implementations must not keep per-run state.
class Agent {
public:
  virtual ~Agent() = default;
  virtual AgentOutput observe(const std::string& id) const = 0;
  virtual double threshold() const = 0;
};

/// Scores line images with a calibrated writer EVM (and optionally an
/// appearance EVM) over a feature extractor.
class EvmAgent : public Agent {
public:
  using ImageSource = std::function<LineImage(const std::string& id)>;

  EvmAgent(EvmModel writer_model, std::optional<EvmModel> appearance_model, ImageSource source);

  AgentOutput observe(const std::string& id) const override;
  double threshold() const override { return *writer_.novelty_threshold; }

private:
  EvmModel writer_;
  std::optional<EvmModel> appearance_;
  ImageSource source_;
};

/// Replays fixed raw novelty scores per sample id (single known class).
class ScriptedAgent : public Agent {
public:
  ScriptedAgent(std::map<std::string, double> raw_scores, double threshold)
      : scores_(std::move(raw_scores)), threshold_(threshold) {}

  AgentOutput observe(const std::string& id) const override;
  double threshold() const override { return threshold_; }

private:
  std::map<std::string, double> scores_;
  double threshold_;
};

struct PredictionRecord {
  std::string id;
  int position = 0;
  std::vector<double> probabilities;
  std::vector<std::string> top_k;
  double raw_score = 0;
  double weighted_score = 0;
  bool novelty_decision = false;
  std::optional<std::string> appearance;
  std::optional<std::u32string> transcript;
  std::optional<bool> transcript_novel;
  bool world_changed = false;

  nlohmann::ordered_json to_json() const;
  static PredictionRecord from_json(const nlohmann::json& j);
  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

struct TranscriptDuty {
  const std::map<std::string, std::u32string>* predictions = nullptr;
  const std::set<char32_t>* alphabet = nullptr;
};

/// Runs one stream in batch order. A record depends only on the samples up
/// to its position: weighting uses the detector state after the previous
/// completed batch.
std::vector<PredictionRecord> run_test(const Agent& agent, std::span<const std::string> ids,
                                       const RunnerConfig& config, const TranscriptDuty& transcripts = {});

std::string records_jsonl(std::span<const PredictionRecord> records);
std::vector<PredictionRecord> read_records(const std::filesystem::path& path);

}  // namespace scriptdrift
