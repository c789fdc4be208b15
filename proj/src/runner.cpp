#include "scriptdrift/runner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "scriptdrift/error.hpp"
#include "scriptdrift/features.hpp"
#include "scriptdrift/util.hpp"

namespace scriptdrift {

using nlohmann::json;
using nlohmann::ordered_json;

void RunnerConfig::validate() const {
  if (batch_size < 1) throw Error("runner", "batch_size must be >= 1");
  if (prior_window < 2) throw Error("runner", "prior_window must be >= 2");
  if (!(slack >= 0) || !(alarm > 0)) throw Error("runner", "CUSUM slack must be >= 0 and alarm > 0");
  if (!(min_sigma > 0)) throw Error("runner", "min_sigma must be > 0");
  if (!(w_pre >= 0 && w_pre <= 1)) throw Error("runner", "w_pre must lie in [0,1]");
  if (ramp < 0) throw Error("runner", "ramp must be >= 0");
  if (top_k < 1) throw Error("runner", "top_k must be >= 1");
}

void ChangeDetector::update(std::span<const double> batch, int start) {
  if (batch.empty() || detection_) return;
  const int end = start + static_cast<int>(batch.size());
  std::size_t used = 0;
  if (!baseline_ready_) {
    for (; used < batch.size() && static_cast<int>(prior_.size()) < config_.prior_window; ++used) {
      prior_.push_back(batch[used]);
    }
    if (static_cast<int>(prior_.size()) < config_.prior_window) return;
    const double n = static_cast<double>(prior_.size());
    mean_ = std::accumulate(prior_.begin(), prior_.end(), 0.0) / n;
    double var = 0;
    for (double v : prior_) var += (v - mean_) * (v - mean_);
    sigma_ = std::max(std::sqrt(var / n), config_.min_sigma);
    baseline_ready_ = true;
  }
  if (used == batch.size()) return;
  double sum = 0;
  for (std::size_t i = used; i < batch.size(); ++i) sum += batch[i];
  const double m = sum / static_cast<double>(batch.size() - used);
  cusum_ = std::max(0.0, cusum_ + m - mean_ - config_.slack * sigma_);
  if (cusum_ > config_.alarm * sigma_) detection_ = end;
}

double novelty_weight(const RunnerConfig& config, std::optional<int> detection, int position) {
  if (!detection || position < *detection) return config.w_pre;
  if (config.ramp == 0) return 1.0;
  const double t = std::min(1.0, double(position - *detection + 1) / config.ramp);
  return config.w_pre + (1.0 - config.w_pre) * t;
}

bool transcript_novelty(std::u32string_view prediction, const std::set<char32_t>& alphabet) {
  return std::any_of(prediction.begin(), prediction.end(),
                     [&](char32_t c) { return c == kNovelCharMarker || !alphabet.contains(c); });
}

std::map<std::string, std::u32string> ingest_external_predictions(const std::filesystem::path& path,
                                                                 const std::set<std::string>* valid_ids) {
  std::istringstream in(read_text_file(path, "runner"));
  std::map<std::string, std::u32string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string id, transcript;
    try {
      const auto j = json::parse(line);
      id = j.at("id").get<std::string>();
      transcript = j.at("transcript").get<std::string>();
    } catch (const json::exception&) {
      throw Error("runner", path.string() + ": malformed prediction at line " + std::to_string(line_no));
    }
    if (valid_ids && !valid_ids->contains(id)) throw Error("runner", "prediction for unknown id \"" + id + "\"");
    if (!out.emplace(id, utf8_decode(transcript)).second) {
      throw Error("runner", "duplicate prediction id \"" + id + "\"");
    }
  }
  return out;
}

EvmAgent::EvmAgent(EvmModel writer_model, std::optional<EvmModel> appearance_model, ImageSource source)
    : writer_(std::move(writer_model)), appearance_(std::move(appearance_model)), source_(std::move(source)) {
  if (!writer_.novelty_threshold) throw Error("runner", "writer model is not calibrated");
  extractor_dimension(writer_.extractor);
  if (appearance_) extractor_dimension(appearance_->extractor);
}

AgentOutput EvmAgent::observe(const std::string& id) const {
  const auto image = source_(id);
  const auto features = extract_features(image, writer_.extractor);
  AgentOutput out{writer_.predict(features.values), writer_.labels(), std::nullopt};
  if (appearance_) {
    const auto& fa = appearance_->extractor == writer_.extractor ? features
                                                                 : extract_features(image, appearance_->extractor);
    const auto scores = appearance_->class_scores(fa.values);
    const auto best = std::max_element(scores.begin(), scores.end()) - scores.begin();
    out.appearance = appearance_->classes[static_cast<std::size_t>(best)].label;
  }
  return out;
}

AgentOutput ScriptedAgent::observe(const std::string& id) const {
  const auto it = scores_.find(id);
  if (it == scores_.end()) throw Error("runner", "no scripted score for \"" + id + "\"");
  const double raw = std::clamp(it->second, 0.0, 1.0);
  return {{1.0 - raw, raw}, {"known"}, std::nullopt};
}

namespace {

std::vector<std::string> top_labels(const AgentOutput& out, int k) {
  std::vector<std::size_t> order(out.probabilities.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.probabilities[a] > out.probabilities[b]; });
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < order.size() && static_cast<int>(labels.size()) < k; ++i) {
    labels.push_back(order[i] < out.labels.size() ? out.labels[order[i]] : std::string("NOVEL"));
  }
  return labels;
}

}  // namespace

std::vector<PredictionRecord> run_test(const Agent& agent, std::span<const std::string> ids,
                                       const RunnerConfig& config, const TranscriptDuty& transcripts) {
  config.validate();
  const double cut = 1.0 - agent.threshold();
  ChangeDetector detector(config);
  std::vector<PredictionRecord> records;
  records.reserve(ids.size());
  const auto n = static_cast<int>(ids.size());
  for (int start = 0; start < n; start += config.batch_size) {
    const int end = std::min(n, start + config.batch_size);
    const auto detection = detector.detection_position();
    std::vector<double> raw;
    for (int p = start; p < end; ++p) {
      const auto& id = ids[static_cast<std::size_t>(p)];
      const auto out = agent.observe(id);
      PredictionRecord r;
      r.id = id;
      r.position = p;
      r.probabilities = out.probabilities;
      r.top_k = top_labels(out, config.top_k);
      r.raw_score = out.probabilities.back();
      r.weighted_score = std::clamp(r.raw_score * novelty_weight(config, detection, p), 0.0, 1.0);
      r.novelty_decision = r.weighted_score >= cut;
      r.appearance = out.appearance;
      r.world_changed = detection && p >= *detection;
      if (transcripts.predictions) {
        const auto it = transcripts.predictions->find(id);
        if (it != transcripts.predictions->end()) {
          if (!transcripts.alphabet) throw Error("runner", "transcript duty needs the known alphabet");
          r.transcript = it->second;
          r.transcript_novel = transcript_novelty(it->second, *transcripts.alphabet);
        }
      }
      raw.push_back(r.raw_score);
      records.push_back(std::move(r));
    }
    // A partial final batch never feeds the detector: nothing follows it.
    if (end - start == config.batch_size) detector.update(raw, start);
  }
  return records;
}

ordered_json PredictionRecord::to_json() const {
  ordered_json j;
  j["id"] = id;
  j["position"] = position;
  j["probabilities"] = probabilities;
  j["top_k"] = top_k;
  j["raw_score"] = raw_score;
  j["weighted_score"] = weighted_score;
  j["novelty_decision"] = novelty_decision;
  j["appearance"] = appearance ? ordered_json(*appearance) : ordered_json(nullptr);
  j["transcript"] = transcript ? ordered_json(utf8_encode(*transcript)) : ordered_json(nullptr);
  j["transcript_novel"] = transcript_novel ? ordered_json(*transcript_novel) : ordered_json(nullptr);
  j["world_changed"] = world_changed;
  return j;
}

PredictionRecord PredictionRecord::from_json(const json& j) {
  PredictionRecord r;
  r.id = j.at("id").get<std::string>();
  r.position = j.at("position").get<int>();
  r.probabilities = j.at("probabilities").get<std::vector<double>>();
  r.top_k = j.at("top_k").get<std::vector<std::string>>();
  r.raw_score = j.at("raw_score").get<double>();
  r.weighted_score = j.at("weighted_score").get<double>();
  r.novelty_decision = j.at("novelty_decision").get<bool>();
  if (j.contains("appearance") && !j["appearance"].is_null()) r.appearance = j["appearance"].get<std::string>();
  if (j.contains("transcript") && !j["transcript"].is_null()) r.transcript = utf8_decode(j["transcript"].get<std::string>());
  if (j.contains("transcript_novel") && !j["transcript_novel"].is_null()) r.transcript_novel = j["transcript_novel"].get<bool>();
  r.world_changed = j.at("world_changed").get<bool>();
  return r;
}

std::string records_jsonl(std::span<const PredictionRecord> records) {
  std::string out;
  for (const auto& r : records) out += r.to_json().dump() + "\n";
  return out;
}

std::vector<PredictionRecord> read_records(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path, "runner"));
  std::vector<PredictionRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(PredictionRecord::from_json(json::parse(line)));
    } catch (const json::exception&) {
      throw Error("runner", path.string() + ": malformed record at line " + std::to_string(line_no));
    }
  }
  return out;
}

}  // namespace scriptdrift
