#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "scriptdrift/corpus.hpp"

namespace scriptdrift {

enum class DistributionType { High, Low, Mid, Flat };

std::string_view to_string(DistributionType type);
DistributionType parse_distribution_type(std::string_view text);

struct TestSpec {
  double mean_introduction_point = 0.5;
  double novelty_density = 0.1;
  NoveltyType novelty_type = NoveltyType::Writer;
  Difficulty difficulty = Difficulty::Easy;
  DistributionType distribution = DistributionType::Flat;
  int length = 512;
  std::uint64_t seed = 0;
  int reorder_index = 0;

  nlohmann::ordered_json to_json() const;
  static TestSpec from_json(const nlohmann::json& j);
  friend bool operator==(const TestSpec&, const TestSpec&) = default;
};

/// Value sets of the six independent variables plus generation knobs.
struct TestgenConfig {
  std::vector<double> introduction_points = {0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> densities = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  std::vector<NoveltyType> novelty_types = {NoveltyType::Writer, NoveltyType::Letter, NoveltyType::Background};
  std::vector<Difficulty> difficulties = {Difficulty::Easy, Difficulty::Medium, Difficulty::Hard};
  std::vector<DistributionType> distributions = {DistributionType::High, DistributionType::Low,
                                                 DistributionType::Mid, DistributionType::Flat};
  std::vector<int> lengths = {512, 768, 1024};
  double jitter = 0.05;  // fraction of length around the mean introduction point
  int reorders = 9;
  int batch_size = 16;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Cartesian product in a fixed nesting order; spec i gets seed derive_seed(config.seed, i).
std::vector<TestSpec> enumerate_specs(const TestgenConfig& config);

struct TestStream {
  TestSpec spec;
  std::vector<std::string> ids;
  std::vector<bool> is_novel;
  int introduction_index = 0;

  std::size_t novel_count() const;
};

/// Realized introduction index: the rounded mean point plus uniform jitter,
/// clamped to the configured introduction range.
int introduction_index(const TestSpec& spec, const TestgenConfig& config);

/// Number of novel samples in the post window: round(density * window).
int novel_count(const TestSpec& spec, int introduction);

/// Novel slots within the post window [0, window), placed by the spec's distribution.
std::vector<int> novel_slots(const TestSpec& spec, int window, int count, std::uint64_t seed);

/// Builds the canonical stream. Pools are drawn without replacement.
TestStream generate(const TestSpec& spec, const TestgenConfig& config, std::span<const std::string> non_novel_pool,
                    std::span<const std::string> novel_pool);

/// Permutes sample assignments within the novel and within the non-novel positions.
TestStream reorder(const TestStream& stream, int k);

/// Sample pools drawn from one or more manifests.
struct StreamPools {
  std::vector<std::string> non_novel;
  std::vector<ManifestRecord> novel;

  static StreamPools from_manifests(std::span<const Manifest> manifests);
  std::vector<std::string> novel_ids(NoveltyType type, Difficulty difficulty) const;
};

std::string test_id(std::size_t spec_index, int reorder_index);

/// Agent-visible stream file (ids only) and its sealed oracle sibling.
nlohmann::ordered_json stream_json(const std::string& id, const TestStream& stream, int batch_size);
nlohmann::ordered_json oracle_json(const std::string& id, const TestStream& stream);

struct OracleFile {
  std::string test_id;
  TestSpec spec;
  int introduction_index = 0;
  std::vector<bool> is_novel;
};

/// Verifies the seal before returning.
OracleFile read_oracle(const std::filesystem::path& path);

struct StreamFile {
  std::string test_id;
  int batch_size = 16;
  std::vector<std::string> ids;
};

StreamFile read_stream(const std::filesystem::path& path);

struct GenerateOptions {
  bool specs_only = false;
  bool skip_infeasible = false;
  unsigned jobs = 1;
};

struct GenerateSummary {
  std::size_t specs = 0;
  std::size_t streams = 0;
  std::vector<std::string> skipped;  // "test_id: reason"
};

/// Writes specs.jsonl, streams/<id>.json and oracle/<id>.json under `out`.
GenerateSummary write_tests(const std::filesystem::path& out, const TestgenConfig& config, const StreamPools& pools,
                            const GenerateOptions& options);

}  // namespace scriptdrift
