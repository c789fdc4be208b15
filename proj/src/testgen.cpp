#include "scriptdrift/testgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <random>
#include <set>

#include "scriptdrift/error.hpp"
#include "scriptdrift/util.hpp"

namespace scriptdrift {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::pair<DistributionType, std::string_view> kDistributionNames[] = {
    {DistributionType::High, "High"},
    {DistributionType::Low, "Low"},
    {DistributionType::Mid, "Mid"},
    {DistributionType::Flat, "Flat"},
};

std::pair<double, double> beta_params(DistributionType type) {
  switch (type) {
    case DistributionType::High: return {1.5, 4.0};
    case DistributionType::Low: return {4.0, 1.5};
    case DistributionType::Mid: return {4.0, 4.0};
    case DistributionType::Flat: return {1.0, 1.0};
  }
  return {1.0, 1.0};
}

double draw_beta(std::mt19937_64& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x + y > 0 ? x / (x + y) : 0.5;
}

template <typename T>
void require_nonempty(const std::vector<T>& v, const char* name) {
  if (v.empty()) throw Error("testgen", std::string("empty value set: ") + name);
}

std::string seal_of(const ordered_json& payload) {
  const auto text = payload.dump();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x",
                crc32({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()}));
  return buf;
}

}  // namespace

std::string_view to_string(DistributionType type) {
  for (const auto& [t, name] : kDistributionNames) {
    if (t == type) return name;
  }
  return "?";
}

DistributionType parse_distribution_type(std::string_view text) {
  for (const auto& [t, name] : kDistributionNames) {
    if (name == text) return t;
  }
  throw Error("testgen", "unknown distribution type '" + std::string(text) + "'");
}

ordered_json TestSpec::to_json() const {
  ordered_json j;
  j["mean_introduction_point"] = mean_introduction_point;
  j["novelty_density"] = novelty_density;
  j["novelty_type"] = std::string(to_string(novelty_type));
  j["difficulty"] = std::string(to_string(difficulty));
  j["distribution_type"] = std::string(to_string(distribution));
  j["test_length"] = length;
  j["seed"] = seed;
  j["reorder_index"] = reorder_index;
  return j;
}

TestSpec TestSpec::from_json(const json& j) {
  TestSpec s;
  try {
    s.mean_introduction_point = j.at("mean_introduction_point").get<double>();
    s.novelty_density = j.at("novelty_density").get<double>();
    s.novelty_type = parse_novelty_type(j.at("novelty_type").get<std::string>());
    s.difficulty = parse_difficulty(j.at("difficulty").get<std::string>());
    s.distribution = parse_distribution_type(j.at("distribution_type").get<std::string>());
    s.length = j.at("test_length").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.reorder_index = j.value("reorder_index", 0);
  } catch (const json::exception& e) {
    throw Error("testgen", std::string("malformed test spec: ") + e.what());
  }
  return s;
}

void TestgenConfig::validate() const {
  require_nonempty(introduction_points, "introduction_points");
  require_nonempty(densities, "densities");
  require_nonempty(novelty_types, "novelty_types");
  require_nonempty(difficulties, "difficulties");
  require_nonempty(distributions, "distributions");
  require_nonempty(lengths, "lengths");
  for (double p : introduction_points) {
    if (!(p > 0 && p < 1)) throw Error("testgen", "introduction points must lie in (0,1)");
  }
  for (double d : densities) {
    if (!(d > 0 && d <= 1)) throw Error("testgen", "densities must lie in (0,1]");
  }
  for (auto t : novelty_types) {
    if (t == NoveltyType::None) throw Error("testgen", "novelty type None cannot be tested");
  }
  for (auto d : difficulties) {
    if (d == Difficulty::Unassigned) throw Error("testgen", "difficulty must be Easy, Medium or Hard");
  }
  for (int l : lengths) {
    if (l < 2) throw Error("testgen", "test lengths must be >= 2");
  }
  if (!(jitter >= 0 && jitter < 0.5)) throw Error("testgen", "jitter must lie in [0,0.5)");
  if (reorders < 0 || reorders > 9) throw Error("testgen", "reorders must lie in [0,9]");
  if (batch_size < 1) throw Error("testgen", "batch_size must be >= 1");
}

std::vector<TestSpec> enumerate_specs(const TestgenConfig& config) {
  config.validate();
  std::vector<TestSpec> specs;
  for (double mip : config.introduction_points) {
    for (double d : config.densities) {
      for (auto type : config.novelty_types) {
        for (auto diff : config.difficulties) {
          for (auto dist : config.distributions) {
            for (int len : config.lengths) {
              TestSpec s{mip, d, type, diff, dist, len, derive_seed(config.seed, specs.size()), 0};
              specs.push_back(s);
            }
          }
        }
      }
    }
  }
  return specs;
}

std::size_t TestStream::novel_count() const { return static_cast<std::size_t>(std::count(is_novel.begin(), is_novel.end(), true)); }

int introduction_index(const TestSpec& spec, const TestgenConfig& config) {
  const int len = spec.length;
  int idx = static_cast<int>(std::lround(spec.mean_introduction_point * len));
  const int spread = static_cast<int>(std::lround(config.jitter * len));
  if (spread > 0) {
    std::mt19937_64 rng(derive_seed(spec.seed, "testgen.introduction"));
    idx += std::uniform_int_distribution<int>(-spread, spread)(rng);
    const auto [lo_it, hi_it] = std::minmax_element(config.introduction_points.begin(), config.introduction_points.end());
    const int lo = static_cast<int>(std::lround(*lo_it * len));
    const int hi = static_cast<int>(std::lround(*hi_it * len));
    idx = std::clamp(idx, lo, hi);
  }
  return std::clamp(idx, 1, len - 1);
}

int novel_count(const TestSpec& spec, int introduction) {
  const int window = spec.length - introduction;
  const int m = static_cast<int>(std::lround(spec.novelty_density * window));
  if (m < 1 || m > window) {
    throw Error("testgen", "unsatisfiable density " + std::to_string(spec.novelty_density) + " over a post window of " +
                               std::to_string(window));
  }
  return m;
}

std::vector<int> novel_slots(const TestSpec& spec, int window, int count, std::uint64_t seed) {
  if (count > window) throw Error("testgen", "more novel samples than post-window slots");
  std::mt19937_64 rng(seed);
  const auto [a, b] = beta_params(spec.distribution);
  std::vector<double> draws(static_cast<std::size_t>(count));
  for (auto& u : draws) u = draw_beta(rng, a, b);
  std::sort(draws.begin(), draws.end());
  std::vector<bool> taken(static_cast<std::size_t>(window), false);
  std::vector<int> slots;
  slots.reserve(draws.size());
  for (double u : draws) {
    const int want = std::min(static_cast<int>(std::floor(u * window)), window - 1);
    int slot = -1;
    for (int r = 0; r < window && slot < 0; ++r) {
      if (want - r >= 0 && !taken[want - r]) slot = want - r;
      else if (want + r < window && !taken[want + r]) slot = want + r;
    }
    taken[slot] = true;
    slots.push_back(slot);
  }
  std::sort(slots.begin(), slots.end());
  return slots;
}

TestStream generate(const TestSpec& spec, const TestgenConfig& config, std::span<const std::string> non_novel_pool,
                    std::span<const std::string> novel_pool) {
  const int intro = introduction_index(spec, config);
  const int window = spec.length - intro;
  const int m = novel_count(spec, intro);
  const auto need_known = static_cast<std::size_t>(spec.length - m);
  if (non_novel_pool.size() < need_known) {
    throw Error("testgen", "insufficient non-novel pool: need " + std::to_string(need_known) + ", have " +
                               std::to_string(non_novel_pool.size()));
  }
  if (novel_pool.size() < static_cast<std::size_t>(m)) {
    throw Error("testgen", "insufficient " + std::string(to_string(spec.novelty_type)) + "/" +
                               std::string(to_string(spec.difficulty)) + " novel pool: need " + std::to_string(m) +
                               ", have " + std::to_string(novel_pool.size()));
  }
  std::mt19937_64 rng(derive_seed(spec.seed, "testgen.pools"));
  std::vector<std::string> known(non_novel_pool.begin(), non_novel_pool.end());
  std::vector<std::string> novel(novel_pool.begin(), novel_pool.end());
  std::shuffle(known.begin(), known.end(), rng);
  std::shuffle(novel.begin(), novel.end(), rng);

  TestStream s;
  s.spec = spec;
  s.introduction_index = intro;
  s.is_novel.assign(static_cast<std::size_t>(spec.length), false);
  for (int slot : novel_slots(spec, window, m, derive_seed(spec.seed, "testgen.placement"))) {
    s.is_novel[static_cast<std::size_t>(intro + slot)] = true;
  }
  std::size_t ki = 0, ni = 0;
  s.ids.reserve(s.is_novel.size());
  for (bool nov : s.is_novel) s.ids.push_back(nov ? novel[ni++] : known[ki++]);
  return s;
}

TestStream reorder(const TestStream& stream, int k) {
  if (k < 1 || k > 9) throw Error("testgen", "reorder index must lie in 1..9, got " + std::to_string(k));
  std::mt19937_64 rng(derive_seed(derive_seed(stream.spec.seed, "testgen.reorder"), static_cast<std::uint64_t>(k)));
  TestStream out = stream;
  out.spec.reorder_index = k;
  for (bool cls : {false, true}) {
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < stream.ids.size(); ++i) {
      if (stream.is_novel[i] == cls) pos.push_back(i);
    }
    std::vector<std::size_t> perm = pos;
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t j = 0; j < pos.size(); ++j) out.ids[pos[j]] = stream.ids[perm[j]];
  }
  return out;
}

StreamPools StreamPools::from_manifests(std::span<const Manifest> manifests) {
  StreamPools pools;
  std::set<std::string> seen;
  for (const auto& m : manifests) {
    for (const auto& r : m.records) {
      if (!seen.insert(r.id).second) throw Error("testgen", "duplicate id \"" + r.id + "\" across pool manifests");
      if (r.labels.novelty_type == NoveltyType::None) {
        if (m.known_writers.contains(r.labels.writer_id)) pools.non_novel.push_back(r.id);
      } else {
        pools.novel.push_back(r);
      }
    }
  }
  return pools;
}

std::vector<std::string> StreamPools::novel_ids(NoveltyType type, Difficulty difficulty) const {
  std::vector<std::string> ids;
  for (const auto& r : novel) {
    if (r.labels.novelty_type == type && r.labels.difficulty == difficulty) ids.push_back(r.id);
  }
  return ids;
}

std::string test_id(std::size_t spec_index, int reorder_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "t%05zu_r%d", spec_index, reorder_index);
  return buf;
}

ordered_json stream_json(const std::string& id, const TestStream& stream, int batch_size) {
  ordered_json j;
  j["test_id"] = id;
  j["batch_size"] = batch_size;
  j["samples"] = stream.ids;
  return j;
}

ordered_json oracle_json(const std::string& id, const TestStream& stream) {
  ordered_json payload;
  payload["test_id"] = id;
  payload["spec"] = stream.spec.to_json();
  payload["introduction_index"] = stream.introduction_index;
  std::vector<int> flags(stream.is_novel.begin(), stream.is_novel.end());
  payload["is_novel"] = flags;
  ordered_json j;
  j["payload"] = payload;
  j["seal"] = seal_of(payload);
  return j;
}

OracleFile read_oracle(const std::filesystem::path& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_text_file(path, "testgen"));
  } catch (const json::exception& e) {
    throw Error("testgen", path.string() + ": malformed oracle file: " + e.what());
  }
  if (!j.contains("payload") || !j.contains("seal")) throw Error("testgen", path.string() + ": not an oracle file");
  const auto& payload = j["payload"];
  if (seal_of(payload) != j["seal"].get<std::string>()) throw Error("testgen", path.string() + ": oracle seal mismatch");
  OracleFile o;
  o.test_id = payload.at("test_id").get<std::string>();
  o.spec = TestSpec::from_json(payload.at("spec"));
  o.introduction_index = payload.at("introduction_index").get<int>();
  for (int f : payload.at("is_novel").get<std::vector<int>>()) o.is_novel.push_back(f != 0);
  return o;
}

StreamFile read_stream(const std::filesystem::path& path) {
  try {
    const auto j = json::parse(read_text_file(path, "testgen"));
    return {j.at("test_id").get<std::string>(), j.value("batch_size", 16),
            j.at("samples").get<std::vector<std::string>>()};
  } catch (const json::exception& e) {
    throw Error("testgen", path.string() + ": malformed stream file: " + e.what());
  }
}

GenerateSummary write_tests(const std::filesystem::path& out, const TestgenConfig& config, const StreamPools& pools,
                            const GenerateOptions& options) {
  const auto specs = enumerate_specs(config);
  GenerateSummary summary;
  summary.specs = specs.size();
  std::string lines;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    ordered_json j;
    j["test_id"] = test_id(i, 0);
    j["spec"] = specs[i].to_json();
    lines += j.dump() + "\n";
  }
  write_text_file(out / "specs.jsonl", lines, "testgen");
  if (options.specs_only) return summary;

  std::mutex mu;
  parallel_for(specs.size(), options.jobs, [&](std::size_t i) {
    const auto& spec = specs[i];
    TestStream canonical;
    try {
      const auto novel = pools.novel_ids(spec.novelty_type, spec.difficulty);
      canonical = generate(spec, config, pools.non_novel, novel);
    } catch (const Error& e) {
      if (!options.skip_infeasible) throw Error("testgen", test_id(i, 0) + ": " + e.what());
      std::lock_guard lock(mu);
      summary.skipped.push_back(test_id(i, 0) + ": " + e.what());
      return;
    }
    for (int k = 0; k <= config.reorders; ++k) {
      const auto stream = k == 0 ? canonical : reorder(canonical, k);
      const auto id = test_id(i, k);
      write_text_file(out / "streams" / (id + ".json"), stream_json(id, stream, config.batch_size).dump() + "\n",
                      "testgen");
      write_text_file(out / "oracle" / (id + ".json"), oracle_json(id, stream).dump() + "\n", "testgen");
    }
    std::lock_guard lock(mu);
    summary.streams += static_cast<std::size_t>(config.reorders) + 1;
  });
  std::sort(summary.skipped.begin(), summary.skipped.end());
  return summary;
}

}  // namespace scriptdrift
