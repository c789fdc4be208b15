#include "scriptdrift/config.hpp"

#include <algorithm>
#include <cctype>

#include "scriptdrift/error.hpp"
#include "scriptdrift/features.hpp"
#include "scriptdrift/util.hpp"

extern char** environ;

namespace scriptdrift {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kEnvPrefix = "SCRIPTDRIFT_";

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

bool same_kind(const ordered_json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

template <typename T, typename Parse>
std::vector<T> parse_list(const ordered_json& arr, Parse parse) {
  std::vector<T> out;
  for (const auto& v : arr) out.push_back(parse(v.get<std::string>()));
  return out;
}

}  // namespace

ordered_json Config::defaults() {
  ordered_json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["seed"] = 0;
  j["jobs"] = 0;
  j["features"] = {{"extractor", std::string(kMeanHog)}};
  j["evm"] = {{"tail_size", 1000}, {"cover_threshold", 0.5}, {"distance", "cosine"}, {"distance_multiplier", 0.5}};
  const TestgenConfig tg;
  j["testgen"] = {{"introduction_points", tg.introduction_points},
                  {"densities", tg.densities},
                  {"novelty_types", {"Writer", "Letter", "Background"}},
                  {"difficulties", {"Easy", "Medium", "Hard"}},
                  {"distributions", {"High", "Low", "Mid", "Flat"}},
                  {"lengths", tg.lengths},
                  {"jitter", tg.jitter},
                  {"reorders", tg.reorders},
                  {"batch_size", tg.batch_size}};
  const RunnerConfig rc;
  j["runner"] = {{"batch_size", rc.batch_size}, {"prior_window", rc.prior_window}, {"slack", rc.slack},
                 {"alarm", rc.alarm},           {"min_sigma", rc.min_sigma},       {"w_pre", rc.w_pre},
                 {"ramp", rc.ramp},             {"top_k", rc.top_k}};
  j["metrics"] = {{"nmi_variant", "geometric"}, {"evaluation_window", 32}};
  return j;
}

Config::Config() : values_(defaults()) {}

void Config::merge_file(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path, "config"));
  } catch (const json::exception& e) {
    throw Error("config", path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw Error("config", path.string() + ": top level must be an object");
  if (!j.contains("schema_version")) throw Error("config", path.string() + ": missing schema_version");
  if (j["schema_version"] != kConfigSchemaVersion) {
    throw Error("config", path.string() + ": unsupported schema_version " + j["schema_version"].dump());
  }
  merge_json(j, path.string());
}

void Config::merge_json(const json& overrides, const std::string& origin) {
  for (const auto& [key, value] : overrides.items()) {
    if (!values_.contains(key)) throw Error("config", origin + ": unknown key '" + key + "'");
    auto& slot = values_[key];
    if (slot.is_object()) {
      if (!value.is_object()) throw Error("config", origin + ": '" + key + "' must be an object");
      for (const auto& [sub, v] : value.items()) {
        if (!slot.contains(sub)) throw Error("config", origin + ": unknown key '" + key + "." + sub + "'");
        if (!same_kind(slot[sub], v)) throw Error("config", origin + ": '" + key + "." + sub + "' has the wrong type");
        slot[sub] = v;
      }
    } else {
      if (!same_kind(slot, value)) throw Error("config", origin + ": '" + key + "' has the wrong type");
      slot = value;
    }
  }
  // Validate eagerly so errors name their origin.
  try {
    evm().validate();
    testgen().validate();
    runner().validate();
    nmi_variant();
    extractor_dimension(extractor());
  } catch (const Error& e) {
    throw Error("config", origin + ": " + e.what());
  }
}

void Config::merge_environment(const std::map<std::string, std::string>& env) {
  for (const auto& [name, raw] : env) {
    if (name.rfind(kEnvPrefix, 0) != 0) continue;
    const std::string rest = name.substr(kEnvPrefix.size());
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::exception&) {
      value = raw;
    }
    bool matched = false;
    for (const auto& [key, slot] : values_.items()) {
      if (key == "schema_version") continue;
      if (!slot.is_object()) {
        if (rest == upper(key)) {
          merge_json(json{{key, value}}, name);
          matched = true;
        }
        continue;
      }
      for (const auto& [sub, _] : slot.items()) {
        if (rest == upper(key) + "_" + upper(sub)) {
          merge_json(json{{key, {{sub, value}}}}, name);
          matched = true;
        }
      }
    }
    if (!matched) throw Error("config", "unknown environment override " + name);
  }
}

std::map<std::string, std::string> Config::process_environment() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    const std::string_view entry(*e);
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    const auto name = entry.substr(0, eq);
    if (name.rfind(kEnvPrefix, 0) == 0) env.emplace(name, entry.substr(eq + 1));
  }
  return env;
}

std::uint64_t Config::seed() const { return values_["seed"].get<std::uint64_t>(); }

unsigned Config::jobs() const {
  const auto j = values_["jobs"].get<unsigned>();
  return j == 0 ? default_jobs() : j;
}

EvmHyperparams Config::evm() const {
  const auto& e = values_["evm"];
  EvmHyperparams hp;
  hp.tail_size = e["tail_size"].get<std::size_t>();
  hp.cover_threshold = e["cover_threshold"].get<double>();
  hp.distance = parse_distance_kind(e["distance"].get<std::string>());
  hp.distance_multiplier = e["distance_multiplier"].get<double>();
  return hp;
}

TestgenConfig Config::testgen() const {
  const auto& t = values_["testgen"];
  TestgenConfig c;
  c.introduction_points = t["introduction_points"].get<std::vector<double>>();
  c.densities = t["densities"].get<std::vector<double>>();
  c.novelty_types = parse_list<NoveltyType>(t["novelty_types"], parse_novelty_type);
  c.difficulties = parse_list<Difficulty>(t["difficulties"], parse_difficulty);
  c.distributions = parse_list<DistributionType>(t["distributions"], parse_distribution_type);
  c.lengths = t["lengths"].get<std::vector<int>>();
  c.jitter = t["jitter"].get<double>();
  c.reorders = t["reorders"].get<int>();
  c.batch_size = t["batch_size"].get<int>();
  c.seed = derive_seed(seed(), "testgen");
  return c;
}

RunnerConfig Config::runner() const {
  const auto& r = values_["runner"];
  RunnerConfig c;
  c.batch_size = r["batch_size"].get<int>();
  c.prior_window = r["prior_window"].get<int>();
  c.slack = r["slack"].get<double>();
  c.alarm = r["alarm"].get<double>();
  c.min_sigma = r["min_sigma"].get<double>();
  c.w_pre = r["w_pre"].get<double>();
  c.ramp = r["ramp"].get<int>();
  c.top_k = r["top_k"].get<int>();
  return c;
}

NmiVariant Config::nmi_variant() const { return parse_nmi_variant(values_["metrics"]["nmi_variant"].get<std::string>()); }

std::size_t Config::evaluation_window() const { return values_["metrics"]["evaluation_window"].get<std::size_t>(); }

std::string Config::extractor() const { return values_["features"]["extractor"].get<std::string>(); }

}  // namespace scriptdrift
