#include "scriptdrift/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scriptdrift/acceptance.hpp"
#include "scriptdrift/augment.hpp"
#include "scriptdrift/config.hpp"
#include "scriptdrift/corpus.hpp"
#include "scriptdrift/error.hpp"
#include "scriptdrift/evm.hpp"
#include "scriptdrift/features.hpp"
#include "scriptdrift/metrics.hpp"
#include "scriptdrift/ontology.hpp"
#include "scriptdrift/runner.hpp"
#include "scriptdrift/style_metrics.hpp"
#include "scriptdrift/testgen.hpp"
#include "scriptdrift/util.hpp"

namespace scriptdrift {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Session {
  Config config;
  std::ostream& out;
  std::ostream& err;
  std::string log_text;
  fs::path log_path;

  void log(const std::string& line) { log_text += line + "\n"; }
};

// ---- style tables ------------------------------------------------------------

struct StyleRow {
  std::string id;
  std::string writer;
  StyleVector style;
};

constexpr const char* kStyleHeader =
    "id,writer_id,pen_pressure,slant_angle,word_spacing,character_size,background_entropy,pen_entropy";

std::string styles_csv(const std::vector<StyleRow>& rows) {
  std::string s = std::string(kStyleHeader) + "\n";
  for (const auto& r : rows) {
    const auto& v = r.style;
    s += r.id + "," + r.writer + "," + num(v.pen_pressure) + "," + num(v.slant_angle) + "," + num(v.word_spacing) +
         "," + num(v.character_size) + "," + num(v.background_entropy) + "," + num(v.pen_entropy) + "\n";
  }
  return s;
}

std::vector<StyleRow> read_styles(const fs::path& path) {
  std::istringstream in(read_text_file(path, "cli"));
  std::string line;
  std::getline(in, line);
  if (line != kStyleHeader) throw Error("cli", path.string() + ": not a style table");
  std::vector<StyleRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) throw Error("cli", path.string() + ": malformed row at line " + std::to_string(line_no));
    StyleRow r{cells[0], cells[1], {}};
    try {
      r.style = {std::stod(cells[2]), std::stod(cells[3]), std::stod(cells[4]),
                 std::stod(cells[5]), std::stod(cells[6]), std::stod(cells[7])};
    } catch (const std::exception&) {
      throw Error("cli", path.string() + ": malformed number at line " + std::to_string(line_no));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---- subcommands ----------------------------------------------------------------

int cmd_measure(Session& s, const fs::path& manifest_path, const fs::path& out, bool skip_errors) {
  const auto m = load_manifest(manifest_path);
  std::vector<std::optional<StyleVector>> styles(m.records.size());
  std::vector<std::string> errors(m.records.size());
  parallel_for(m.records.size(), s.config.jobs(), [&](std::size_t i) {
    try {
      styles[i] = style_vector(m.load_sample(m.records[i]));
    } catch (const Error& e) {
      if (!skip_errors) throw;
      errors[i] = e.what();
    }
  });
  std::vector<StyleRow> rows;
  for (std::size_t i = 0; i < styles.size(); ++i) {
    if (styles[i]) rows.push_back({m.records[i].id, m.records[i].labels.writer_id, *styles[i]});
    else s.log("measure: skipped " + errors[i]);
  }
  write_text_file(out, styles_csv(rows), "cli");
  s.out << "measured " << rows.size() << " of " << m.records.size() << " samples\n";
  return 0;
}

int cmd_graph(Session& s, const fs::path& styles_path, const fs::path& out) {
  const auto rows = read_styles(styles_path);
  std::vector<StyleVector> all;
  std::vector<SampleRef> refs;
  std::map<std::string, StyleVector> by_id;
  for (const auto& r : rows) {
    all.push_back(r.style);
    refs.push_back({r.id, r.writer});
    by_id[r.id] = r.style;
  }
  const auto bins = fit_bins(all);
  const auto graph = build_graph(refs, by_id, bins);
  const auto report = consistency(graph);

  ordered_json bj;
  for (auto a : kStyleAttributes) bj[std::string(to_string(a))] = bins.edges[static_cast<int>(a)];
  write_text_file(out / "bins.json", bj.dump(2) + "\n", "cli");

  ordered_json gj;
  auto& nodes = gj["nodes"] = ordered_json::array();
  for (const auto& n : graph.nodes()) {
    ordered_json nj;
    nj["kind"] = n.kind == NodeKind::Sample ? "sample" : n.kind == NodeKind::Writer ? "writer" : "bin";
    if (n.kind == NodeKind::AttributeBin) {
      nj["attribute"] = std::string(to_string(n.attribute));
      nj["bin"] = n.bin;
    } else {
      nj["id"] = n.id;
    }
    nodes.push_back(nj);
  }
  auto& edges = gj["edges"] = ordered_json::array();
  for (const auto& e : graph.edges()) edges.push_back({{"from", e.from}, {"to", e.to}, {"modal", e.modal}});
  write_text_file(out / "graph.json", gj.dump() + "\n", "cli");

  std::string dot = "digraph style {\n";
  std::set<std::pair<std::size_t, std::size_t>> red;
  for (const auto& mm : report.mismatches) {
    const auto node = *graph.sample_node(mm.sample_id);
    red.insert({node, graph.bin_node(mm.attribute, mm.sample_bin)});
  }
  for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
    const auto& n = graph.nodes()[i];
    const std::string label =
        n.kind == NodeKind::AttributeBin ? std::string(to_string(n.attribute)) + " " + std::to_string(n.bin) : n.id;
    dot += "  n" + std::to_string(i) + " [label=\"" + label + "\"" +
           (n.kind == NodeKind::Writer ? ", shape=box" : n.kind == NodeKind::AttributeBin ? ", shape=diamond" : "") +
           "];\n";
  }
  for (const auto& e : graph.edges()) {
    dot += "  n" + std::to_string(e.from) + " -> n" + std::to_string(e.to) +
           (red.contains({e.from, e.to}) ? " [color=red]" : "") + ";\n";
  }
  dot += "}\n";
  write_text_file(out / "graph.dot", dot, "cli");

  std::string mism = "sample_id,attribute,sample_bin,modal_bin\n";
  for (const auto& mm : report.mismatches) {
    mism += mm.sample_id + "," + std::string(to_string(mm.attribute)) + "," + std::to_string(mm.sample_bin) + "," +
            std::to_string(mm.modal_bin) + "\n";
  }
  write_text_file(out / "mismatches.csv", mism, "cli");
  ordered_json cj;
  cj["consistency"] = report.fraction;
  cj["mismatches"] = report.mismatches.size();
  write_text_file(out / "consistency.json", cj.dump(2) + "\n", "cli");
  s.out << "graph: " << graph.nodes().size() << " nodes, " << graph.edges().size() << " edges, consistency "
        << report.fraction << "\n";
  return 0;
}

int cmd_distances(Session& s, const fs::path& styles_path, const fs::path& out) {
  std::map<std::string, std::vector<StyleVector>> by_writer;
  for (const auto& r : read_styles(styles_path)) {
    if (r.writer != kUnknownWriter) by_writer[r.writer].push_back(r.style);
  }
  const auto d = writer_distances(by_writer);
  write_text_file(out, d.to_csv(), "cli");
  s.out << "distances: " << d.writers.size() << " writers\n";
  return 0;
}

int cmd_inject(Session& s, const fs::path& manifest_path, const fs::path& recipe_path, const fs::path& assets_dir,
               const fs::path& out) {
  const auto base = load_manifest(manifest_path);
  json rj;
  try {
    rj = json::parse(read_text_file(recipe_path, "cli"));
  } catch (const json::exception& e) {
    throw Error("augment", recipe_path.string() + ": " + e.what());
  }
  const auto recipe = PoolRecipe::from_json(rj);
  const auto assets = assets_dir.empty() ? AssetLibrary{} : AssetLibrary::load_directory(assets_dir);
  auto pool = build_novel_pool(base, recipe, assets, derive_seed(s.config.seed(), "augment"), s.config.jobs());
  pool.manifest.base_dir = out;
  parallel_for(pool.images.size(), s.config.jobs(), [&](std::size_t i) {
    write_png(out / pool.manifest.records[i].image, pool.images[i]);
  });
  write_manifest(out / "manifest.jsonl", pool.manifest);
  s.out << "injected " << pool.manifest.records.size() << " novel samples\n";
  return 0;
}

int cmd_featurize(Session& s, const fs::path& manifest_path, const std::string& extractor, const fs::path& out) {
  const auto m = load_manifest(manifest_path);
  const auto f = featurize(m, extractor, s.config.jobs());
  save_features(out, f);
  s.out << "featurized " << f.ids.size() << " samples with " << extractor << " (dimension " << f.dimension << ")\n";
  return 0;
}

enum class Target { Writer, Appearance };

std::optional<std::string> target_label(const ManifestRecord& r, Target target) {
  if (target == Target::Writer) return r.labels.writer_id;
  if (!r.labels.appearance) return std::nullopt;
  return r.labels.appearance->name();
}

struct LabeledFeatures {
  std::string extractor;
  std::vector<const ManifestRecord*> records;
  std::vector<const std::vector<double>*> rows;
};

LabeledFeatures join(const std::vector<FeatureMatrix>& features, const std::vector<Manifest>& manifests) {
  LabeledFeatures out;
  std::map<std::string, const std::vector<double>*> by_id;
  for (const auto& f : features) {
    if (out.extractor.empty()) out.extractor = f.extractor;
    if (f.extractor != out.extractor) throw Error("cli", "feature files mix extractors");
    for (std::size_t i = 0; i < f.ids.size(); ++i) by_id[f.ids[i]] = &f.rows[i];
  }
  for (const auto& m : manifests) {
    for (const auto& r : m.records) {
      const auto it = by_id.find(r.id);
      if (it == by_id.end()) throw Error("cli", "no features for sample \"" + r.id + "\"");
      out.records.push_back(&r);
      out.rows.push_back(it->second);
    }
  }
  return out;
}

int cmd_train(Session& s, const fs::path& features_path, const fs::path& labels_path, Target target,
              const fs::path& out) {
  const std::vector<FeatureMatrix> f{load_features(features_path)};
  const std::vector<Manifest> m{load_manifest(labels_path)};
  const auto data = join(f, m);
  ClassPoints points;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto& r = *data.records[i];
    if (r.labels.novelty_type != NoveltyType::None) continue;
    if (target == Target::Writer && !m[0].known_writers.contains(r.labels.writer_id)) continue;
    const auto label = target_label(r, target);
    if (!label) continue;
    points[*label].push_back(*data.rows[i]);
  }
  const auto model = fit_evm(points, s.config.evm(), data.extractor, s.config.jobs());
  model.save(out);
  std::size_t evs = 0;
  for (const auto& c : model.classes) evs += c.extreme_vectors.size();
  s.out << "trained " << model.classes.size() << " classes, " << evs << " extreme vectors\n";
  return 0;
}

int cmd_calibrate(Session& s, const fs::path& model_path, const std::vector<fs::path>& feature_paths,
                  const std::vector<fs::path>& label_paths, const fs::path& out, const fs::path& report_path) {
  auto model = EvmModel::load(model_path);
  std::vector<FeatureMatrix> f;
  for (const auto& p : feature_paths) f.push_back(load_features(p));
  std::vector<Manifest> m;
  for (const auto& p : label_paths) m.push_back(load_manifest(p));
  const auto data = join(f, m);
  model.check_extractor(data.extractor);
  const auto labels = model.labels();
  const std::set<std::string> known(labels.begin(), labels.end());
  std::vector<double> known_km, novel_km;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto& r = *data.records[i];
    const auto scores = model.class_scores(*data.rows[i]);
    const double km = scores.empty() ? 0.0 : *std::max_element(scores.begin(), scores.end());
    const bool is_known = r.labels.novelty_type == NoveltyType::None &&
                          (known.contains(r.labels.writer_id) ||
                           (r.labels.appearance && known.contains(r.labels.appearance->name())));
    (is_known ? known_km : novel_km).push_back(km);
  }
  const auto cal = calibrate_threshold(known_km, novel_km);
  model.novelty_threshold = cal.threshold;
  model.save(out);
  ordered_json j;
  j["threshold"] = cal.threshold;
  j["fpr"] = cal.fpr;
  j["fnr"] = cal.fnr;
  j["eer"] = cal.eer;
  j["known"] = known_km.size();
  j["novel"] = novel_km.size();
  if (!report_path.empty()) write_text_file(report_path, j.dump(2) + "\n", "cli");
  s.out << "calibrated threshold " << num(cal.threshold) << " (EER " << cal.eer << ")\n";
  return 0;
}

int cmd_gen_tests(Session& s, const std::vector<fs::path>& pool_paths, const fs::path& out, bool specs_only,
                  bool skip_infeasible) {
  std::vector<Manifest> manifests;
  for (const auto& p : pool_paths) manifests.push_back(load_manifest(p));
  const auto pools = StreamPools::from_manifests(manifests);
  if (!specs_only && pool_paths.empty()) throw Error("cli", "gen-tests needs --pools unless --specs-only is given");
  const auto summary =
      write_tests(out, s.config.testgen(), pools, {specs_only, skip_infeasible, s.config.jobs()});
  for (const auto& skip : summary.skipped) s.log("gen-tests: skipped " + skip);
  s.out << "specs: " << summary.specs << ", streams: " << summary.streams << ", skipped: " << summary.skipped.size()
        << "\n";
  return 0;
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw Error("cli", "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::map<std::string, fs::path> image_index(const std::vector<Manifest>& manifests) {
  std::map<std::string, fs::path> index;
  for (const auto& m : manifests) {
    for (const auto& r : m.records) index[r.id] = m.image_path(r);
  }
  return index;
}

int cmd_run(Session& s, const fs::path& model_path, const fs::path& appearance_path,
            const std::vector<fs::path>& manifest_paths, const fs::path& tests_dir, const fs::path& predictions_path,
            const fs::path& out) {
  std::vector<Manifest> manifests;
  for (const auto& p : manifest_paths) manifests.push_back(load_manifest(p));
  const auto index = image_index(manifests);
  std::set<char32_t> alphabet;
  for (const auto& m : manifests) alphabet.insert(m.alphabet.begin(), m.alphabet.end());
  std::optional<EvmModel> appearance;
  if (!appearance_path.empty()) appearance = EvmModel::load(appearance_path);
  const EvmAgent agent(EvmModel::load(model_path), std::move(appearance), [&index](const std::string& id) {
    const auto it = index.find(id);
    if (it == index.end()) throw Error("runner", "sample \"" + id + "\" is not in any manifest");
    return read_image(it->second);
  });
  std::optional<std::map<std::string, std::u32string>> predictions;
  if (!predictions_path.empty()) {
    std::set<std::string> ids;
    for (const auto& [id, _] : index) ids.insert(id);
    predictions = ingest_external_predictions(predictions_path, &ids);
  }
  const TranscriptDuty duty{predictions ? &*predictions : nullptr, &alphabet};
  const auto streams = sorted_files(tests_dir / "streams", ".json");
  const auto rc = s.config.runner();
  std::vector<std::string> errors(streams.size());
  parallel_for(streams.size(), s.config.jobs(), [&](std::size_t i) {
    try {
      const auto stream = read_stream(streams[i]);
      auto cfg = rc;
      cfg.batch_size = stream.batch_size;
      const auto records = run_test(agent, stream.ids, cfg, duty);
      write_text_file(out / (stream.test_id + ".jsonl"), records_jsonl(records), "runner");
    } catch (const Error& e) {
      errors[i] = streams[i].filename().string() + ": " + e.what();
    }
  });
  std::size_t failed = 0;
  for (const auto& e : errors) {
    if (e.empty()) continue;
    ++failed;
    s.err << "error: " << e << "\n";
    s.log("run: " + e);
  }
  s.out << "ran " << streams.size() - failed << " of " << streams.size() << " tests\n";
  return failed == 0 ? 0 : 1;
}

int cmd_report(Session& s, const fs::path& tests_dir, const fs::path& runs_dir,
               const std::vector<fs::path>& manifest_paths, const fs::path& out) {
  std::vector<Manifest> manifests;
  for (const auto& p : manifest_paths) manifests.push_back(load_manifest(p));
  const auto context = ReportContext::from_manifests(manifests);
  const auto runs = sorted_files(runs_dir, ".jsonl");
  std::vector<ScoredTest> tests(runs.size());
  parallel_for(runs.size(), s.config.jobs(), [&](std::size_t i) {
    const auto id = runs[i].stem().string();
    tests[i].oracle = read_oracle(tests_dir / "oracle" / (id + ".json"));
    tests[i].records = read_records(runs[i]);
  });
  auto report = build_report(tests, context, s.config.runner().top_k);

  // Characterization over each test's evaluation window.
  const auto index = image_index(manifests);
  std::vector<CharacterizationSample> samples;
  std::size_t unmeasurable = 0;
  for (const auto& t : tests) {
    for (const auto& rec : evaluation_window(t.records, s.config.evaluation_window())) {
      const auto& truth = context.truth.at(rec.id);
      const bool novel = t.oracle.is_novel[static_cast<std::size_t>(rec.position)];
      CharacterizationSample cs;
      cs.type = novel ? truth.type : NoveltyType::None;
      cs.truth = novel ? truth.subtype : "None";
      cs.signal = {rec.novelty_decision ? 1.0 : 0.0};
      try {
        cs.style = style_vector(read_image(index.at(rec.id)));
      } catch (const Error&) {
        ++unmeasurable;
        continue;
      }
      samples.push_back(std::move(cs));
    }
  }
  if (unmeasurable > 0) {
    report.warnings.push_back(std::to_string(unmeasurable) + " evaluation samples had no measurable style");
  }
  std::optional<CharacterizationTable> table;
  try {
    table = characterize(samples, derive_seed(s.config.seed(), "metrics.characterize"));
  } catch (const Error& e) {
    report.warnings.push_back(std::string("characterization skipped: ") + e.what());
  }
  write_text_file(out / "by_subtype.csv", report.table_csv(report.by_subtype), "cli");
  write_text_file(out / "by_type.csv", report.table_csv(report.by_type), "cli");
  write_text_file(out / "is_novel.csv", report.table_csv(report.is_novel_split), "cli");
  write_text_file(out / "false_positives.csv", report.false_positive_csv(), "cli");
  auto summary = report.summary();
  if (table) {
    write_text_file(out / "characterization_purity.csv", table->to_csv(false), "cli");
    write_text_file(out / "characterization_nmi.csv", table->to_csv(true), "cli");
    ordered_json cj;
    for (const auto& row : table->rows) {
      for (const auto& [code, cell] : table->cells.at(row)) {
        cj[row][code] = {{"purity", cell.purity}, {"nmi", cell.nmi}, {"k_effective", cell.k_effective},
                         {"samples", cell.samples}};
      }
    }
    summary["characterization"] = cj;
  }
  write_text_file(out / "summary.json", summary.dump(2) + "\n", "cli");
  for (const auto& w : report.warnings) s.err << "warning: " << w << "\n";
  s.out << "report: " << tests.size() << " tests, " << report.by_subtype.size() << " subtype rows\n";
  return 0;
}

int cmd_plot(Session& s, const fs::path& summary_path, const fs::path& out) {
  std::vector<FalsePositivePoint> points;
  try {
    const auto j = json::parse(read_text_file(summary_path, "cli"));
    for (const auto& p : j.at("false_positives")) {
      points.push_back({p.at("novelty_proportion").get<double>(), p.at("mean_false_positives").get<double>(),
                        p.at("tests").get<std::size_t>()});
    }
  } catch (const json::exception& e) {
    throw Error("metrics", summary_path.string() + ": " + e.what());
  }
  write_text_file(out, false_positive_svg(points), "cli");
  s.out << "plotted " << points.size() << " points\n";
  return 0;
}

int cmd_selfcheck(Session& s, const fs::path& threshold_file, const std::vector<int>& only, const fs::path& work) {
  AcceptanceOptions o;
  o.seed = s.config.seed();
  o.jobs = s.config.jobs();
  o.only.insert(only.begin(), only.end());
  o.work_dir = work.empty() ? fs::temp_directory_path() / ("scriptdrift-selfcheck-" + std::to_string(o.seed)) : work;
  if (!threshold_file.empty()) {
    try {
      o.threshold_override = json::parse(read_text_file(threshold_file, "cli")).at("threshold").get<double>();
    } catch (const json::exception& e) {
      throw Error("cli", threshold_file.string() + ": " + e.what());
    }
  }
  const auto results = run_acceptance(o, [&](const CriterionResult& r) { s.out << format_result(r) << std::flush; });
  const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.pass; });
  s.out << (failed == 0 ? "selfcheck: all criteria passed\n"
                        : "selfcheck: " + std::to_string(failed) + " criteria failed\n");
  return failed == 0 ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& stdout_, std::ostream& err) {
  CLI::App app{"scriptdrift: open-world handwriting evaluation toolkit", "scriptdrift"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("scriptdrift ") + kToolVersion + " (model format EVM1 v" +
                                        std::to_string(kModelFormatVersion) + ", features FVEC v1)");
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  std::string config_path, log_path;
  bool dump_config = false;
  app.add_option("--seed", seed, "Root seed for every random stream");
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--jobs", jobs, "Worker threads (0 = logical cores)");
  app.add_option("--log", log_path, "Run log file (effective config and messages)");
  app.add_flag("--dump-config", dump_config, "Print the effective config before running");

  std::string manifest, styles, out, recipe, assets, extractor, features, labels, model, appearance_model, tests,
      predictions, runs, summary, threshold_file, report_path, work_dir, target = "writer";
  std::vector<std::string> pools, manifests, feature_list, label_list;
  std::vector<int> only;
  bool skip_errors = false, specs_only = false, skip_infeasible = false;

  auto* measure = app.add_subcommand("measure", "Compute style vectors for a manifest");
  measure->add_option("--manifest", manifest)->required();
  measure->add_option("--out", out, "Style table (CSV)")->required();
  measure->add_flag("--skip-errors", skip_errors, "Skip samples whose style cannot be measured");

  auto* graph = app.add_subcommand("graph", "Bin styles and build the knowledge graph");
  graph->add_option("--styles", styles)->required();
  graph->add_option("--out", out, "Output directory")->required();

  auto* distances = app.add_subcommand("distances", "Writer distance matrix from a style table");
  distances->add_option("--styles", styles)->required();
  distances->add_option("--out", out, "Distance matrix (CSV)")->required();

  auto* inject = app.add_subcommand("inject", "Build a novel sample pool from a base manifest");
  inject->add_option("--manifest", manifest)->required();
  inject->add_option("--recipe", recipe)->required();
  inject->add_option("--assets", assets, "Texture directory with background/ and pen/");
  inject->add_option("--out", out, "Output directory")->required();

  auto* featurize_cmd = app.add_subcommand("featurize", "Extract HOG features");
  featurize_cmd->add_option("--manifest", manifest)->required();
  featurize_cmd->add_option("--extractor", extractor)->check(CLI::IsMember({"mean-hog", "m-mean-hog"}));
  featurize_cmd->add_option("--out", out, "Feature file (.bin or .json)")->required();

  auto* train = app.add_subcommand("train", "Fit an EVM");
  train->add_option("--features", features)->required();
  train->add_option("--labels", labels)->required();
  train->add_option("--target", target)->check(CLI::IsMember({"writer", "appearance"}));
  train->add_option("--out", out)->required();

  auto* calibrate = app.add_subcommand("calibrate", "Set the novelty threshold at the equal error rate");
  calibrate->add_option("--model", model)->required();
  calibrate->add_option("--features", feature_list)->required();
  calibrate->add_option("--labels", label_list)->required();
  calibrate->add_option("--out", out)->required();
  calibrate->add_option("--report", report_path, "Calibration summary (JSON)");

  auto* gen = app.add_subcommand("gen-tests", "Generate novelty test streams");
  gen->add_option("--pools", pools, "Pool manifests");
  gen->add_option("--out", out)->required();
  gen->add_flag("--specs-only", specs_only);
  gen->add_flag("--skip-infeasible", skip_infeasible);

  auto* run = app.add_subcommand("run", "Run an agent over generated tests");
  run->add_option("--agent,--model", model, "Calibrated writer model")->required();
  run->add_option("--appearance-model", appearance_model);
  run->add_option("--manifest", manifests, "Manifests resolving sample ids")->required();
  run->add_option("--tests", tests)->required();
  run->add_option("--predictions", predictions, "External transcripts (JSONL)");
  run->add_option("--out", out)->required();

  auto* report = app.add_subcommand("report", "Score runs against the oracle");
  report->add_option("--tests", tests)->required();
  report->add_option("--runs", runs)->required();
  report->add_option("--manifest", manifests)->required();
  report->add_option("--out", out)->required();

  auto* plot = app.add_subcommand("plot", "False positives vs novelty proportion (SVG)");
  plot->add_option("--summary", summary)->required();
  plot->add_option("--out", out)->required();

  auto* selfcheck = app.add_subcommand("selfcheck", "Run the synthetic acceptance suite");
  selfcheck->add_option("--threshold-file", threshold_file, "JSON {\"threshold\": x} replacing the calibrated threshold");
  selfcheck->add_option("--only", only, "Criterion numbers to run");
  selfcheck->add_option("--work-dir", work_dir);

  std::vector<std::string> argv_store{"scriptdrift"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    stdout_ << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    stdout_ << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    stdout_ << app.version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return 2;
  }

  Session s{Config{}, stdout_, err, {}, log_path};
  try {
    if (!config_path.empty()) s.config.merge_file(config_path);
    s.config.merge_environment(Config::process_environment());
    if (seed) s.config.set_seed(*seed);
    if (jobs) s.config.set_jobs(*jobs);
    if (!extractor.empty()) s.config.merge_json(json{{"features", {{"extractor", extractor}}}}, "--extractor");
    const auto* sub = app.get_subcommands().front();
    s.log("scriptdrift " + std::string(kToolVersion) + " " + sub->get_name());
    s.log("config " + s.config.effective().dump());
    if (dump_config) stdout_ << s.config.effective().dump(2) << "\n";

    int code = 0;
    if (sub == measure) code = cmd_measure(s, manifest, out, skip_errors);
    else if (sub == graph) code = cmd_graph(s, styles, out);
    else if (sub == distances) code = cmd_distances(s, styles, out);
    else if (sub == inject) code = cmd_inject(s, manifest, recipe, assets, out);
    else if (sub == featurize_cmd) code = cmd_featurize(s, manifest, s.config.extractor(), out);
    else if (sub == train) code = cmd_train(s, features, labels, target == "writer" ? Target::Writer : Target::Appearance, out);
    else if (sub == calibrate) {
      std::vector<fs::path> fp(feature_list.begin(), feature_list.end()), lp(label_list.begin(), label_list.end());
      code = cmd_calibrate(s, model, fp, lp, out, report_path);
    } else if (sub == gen) {
      code = cmd_gen_tests(s, std::vector<fs::path>(pools.begin(), pools.end()), out, specs_only, skip_infeasible);
    } else if (sub == run) {
      code = cmd_run(s, model, appearance_model, std::vector<fs::path>(manifests.begin(), manifests.end()), tests,
                     predictions, out);
    } else if (sub == report) {
      code = cmd_report(s, tests, runs, std::vector<fs::path>(manifests.begin(), manifests.end()), out);
    } else if (sub == plot) code = cmd_plot(s, summary, out);
    else if (sub == selfcheck) code = cmd_selfcheck(s, threshold_file, only, work_dir);
    s.log("exit " + std::to_string(code));
    if (!log_path.empty()) write_text_file(log_path, s.log_text, "cli");
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    s.log(std::string("error ") + e.what());
    if (!log_path.empty()) {
      try {
        write_text_file(log_path, s.log_text, "cli");
      } catch (const Error&) {
      }
    }
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace scriptdrift
