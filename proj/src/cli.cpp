#include "olfalign/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>

#include "olfalign/core_data.hpp"
#include "olfalign/csv.hpp"
#include "olfalign/error.hpp"
#include "olfalign/log.hpp"
#include "olfalign/physchem.hpp"
#include "olfalign/pipelines.hpp"
#include "olfalign/plots.hpp"
#include "olfalign/probes.hpp"
#include "olfalign/rsa.hpp"

namespace olfalign::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
  std::string log_level = "warn";

  int repetitions = 30;
  double test_fraction = 0.2;
  int inner_folds = 5;

  Index pca_k = 20;
  bool no_pca = false;
  bool no_zscore = false;
  std::string pca_fit = "per-split";
  std::vector<double> grid;
  bool grid_relative = false;
  bool stratify = false;

  std::vector<std::string> embeddings;
  std::vector<std::string> manifests;
  std::string labels;
  std::string ratings;
  std::string sidecar;
  std::vector<std::string> pairs;
  std::string descriptors;
  std::string external;
  std::string dataset;
  bool angle = false;
  bool loo = false;
  std::vector<std::string> broad{"floral", "meaty", "ethereal"};
  std::vector<std::string> narrow;
};

struct Input {
  std::string path;
  std::string digest;
};

// Everything a subcommand produced, for run.json.
struct Artifacts {
  std::vector<Input> inputs;
  std::vector<std::string> outputs;
  fs::path out_dir;

  void write(const std::string& name, const std::string& content) {
    csv::write_text(out_dir / name, content);
    outputs.push_back(name);
  }
  void note(const std::vector<fs::path>& paths) {
    for (const auto& p : paths) outputs.push_back(p.filename().string());
  }
  std::string digest_of(const std::string& path) {
    for (const auto& in : inputs) {
      if (in.path == path) return in.digest;
    }
    inputs.push_back({path, file_digest(path)});
    return inputs.back().digest;
  }
  std::string combined(const std::vector<std::string>& paths) {
    std::vector<std::string> digests;
    for (const auto& p : paths) digests.push_back(digest_of(p));
    return combine_digests(digests);
  }
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed, "Base seed for every random choice (required)");
  sub->add_option("--out", o.out, "Output directory (required)");
  sub->add_option("--jobs", o.jobs, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
  sub->add_option("--log-level", o.log_level, "debug, info, warn, error, or off")
      ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}));
}

void add_embeddings(CLI::App* sub, Options& o, bool many) {
  auto* e = sub->add_option("--embeddings", o.embeddings, many ? "Embedding CSV (repeatable)" : "Embedding CSV");
  auto* m = sub->add_option("--manifest", o.manifests,
                            "Manifest JSON per embedding file (default: the embedding path with .json)");
  if (!many) {
    e->expected(1);
    m->expected(1);
  }
}

void add_plan(CLI::App* sub, Options& o) {
  sub->add_option("--repetitions", o.repetitions, "Random train/test splits")->capture_default_str();
  sub->add_option("--test-fraction", o.test_fraction, "Test share of each split")->capture_default_str();
  sub->add_option("--inner-folds", o.inner_folds, "Folds for hyperparameter selection")->capture_default_str();
  sub->add_option("--pca-k", o.pca_k, "PCA components; tables with dim <= k skip PCA")->capture_default_str();
  sub->add_flag("--no-pca", o.no_pca, "Disable PCA");
  sub->add_flag("--no-zscore", o.no_zscore, "Disable feature standardization");
  sub->add_option("--pca-fit", o.pca_fit, "Fit PCA on each training split or once on all rows")
      ->check(CLI::IsMember({"per-split", "global"}))
      ->capture_default_str();
  sub->add_option("--grid", o.grid, "Regularization strengths, comma separated")->delimiter(',');
}

log::Level parse_level(const std::string& s) {
  if (s == "debug") return log::Level::debug;
  if (s == "info") return log::Level::info;
  if (s == "error") return log::Level::error;
  if (s == "off") return log::Level::off;
  return log::Level::warn;
}

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

// Keys of the JSON object mirror long flag names (with '-' or '_'); values
// fill only options that were not given on the command line.
void apply_config(CLI::App* sub, const fs::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(csv::read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("config " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw SchemaError("config " + path.string() + ": expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    std::string flag = key;
    std::ranges::replace(flag, '_', '-');
    auto* opt = sub->get_option_no_throw("--" + flag);
    if (!opt) {
      log::warn("config key '" + key + "' does not match a flag of '" + sub->get_name() + "'; ignored");
      continue;
    }
    if (opt->count() > 0) continue;
    opt->clear();
    if (value.is_array()) {
      for (const auto& item : value) opt->add_result(scalar_text(item));
    } else {
      opt->add_result(scalar_text(value));
    }
    opt->run_callback();
  }
}

std::string error_kind(const Error& e) {
  if (dynamic_cast<const SchemaError*>(&e)) return "schema";
  if (dynamic_cast<const IngestionError*>(&e)) return "ingestion";
  if (dynamic_cast<const LookupError*>(&e)) return "lookup";
  if (dynamic_cast<const JoinError*>(&e)) return "join";
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
  if (dynamic_cast<const ArgumentError*>(&e)) return "argument";
  if (dynamic_cast<const DegenerateTargetError*>(&e)) return "degenerate-target";
  if (dynamic_cast<const UndefinedMetricError*>(&e)) return "undefined-metric";
  if (dynamic_cast<const SelectionError*>(&e)) return "selection";
  return "runtime";
}

void require(bool present, const std::string& flag) {
  if (!present) throw UsageError("missing required option " + flag);
}

std::vector<std::string> manifests_for(const Options& o) {
  if (o.manifests.empty()) {
    std::vector<std::string> out;
    for (const auto& e : o.embeddings) out.push_back(default_sidecar(e).string());
    return out;
  }
  if (o.manifests.size() != o.embeddings.size()) {
    throw UsageError("--manifest must be given once per --embeddings");
  }
  return o.manifests;
}

void check_exists(const std::string& path) {
  if (!path.empty() && !fs::exists(path)) throw IngestionError("input file not found: " + path);
}

SplitPlan make_plan(const Options& o) {
  SplitPlan plan;
  plan.repetitions = o.repetitions;
  plan.test_fraction = o.test_fraction;
  plan.inner_folds = o.inner_folds;
  plan.base_seed = *o.seed;
  return plan;
}

PipelineOptions make_pipeline_options(const Options& o) {
  PipelineOptions p;
  p.preprocessing.pca = !o.no_pca;
  p.preprocessing.pca_k = o.pca_k;
  p.preprocessing.zscore = !o.no_zscore;
  p.preprocessing.pca_fit = o.pca_fit == "global" ? PcaFit::global : PcaFit::per_split;
  p.stratify = o.stratify;
  p.jobs = o.jobs;
  return p;
}

HyperGrid make_grid(const Options& o, ModelKind kind) {
  if (o.grid.empty()) return HyperGrid::default_for(kind);
  HyperGrid grid{o.grid, o.grid_relative};
  grid.validate();
  return grid;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

std::vector<EmbeddingTable> load_tables(const Options& o, Artifacts& art, std::vector<std::string>* digests) {
  const auto manifests = manifests_for(o);
  std::vector<EmbeddingTable> tables;
  for (std::size_t i = 0; i < o.embeddings.size(); ++i) {
    tables.push_back(load_embedding_table(o.embeddings[i], manifests[i]));
    const auto d = art.combined({o.embeddings[i], manifests[i]});
    if (digests) digests->push_back(d);
  }
  return tables;
}

void finish_report(AlignmentReport& report, const Options& o, Artifacts& art, const nlohmann::json& inputs,
                   PlotExtras extras = {}) {
  report.seed = *o.seed;
  report.config["inputs"] = inputs;
  report.write(art.out_dir);
  art.outputs.push_back("report.csv");
  art.outputs.push_back("config.json");
  art.note(render_plots(report, extras, art.out_dir));
}

// ---------------------------------------------------------------------------

void run_classify(const Options& o, Artifacts& art) {
  const auto manifests = manifests_for(o);
  const auto table = load_embedding_table(o.embeddings.at(0), manifests.at(0));
  const auto labels = load_labels(o.labels);
  const auto dataset = o.dataset.empty() ? stem_of(o.labels) : o.dataset;
  const auto bundle = join(table, labels, dataset);
  auto options = make_pipeline_options(o);
  options.input_digest = art.combined({o.embeddings[0], manifests[0], o.labels});
  auto out = run_label_classification(bundle, make_plan(o), make_grid(o, ModelKind::logistic), options);
  art.write("predictions.csv", prediction_dump_csv(out.run));

  if (!o.external.empty()) {
    const auto preds = ingest_external_predictions(o.external);
    const double auc = score_external_predictions(preds, labels);
    out.report.rows.push_back(ReportRow{dataset, "external:" + stem_of(o.external), "-", "micro", "roc_auc_micro", auc,
                                        std::nullopt, 1, art.combined({o.external, o.labels})});
  }
  finish_report(out.report, o, art,
                {{"embeddings", o.embeddings[0]}, {"manifest", manifests[0]}, {"labels", o.labels},
                 {"external_predictions", o.external}},
                PlotExtras{out.curves, nullptr, nullptr});
}

void run_regress(const Options& o, Artifacts& art) {
  const auto manifests = manifests_for(o);
  const auto table = load_embedding_table(o.embeddings.at(0), manifests.at(0));
  const auto sidecar = o.sidecar.empty() ? std::optional<fs::path>{} : std::optional<fs::path>{o.sidecar};
  const auto ratings = load_ratings(o.ratings, sidecar);
  const auto bundle = join(table, ratings, o.dataset.empty() ? stem_of(o.ratings) : o.dataset);
  auto options = make_pipeline_options(o);
  std::vector<std::string> paths{o.embeddings[0], manifests[0], o.ratings,
                                 sidecar ? sidecar->string() : default_sidecar(o.ratings).string()};
  options.input_digest = art.combined(paths);
  auto out = run_rating_regression(bundle, make_plan(o), make_grid(o, ModelKind::lasso), options);
  art.write("predictions.csv", prediction_dump_csv(out.run));
  finish_report(out.report, o, art, {{"embeddings", o.embeddings[0]}, {"manifest", manifests[0]}, {"ratings", o.ratings}});
}

std::vector<NamedPairs> load_pair_sets(const Options& o, Artifacts& art) {
  std::vector<NamedPairs> sets;
  std::set<std::string> names;
  for (const auto& path : o.pairs) {
    auto name = stem_of(path);
    if (!names.insert(name).second) throw ArgumentError("two pairs datasets share the name '" + name + "'");
    sets.push_back(NamedPairs{name, load_pairs(path), art.combined({path, default_sidecar(path).string()})});
  }
  return sets;
}

void run_rsa_command(const Options& o, Artifacts& art) {
  std::vector<std::string> digests;
  const auto tables = load_tables(o, art, &digests);
  const auto sets = load_pair_sets(o, art);
  auto out = run_similarity_rsa(tables, sets, o.angle ? SimilarityMeasure::angle : SimilarityMeasure::cosine, digests);
  finish_report(out.report, o, art, {{"embeddings", o.embeddings}, {"pairs", o.pairs}});
}

void run_physchem_command(const Options& o, Artifacts& art) {
  std::vector<std::string> digests;
  const auto tables = load_tables(o, art, &digests);
  const auto descriptors = load_descriptor_table(o.descriptors);
  const auto descriptor_digest = art.digest_of(o.descriptors);
  AlignmentReport report;
  std::string dumps;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    auto options = make_pipeline_options(o);
    options.input_digest = combine_digests(std::vector<std::string>{digests[i], descriptor_digest});
    auto out = run_physchem(std::span(&tables[i], 1), descriptors, make_plan(o), make_grid(o, ModelKind::lasso),
                            options, o.dataset.empty() ? stem_of(o.descriptors) : o.dataset);
    if (i == 0) {
      report = out.report;
    } else {
      report.append(out.report);
    }
    auto dump = prediction_dump_csv(out.results.front().run);
    if (i > 0) dump.erase(0, dump.find('\n') + 1);
    dumps += dump;
  }
  art.write("predictions.csv", dumps);
  finish_report(report, o, art, {{"embeddings", o.embeddings}, {"descriptors", o.descriptors}});
}

void run_noise_ceiling_command(const Options& o, Artifacts& art) {
  const auto sidecar = o.sidecar.empty() ? std::optional<fs::path>{} : std::optional<fs::path>{o.sidecar};
  const auto data = load_per_subject(o.ratings, sidecar);
  auto out = run_noise_ceiling(data, o.dataset.empty() ? stem_of(o.ratings) : o.dataset,
                               NoiseCeilingOptions{o.loo}, art.digest_of(o.ratings));
  finish_report(out.report, o, art, {{"ratings", o.ratings}});
}

void run_layers(const Options& o, Artifacts& art) {
  if (o.pairs.empty() == o.descriptors.empty()) {
    throw UsageError("layers needs exactly one of --pairs or --descriptors");
  }
  std::vector<std::string> digests;
  const auto tables = load_tables(o, art, &digests);
  const auto ordered = ordered_layers(tables);  // validates model, ids, and distinct layers
  log::info("layer sweep over " + std::to_string(ordered.size()) + " layers");
  if (!o.pairs.empty()) {
    run_rsa_command(o, art);
  } else {
    run_physchem_command(o, art);
  }
}

void run_rsm(const Options& o, Artifacts& art) {
  const auto manifests = manifests_for(o);
  const auto table = load_embedding_table(o.embeddings.at(0), manifests.at(0));
  art.combined({o.embeddings[0], manifests[0]});
  std::optional<SimilarityJudgmentSet> human;
  std::vector<Odorant> odorants;
  if (!o.pairs.empty()) {
    if (o.pairs.size() > 1) throw UsageError("rsm takes at most one --pairs file");
    human = load_pairs(o.pairs[0]);
    art.combined({o.pairs[0], default_sidecar(o.pairs[0]).string()});
    std::size_t skipped = 0;
    for (auto& od : human->odorants()) {
      if (resolvable(table, od)) {
        odorants.push_back(std::move(od));
      } else {
        ++skipped;
      }
    }
    if (skipped) log::warn("rsm: " + std::to_string(skipped) + " odorant(s) not in the embedding table were left out");
  } else {
    for (const auto& id : table.ids()) odorants.push_back(Odorant({id}));
  }
  if (odorants.empty()) throw JoinError("rsm: no odorant resolves in the embedding table");
  const auto set = build_rsm(table, odorants, human ? &*human : nullptr);
  write_rsm(set.model, art.out_dir / "rsm_model.csv", art.out_dir / "rsm_model_mask.csv");
  art.outputs.insert(art.outputs.end(), {"rsm_model.csv", "rsm_model_mask.csv"});
  art.write("rsm_model.svg", plots::heatmap_svg(set.model, "Model RSM (cosine)"));
  if (set.human) {
    write_rsm(*set.human, art.out_dir / "rsm_human.csv", art.out_dir / "rsm_human_mask.csv");
    art.outputs.insert(art.outputs.end(), {"rsm_human.csv", "rsm_human_mask.csv"});
    art.write("rsm_human.svg", plots::heatmap_svg(*set.human, "Human RSM"));
  }
  nlohmann::json config{{"task", "rsm"}, {"seed", *o.seed}, {"odorants", odorants.size()},
                        {"inputs", {{"embeddings", o.embeddings[0]}, {"pairs", o.pairs}}}};
  art.write("config.json", config.dump(2) + '\n');
}

void run_pca_scatter_command(const Options& o, Artifacts& art) {
  const auto manifests = manifests_for(o);
  const auto table = load_embedding_table(o.embeddings.at(0), manifests.at(0));
  const auto labels = load_labels(o.labels);
  art.combined({o.embeddings[0], manifests[0], o.labels});
  const auto scatter = run_pca_scatter(table, labels, o.broad, o.narrow);
  art.write("pca_scatter.csv", pca_scatter_csv(scatter));
  art.write("pca_scatter.svg", plots::scatter_svg(scatter, "First two principal components"));
  nlohmann::json config{{"task", "pca_scatter"},
                        {"seed", *o.seed},
                        {"broad", o.broad},
                        {"narrow", o.narrow},
                        {"explained_variance", {scatter.explained_variance(0), scatter.explained_variance(1)}},
                        {"inputs", {{"embeddings", o.embeddings[0]}, {"labels", o.labels}}}};
  art.write("config.json", config.dump(2) + '\n');
}

void write_manifest(const std::string& subcommand, const Options& o, Artifacts& art) {
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& in : art.inputs) inputs.push_back({{"path", in.path}, {"digest", in.digest}});
  auto outputs = art.outputs;
  std::ranges::sort(outputs);
  outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());
  nlohmann::json manifest{{"tool", "olfalign"}, {"version", kVersion},  {"subcommand", subcommand},
                          {"seed", *o.seed},    {"inputs", inputs},     {"outputs", outputs}};
  csv::write_text(art.out_dir / "run.json", manifest.dump(2) + '\n');
}

}  // namespace

int execute(const std::vector<std::string>& args) {
  CLI::App app{"Representational alignment between molecular embeddings and human olfactory perception", "olfalign"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto* classify = app.add_subcommand("classify", "Logistic probes on binary expert labels (micro ROC-AUC)");
  add_common(classify, o);
  add_embeddings(classify, o, false);
  add_plan(classify, o);
  classify->add_option("--labels", o.labels, "Label matrix CSV");
  classify->add_option("--dataset", o.dataset, "Dataset name in the report (default: file stem)");
  classify->add_flag("--stratify", o.stratify, "Stratify inner folds by class");
  classify->add_option("--external-predictions", o.external, "CSV row_id,descriptor,score to score alongside");

  auto* regress = app.add_subcommand("regress", "Lasso probes on continuous ratings (CC, NRMSE)");
  add_common(regress, o);
  add_embeddings(regress, o, false);
  add_plan(regress, o);
  regress->add_flag("--grid-relative", o.grid_relative, "Treat --grid as multiples of alpha_max");
  regress->add_option("--ratings", o.ratings, "Rating matrix CSV");
  regress->add_option("--sidecar", o.sidecar, "Rating range JSON (default: ratings path with .json)");
  regress->add_option("--dataset", o.dataset, "Dataset name in the report (default: file stem)");

  auto* rsa = app.add_subcommand("rsa", "Correlate model and human pairwise similarities");
  add_common(rsa, o);
  add_embeddings(rsa, o, true);
  rsa->add_option("--pairs", o.pairs, "Pairwise similarity CSV (repeatable)");
  rsa->add_flag("--angle", o.angle, "Use 1 - angle/pi instead of cosine");

  auto* physchem = app.add_subcommand("physchem", "Decode physicochemical descriptors from embeddings");
  add_common(physchem, o);
  add_embeddings(physchem, o, true);
  add_plan(physchem, o);
  physchem->add_flag("--grid-relative", o.grid_relative, "Treat --grid as multiples of alpha_max");
  physchem->add_option("--descriptors", o.descriptors, "Descriptor CSV id,<15 names>");
  physchem->add_option("--dataset", o.dataset, "Dataset name in the report (default: file stem)");

  auto* nc = app.add_subcommand("noise-ceiling", "Inter-subject noise ceiling per descriptor");
  add_common(nc, o);
  nc->add_option("--ratings", o.ratings, "Per-subject rating CSV");
  nc->add_option("--sidecar", o.sidecar, "Rating range JSON (optional)");
  nc->add_option("--dataset", o.dataset, "Dataset name in the report (default: file stem)");
  nc->add_flag("--loo", o.loo, "Correlate each subject with the mean of the others");

  auto* layers = app.add_subcommand("layers", "RSA or physicochemical decoding across layers of one model");
  add_common(layers, o);
  add_embeddings(layers, o, true);
  add_plan(layers, o);
  layers->add_flag("--grid-relative", o.grid_relative, "Treat --grid as multiples of alpha_max");
  layers->add_option("--pairs", o.pairs, "Pairwise similarity CSV (repeatable)");
  layers->add_option("--descriptors", o.descriptors, "Descriptor CSV id,<15 names>");
  layers->add_option("--dataset", o.dataset, "Dataset name in the report (default: file stem)");
  layers->add_flag("--angle", o.angle, "Use 1 - angle/pi instead of cosine");

  auto* rsm = app.add_subcommand("rsm", "Model and human similarity matrices with heatmaps");
  add_common(rsm, o);
  add_embeddings(rsm, o, false);
  rsm->add_option("--pairs", o.pairs, "Pairwise similarity CSV for the human matrix and odorant list");

  auto* scatter = app.add_subcommand("pca-scatter", "First two principal components with label groups");
  add_common(scatter, o);
  add_embeddings(scatter, o, false);
  scatter->add_option("--labels", o.labels, "Label matrix CSV");
  scatter->add_option("--broad", o.broad, "Shaded label groups")->delimiter(',')->capture_default_str();
  scatter->add_option("--narrow", o.narrow, "Outlined label groups")->delimiter(',');

  std::vector<std::string> argv_rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv_rest.begin(), argv_rest.end());
  try {
    app.parse(argv_rest);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, std::cout, std::cerr);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, std::cout, std::cerr);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, std::cout, std::cerr);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cout, std::cerr);
    return kExitUsage;
  }

  auto* sub = app.get_subcommands().front();
  const auto name = sub->get_name();
  try {
    if (const char* config = std::getenv("OLFALIGN_CONFIG"); config && *config) apply_config(sub, config);
    log::set_level(parse_level(o.log_level));

    require(o.seed.has_value(), "--seed");
    require(!o.out.empty(), "--out");
    if (name != "noise-ceiling") require(!o.embeddings.empty(), "--embeddings");
    if (name == "classify" || name == "pca-scatter") require(!o.labels.empty(), "--labels");
    if (name == "regress" || name == "noise-ceiling") require(!o.ratings.empty(), "--ratings");
    if (name == "rsa") require(!o.pairs.empty(), "--pairs");
    if (name == "physchem") require(!o.descriptors.empty(), "--descriptors");

    if (name != "noise-ceiling") {
      for (const auto& p : o.embeddings) check_exists(p);
      for (const auto& m : manifests_for(o)) check_exists(m);
    }
    for (const auto& p : {o.labels, o.ratings, o.sidecar, o.descriptors, o.external}) check_exists(p);
    for (const auto& p : o.pairs) check_exists(p);

    Artifacts art;
    art.out_dir = o.out;
    fs::create_directories(art.out_dir);
    if (name == "classify") run_classify(o, art);
    else if (name == "regress") run_regress(o, art);
    else if (name == "rsa") run_rsa_command(o, art);
    else if (name == "physchem") run_physchem_command(o, art);
    else if (name == "noise-ceiling") run_noise_ceiling_command(o, art);
    else if (name == "layers") run_layers(o, art);
    else if (name == "rsm") run_rsm(o, art);
    else run_pca_scatter_command(o, art);
    write_manifest(name, o, art);
    return kExitOk;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n" << sub->help();
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error[" << error_kind(e) << "]: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error[runtime]: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace olfalign::cli
