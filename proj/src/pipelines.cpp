#include "olfalign/pipelines.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "olfalign/csv.hpp"
#include "olfalign/error.hpp"
#include "olfalign/log.hpp"
#include "olfalign/preproc.hpp"

namespace olfalign {

namespace {

struct Series {
  std::vector<int> repetitions;
  std::vector<double> values;
};

struct RowBase {
  std::string dataset;
  std::string model;
  std::string layer;
  std::string digest;
};

ReportRow make_row(const RowBase& base, std::string descriptor, std::string metric, double mean,
                   std::optional<double> std, std::size_t n) {
  return ReportRow{base.dataset, base.model, base.layer, std::move(descriptor), std::move(metric), mean, std, n,
                   base.digest};
}

void push_summary(AlignmentReport& report, const RowBase& base, const std::string& descriptor,
                  const std::string& metric, const Summary& s, std::size_t n) {
  report.rows.push_back(make_row(base, descriptor, metric, s.mean, s.std, n));
  report.rows.push_back(make_row(base, descriptor, metric + "_sem", s.sem, std::nullopt, n));
}

// Per-descriptor rows for each metric, then the aggregate over descriptors.
// The aggregate mean is the mean of the per-descriptor means; its spread is
// taken across repetitions of the per-repetition descriptor average.
void append_metric_blocks(AlignmentReport& report, const RowBase& base, const std::vector<std::string>& descriptors,
                          const std::vector<std::string>& metrics,
                          const std::vector<std::vector<Series>>& series) {  // [descriptor][metric]
  for (std::size_t j = 0; j < descriptors.size(); ++j) {
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      const auto& s = series[j][m];
      if (s.values.empty()) continue;
      push_summary(report, base, descriptors[j], metrics[m], summarize(s.values), s.values.size());
    }
  }
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    std::vector<double> means;
    std::map<int, std::pair<double, int>> by_repetition;
    for (std::size_t j = 0; j < descriptors.size(); ++j) {
      const auto& s = series[j][m];
      if (s.values.empty()) continue;
      means.push_back(summarize(s.values).mean);
      for (std::size_t i = 0; i < s.values.size(); ++i) {
        auto& [sum, count] = by_repetition[s.repetitions[i]];
        sum += s.values[i];
        ++count;
      }
    }
    if (means.empty()) continue;
    std::vector<double> rep_means;
    for (const auto& [rep, acc] : by_repetition) rep_means.push_back(acc.first / acc.second);
    auto s = summarize(rep_means);
    s.mean = summarize(means).mean;
    push_summary(report, base, std::string(kAggregateDescriptor), metrics[m], s, means.size());
  }
}

std::string format_optional(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); }

nlohmann::json probe_config_json(const SplitPlan& plan, const HyperGrid& grid, const PipelineOptions& options,
                                 ModelKind kind) {
  nlohmann::json j;
  j["plan"] = to_json(plan);
  j["grid"] = to_json(grid);
  j["preprocessing"] = to_json(options.preprocessing);
  j["model"] = to_string(kind);
  j["stratify"] = options.stratify;
  return j;
}

// Content digest of the joined features when the caller supplied none.
std::string bundle_digest(const DatasetBundle& bundle) {
  std::string text;
  const auto keys = bundle.row_keys();
  for (Index i = 0; i < bundle.features().rows(); ++i) {
    text += keys[static_cast<std::size_t>(i)];
    for (Index j = 0; j < bundle.features().cols(); ++j) {
      text += ',';
      text += csv::format_double(bundle.features()(i, j));
    }
    text += '\n';
  }
  const auto append_targets = [&text](const std::vector<std::string>& names, const Eigen::MatrixXd& values) {
    for (const auto& name : names) text += name + ',';
    text += '\n';
    for (Index i = 0; i < values.rows(); ++i) {
      for (Index j = 0; j < values.cols(); ++j) text += csv::format_double(values(i, j)) + ',';
      text += '\n';
    }
  };
  if (const auto* labels = std::get_if<BinaryLabelSet>(&bundle.perceptual())) {
    append_targets(labels->descriptors(), labels->labels());
  } else if (const auto* ratings = std::get_if<RatingSet>(&bundle.perceptual())) {
    append_targets(ratings->descriptors(), ratings->ratings());
  }
  return "sha256:" + sha256_hex(text);
}

RowBase base_for(const DatasetBundle& bundle, const PipelineOptions& options) {
  return RowBase{bundle.provenance().dataset, bundle.provenance().model_name, bundle.provenance().layer.to_string(),
                 options.input_digest.empty() ? bundle_digest(bundle) : options.input_digest};
}

}  // namespace

// ---------------------------------------------------------------------------

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string file_digest(const std::filesystem::path& path) { return "sha256:" + sha256_hex(csv::read_text(path)); }

std::string combine_digests(std::span<const std::string> digests) {
  if (digests.size() == 1) return digests.front();
  std::string joined;
  for (const auto& d : digests) {
    joined += d;
    joined += '\n';
  }
  return "sha256:" + sha256_hex(joined);
}

std::string table_digest(const EmbeddingTable& table) {
  std::string text = table.model_name() + '\n' + table.layer().to_string() + '\n';
  for (Index i = 0; i < table.rows(); ++i) {
    text += table.ids()[static_cast<std::size_t>(i)].str();
    for (Index j = 0; j < table.dim(); ++j) {
      text += ',';
      text += csv::format_double(table.matrix()(i, j));
    }
    text += '\n';
  }
  return "sha256:" + sha256_hex(text);
}

// ---------------------------------------------------------------------------

std::string AlignmentReport::to_csv() const {
  std::string out = "task,dataset,model,layer,descriptor,metric,mean,std,n,input_digest\n";
  for (const auto& row : rows) {
    out += csv::escape(task) + ',' + csv::escape(row.dataset) + ',' + csv::escape(row.model) + ',' +
           csv::escape(row.layer) + ',' + csv::escape(row.descriptor) + ',' + csv::escape(row.metric) + ',' +
           csv::format_double(row.mean) + ',' + format_optional(row.std) + ',' + std::to_string(row.n) + ',' +
           csv::escape(row.input_digest) + '\n';
  }
  return out;
}

nlohmann::json AlignmentReport::snapshot() const {
  nlohmann::json j = config;
  j["task"] = task;
  j["seed"] = seed;
  return j;
}

void AlignmentReport::write(const std::filesystem::path& dir) const {
  csv::write_text(dir / "report.csv", to_csv());
  csv::write_text(dir / "config.json", snapshot().dump(2) + '\n');
}

void AlignmentReport::append(const AlignmentReport& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

nlohmann::json to_json(const SplitPlan& plan) {
  return {{"repetitions", plan.repetitions},
          {"test_fraction", plan.test_fraction},
          {"inner_folds", plan.inner_folds},
          {"base_seed", plan.base_seed}};
}

nlohmann::json to_json(const HyperGrid& grid) {
  return {{"values", grid.values}, {"relative_to_alpha_max", grid.relative_to_alpha_max}};
}

nlohmann::json to_json(const Preprocessing& p) {
  return {{"pca", p.pca},
          {"pca_k", p.pca_k},
          {"zscore", p.zscore},
          {"pca_fit", p.pca_fit == PcaFit::global ? "global" : "per_split"},
          {"zscore_targets", p.zscore_targets}};
}

// ---------------------------------------------------------------------------

ClassificationOutput run_label_classification(const DatasetBundle& bundle, const SplitPlan& plan,
                                              const HyperGrid& grid, const PipelineOptions& options) {
  if (!std::holds_alternative<BinaryLabelSet>(bundle.perceptual())) {
    throw ArgumentError("classification needs a label dataset");
  }
  const ProbeConfig config{ModelKind::logistic, grid, options.preprocessing, options.stratify, options.jobs};
  ClassificationOutput out;
  out.run = run_probe_protocol(bundle, plan.with_n(bundle.size()), config);
  const auto& run = out.run;
  const auto d = run.descriptors.size();

  std::vector<std::vector<Series>> series(d, std::vector<Series>(1));
  Series micro;
  for (std::size_t r = 0; r < run.repetitions.size(); ++r) {
    const auto& rep = run.repetitions[r];
    std::vector<double> pooled_scores;
    std::vector<double> pooled_labels;
    for (std::size_t j = 0; j < d; ++j) {
      const auto& outcome = rep.descriptors[j];
      if (outcome.skipped) continue;
      const Eigen::VectorXd truth = run.test_targets(r, j);
      pooled_scores.insert(pooled_scores.end(), outcome.predictions.begin(), outcome.predictions.end());
      pooled_labels.insert(pooled_labels.end(), truth.begin(), truth.end());
      try {
        series[j][0].values.push_back(roc_auc(as_span(outcome.predictions), as_span(truth)));
        series[j][0].repetitions.push_back(rep.repetition);
      } catch (const UndefinedMetricError&) {
        // single-class test column; the label still joins the pooled score
      }
    }
    try {
      auto curve = roc_curve(pooled_scores, pooled_labels);
      micro.values.push_back(curve.auc);
      micro.repetitions.push_back(rep.repetition);
      out.curves.push_back(std::move(curve));
    } catch (const UndefinedMetricError& e) {
      log::warn("classification: repetition " + std::to_string(rep.repetition) + " has no micro AUC: " + e.what());
    }
  }
  out.micro_auc = micro.values;

  auto& report = out.report;
  report.task = "classify";
  report.seed = plan.base_seed;
  report.config = probe_config_json(plan, grid, options, ModelKind::logistic);
  const auto base = base_for(bundle, options);
  append_metric_blocks(report, base, run.descriptors, {"roc_auc"}, series);
  if (!micro.values.empty()) push_summary(report, base, "micro", "roc_auc_micro", summarize(micro.values), micro.values.size());
  return out;
}

RegressionOutput run_rating_regression(const DatasetBundle& bundle, const SplitPlan& plan, const HyperGrid& grid,
                                       const PipelineOptions& options) {
  if (!std::holds_alternative<RatingSet>(bundle.perceptual())) {
    throw ArgumentError("regression needs a rating dataset");
  }
  const ProbeConfig config{ModelKind::lasso, grid, options.preprocessing, false, options.jobs};
  RegressionOutput out;
  out.run = run_probe_protocol(bundle, plan.with_n(bundle.size()), config);
  out.scores = score_regression(out.run);

  std::vector<std::vector<Series>> series;
  for (const auto& s : out.scores) series.push_back({{s.repetitions, s.cc}, {s.repetitions, s.nrmse}});
  auto& report = out.report;
  report.task = "regress";
  report.seed = plan.base_seed;
  report.config = probe_config_json(plan, grid, options, ModelKind::lasso);
  append_metric_blocks(report, base_for(bundle, options), out.run.descriptors, {"cc", "nrmse"}, series);
  return out;
}

PhyschemOutput run_physchem(std::span<const EmbeddingTable> tables, const DescriptorTable& descriptors,
                            const SplitPlan& plan, const HyperGrid& grid, const PipelineOptions& options,
                            std::string dataset) {
  if (tables.empty()) throw ArgumentError("physicochemical decoding needs at least one embedding table");
  PhyschemOutput out;
  auto& report = out.report;
  report.task = "physchem";
  report.seed = plan.base_seed;
  PipelineOptions adjusted = options;
  adjusted.preprocessing.zscore_targets = true;
  report.config = probe_config_json(plan, grid, adjusted, ModelKind::lasso);
  report.config["regression_family"] = "lasso with nested CV, shared with rating regression";

  const ProbeConfig config{ModelKind::lasso, grid, adjusted.preprocessing, false, options.jobs};
  for (const auto& table : tables) {
    auto result = run_physchem_decoding(table, descriptors, plan, config);
    RowBase base{dataset, table.model_name(), table.layer().to_string(),
                 options.input_digest.empty() ? table_digest(table) : options.input_digest};
    std::vector<std::string> names;
    std::vector<std::vector<Series>> series;
    for (const auto& d : result.descriptors) {
      names.push_back(d.name);
      series.push_back({{d.scores.repetitions, d.scores.cc}, {d.scores.repetitions, d.scores.nrmse}});
    }
    append_metric_blocks(report, base, names, {"cc", "nrmse"}, series);
    out.results.push_back(std::move(result));
  }
  return out;
}

RsaOutput run_similarity_rsa(std::span<const EmbeddingTable> tables, std::span<const NamedPairs> datasets,
                             SimilarityMeasure measure, std::span<const std::string> table_digests) {
  if (tables.empty() || datasets.empty()) throw ArgumentError("RSA needs at least one table and one pairs dataset");
  if (!table_digests.empty() && table_digests.size() != tables.size()) {
    throw ArgumentError("one digest per embedding table is required");
  }
  std::vector<std::size_t> order(tables.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
    if (tables[a].model_name() != tables[b].model_name()) return tables[a].model_name() < tables[b].model_name();
    return tables[a].layer() < tables[b].layer();
  });

  RsaOutput out;
  auto& report = out.report;
  report.task = "rsa";
  report.config["measure"] = measure == SimilarityMeasure::angle ? "angle" : "cosine";
  report.config["p_value"] = "naive, n-2 degrees of freedom";
  for (const auto& dataset : datasets) {
    for (const auto i : order) {
      const auto& table = tables[i];
      auto result = run_rsa(table, dataset.pairs, measure);
      std::vector<std::string> digests{table_digests.empty() ? table_digest(table) : table_digests[i]};
      if (!dataset.input_digest.empty()) digests.push_back(dataset.input_digest);
      const RowBase base{dataset.name, table.model_name(), table.layer().to_string(), combine_digests(digests)};
      report.rows.push_back(make_row(base, "pairs", "r", result.r, std::nullopt, result.n_pairs));
      report.rows.push_back(make_row(base, "pairs", "p_naive", result.p, std::nullopt, result.n_pairs));
      report.rows.push_back(make_row(base, "pairs", "dropped_pairs", static_cast<double>(result.dropped), std::nullopt,
                                     result.n_pairs + result.dropped));
      out.results.push_back(std::move(result));
      out.datasets.push_back(dataset.name);
    }
  }
  return out;
}

NoiseCeilingOutput run_noise_ceiling(const PerSubjectRatings& data, std::string dataset, NoiseCeilingOptions options,
                                     std::string input_digest) {
  NoiseCeilingOutput out;
  out.ceiling = noise_ceiling(data, options);
  const auto& nc = out.ceiling;
  auto& report = out.report;
  report.task = "noise_ceiling";
  report.config["leave_one_out"] = options.leave_one_out;
  report.config["subjects"] = data.subjects().size();
  const RowBase base{std::move(dataset), "human", "-", std::move(input_digest)};
  for (std::size_t j = 0; j < nc.descriptors.size(); ++j) {
    if (!nc.defined[j]) continue;
    std::vector<double> per_subject;
    for (Index s = 0; s < nc.per_subject.rows(); ++s) {
      const double v = nc.per_subject(s, static_cast<Index>(j));
      if (!std::isnan(v)) per_subject.push_back(v);
    }
    const auto s = summarize(per_subject);
    report.rows.push_back(make_row(base, nc.descriptors[j], "noise_ceiling", nc.per_descriptor[j], s.std,
                                   per_subject.size()));
  }
  if (nc.overall.n > 0) push_summary(report, base, std::string(kAggregateDescriptor), "noise_ceiling", nc.overall, nc.overall.n);
  return out;
}

// ---------------------------------------------------------------------------

PcaScatter run_pca_scatter(const EmbeddingTable& table, const BinaryLabelSet& labels,
                           std::span<const std::string> broad, std::span<const std::string> narrow) {
  auto column_of = [&](const std::string& name) {
    const auto& names = labels.descriptors();
    const auto it = std::ranges::find(names, name);
    if (it == names.end()) throw ArgumentError("label '" + name + "' is not a descriptor of the label set");
    return static_cast<Index>(it - names.begin());
  };
  std::vector<Index> broad_cols;
  std::vector<Index> narrow_cols;
  for (const auto& b : broad) broad_cols.push_back(column_of(b));
  for (const auto& n : narrow) narrow_cols.push_back(column_of(n));

  const auto bundle = join(table, labels);
  const auto& X = bundle.features();
  if (X.rows() < 2) throw ArgumentError("PCA scatter needs at least two resolvable odorants");
  const auto model = fit_pca(X, std::min<Index>(2, X.cols()));

  PcaScatter out;
  out.row_keys = bundle.row_keys();
  out.broad.assign(broad.begin(), broad.end());
  out.narrow.assign(narrow.begin(), narrow.end());
  out.coords = Eigen::MatrixXd::Zero(X.rows(), 2);
  out.explained_variance = Eigen::VectorXd::Zero(2);
  if (model.k() > 0) {
    out.coords.leftCols(model.k()) = apply_pca(model, X);
    out.explained_variance.head(model.k()) = model.explained_variance;
  }
  const auto& joined = std::get<BinaryLabelSet>(bundle.perceptual()).labels();
  for (Index i = 0; i < joined.rows(); ++i) {
    int group = -1;
    for (std::size_t b = 0; b < broad_cols.size() && group < 0; ++b) {
      if (joined(i, broad_cols[b]) == 1.0) group = static_cast<int>(b);
    }
    out.broad_group.push_back(group);
    std::vector<int> outlines;
    for (std::size_t k = 0; k < narrow_cols.size(); ++k) {
      if (joined(i, narrow_cols[k]) == 1.0) outlines.push_back(static_cast<int>(k));
    }
    out.narrow_groups.push_back(std::move(outlines));
  }
  return out;
}

std::string pca_scatter_csv(const PcaScatter& scatter) {
  std::string out = "row_id,pc1,pc2,broad,narrow\n";
  for (std::size_t i = 0; i < scatter.row_keys.size(); ++i) {
    const auto row = static_cast<Index>(i);
    out += csv::escape(scatter.row_keys[i]) + ',' + csv::format_double(scatter.coords(row, 0)) + ',' +
           csv::format_double(scatter.coords(row, 1)) + ',';
    if (scatter.broad_group[i] >= 0) out += csv::escape(scatter.broad[static_cast<std::size_t>(scatter.broad_group[i])]);
    out += ',';
    std::string narrow;
    for (const int k : scatter.narrow_groups[i]) {
      if (!narrow.empty()) narrow += ';';
      narrow += scatter.narrow[static_cast<std::size_t>(k)];
    }
    out += csv::escape(narrow) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

ExternalPredictions ingest_external_predictions(const std::filesystem::path& path) {
  const auto doc = csv::read_file(path);
  if (doc.header != std::vector<std::string>{"row_id", "descriptor", "score"}) {
    throw SchemaError(doc.source + ": header must be 'row_id,descriptor,score'");
  }
  ExternalPredictions out;
  std::unordered_map<std::string, std::size_t> row_index;
  std::unordered_map<std::string, std::size_t> descriptor_index;
  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto where = doc.source + ":" + std::to_string(doc.line_numbers[r]);
    const auto& row = doc.rows[r];
    if (row.size() != 3) throw SchemaError(where + ": expected 3 fields");
    if (row[0].empty() || row[1].empty()) throw SchemaError(where + ": empty row_id or descriptor");
    const auto score = csv::parse_double(row[2]);
    if (!score || !std::isfinite(*score)) throw SchemaError(where + ": score is not a finite number");
    const auto ri = row_index.try_emplace(row[0], out.row_ids.size());
    if (ri.second) out.row_ids.push_back(row[0]);
    const auto di = descriptor_index.try_emplace(row[1], out.descriptors.size());
    if (di.second) out.descriptors.push_back(row[1]);
    if (!cells.emplace(std::pair{ri.first->second, di.first->second}, *score).second) {
      throw SchemaError(where + ": duplicate cell (" + row[0] + ", " + row[1] + ")");
    }
  }
  if (cells.empty()) throw SchemaError(doc.source + ": no predictions");

  out.scores.resize(static_cast<Index>(out.row_ids.size()), static_cast<Index>(out.descriptors.size()));
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < out.row_ids.size(); ++i) {
    for (std::size_t j = 0; j < out.descriptors.size(); ++j) {
      const auto it = cells.find({i, j});
      if (it == cells.end()) {
        missing.push_back("(" + out.row_ids[i] + ", " + out.descriptors[j] + ")");
        continue;
      }
      out.scores(static_cast<Index>(i), static_cast<Index>(j)) = it->second;
    }
  }
  if (!missing.empty()) {
    std::string message = doc.source + ": " + std::to_string(missing.size()) + " missing cell(s):";
    for (std::size_t k = 0; k < missing.size() && k < 20; ++k) message += " " + missing[k];
    if (missing.size() > 20) message += " ...";
    throw SchemaError(message);
  }
  return out;
}

double score_external_predictions(const ExternalPredictions& predictions, const BinaryLabelSet& labels) {
  std::unordered_map<std::string, Index> rows;
  for (Index i = 0; i < labels.rows(); ++i) rows.emplace(labels.odorants()[static_cast<std::size_t>(i)].key(), i);
  std::unordered_map<std::string, Index> cols;
  for (std::size_t j = 0; j < labels.descriptors().size(); ++j) cols.emplace(labels.descriptors()[j], static_cast<Index>(j));

  Eigen::MatrixXd truth(predictions.scores.rows(), predictions.scores.cols());
  for (std::size_t i = 0; i < predictions.row_ids.size(); ++i) {
    const auto r = rows.find(predictions.row_ids[i]);
    if (r == rows.end()) throw LookupError("external prediction row '" + predictions.row_ids[i] + "' is not in the label set");
    for (std::size_t j = 0; j < predictions.descriptors.size(); ++j) {
      const auto c = cols.find(predictions.descriptors[j]);
      if (c == cols.end()) {
        throw LookupError("external prediction descriptor '" + predictions.descriptors[j] + "' is not in the label set");
      }
      truth(static_cast<Index>(i), static_cast<Index>(j)) = labels.labels()(r->second, c->second);
    }
  }
  return roc_auc_micro(predictions.scores, truth);
}

}  // namespace olfalign
