#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "olfalign/core_data.hpp"
#include "olfalign/metrics.hpp"
#include "olfalign/physchem.hpp"
#include "olfalign/probes.hpp"
#include "olfalign/rsa.hpp"

namespace olfalign {

// ---------------------------------------------------------------------------
// Provenance digests

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// "sha256:<hex>" of a file's contents.
std::string file_digest(const std::filesystem::path& path);

/// Digest of several inputs: the SHA-256 of their individual digests joined
/// by newlines, in the order given. A single input keeps its own digest.
std::string combine_digests(std::span<const std::string> digests);

/// Digest of an in-memory table (ids, shape, and raw values), for callers
/// that did not read it from a file.
std::string table_digest(const EmbeddingTable& table);

// ---------------------------------------------------------------------------
// Reports

/// Label of the aggregate row over descriptors.
inline constexpr std::string_view kAggregateDescriptor = "mean";

struct ReportRow {
  std::string dataset;
  std::string model;
  std::string layer;
  std::string descriptor;
  std::string metric;
  double mean = 0.0;
  std::optional<double> std;  // absent for single-valued metrics
  std::size_t n = 0;
  std::string input_digest;
};

/// Result table of one analysis. `std` columns are population standard
/// deviations across repetitions; standard errors appear as separate rows
/// whose metric name ends in "_sem".
struct AlignmentReport {
  std::string task;  // classify | regress | rsa | physchem | noise_ceiling
  std::vector<ReportRow> rows;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;

  bool empty() const noexcept { return rows.empty(); }
  /// CSV `task,dataset,model,layer,descriptor,metric,mean,std,n,input_digest`.
  std::string to_csv() const;
  /// Config snapshot with the task and seed.
  nlohmann::json snapshot() const;
  /// Writes report.csv and config.json into `dir`.
  void write(const std::filesystem::path& dir) const;
  void append(const AlignmentReport& other);
};

struct PipelineOptions {
  Preprocessing preprocessing;
  bool stratify = false;  // classification inner folds
  int jobs = 1;
  std::string input_digest;  // defaults to the digest of the in-memory table
};

nlohmann::json to_json(const SplitPlan& plan);
nlohmann::json to_json(const HyperGrid& grid);
nlohmann::json to_json(const Preprocessing& preprocessing);

// ---------------------------------------------------------------------------
// Experiment families

struct ClassificationOutput {
  AlignmentReport report;
  std::vector<RocCurve> curves;  // one per scored repetition, micro-pooled
  std::vector<double> micro_auc;
  ProbeRun run;
};

/// Logistic probes per label under the split protocol; micro ROC-AUC per
/// repetition pooled over the labels that could be fitted in it.
ClassificationOutput run_label_classification(const DatasetBundle& bundle, const SplitPlan& plan,
                                              const HyperGrid& grid = HyperGrid::default_logistic(),
                                              const PipelineOptions& options = {});

struct RegressionOutput {
  AlignmentReport report;
  std::vector<RegressionScores> scores;
  ProbeRun run;
};

/// Lasso probes per rating descriptor; CC and NRMSE per descriptor plus the
/// average across descriptors.
RegressionOutput run_rating_regression(const DatasetBundle& bundle, const SplitPlan& plan,
                                       const HyperGrid& grid = HyperGrid::default_lasso(),
                                       const PipelineOptions& options = {});

struct PhyschemOutput {
  AlignmentReport report;
  std::vector<DecodingResult> results;
};

/// Physicochemical decoding for each table (models or layers), in table order.
PhyschemOutput run_physchem(std::span<const EmbeddingTable> tables, const DescriptorTable& descriptors,
                            const SplitPlan& plan, const HyperGrid& grid = HyperGrid::default_lasso(),
                            const PipelineOptions& options = {}, std::string dataset = "physchem");

struct NamedPairs {
  std::string name;
  SimilarityJudgmentSet pairs;
  std::string input_digest;
};

struct RsaOutput {
  AlignmentReport report;
  std::vector<RsaResult> results;  // dataset-major, tables sorted by (model, layer)
  std::vector<std::string> datasets;
};

RsaOutput run_similarity_rsa(std::span<const EmbeddingTable> tables, std::span<const NamedPairs> datasets,
                             SimilarityMeasure measure = SimilarityMeasure::cosine,
                             std::span<const std::string> table_digests = {});

struct NoiseCeilingOutput {
  AlignmentReport report;
  NoiseCeiling ceiling;
};

NoiseCeilingOutput run_noise_ceiling(const PerSubjectRatings& data, std::string dataset = {},
                                     NoiseCeilingOptions options = {}, std::string input_digest = {});

struct PcaScatter {
  std::vector<std::string> row_keys;
  Eigen::MatrixXd coords;  // n x 2; second column zero if only one direction exists
  Eigen::VectorXd explained_variance;
  std::vector<std::string> broad;
  std::vector<std::string> narrow;
  std::vector<int> broad_group;                   // index into broad, -1 when none applies
  std::vector<std::vector<int>> narrow_groups;    // indices into narrow per row
};

/// First two principal components of the joined label rows, with shading
/// groups from `broad` (first matching label wins) and outline groups from `narrow`.
PcaScatter run_pca_scatter(const EmbeddingTable& table, const BinaryLabelSet& labels,
                           std::span<const std::string> broad, std::span<const std::string> narrow);

std::string pca_scatter_csv(const PcaScatter& scatter);

/// Scores produced outside the toolkit, keyed by row id and descriptor.
struct ExternalPredictions {
  std::vector<std::string> row_ids;
  std::vector<std::string> descriptors;
  Eigen::MatrixXd scores;  // row_ids x descriptors
};

/// CSV `row_id,descriptor,score`. Every (row, descriptor) cell must appear
/// exactly once; missing cells are listed in the error.
ExternalPredictions ingest_external_predictions(const std::filesystem::path& path);

/// Micro ROC-AUC of external scores against the label rows they name.
double score_external_predictions(const ExternalPredictions& predictions, const BinaryLabelSet& labels);

}  // namespace olfalign
