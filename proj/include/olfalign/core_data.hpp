#pragma once

#include <Eigen/Dense>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace olfalign {

using Index = Eigen::Index;

/// Opaque molecule token (CID, CAS number, canonical SMILES, ...).
/// Never empty and never contains ';', which separates mixture components.
class MoleculeId {
 public:
  explicit MoleculeId(std::string token);

  const std::string& str() const noexcept { return token_; }
  auto operator<=>(const MoleculeId&) const = default;

 private:
  std::string token_;
};

/// A smell stimulus: one molecule or a mixture of molecules, in file order.
class Odorant {
 public:
  explicit Odorant(std::vector<MoleculeId> components);

  std::span<const MoleculeId> components() const noexcept { return components_; }
  std::size_t size() const noexcept { return components_.size(); }
  bool is_mixture() const noexcept { return components_.size() > 1; }

  /// Components joined with ';'.
  std::string key() const;

  bool operator==(const Odorant&) const = default;

 private:
  std::vector<MoleculeId> components_;
};

/// Splits a ';'-joined key into components, trimming whitespace around each.
Odorant parse_odorant_key(std::string_view key);

/// Hidden-layer index, or the "final" sentinel. Orders numerically with
/// "final" after every index.
class Layer {
 public:
  constexpr Layer() = default;
  static Layer at(int index);
  static constexpr Layer final_layer() { return Layer(); }

  bool is_final() const noexcept { return !index_.has_value(); }
  std::optional<int> index() const noexcept { return index_; }
  std::string to_string() const;
  static Layer parse(std::string_view text);

  bool operator==(const Layer&) const = default;
  std::strong_ordering operator<=>(const Layer& other) const;

 private:
  std::optional<int> index_;
};

struct EmbeddingManifest {
  std::string model_name;
  Layer layer;
  Index dim = 0;
  std::string notes;
};

EmbeddingManifest load_manifest(const std::filesystem::path& path);

/// Per-molecule representations from one model at one layer. Immutable;
/// copies share the underlying storage.
class EmbeddingTable {
 public:
  EmbeddingTable(std::vector<MoleculeId> ids, Eigen::MatrixXd matrix, std::string model_name, Layer layer);

  Index rows() const noexcept { return data_->matrix.rows(); }
  Index dim() const noexcept { return data_->matrix.cols(); }
  const std::vector<MoleculeId>& ids() const noexcept { return data_->ids; }
  const Eigen::MatrixXd& matrix() const noexcept { return data_->matrix; }
  const std::string& model_name() const noexcept { return data_->model_name; }
  const Layer& layer() const noexcept { return data_->layer; }

  std::optional<Index> find(const MoleculeId& id) const;
  bool contains(const MoleculeId& id) const { return find(id).has_value(); }

  /// Same ids and names with every value multiplied by `factor`.
  EmbeddingTable scaled(double factor) const;

 private:
  struct Data {
    std::vector<MoleculeId> ids;
    Eigen::MatrixXd matrix;
    std::string model_name;
    Layer layer;
    std::unordered_map<std::string, Index> index;
  };
  std::shared_ptr<const Data> data_;
};

EmbeddingTable load_embedding_table(const std::filesystem::path& csv_path, const std::filesystem::path& manifest_path);
void write_embedding_table(const EmbeddingTable& table, const std::filesystem::path& csv_path,
                           const std::filesystem::path& manifest_path);

struct RatingRange {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

/// Expert multi-label annotations, {0,1}^{n x d}.
class BinaryLabelSet {
 public:
  BinaryLabelSet(std::vector<Odorant> odorants, std::vector<std::string> descriptors, Eigen::MatrixXd labels);

  const std::vector<Odorant>& odorants() const noexcept { return odorants_; }
  const std::vector<std::string>& descriptors() const noexcept { return descriptors_; }
  const Eigen::MatrixXd& labels() const noexcept { return labels_; }
  Index rows() const noexcept { return labels_.rows(); }

  BinaryLabelSet subset(std::span<const Index> rows) const;

 private:
  std::vector<Odorant> odorants_;
  std::vector<std::string> descriptors_;
  Eigen::MatrixXd labels_;
};

/// Mean ratings per odorant and descriptor within declared bounds [a, b].
class RatingSet {
 public:
  RatingSet(std::vector<Odorant> odorants, std::vector<std::string> descriptors, Eigen::MatrixXd ratings,
            RatingRange range);

  const std::vector<Odorant>& odorants() const noexcept { return odorants_; }
  const std::vector<std::string>& descriptors() const noexcept { return descriptors_; }
  const Eigen::MatrixXd& ratings() const noexcept { return ratings_; }
  const RatingRange& range() const noexcept { return range_; }
  Index rows() const noexcept { return ratings_.rows(); }

  RatingSet subset(std::span<const Index> rows) const;

 private:
  std::vector<Odorant> odorants_;
  std::vector<std::string> descriptors_;
  Eigen::MatrixXd ratings_;
  RatingRange range_;
};

/// Individual ratings, subjects x odorants x descriptors. Missing entries are NaN.
class PerSubjectRatings {
 public:
  PerSubjectRatings(std::vector<std::string> subjects, std::vector<Odorant> odorants,
                    std::vector<std::string> descriptors, std::vector<Eigen::MatrixXd> ratings_by_subject,
                    std::optional<RatingRange> range = std::nullopt);

  const std::vector<std::string>& subjects() const noexcept { return subjects_; }
  const std::vector<Odorant>& odorants() const noexcept { return odorants_; }
  const std::vector<std::string>& descriptors() const noexcept { return descriptors_; }
  /// odorants x descriptors matrix for one subject.
  const Eigen::MatrixXd& subject(std::size_t s) const { return ratings_.at(s); }
  const std::optional<RatingRange>& range() const noexcept { return range_; }

 private:
  std::vector<std::string> subjects_;
  std::vector<Odorant> odorants_;
  std::vector<std::string> descriptors_;
  std::vector<Eigen::MatrixXd> ratings_;
  std::optional<RatingRange> range_;
};

enum class Polarity { similarity, distance };

/// Mean human similarity judgment per unordered odorant pair.
class SimilarityJudgmentSet {
 public:
  SimilarityJudgmentSet(std::vector<std::pair<Odorant, Odorant>> pairs, std::vector<double> scores,
                        RatingRange range, Polarity polarity);

  const std::vector<std::pair<Odorant, Odorant>>& pairs() const noexcept { return pairs_; }
  const std::vector<double>& scores() const noexcept { return scores_; }
  const RatingRange& range() const noexcept { return range_; }
  Polarity polarity() const noexcept { return polarity_; }
  std::size_t size() const noexcept { return pairs_.size(); }

  /// Scores oriented so that larger always means more similar
  /// (distance-oriented data is negated).
  std::vector<double> similarity_oriented_scores() const;

  SimilarityJudgmentSet subset(std::span<const std::size_t> indices) const;

  /// Distinct odorants in order of first appearance.
  std::vector<Odorant> odorants() const;

 private:
  std::vector<std::pair<Odorant, Odorant>> pairs_;
  std::vector<double> scores_;
  RatingRange range_;
  Polarity polarity_;
};

using PerceptualData = std::variant<BinaryLabelSet, RatingSet, PerSubjectRatings, SimilarityJudgmentSet>;

enum class PerceptualKind { labels, ratings, per_subject, pairs };

/// `<path stem>.json` next to the data file.
std::filesystem::path default_sidecar(const std::filesystem::path& path);

BinaryLabelSet load_labels(const std::filesystem::path& path);
RatingSet load_ratings(const std::filesystem::path& path, const std::optional<std::filesystem::path>& sidecar = {});
PerSubjectRatings load_per_subject(const std::filesystem::path& path,
                                   const std::optional<std::filesystem::path>& sidecar = {});
SimilarityJudgmentSet load_pairs(const std::filesystem::path& path,
                                 const std::optional<std::filesystem::path>& sidecar = {});

PerceptualData load_perceptual(const std::filesystem::path& path, PerceptualKind kind,
                               const std::optional<std::filesystem::path>& sidecar = {});

/// Unweighted mean of the component rows. Components are accumulated in
/// table-row order with a running mean, which makes the result exactly
/// permutation invariant and exact for repeated components.
Eigen::VectorXd mixture_embedding(const EmbeddingTable& table, const Odorant& odorant);

/// True if every component of the odorant is in the table.
bool resolvable(const EmbeddingTable& table, const Odorant& odorant);

struct Provenance {
  std::string model_name;
  Layer layer;
  std::string dataset;
};

/// Embedding rows aligned with perceptual rows.
///
/// For labels and ratings, `features` has one row per retained perceptual
/// row, in perceptual-file order. For pairs, `features` is empty and the
/// per-pair mixture embeddings are produced on demand by `pair_embeddings`.
class DatasetBundle {
 public:
  DatasetBundle(Eigen::MatrixXd features, PerceptualData perceptual, std::vector<Index> source_rows,
                std::size_t dropped, Provenance provenance, std::optional<EmbeddingTable> table);

  const Eigen::MatrixXd& features() const noexcept { return features_; }
  const PerceptualData& perceptual() const noexcept { return perceptual_; }
  /// Index of each retained row (or pair) in the original perceptual data.
  const std::vector<Index>& source_rows() const noexcept { return source_rows_; }
  std::size_t dropped() const noexcept { return dropped_; }
  const Provenance& provenance() const noexcept { return provenance_; }

  /// Number of aligned rows (labels/ratings) or pairs.
  Index size() const noexcept { return static_cast<Index>(source_rows_.size()); }

  /// Odorant keys of the retained rows (labels/ratings only).
  std::vector<std::string> row_keys() const;

  std::pair<Eigen::VectorXd, Eigen::VectorXd> pair_embeddings(std::size_t pair) const;

 private:
  Eigen::MatrixXd features_;
  PerceptualData perceptual_;
  std::vector<Index> source_rows_;
  std::size_t dropped_;
  Provenance provenance_;
  std::optional<EmbeddingTable> table_;
};

/// Intersects perceptual rows with the table. Rows whose odorants cannot be
/// resolved are dropped and counted; an empty intersection throws JoinError.
DatasetBundle join(const EmbeddingTable& table, const PerceptualData& perceptual, std::string dataset = {});

}  // namespace olfalign
