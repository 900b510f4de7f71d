#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "olfalign/core_data.hpp"

namespace olfalign {

enum class SimilarityMeasure {
  cosine,  // cos(theta)
  angle,   // 1 - theta / pi
};

/// Model-side similarities are rounded to this absolute resolution so that
/// rescaling an embedding table cannot flip low-order bits downstream.
inline constexpr double kSimilarityResolution = 1e-10;

/// Model-side similarity of each human-rated pair, in pair order. Pairs with
/// unresolvable components are dropped; pairs whose mixture embedding has
/// zero norm are reported in `failures` and also left out.
struct PairSimilarities {
  std::vector<double> values;
  std::vector<std::size_t> pair_indices;  // index into the judgment set per value
  std::size_t dropped_unresolved = 0;
  std::vector<std::pair<std::size_t, std::string>> failures;
};

PairSimilarities pairwise_model_similarities(const EmbeddingTable& table, const SimilarityJudgmentSet& pairs,
                                             SimilarityMeasure measure = SimilarityMeasure::cosine);

struct RsaResult {
  double r = 0.0;
  double p = 1.0;  // naive n-2 degrees of freedom
  std::size_t n_pairs = 0;
  std::size_t dropped = 0;
  std::string model_name;
  Layer layer;
};

/// Pearson correlation between model similarities and similarity-oriented
/// human scores. `model_sims` must be aligned with `human.pairs()`.
RsaResult rsa_correlation(std::span<const double> model_sims, const SimilarityJudgmentSet& human);

/// Subsets `human` to the scored pairs, then correlates.
RsaResult rsa_correlation(const PairSimilarities& sims, const SimilarityJudgmentSet& human);

/// pairwise_model_similarities followed by rsa_correlation, tagged with the
/// table's model and layer.
RsaResult run_rsa(const EmbeddingTable& table, const SimilarityJudgmentSet& human,
                  SimilarityMeasure measure = SimilarityMeasure::cosine);

/// One result per layer table, ordered by layer. Tables must share ids and
/// model name and have distinct layers.
std::vector<RsaResult> layer_sweep(std::span<const EmbeddingTable> tables, const SimilarityJudgmentSet& human,
                                   SimilarityMeasure measure = SimilarityMeasure::cosine);

/// Sorts per-layer tables by layer after checking they describe the same
/// molecules from the same model. Shared with the physicochemical sweep.
std::vector<const EmbeddingTable*> ordered_layers(std::span<const EmbeddingTable> tables);

/// Representational similarity matrix over a list of odorants.
/// `mask(i, j)` is true where a value is defined.
struct Rsm {
  std::vector<std::string> odorants;
  Eigen::MatrixXd values;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask;
};

struct RsmSet {
  Rsm model;
  std::optional<Rsm> human;
};

/// Model RSM: all-pairs cosine similarity, exact unit diagonal, symmetric.
/// Human RSM (when judgments are given): rated pairs only, masked elsewhere,
/// similarity-oriented.
RsmSet build_rsm(const EmbeddingTable& table, std::span<const Odorant> odorants,
                 const SimilarityJudgmentSet* human = nullptr);

/// Writes the value matrix and a 0/1 mask matrix, both with an `odorant` header row and column.
void write_rsm(const Rsm& rsm, const std::filesystem::path& matrix_path, const std::filesystem::path& mask_path);

}  // namespace olfalign
