#include "olfalign/rsa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "olfalign/csv.hpp"
#include "olfalign/error.hpp"
#include "olfalign/metrics.hpp"
#include "olfalign/preproc.hpp"

namespace olfalign {

namespace {

// k / 10^10 is the correctly rounded decimal, so 1 and 0 stay exact.
constexpr double kSimilarityScale = 1e10;

double snap(double v) { return std::round(v * kSimilarityScale) / kSimilarityScale; }

double to_measure(double cosine, SimilarityMeasure measure) {
  if (measure == SimilarityMeasure::angle) return 1.0 - std::acos(cosine) / std::numbers::pi;
  return cosine;
}

class EmbeddingCache {
 public:
  explicit EmbeddingCache(const EmbeddingTable& table) : table_(table) {}

  const Eigen::VectorXd& get(const Odorant& odorant) {
    auto key = odorant.key();
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(std::move(key), mixture_embedding(table_, odorant)).first;
    return it->second;
  }

 private:
  const EmbeddingTable& table_;
  std::unordered_map<std::string, Eigen::VectorXd> cache_;
};

}  // namespace

PairSimilarities pairwise_model_similarities(const EmbeddingTable& table, const SimilarityJudgmentSet& pairs,
                                             SimilarityMeasure measure) {
  PairSimilarities out;
  EmbeddingCache cache(table);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [a, b] = pairs.pairs()[i];
    if (!resolvable(table, a) || !resolvable(table, b)) {
      ++out.dropped_unresolved;
      continue;
    }
    try {
      const double c = cosine_similarity(cache.get(a), cache.get(b));
      out.values.push_back(snap(to_measure(c, measure)));
      out.pair_indices.push_back(i);
    } catch (const UndefinedMetricError& e) {
      out.failures.emplace_back(i, e.what());
    }
  }
  return out;
}

RsaResult rsa_correlation(std::span<const double> model_sims, const SimilarityJudgmentSet& human) {
  if (model_sims.size() != human.size()) {
    throw DimensionError("rsa_correlation: " + std::to_string(model_sims.size()) + " model similarities for " +
                         std::to_string(human.size()) + " human pairs");
  }
  const auto scores = human.similarity_oriented_scores();
  const auto pr = pearson(model_sims, scores);
  RsaResult result;
  result.r = pr.r;
  result.p = pr.p;
  result.n_pairs = pr.n;
  return result;
}

RsaResult rsa_correlation(const PairSimilarities& sims, const SimilarityJudgmentSet& human) {
  auto result = rsa_correlation(sims.values, human.subset(sims.pair_indices));
  result.dropped = sims.dropped_unresolved + sims.failures.size();
  return result;
}

RsaResult run_rsa(const EmbeddingTable& table, const SimilarityJudgmentSet& human, SimilarityMeasure measure) {
  const auto sims = pairwise_model_similarities(table, human, measure);
  if (sims.values.empty()) throw JoinError("no human-rated pair resolves in table '" + table.model_name() + "'");
  auto result = rsa_correlation(sims, human);
  result.model_name = table.model_name();
  result.layer = table.layer();
  return result;
}

std::vector<const EmbeddingTable*> ordered_layers(std::span<const EmbeddingTable> tables) {
  if (tables.empty()) throw ArgumentError("layer sweep needs at least one table");
  auto sorted_ids = [](const EmbeddingTable& t) {
    std::vector<std::string> ids;
    for (const auto& id : t.ids()) ids.push_back(id.str());
    std::ranges::sort(ids);
    return ids;
  };
  const auto reference_ids = sorted_ids(tables.front());
  std::vector<const EmbeddingTable*> out;
  for (const auto& t : tables) {
    if (t.model_name() != tables.front().model_name()) {
      throw ArgumentError("layer sweep mixes models '" + tables.front().model_name() + "' and '" + t.model_name() + "'");
    }
    if (sorted_ids(t) != reference_ids) {
      throw ArgumentError("layer " + t.layer().to_string() + " covers a different set of molecule ids");
    }
    out.push_back(&t);
  }
  std::ranges::stable_sort(out, [](const auto* a, const auto* b) { return a->layer() < b->layer(); });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i]->layer() == out[i - 1]->layer()) {
      throw ArgumentError("layer " + out[i]->layer().to_string() + " appears more than once");
    }
  }
  return out;
}

std::vector<RsaResult> layer_sweep(std::span<const EmbeddingTable> tables, const SimilarityJudgmentSet& human,
                                   SimilarityMeasure measure) {
  std::vector<RsaResult> results;
  for (const auto* table : ordered_layers(tables)) results.push_back(run_rsa(*table, human, measure));
  return results;
}

RsmSet build_rsm(const EmbeddingTable& table, std::span<const Odorant> odorants, const SimilarityJudgmentSet* human) {
  const auto n = static_cast<Index>(odorants.size());
  std::vector<std::string> keys;
  std::vector<Eigen::VectorXd> embeddings;
  for (const auto& o : odorants) {
    keys.push_back(o.key());
    embeddings.push_back(mixture_embedding(table, o));
  }

  RsmSet set;
  set.model.odorants = keys;
  set.model.values = Eigen::MatrixXd::Identity(n, n);
  set.model.mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, true);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double c = cosine_similarity(embeddings[static_cast<std::size_t>(i)], embeddings[static_cast<std::size_t>(j)]);
      set.model.values(i, j) = c;
      set.model.values(j, i) = c;
    }
  }

  if (human) {
    std::unordered_map<std::string, Index> position;
    for (Index i = 0; i < n; ++i) position.emplace(keys[static_cast<std::size_t>(i)], i);
    Rsm rsm;
    rsm.odorants = keys;
    rsm.values = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
    rsm.mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
    const auto scores = human->similarity_oriented_scores();
    for (std::size_t p = 0; p < human->size(); ++p) {
      const auto ia = position.find(human->pairs()[p].first.key());
      const auto ib = position.find(human->pairs()[p].second.key());
      if (ia == position.end() || ib == position.end()) continue;
      rsm.values(ia->second, ib->second) = scores[p];
      rsm.values(ib->second, ia->second) = scores[p];
      rsm.mask(ia->second, ib->second) = true;
      rsm.mask(ib->second, ia->second) = true;
    }
    set.human = std::move(rsm);
  }
  return set;
}

void write_rsm(const Rsm& rsm, const std::filesystem::path& matrix_path, const std::filesystem::path& mask_path) {
  std::string header = "odorant";
  for (const auto& key : rsm.odorants) header += "," + csv::escape(key);
  header += '\n';
  std::string values = header;
  std::string mask = header;
  for (Index i = 0; i < rsm.values.rows(); ++i) {
    const auto key = csv::escape(rsm.odorants[static_cast<std::size_t>(i)]);
    values += key;
    mask += key;
    for (Index j = 0; j < rsm.values.cols(); ++j) {
      values += ',';
      mask += ',';
      if (rsm.mask(i, j)) values += csv::format_double(rsm.values(i, j));
      mask += rsm.mask(i, j) ? '1' : '0';
    }
    values += '\n';
    mask += '\n';
  }
  csv::write_text(matrix_path, values);
  csv::write_text(mask_path, mask);
}

}  // namespace olfalign
