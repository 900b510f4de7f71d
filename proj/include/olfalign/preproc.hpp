#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <vector>

namespace olfalign {

/// Principal components of a centered data matrix.
struct PcaModel {
  Eigen::VectorXd mean;                // length D
  Eigen::MatrixXd components;          // k x D, orthonormal rows
  Eigen::VectorXd explained_variance;  // length k, non-increasing, 1/(n-1) normalization
  Eigen::Index requested_k = 0;
  bool truncated = false;              // fewer than requested_k components were kept

  Eigen::Index k() const noexcept { return components.rows(); }
  Eigen::Index input_dim() const noexcept { return mean.size(); }
};

struct PcaOptions {
  // Rank below the requested k: throw when strict, otherwise keep only the
  // nonzero directions and log a warning.
  bool strict = false;
};

/// Top-k right singular directions of the mean-centered X. Each component
/// is signed so that its largest-magnitude coordinate is positive.
PcaModel fit_pca(const Eigen::MatrixXd& X, Eigen::Index k, PcaOptions options = {});
Eigen::MatrixXd apply_pca(const PcaModel& model, const Eigen::MatrixXd& X);
Eigen::MatrixXd reconstruct_pca(const PcaModel& model, const Eigen::MatrixXd& scores);

/// Per-column z-scoring with population (1/n) standard deviation.
struct Standardizer {
  Eigen::VectorXd means;
  Eigen::VectorXd stds;
  std::vector<bool> zero_std;

  Eigen::Index dim() const noexcept { return means.size(); }
  bool any_zero_std() const;
};

Standardizer fit_standardizer(const Eigen::MatrixXd& X);
/// (x - mean) / std per column; zero-std columns map to 0.
Eigen::MatrixXd apply_standardizer(const Standardizer& s, const Eigen::MatrixXd& X);

/// dot(u, v) / (|u| |v|), clamped to [-1, 1]. Throws UndefinedMetricError
/// for a zero vector.
double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v);

nlohmann::json to_json(const PcaModel& model);
nlohmann::json to_json(const Standardizer& s);
PcaModel pca_from_json(const nlohmann::json& doc);
Standardizer standardizer_from_json(const nlohmann::json& doc);

}  // namespace olfalign
