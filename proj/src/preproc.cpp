#include "olfalign/preproc.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "olfalign/error.hpp"
#include "olfalign/log.hpp"

namespace olfalign {

namespace {

using Eigen::Index;

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

PcaModel fit_pca(const Eigen::MatrixXd& X, Index k, PcaOptions options) {
  const Index n = X.rows();
  const Index d = X.cols();
  if (n < 2) throw ArgumentError("fit_pca needs at least 2 rows, got " + std::to_string(n));
  if (k < 1 || k > std::min(n, d)) {
    throw ArgumentError("fit_pca: k=" + std::to_string(k) + " outside [1, " + std::to_string(std::min(n, d)) + "]");
  }
  if (!X.allFinite()) throw ArgumentError("fit_pca: non-finite input");

  PcaModel model;
  model.requested_k = k;
  model.mean = X.colwise().mean().transpose();
  const Eigen::MatrixXd centered = X.rowwise() - model.mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double tolerance = sv.size() > 0 ? sv(0) * static_cast<double>(std::max(n, d)) *
                                               std::numeric_limits<double>::epsilon()
                                         : 0.0;
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > tolerance) ++rank;

  Index keep = k;
  if (rank < k) {
    if (options.strict) {
      throw ArgumentError("fit_pca: data has rank " + std::to_string(rank) + " < k=" + std::to_string(k));
    }
    log::warn("fit_pca: data has rank " + std::to_string(rank) + " < k=" + std::to_string(k) +
              "; keeping " + std::to_string(rank) + " components");
    keep = rank;
    model.truncated = true;
  }

  model.components = svd.matrixV().leftCols(keep).transpose();
  for (Index i = 0; i < keep; ++i) {
    Index arg = 0;
    model.components.row(i).cwiseAbs().maxCoeff(&arg);
    if (model.components(i, arg) < 0.0) model.components.row(i) *= -1.0;
  }
  model.explained_variance = sv.head(keep).array().square() / static_cast<double>(n - 1);
  return model;
}

Eigen::MatrixXd apply_pca(const PcaModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.input_dim()) {
    throw DimensionError("apply_pca: expected " + std::to_string(model.input_dim()) + " columns, got " +
                         std::to_string(X.cols()));
  }
  return (X.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Eigen::MatrixXd reconstruct_pca(const PcaModel& model, const Eigen::MatrixXd& scores) {
  if (scores.cols() != model.k()) throw DimensionError("reconstruct_pca: score width does not match k");
  return (scores * model.components).rowwise() + model.mean.transpose();
}

bool Standardizer::any_zero_std() const { return std::ranges::find(zero_std, true) != zero_std.end(); }

Standardizer fit_standardizer(const Eigen::MatrixXd& X) {
  const Index n = X.rows();
  if (n < 2) throw ArgumentError("fit_standardizer needs at least 2 rows, got " + std::to_string(n));
  Standardizer s;
  s.means = X.colwise().mean().transpose();
  s.stds.resize(X.cols());
  s.zero_std.assign(static_cast<std::size_t>(X.cols()), false);
  for (Index j = 0; j < X.cols(); ++j) {
    const double sd = std::sqrt((X.col(j).array() - s.means(j)).square().sum() / static_cast<double>(n));
    const double scale = X.col(j).cwiseAbs().maxCoeff();
    if (sd == 0.0 || sd <= 1e-13 * scale) {
      s.stds(j) = 0.0;
      s.zero_std[static_cast<std::size_t>(j)] = true;
    } else {
      s.stds(j) = sd;
    }
  }
  return s;
}

Eigen::MatrixXd apply_standardizer(const Standardizer& s, const Eigen::MatrixXd& X) {
  if (X.cols() != s.dim()) {
    throw DimensionError("apply_standardizer: expected " + std::to_string(s.dim()) + " columns, got " +
                         std::to_string(X.cols()));
  }
  Eigen::MatrixXd out(X.rows(), X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    if (s.zero_std[static_cast<std::size_t>(j)]) {
      out.col(j).setZero();
    } else {
      out.col(j) = (X.col(j).array() - s.means(j)) / s.stds(j);
    }
  }
  return out;
}

double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (u.size() != v.size()) {
    throw DimensionError("cosine_similarity: lengths " + std::to_string(u.size()) + " and " +
                         std::to_string(v.size()) + " differ");
  }
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw UndefinedMetricError("cosine similarity is undefined for a zero vector");
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

nlohmann::json to_json(const PcaModel& model) {
  nlohmann::json doc;
  doc["mean"] = to_vector(model.mean);
  std::vector<std::vector<double>> rows;
  for (Index i = 0; i < model.k(); ++i) rows.push_back(to_vector(model.components.row(i).transpose()));
  doc["components"] = rows;
  doc["explained_variance"] = to_vector(model.explained_variance);
  doc["requested_k"] = model.requested_k;
  doc["truncated"] = model.truncated;
  return doc;
}

nlohmann::json to_json(const Standardizer& s) {
  nlohmann::json doc;
  doc["means"] = to_vector(s.means);
  doc["stds"] = to_vector(s.stds);
  doc["zero_std"] = s.zero_std;
  return doc;
}

PcaModel pca_from_json(const nlohmann::json& doc) {
  PcaModel model;
  model.mean = from_vector(doc.at("mean").get<std::vector<double>>());
  const auto rows = doc.at("components").get<std::vector<std::vector<double>>>();
  model.components.resize(static_cast<Index>(rows.size()), model.mean.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<Index>(rows[i].size()) != model.mean.size()) throw SchemaError("PCA component width mismatch");
    model.components.row(static_cast<Index>(i)) = from_vector(rows[i]).transpose();
  }
  model.explained_variance = from_vector(doc.at("explained_variance").get<std::vector<double>>());
  model.requested_k = doc.value("requested_k", model.k());
  model.truncated = doc.value("truncated", false);
  return model;
}

Standardizer standardizer_from_json(const nlohmann::json& doc) {
  Standardizer s;
  s.means = from_vector(doc.at("means").get<std::vector<double>>());
  s.stds = from_vector(doc.at("stds").get<std::vector<double>>());
  s.zero_std = doc.at("zero_std").get<std::vector<bool>>();
  if (s.stds.size() != s.means.size() || static_cast<Index>(s.zero_std.size()) != s.means.size()) {
    throw SchemaError("standardizer arrays have inconsistent lengths");
  }
  return s;
}

}  // namespace olfalign
