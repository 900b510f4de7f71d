#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "olfalign/core_data.hpp"

namespace olfalign {

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

/// ROC-AUC of a pooled (score, label) set, labels in {0,1}. Ties between a
/// positive and a negative count one half (Mann-Whitney / average rank).
double roc_auc(std::span<const double> scores, std::span<const double> labels);

/// Micro-averaged ROC-AUC: every (sample, class) cell joins one pool.
double roc_auc_micro(const Eigen::MatrixXd& scores, const Eigen::MatrixXd& labels);

struct RocCurve {
  std::vector<double> thresholds;  // decreasing; first is +inf
  std::vector<double> fpr;
  std::vector<double> tpr;
  double auc = 0.0;
};

/// One point per distinct score threshold, from (0,0) to (1,1).
RocCurve roc_curve(std::span<const double> scores, std::span<const double> labels);

/// TPR of a step curve, linearly interpolated at the requested FPR values.
std::vector<double> interpolate_tpr(const RocCurve& curve, std::span<const double> fpr_grid);

/// RMSE divided by max(y_true) - min(y_true).
double nrmse(std::span<const double> y_true, std::span<const double> y_pred);

struct PearsonResult {
  double r = 0.0;
  double p = 1.0;  // two-sided, t distribution with n-2 degrees of freedom
  std::size_t n = 0;
};

PearsonResult pearson(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value of a correlation r over n samples.
double correlation_p_value(double r, std::size_t n);

/// Mean, population standard deviation (1/n), and standard error
/// (sample standard deviation / sqrt(n)) of a series.
struct Summary {
  double mean = 0.0;
  double std = 0.0;
  double sem = 0.0;
  std::size_t n = 0;
};

Summary summarize(std::span<const double> values);

struct NoiseCeilingOptions {
  // Correlate each subject with the mean of the *other* subjects.
  bool leave_one_out = false;
};

struct NoiseCeiling {
  std::vector<std::string> descriptors;
  std::vector<std::string> subjects;
  std::vector<double> per_descriptor;  // NaN where undefined
  std::vector<bool> defined;
  Eigen::MatrixXd per_subject;         // subjects x descriptors, NaN where excluded
  std::vector<std::size_t> excluded;   // per descriptor: subjects dropped (constant or < 3 ratings)
  Summary overall;                     // across defined descriptors
};

/// r_j = corr(subject j, mean response across subjects) per descriptor over
/// the odorants subject j rated; the ceiling is the mean of r_j. The mean
/// response includes subject j unless leave_one_out is set.
NoiseCeiling noise_ceiling(const PerSubjectRatings& data, NoiseCeilingOptions options = {});

}  // namespace olfalign
