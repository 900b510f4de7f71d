#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "olfalign/core_data.hpp"
#include "olfalign/preproc.hpp"

namespace olfalign {

// ---------------------------------------------------------------------------
// Split protocol

/// Repeated random train/test partitions with an inner k-fold structure.
/// Partition r depends only on (base_seed, r, n).
struct SplitPlan {
  Index n = 0;
  int repetitions = 30;
  double test_fraction = 0.2;
  int inner_folds = 5;
  std::uint64_t base_seed = 0;

  void validate() const;
  SplitPlan with_n(Index rows) const {
    SplitPlan plan = *this;
    plan.n = rows;
    return plan;
  }
};

struct Split {
  std::vector<Index> train;  // ascending
  std::vector<Index> test;   // ascending
};

/// |test| = round(test_fraction * n); throws ArgumentError when n < 5 or
/// either side would be empty.
std::vector<Split> make_splits(const SplitPlan& plan);

/// Contiguous blocks of a seeded shuffle of [0, n). Returns positions per fold.
std::vector<std::vector<Index>> make_folds(Index n, int folds, std::uint64_t seed);
/// Like make_folds, but positives and negatives are dealt round-robin so
/// every fold sees both classes whenever possible.
std::vector<std::vector<Index>> make_stratified_folds(std::span<const double> labels, int folds, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double l2_strength = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // filled when requested
};

struct LogisticOptions {
  double tolerance = 1e-6;  // on the Euclidean norm of the full gradient
  int max_iterations = 200000;
  bool record_trace = false;
};

/// mean binary cross-entropy + l2_strength * |w|^2 / 2; the bias is unpenalized.
double logistic_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                          double bias, double l2_strength);

/// Gradient descent with Barzilai-Borwein trial steps and Armijo
/// backtracking, so the objective decreases at every accepted step.
/// Throws DegenerateTargetError when y holds a single class.
LogisticModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2_strength,
                           LogisticOptions options = {});

Eigen::VectorXd predict_logistic(const LogisticModel& model, const Eigen::MatrixXd& X);

// ---------------------------------------------------------------------------
// Lasso

struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double l1_strength = 0.0;
  int sweeps = 0;
  bool converged = false;
  bool inputs_standardized = false;  // columns had mean 0 and std 1 (or 0)
};

struct LassoOptions {
  double tolerance = 1e-8;       // max coefficient change over a sweep
  double kkt_tolerance = 1e-9;   // max subgradient violation accepted at convergence
  int max_sweeps = 100000;
};

/// Smallest alpha for which the lasso solution is identically zero:
/// max_j |x_j^T (y - mean(y))| / n over centered columns.
double lasso_alpha_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Minimizes (1/2n)|y - Xw - b|^2 + alpha |w|_1 by cyclic coordinate descent.
LinearModel fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha, LassoOptions options = {});

Eigen::VectorXd predict_linear(const LinearModel& model, const Eigen::MatrixXd& X);

// ---------------------------------------------------------------------------
// Hyperparameter selection

enum class ModelKind { logistic, lasso };

std::string to_string(ModelKind kind);

/// Candidate regularization strengths, strictly increasing. Lasso grids may
/// be expressed as multiples of lasso_alpha_max on the training data.
struct HyperGrid {
  std::vector<double> values;
  bool relative_to_alpha_max = false;

  void validate() const;

  /// 10^-4 .. 10^2, 7 log-spaced points.
  static HyperGrid default_logistic();
  /// (10^-4 .. 10^0) * alpha_max, 10 log-spaced points.
  static HyperGrid default_lasso();
  static HyperGrid default_for(ModelKind kind);
  static HyperGrid log_spaced(double lo, double hi, int count, bool relative = false);
};

enum class TieBreak { lowest_index, highest_index };

/// Argmax over scores, NaN entries ignored. Throws SelectionError if every
/// entry is NaN.
std::size_t select_best(std::span<const double> scores, TieBreak tie);

struct CvOptions {
  int inner_folds = 5;
  std::uint64_t seed = 0;
  bool stratify = false;  // logistic only
};

struct CvResult {
  double selected = 0.0;
  std::size_t selected_index = 0;
  std::vector<double> candidates;   // absolute strengths, ascending
  std::vector<double> mean_scores;  // NaN where every fold failed
  std::variant<LogisticModel, LinearModel> model;
};

/// Inner k-fold selection: validation ROC-AUC (logistic) or negative MSE
/// (lasso) averaged over folds; the winner is refit on all rows. Ties go to
/// the weaker penalty for logistic and the stronger penalty for lasso.
CvResult nested_cv_select(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, ModelKind kind, const HyperGrid& grid,
                          const CvOptions& options);

// ---------------------------------------------------------------------------
// Full protocol

enum class PcaFit { per_split, global };

struct Preprocessing {
  bool pca = true;
  Index pca_k = 20;  // tables with dim <= pca_k skip PCA
  bool zscore = true;
  PcaFit pca_fit = PcaFit::per_split;
  bool zscore_targets = false;  // regression targets standardized on train, predictions mapped back
};

struct ProbeConfig {
  ModelKind kind = ModelKind::lasso;
  HyperGrid grid = HyperGrid::default_lasso();
  Preprocessing preprocessing;
  bool stratify = false;
  int jobs = 1;
};

struct DescriptorOutcome {
  bool skipped = false;
  std::string skip_reason;
  double selected = 0.0;
  Eigen::VectorXd predictions;  // aligned with RepetitionOutcome::test
};

struct RepetitionOutcome {
  int repetition = 0;
  std::vector<Index> train;
  std::vector<Index> test;
  Index features = 0;  // dimension after preprocessing
  std::vector<DescriptorOutcome> descriptors;
};

struct ProbeRun {
  ModelKind kind = ModelKind::lasso;
  std::vector<std::string> descriptors;
  std::vector<std::string> row_keys;
  Eigen::MatrixXd targets;  // n x d
  bool pca_applied = false;
  std::vector<RepetitionOutcome> repetitions;

  /// Targets of one descriptor on one repetition's test rows.
  Eigen::VectorXd test_targets(std::size_t repetition, std::size_t descriptor) const;
};

/// For every repetition: fit preprocessing on the training rows, then per
/// descriptor select the penalty by inner CV on the training rows and
/// predict the test rows. Degenerate training targets are recorded as
/// skipped. Output is identical for any `jobs` value.
ProbeRun run_probe_protocol(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, std::vector<std::string> descriptors,
                            std::vector<std::string> row_keys, const SplitPlan& plan, const ProbeConfig& config);

/// Label or rating bundle; plan.n is taken from the bundle.
ProbeRun run_probe_protocol(const DatasetBundle& bundle, const SplitPlan& plan, const ProbeConfig& config);

/// CSV `repetition,descriptor,row_id,y_true,y_pred`.
std::string prediction_dump_csv(const ProbeRun& run);

/// Test-set Pearson CC and NRMSE of one regression descriptor across
/// repetitions. A constant prediction vector (every coefficient shrunk to
/// zero) carries no linear association and is scored CC = 0.
struct RegressionScores {
  std::vector<double> cc;
  std::vector<double> nrmse;
  std::vector<int> repetitions;  // repetition index of each score
  std::size_t constant_predictions = 0;
  bool defined = false;
};

std::vector<RegressionScores> score_regression(const ProbeRun& run);

}  // namespace olfalign
