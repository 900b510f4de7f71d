#include "olfalign/probes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "olfalign/csv.hpp"
#include "olfalign/error.hpp"
#include "olfalign/log.hpp"
#include "olfalign/metrics.hpp"
#include "olfalign/parallel.hpp"
#include "olfalign/rng.hpp"

namespace olfalign {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kInnerFoldStream = 0x1F0D;

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, std::span<const Index> rows) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, std::span<const Index> rows) {
  Eigen::VectorXd out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = v(rows[i]);
  return out;
}

std::vector<Index> complement(Index n, std::span<const Index> sorted_subset) {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(n) - sorted_subset.size());
  std::size_t k = 0;
  for (Index i = 0; i < n; ++i) {
    if (k < sorted_subset.size() && sorted_subset[k] == i) {
      ++k;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

void check_binary(const Eigen::VectorXd& y, bool& has_pos, bool& has_neg) {
  has_pos = false;
  has_neg = false;
  for (Index i = 0; i < y.size(); ++i) {
    if (y(i) == 1.0) {
      has_pos = true;
    } else if (y(i) == 0.0) {
      has_neg = true;
    } else {
      throw ArgumentError("logistic targets must be 0 or 1");
    }
  }
}

bool is_constant(const Eigen::VectorXd& y) { return y.size() == 0 || y.maxCoeff() == y.minCoeff(); }

}  // namespace

// ---------------------------------------------------------------------------

void SplitPlan::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ArgumentError("test_fraction must lie in (0, 1)");
  if (repetitions < 1) throw ArgumentError("repetitions must be >= 1");
  if (inner_folds < 2) throw ArgumentError("inner_folds must be >= 2");
}

std::vector<Split> make_splits(const SplitPlan& plan) {
  plan.validate();
  if (plan.n < 5) throw ArgumentError("make_splits needs n >= 5, got " + std::to_string(plan.n));
  const auto test_size = static_cast<Index>(std::llround(plan.test_fraction * static_cast<double>(plan.n)));
  if (test_size < 1 || test_size >= plan.n) {
    throw ArgumentError("test_fraction " + csv::format_double(plan.test_fraction) + " with n=" +
                        std::to_string(plan.n) + " leaves an empty side");
  }
  std::vector<Split> splits;
  splits.reserve(static_cast<std::size_t>(plan.repetitions));
  for (int r = 0; r < plan.repetitions; ++r) {
    const auto order = shuffled_indices(static_cast<std::size_t>(plan.n),
                                        derive_seed(plan.base_seed, {static_cast<std::uint64_t>(r)}));
    Split split;
    split.test.assign(order.begin(), order.begin() + test_size);
    split.train.assign(order.begin() + test_size, order.end());
    std::ranges::sort(split.test);
    std::ranges::sort(split.train);
    splits.push_back(std::move(split));
  }
  return splits;
}

std::vector<std::vector<Index>> make_folds(Index n, int folds, std::uint64_t seed) {
  if (folds < 2) throw ArgumentError("need at least 2 folds");
  if (n < folds) throw ArgumentError("cannot form " + std::to_string(folds) + " folds from " + std::to_string(n) + " rows");
  const auto order = shuffled_indices(static_cast<std::size_t>(n), seed);
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(folds));
  const Index base = n / folds;
  const Index extra = n % folds;
  Index pos = 0;
  for (Index f = 0; f < folds; ++f) {
    const Index size = base + (f < extra ? 1 : 0);
    auto& fold = out[static_cast<std::size_t>(f)];
    for (Index i = 0; i < size; ++i) fold.push_back(static_cast<Index>(order[static_cast<std::size_t>(pos++)]));
    std::ranges::sort(fold);
  }
  return out;
}

std::vector<std::vector<Index>> make_stratified_folds(std::span<const double> labels, int folds, std::uint64_t seed) {
  const auto n = static_cast<Index>(labels.size());
  if (folds < 2) throw ArgumentError("need at least 2 folds");
  if (n < folds) throw ArgumentError("cannot form " + std::to_string(folds) + " folds from " + std::to_string(n) + " rows");
  const auto order = shuffled_indices(labels.size(), seed);
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(folds));
  std::size_t next = 0;
  for (const double cls : {1.0, 0.0}) {
    for (const auto i : order) {
      if (labels[i] != cls) continue;
      out[next].push_back(static_cast<Index>(i));
      next = (next + 1) % out.size();
    }
  }
  for (auto& fold : out) std::ranges::sort(fold);
  return out;
}

// ---------------------------------------------------------------------------

double logistic_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                          double bias, double l2_strength) {
  const Eigen::VectorXd z = (X * weights).array() + bias;
  double loss = 0.0;
  for (Index i = 0; i < z.size(); ++i) loss += softplus(z(i)) - y(i) * z(i);
  return loss / static_cast<double>(X.rows()) + 0.5 * l2_strength * weights.squaredNorm();
}

LogisticModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2_strength,
                           LogisticOptions options) {
  const Index n = X.rows();
  const Index k = X.cols();
  if (y.size() != n) throw DimensionError("fit_logistic: X has " + std::to_string(n) + " rows, y has " + std::to_string(y.size()));
  if (n < 2) throw ArgumentError("fit_logistic needs at least 2 rows");
  if (!(l2_strength > 0.0)) throw ArgumentError("fit_logistic requires l2_strength > 0");
  if (!X.allFinite()) throw ArgumentError("fit_logistic: non-finite features");
  bool has_pos = false;
  bool has_neg = false;
  check_binary(y, has_pos, has_neg);
  if (!has_pos || !has_neg) throw DegenerateTargetError("logistic target has a single class");

  const double inv_n = 1.0 / static_cast<double>(n);
  // theta = (w, b)
  auto evaluate = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    const auto w = theta.head(k);
    const double b = theta(k);
    const Eigen::VectorXd z = (X * w).array() + b;
    Eigen::VectorXd residual(n);
    double loss = 0.0;
    for (Index i = 0; i < n; ++i) {
      loss += softplus(z(i)) - y(i) * z(i);
      residual(i) = sigmoid(z(i)) - y(i);
    }
    grad.resize(k + 1);
    grad.head(k) = X.transpose() * residual * inv_n + l2_strength * w;
    grad(k) = residual.sum() * inv_n;
    return loss * inv_n + 0.5 * l2_strength * w.squaredNorm();
  };

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(k + 1);
  Eigen::VectorXd grad;
  double f = evaluate(theta, grad);

  const double max_row_sq = n > 0 ? X.rowwise().squaredNorm().maxCoeff() : 0.0;
  double step = 1.0 / (0.25 * (max_row_sq + 1.0) + l2_strength);

  LogisticModel model;
  model.l2_strength = l2_strength;
  if (options.record_trace) model.objective_trace.push_back(f);

  Eigen::VectorXd candidate(k + 1);
  Eigen::VectorXd candidate_grad;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const double gnorm_sq = grad.squaredNorm();
    if (std::sqrt(gnorm_sq) < options.tolerance) {
      model.converged = true;
      break;
    }
    double trial = step;
    double f_new = f;
    bool accepted = false;
    while (trial > 1e-20) {
      candidate = theta - trial * grad;
      f_new = evaluate(candidate, candidate_grad);
      if (f_new <= f - 1e-4 * trial * gnorm_sq) {
        accepted = true;
        break;
      }
      trial *= 0.5;
    }
    if (!accepted) break;  // no representable decrease left

    const Eigen::VectorXd s = candidate - theta;
    const Eigen::VectorXd g_diff = candidate_grad - grad;
    const double sy = s.dot(g_diff);
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-10, 1e10) : trial * 2.0;

    theta.swap(candidate);
    grad.swap(candidate_grad);
    f = f_new;
    if (options.record_trace) model.objective_trace.push_back(f);
  }
  model.iterations = iter;
  if (!model.converged && grad.norm() < options.tolerance) model.converged = true;
  if (!model.converged) {
    log::warn("fit_logistic: stopped after " + std::to_string(iter) + " iterations with gradient norm " +
              csv::format_double(grad.norm()));
  }
  model.weights = theta.head(k);
  model.bias = theta(k);
  return model;
}

Eigen::VectorXd predict_logistic(const LogisticModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.weights.size()) {
    throw DimensionError("predict_logistic: expected " + std::to_string(model.weights.size()) + " columns, got " +
                         std::to_string(X.cols()));
  }
  Eigen::VectorXd z = (X * model.weights).array() + model.bias;
  for (Index i = 0; i < z.size(); ++i) z(i) = sigmoid(z(i));
  return z;
}

// ---------------------------------------------------------------------------

double lasso_alpha_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (y.size() != X.rows()) throw DimensionError("lasso_alpha_max: row mismatch");
  if (X.rows() == 0) return 0.0;
  const Eigen::RowVectorXd xm = X.colwise().mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const Eigen::VectorXd corr = (X.rowwise() - xm).transpose() * yc;
  return corr.cwiseAbs().maxCoeff() / static_cast<double>(X.rows());
}

LinearModel fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha, LassoOptions options) {
  const Index n = X.rows();
  const Index k = X.cols();
  if (y.size() != n) throw DimensionError("fit_lasso: X has " + std::to_string(n) + " rows, y has " + std::to_string(y.size()));
  if (n < 2) throw ArgumentError("fit_lasso needs at least 2 rows");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ArgumentError("fit_lasso requires a finite alpha >= 0");
  if (!X.allFinite() || !y.allFinite()) throw ArgumentError("fit_lasso: non-finite input");

  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::RowVectorXd xm = X.colwise().mean();
  const double ym = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - xm;
  const Eigen::VectorXd yc = y.array() - ym;
  const Eigen::VectorXd col_sq = Xc.colwise().squaredNorm().transpose() * inv_n;

  LinearModel model;
  model.l1_strength = alpha;
  model.inputs_standardized = true;
  for (Index j = 0; j < k; ++j) {
    const double sd = std::sqrt(col_sq(j));
    if (std::abs(xm(j)) > 1e-6 || (std::abs(sd - 1.0) > 1e-6 && sd > 1e-12)) model.inputs_standardized = false;
  }

  Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd r = yc;
  int sweep = 0;
  while (sweep < options.max_sweeps) {
    ++sweep;
    double max_change = 0.0;
    for (Index j = 0; j < k; ++j) {
      if (col_sq(j) == 0.0) continue;
      const double rho = Xc.col(j).dot(r) * inv_n + col_sq(j) * w(j);
      const double updated = soft_threshold(rho, alpha) / col_sq(j);
      const double delta = updated - w(j);
      if (delta != 0.0) {
        r.noalias() -= delta * Xc.col(j);
        w(j) = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change >= options.tolerance) continue;

    // Refresh the residual and confirm the subgradient conditions.
    r = yc - Xc * w;
    const Eigen::VectorXd grad = Xc.transpose() * r * inv_n;
    double violation = 0.0;
    for (Index j = 0; j < k; ++j) {
      const double v = w(j) != 0.0 ? std::abs(grad(j) - alpha * (w(j) > 0.0 ? 1.0 : -1.0))
                                   : std::max(0.0, std::abs(grad(j)) - alpha);
      violation = std::max(violation, v);
    }
    if (violation <= options.kkt_tolerance) {
      model.converged = true;
      break;
    }
  }
  model.sweeps = sweep;
  if (!model.converged) log::warn("fit_lasso: no convergence after " + std::to_string(sweep) + " sweeps");
  model.weights = std::move(w);
  model.bias = ym - xm.dot(model.weights);
  return model;
}

Eigen::VectorXd predict_linear(const LinearModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.weights.size()) {
    throw DimensionError("predict_linear: expected " + std::to_string(model.weights.size()) + " columns, got " +
                         std::to_string(X.cols()));
  }
  return (X * model.weights).array() + model.bias;
}

// ---------------------------------------------------------------------------

std::string to_string(ModelKind kind) { return kind == ModelKind::logistic ? "logistic" : "lasso"; }

void HyperGrid::validate() const {
  if (values.empty()) throw ArgumentError("hyperparameter grid is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) throw ArgumentError("grid values must be positive and finite");
    if (i > 0 && !(values[i] > values[i - 1])) throw ArgumentError("grid values must be strictly increasing");
  }
}

HyperGrid HyperGrid::log_spaced(double lo, double hi, int count, bool relative) {
  if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw ArgumentError("invalid log-spaced grid");
  HyperGrid grid;
  grid.relative_to_alpha_max = relative;
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    grid.values.push_back(std::pow(10.0, a + t * (b - a)));
  }
  return grid;
}

HyperGrid HyperGrid::default_logistic() { return log_spaced(1e-4, 1e2, 7); }
HyperGrid HyperGrid::default_lasso() { return log_spaced(1e-4, 1.0, 10, true); }
HyperGrid HyperGrid::default_for(ModelKind kind) {
  return kind == ModelKind::logistic ? default_logistic() : default_lasso();
}

std::size_t select_best(std::span<const double> scores, TieBreak tie) {
  std::size_t best = scores.size();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) continue;
    if (best == scores.size() || scores[i] > scores[best] ||
        (tie == TieBreak::highest_index && scores[i] == scores[best])) {
      best = i;
    }
  }
  if (best == scores.size()) throw SelectionError("every hyperparameter candidate failed");
  return best;
}

CvResult nested_cv_select(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, ModelKind kind, const HyperGrid& grid,
                          const CvOptions& options) {
  grid.validate();
  const Index n = X.rows();
  if (y.size() != n) throw DimensionError("nested_cv_select: row mismatch");
  if (options.inner_folds < 2) throw ArgumentError("inner_folds must be >= 2");
  if (n < options.inner_folds) {
    throw ArgumentError("nested_cv_select: " + std::to_string(n) + " rows for " + std::to_string(options.inner_folds) +
                        " folds");
  }

  CvResult result;
  result.candidates = grid.values;
  if (kind == ModelKind::logistic) {
    bool has_pos = false;
    bool has_neg = false;
    check_binary(y, has_pos, has_neg);
    if (!has_pos || !has_neg) throw DegenerateTargetError("logistic target has a single class");
  } else {
    if (is_constant(y)) throw DegenerateTargetError("regression target is constant");
    if (grid.relative_to_alpha_max) {
      const double alpha_max = lasso_alpha_max(X, y);
      if (!(alpha_max > 0.0)) throw DegenerateTargetError("regression target is uncorrelated with every feature");
      for (auto& c : result.candidates) c *= alpha_max;
    }
  }

  const auto folds = (options.stratify && kind == ModelKind::logistic)
                         ? make_stratified_folds(as_span(y), options.inner_folds, options.seed)
                         : make_folds(n, options.inner_folds, options.seed);

  const auto candidates = result.candidates.size();
  std::vector<double> sums(candidates, 0.0);
  std::vector<int> counts(candidates, 0);
  for (const auto& validation : folds) {
    const auto training = complement(n, validation);
    const Eigen::MatrixXd X_train = take_rows(X, training);
    const Eigen::VectorXd y_train = take(y, training);
    const Eigen::MatrixXd X_val = take_rows(X, validation);
    const Eigen::VectorXd y_val = take(y, validation);
    for (std::size_t c = 0; c < candidates; ++c) {
      try {
        double score;
        if (kind == ModelKind::logistic) {
          const auto model = fit_logistic(X_train, y_train, result.candidates[c]);
          score = roc_auc(as_span(predict_logistic(model, X_val)), as_span(y_val));
        } else {
          const auto model = fit_lasso(X_train, y_train, result.candidates[c]);
          score = -(predict_linear(model, X_val) - y_val).squaredNorm() / static_cast<double>(y_val.size());
        }
        sums[c] += score;
        ++counts[c];
      } catch (const DegenerateTargetError&) {
      } catch (const UndefinedMetricError&) {
      }
    }
  }

  result.mean_scores.resize(candidates);
  for (std::size_t c = 0; c < candidates; ++c) {
    result.mean_scores[c] = counts[c] > 0 ? sums[c] / counts[c] : kNaN;
  }
  result.selected_index = select_best(result.mean_scores, kind == ModelKind::logistic ? TieBreak::lowest_index
                                                                                      : TieBreak::highest_index);
  result.selected = result.candidates[result.selected_index];
  if (kind == ModelKind::logistic) {
    result.model = fit_logistic(X, y, result.selected);
  } else {
    result.model = fit_lasso(X, y, result.selected);
  }
  return result;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd ProbeRun::test_targets(std::size_t repetition, std::size_t descriptor) const {
  const auto& rep = repetitions.at(repetition);
  Eigen::VectorXd out(static_cast<Index>(rep.test.size()));
  for (std::size_t i = 0; i < rep.test.size(); ++i) {
    out(static_cast<Index>(i)) = targets(rep.test[i], static_cast<Index>(descriptor));
  }
  return out;
}

ProbeRun run_probe_protocol(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, std::vector<std::string> descriptors,
                            std::vector<std::string> row_keys, const SplitPlan& base_plan, const ProbeConfig& config) {
  if (Y.rows() != X.rows()) throw DimensionError("probe protocol: feature and target row counts differ");
  if (static_cast<Index>(descriptors.size()) != Y.cols()) throw DimensionError("probe protocol: descriptor names do not match targets");
  if (static_cast<Index>(row_keys.size()) != X.rows()) throw DimensionError("probe protocol: row keys do not match rows");
  config.grid.validate();

  const SplitPlan plan = base_plan.with_n(X.rows());
  const auto splits = make_splits(plan);
  const auto& pre = config.preprocessing;

  ProbeRun run;
  run.kind = config.kind;
  run.descriptors = std::move(descriptors);
  run.row_keys = std::move(row_keys);
  run.targets = Y;
  run.pca_applied = pre.pca && X.cols() > pre.pca_k;
  if (pre.pca && !run.pca_applied) {
    log::info("embedding dim " + std::to_string(X.cols()) + " <= " + std::to_string(pre.pca_k) + ": skipping PCA");
  }

  std::optional<PcaModel> global_pca;
  if (run.pca_applied && pre.pca_fit == PcaFit::global) {
    global_pca = fit_pca(X, std::min(pre.pca_k, std::min(X.rows(), X.cols())));
  }

  run.repetitions.resize(splits.size());
  parallel_for(splits.size(), config.jobs, [&](std::size_t r) {
    const auto& split = splits[r];
    RepetitionOutcome& out = run.repetitions[r];
    out.repetition = static_cast<int>(r);
    out.train = split.train;
    out.test = split.test;

    Eigen::MatrixXd train = take_rows(X, split.train);
    Eigen::MatrixXd test = take_rows(X, split.test);
    if (run.pca_applied) {
      const PcaModel model = global_pca ? *global_pca
                                        : fit_pca(train, std::min(pre.pca_k, std::min(train.rows(), train.cols())));
      train = apply_pca(model, train);
      test = apply_pca(model, test);
    }
    if (pre.zscore) {
      const auto standardizer = fit_standardizer(train);
      train = apply_standardizer(standardizer, train);
      test = apply_standardizer(standardizer, test);
    }
    out.features = train.cols();

    const CvOptions cv{plan.inner_folds, derive_seed(plan.base_seed, {static_cast<std::uint64_t>(r), kInnerFoldStream}),
                       config.stratify};
    out.descriptors.resize(run.descriptors.size());
    for (std::size_t j = 0; j < run.descriptors.size(); ++j) {
      DescriptorOutcome& d = out.descriptors[j];
      Eigen::VectorXd y_train = take(Y.col(static_cast<Index>(j)), split.train);
      if (is_constant(y_train)) {
        d.skipped = true;
        d.skip_reason = config.kind == ModelKind::logistic ? "single-class training target" : "constant training target";
        continue;
      }
      double target_mean = 0.0;
      double target_std = 1.0;
      if (config.kind == ModelKind::lasso && pre.zscore_targets) {
        target_mean = y_train.mean();
        target_std = std::sqrt((y_train.array() - target_mean).square().mean());
        y_train = (y_train.array() - target_mean) / target_std;
      }
      try {
        const auto cv_result = nested_cv_select(train, y_train, config.kind, config.grid, cv);
        d.selected = cv_result.selected;
        if (config.kind == ModelKind::logistic) {
          d.predictions = predict_logistic(std::get<LogisticModel>(cv_result.model), test);
        } else {
          d.predictions = predict_linear(std::get<LinearModel>(cv_result.model), test).array() * target_std + target_mean;
        }
      } catch (const SelectionError& e) {
        d.skipped = true;
        d.skip_reason = e.what();
      } catch (const DegenerateTargetError& e) {
        d.skipped = true;
        d.skip_reason = e.what();
      }
    }
  });

  std::size_t skipped = 0;
  for (const auto& rep : run.repetitions) {
    skipped += static_cast<std::size_t>(std::ranges::count_if(rep.descriptors, [](const auto& d) { return d.skipped; }));
  }
  if (skipped > 0) log::info("probe protocol: " + std::to_string(skipped) + " (repetition, descriptor) fits skipped");
  return run;
}

ProbeRun run_probe_protocol(const DatasetBundle& bundle, const SplitPlan& plan, const ProbeConfig& config) {
  return std::visit(
      [&](const auto& data) -> ProbeRun {
        using T = std::decay_t<decltype(data)>;
        if constexpr (std::is_same_v<T, BinaryLabelSet>) {
          if (config.kind != ModelKind::logistic) throw ArgumentError("label bundles need the logistic probe");
          return run_probe_protocol(bundle.features(), data.labels(), data.descriptors(), bundle.row_keys(), plan, config);
        } else if constexpr (std::is_same_v<T, RatingSet>) {
          if (config.kind != ModelKind::lasso) throw ArgumentError("rating bundles need the lasso probe");
          return run_probe_protocol(bundle.features(), data.ratings(), data.descriptors(), bundle.row_keys(), plan, config);
        } else {
          throw ArgumentError("the probe protocol needs a label or rating bundle");
        }
      },
      bundle.perceptual());
}

std::string prediction_dump_csv(const ProbeRun& run) {
  std::string out = "repetition,descriptor,row_id,y_true,y_pred\n";
  for (const auto& rep : run.repetitions) {
    for (std::size_t j = 0; j < rep.descriptors.size(); ++j) {
      const auto& d = rep.descriptors[j];
      if (d.skipped) continue;
      const auto descriptor = csv::escape(run.descriptors[j]);
      for (std::size_t i = 0; i < rep.test.size(); ++i) {
        out += std::to_string(rep.repetition);
        out += ',';
        out += descriptor;
        out += ',';
        out += csv::escape(run.row_keys[static_cast<std::size_t>(rep.test[i])]);
        out += ',';
        out += csv::format_double(run.targets(rep.test[i], static_cast<Index>(j)));
        out += ',';
        out += csv::format_double(d.predictions(static_cast<Index>(i)));
        out += '\n';
      }
    }
  }
  return out;
}

std::vector<RegressionScores> score_regression(const ProbeRun& run) {
  std::vector<RegressionScores> out(run.descriptors.size());
  for (std::size_t j = 0; j < run.descriptors.size(); ++j) {
    auto& scores = out[j];
    for (std::size_t r = 0; r < run.repetitions.size(); ++r) {
      const auto& d = run.repetitions[r].descriptors[j];
      if (d.skipped) continue;
      const Eigen::VectorXd truth = run.test_targets(r, j);
      if (is_constant(truth)) continue;
      scores.repetitions.push_back(run.repetitions[r].repetition);
      scores.nrmse.push_back(nrmse(as_span(truth), as_span(d.predictions)));
      if (is_constant(d.predictions)) {
        scores.cc.push_back(0.0);
        ++scores.constant_predictions;
      } else {
        scores.cc.push_back(pearson(as_span(truth), as_span(d.predictions)).r);
      }
    }
    scores.defined = !scores.cc.empty();
  }
  return out;
}

}  // namespace olfalign
