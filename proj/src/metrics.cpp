#include "olfalign/metrics.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "olfalign/error.hpp"

namespace olfalign {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_pool(std::span<const double> scores, std::span<const double> labels, std::size_t& positives,
                std::size_t& negatives) {
  if (scores.size() != labels.size()) {
    throw DimensionError("ROC: " + std::to_string(scores.size()) + " scores for " + std::to_string(labels.size()) +
                         " labels");
  }
  positives = 0;
  negatives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (std::isnan(scores[i])) throw ArgumentError("ROC: NaN score");
    if (labels[i] == 1.0) {
      ++positives;
    } else if (labels[i] == 0.0) {
      ++negatives;
    } else {
      throw ArgumentError("ROC: labels must be 0 or 1");
    }
  }
  if (positives == 0 || negatives == 0) {
    throw UndefinedMetricError("ROC-AUC is undefined when the pool holds a single class");
  }
}

// Indices ordered by descending score.
std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const double> labels) {
  std::size_t positives = 0;
  std::size_t negatives = 0;
  check_pool(scores, labels, positives, negatives);

  // Walk tie groups from the top. Each negative earns one credit per
  // positive ranked strictly above it and one half per tied positive.
  const auto order = descending_order(scores);
  double concordant = 0.0;
  double positives_above = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double group_pos = 0.0;
    double group_neg = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1.0 ? group_pos : group_neg) += 1.0;
      ++j;
    }
    concordant += group_neg * positives_above + 0.5 * group_neg * group_pos;
    positives_above += group_pos;
    i = j;
  }
  return concordant / (static_cast<double>(positives) * static_cast<double>(negatives));
}

double roc_auc_micro(const Eigen::MatrixXd& scores, const Eigen::MatrixXd& labels) {
  if (scores.rows() != labels.rows() || scores.cols() != labels.cols()) {
    throw DimensionError("roc_auc_micro: score and label matrices differ in shape");
  }
  // Column-major storage of equal shapes pairs cells one-to-one.
  return roc_auc({scores.data(), static_cast<std::size_t>(scores.size())},
                 {labels.data(), static_cast<std::size_t>(labels.size())});
}

RocCurve roc_curve(std::span<const double> scores, std::span<const double> labels) {
  std::size_t positives = 0;
  std::size_t negatives = 0;
  check_pool(scores, labels, positives, negatives);
  const double p = static_cast<double>(positives);
  const double n = static_cast<double>(negatives);

  RocCurve curve;
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);

  const auto order = descending_order(scores);
  double tp = 0.0;
  double fp = 0.0;
  double area = 0.0;  // in units of (positive x negative) pairs
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double group_pos = 0.0;
    double group_neg = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1.0 ? group_pos : group_neg) += 1.0;
      ++j;
    }
    area += group_neg * tp + 0.5 * group_neg * group_pos;
    tp += group_pos;
    fp += group_neg;
    curve.thresholds.push_back(scores[order[i]]);
    curve.fpr.push_back(fp / n);
    curve.tpr.push_back(tp / p);
    i = j;
  }
  curve.auc = area / (p * n);
  return curve;
}

std::vector<double> interpolate_tpr(const RocCurve& curve, std::span<const double> fpr_grid) {
  std::vector<double> out;
  out.reserve(fpr_grid.size());
  const auto& fpr = curve.fpr;
  const auto& tpr = curve.tpr;
  for (const double x : fpr_grid) {
    // Last point with fpr <= x (the top of a vertical segment at x).
    const auto upper = std::upper_bound(fpr.begin(), fpr.end(), x);
    if (upper == fpr.begin()) {
      out.push_back(tpr.front());
      continue;
    }
    const auto i = static_cast<std::size_t>(std::distance(fpr.begin(), upper)) - 1;
    if (i + 1 >= fpr.size() || fpr[i] == x) {
      out.push_back(tpr[i]);
      continue;
    }
    const double t = (x - fpr[i]) / (fpr[i + 1] - fpr[i]);
    out.push_back(tpr[i] + t * (tpr[i + 1] - tpr[i]));
  }
  return out;
}

double nrmse(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) throw DimensionError("nrmse: lengths differ");
  if (y_true.empty()) throw UndefinedMetricError("nrmse of an empty vector");
  const auto [lo, hi] = std::ranges::minmax_element(y_true);
  const double range = *hi - *lo;
  if (!(range > 0.0)) throw UndefinedMetricError("nrmse is undefined for constant y_true");
  double sse = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double e = y_true[i] - y_pred[i];
    sse += e * e;
  }
  return std::sqrt(sse / static_cast<double>(y_true.size())) / range;
}

double correlation_p_value(double r, std::size_t n) {
  if (n < 3) throw ArgumentError("correlation p-value needs n >= 3");
  const double a = std::abs(r);
  if (a >= 1.0) return 0.0;
  // P(|T| >= |t|) with t^2 = r^2 (n-2) / (1-r^2) equals I_{1-r^2}((n-2)/2, 1/2).
  const double df = static_cast<double>(n - 2);
  const double x = (1.0 - a) * (1.0 + a);
  return std::clamp(boost::math::ibeta(df / 2.0, 0.5, x), 0.0, 1.0);
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("pearson: lengths differ");
  const std::size_t n = x.size();
  if (n < 3) throw ArgumentError("pearson needs at least 3 points, got " + std::to_string(n));
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedMetricError("pearson correlation is undefined for a constant input");
  PearsonResult result;
  result.n = n;
  result.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  result.p = correlation_p_value(result.r, n);
  return result;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) {
    s.mean = s.std = s.sem = kNaN;
    return s;
  }
  double sum = 0.0;
  for (const double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (const double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(s.n));
  s.sem = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) / std::sqrt(static_cast<double>(s.n)) : 0.0;
  return s;
}

NoiseCeiling noise_ceiling(const PerSubjectRatings& data, NoiseCeilingOptions options) {
  const auto subjects = data.subjects().size();
  if (subjects < 2) throw ArgumentError("noise ceiling needs at least 2 subjects");
  const auto odorants = static_cast<Index>(data.odorants().size());
  const auto descriptors = static_cast<Index>(data.descriptors().size());

  NoiseCeiling nc;
  nc.descriptors = data.descriptors();
  nc.subjects = data.subjects();
  nc.per_descriptor.assign(static_cast<std::size_t>(descriptors), kNaN);
  nc.defined.assign(static_cast<std::size_t>(descriptors), false);
  nc.excluded.assign(static_cast<std::size_t>(descriptors), 0);
  nc.per_subject = Eigen::MatrixXd::Constant(static_cast<Index>(subjects), descriptors, kNaN);

  // Running means are exact when every contribution is identical.
  auto mean_response = [&](Index odorant, Index descriptor, std::size_t skip) {
    double mean = 0.0;
    double count = 0.0;
    for (std::size_t s = 0; s < subjects; ++s) {
      if (s == skip) continue;
      const double v = data.subject(s)(odorant, descriptor);
      if (std::isnan(v)) continue;
      count += 1.0;
      mean += (v - mean) / count;
    }
    return count > 0.0 ? mean : kNaN;
  };

  std::vector<double> defined_values;
  for (Index j = 0; j < descriptors; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    std::vector<double> shared_mean(static_cast<std::size_t>(odorants));
    if (!options.leave_one_out) {
      for (Index i = 0; i < odorants; ++i) shared_mean[static_cast<std::size_t>(i)] = mean_response(i, j, subjects);
    }

    std::vector<double> correlations;
    for (std::size_t s = 0; s < subjects; ++s) {
      std::vector<double> own;
      std::vector<double> reference;
      for (Index i = 0; i < odorants; ++i) {
        const double v = data.subject(s)(i, j);
        if (std::isnan(v)) continue;
        const double m = options.leave_one_out ? mean_response(i, j, s) : shared_mean[static_cast<std::size_t>(i)];
        if (std::isnan(m)) continue;
        own.push_back(v);
        reference.push_back(m);
      }
      if (own.size() < 3) {
        ++nc.excluded[jj];
        continue;
      }
      try {
        const double r = pearson(own, reference).r;
        nc.per_subject(static_cast<Index>(s), j) = r;
        correlations.push_back(r);
      } catch (const UndefinedMetricError&) {
        ++nc.excluded[jj];
      }
    }

    if (correlations.size() >= 2) {
      double sum = 0.0;
      for (const double r : correlations) sum += r;
      nc.per_descriptor[jj] = sum / static_cast<double>(correlations.size());
      nc.defined[jj] = true;
      defined_values.push_back(nc.per_descriptor[jj]);
    }
  }
  nc.overall = summarize(defined_values);
  return nc;
}

}  // namespace olfalign
