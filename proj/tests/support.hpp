#pragma once

// Independent reference implementations and fixture helpers for the tests.
// Nothing here calls into the library's numerical code.

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace oracle {

// O(n_pos * n_neg) pair-concordance AUC with half credit for ties.
inline double brute_force_auc(const std::vector<double>& scores, const std::vector<double>& labels) {
  long double concordant = 0;
  long double pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1.0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0.0) continue;
      pairs += 1;
      if (scores[i] > scores[j]) concordant += 1;
      else if (scores[i] == scores[j]) concordant += 0.5L;
    }
  }
  return static_cast<double>(concordant / pairs);
}

// cov(x, y) / (sd(x) sd(y)) in extended precision, two passes.
inline double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<long double>(x.size());
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

// Two-sided t-test p-value in closed form for 1 and 2 degrees of freedom.
inline double t_p_value_closed_form(double r, int df) {
  const double t = std::abs(r) * std::sqrt(df / (1.0 - r * r));
  if (df == 1) return 1.0 - 2.0 / M_PI * std::atan(t);
  if (df == 2) return 1.0 - t / std::sqrt(2.0 + t * t);
  return std::nan("");
}

inline double nrmse(const std::vector<double>& truth, const std::vector<double>& pred) {
  long double sse = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) sse += (truth[i] - pred[i]) * (truth[i] - pred[i]);
  const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());
  return static_cast<double>(std::sqrt(sse / truth.size()) / (*hi - *lo));
}

// One-sided Jacobi SVD: returns right singular vectors (columns) and
// singular values sorted in decreasing order.
struct Svd {
  Eigen::VectorXd values;
  Eigen::MatrixXd right;
};

inline Svd jacobi_svd(Eigen::MatrixXd A) {
  const auto d = A.cols();
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(d, d);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < d; ++p) {
      for (Eigen::Index q = p + 1; q < d; ++q) {
        const double alpha = A.col(p).squaredNorm();
        const double beta = A.col(q).squaredNorm();
        const double gamma = A.col(p).dot(A.col(q));
        if (alpha == 0.0 || beta == 0.0) continue;
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
        if (std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (auto* M : {&A, &V}) {
          const Eigen::VectorXd cp = M->col(p);
          const Eigen::VectorXd cq = M->col(q);
          M->col(p) = c * cp - s * cq;
          M->col(q) = s * cp + c * cq;
        }
      }
    }
    if (off < 1e-15) break;
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> norms(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) norms[static_cast<std::size_t>(j)] = A.col(j).norm();
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return norms[a] > norms[b]; });
  Svd out{Eigen::VectorXd(d), Eigen::MatrixXd(d, d)};
  for (Eigen::Index j = 0; j < d; ++j) {
    out.values(j) = norms[static_cast<std::size_t>(order[j])];
    out.right.col(j) = V.col(order[j]);
  }
  return out;
}

// Newton's method on mean BCE + lambda |w|^2 / 2 with an unpenalized bias.
// Returns (w, b) stacked as a vector of length k + 1.
inline Eigen::VectorXd newton_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
  const auto n = X.rows();
  const auto k = X.cols();
  Eigen::MatrixXd Xa(n, k + 1);
  Xa << X, Eigen::VectorXd::Ones(n);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(k + 1);
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(k + 1, lambda);
  penalty(k) = 0.0;
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd z = Xa * theta;
    Eigen::VectorXd p(n), s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = 1.0 / (1.0 + std::exp(-z(i)));
      s(i) = p(i) * (1.0 - p(i));
    }
    const Eigen::VectorXd grad = Xa.transpose() * (p - y) / n + penalty.cwiseProduct(theta);
    if (grad.norm() < 1e-13) break;
    Eigen::MatrixXd H = Xa.transpose() * s.asDiagonal() * Xa / n;
    H.diagonal() += penalty;
    theta -= H.ldlt().solve(grad);
  }
  return theta;
}

// Ordinary least squares with intercept via the normal equations on centered data.
inline std::pair<Eigen::VectorXd, double> least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::RowVectorXd mx = X.colwise().mean();
  const double my = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - mx;
  const Eigen::VectorXd w = (Xc.transpose() * Xc).llt().solve(Xc.transpose() * (y.array() - my).matrix());
  return {w, my - mx.dot(w)};
}

}  // namespace oracle

namespace fixture {

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(gen);
  }
  return m;
}

inline std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("olfalign_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string read(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixture
