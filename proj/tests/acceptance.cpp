// Acceptance checks. Each criterion prints exactly one PASS/FAIL line;
// `olfalign_acceptance <name>` runs one, no argument runs all.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "olfalign/log.hpp"
#include "olfalign/metrics.hpp"
#include "olfalign/pipelines.hpp"
#include "olfalign/plots.hpp"
#include "olfalign/preproc.hpp"
#include "olfalign/probes.hpp"
#include "olfalign/rsa.hpp"
#include "support.hpp"

using namespace olfalign;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* pattern, auto... values) {
  char buffer[512];
  std::snprintf(buffer, sizeof(buffer), pattern, values...);
  return buffer;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

// ---------------------------------------------------------------------------

Outcome metric_oracle() {
  std::mt19937_64 gen(20240601);
  std::uniform_int_distribution<int> rows(2, 1000);
  std::uniform_int_distribution<int> cols(1, 10);
  std::uniform_int_distribution<int> levels(2, 50);
  double auc_err = 0.0, r_err = 0.0, nrmse_err = 0.0;
  double library_time = 0.0;
  Stopwatch total;
  for (int f = 0; f < 100; ++f) {
    const int n = rows(gen);
    const int d = std::min(cols(gen), 10000 / n);
    // Scores on a coarse grid so ties between classes are frequent.
    const int q = levels(gen);
    std::uniform_int_distribution<int> level(0, q - 1);
    std::bernoulli_distribution positive(0.05 + 0.9 * (f % 10) / 10.0);
    Eigen::MatrixXd scores(n, d), labels(n, d);
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < n; ++i) {
        scores(i, j) = f % 3 == 0 ? std::sin(i * 1.7 + j * 0.3 + f) : level(gen) / static_cast<double>(q);
        labels(i, j) = positive(gen) ? 1.0 : 0.0;
      }
    }
    labels(0, 0) = 1.0;
    labels(n - 1, d - 1) = 0.0;
    if (n * d >= 2 && labels(0, 0) == labels(n - 1, d - 1)) labels(n - 1, d - 1) = 0.0;

    Stopwatch lib;
    const double auc = roc_auc_micro(scores, labels);
    library_time += lib.seconds();
    const std::vector<double> s(scores.data(), scores.data() + scores.size());
    const std::vector<double> l(labels.data(), labels.data() + labels.size());
    auc_err = std::max(auc_err, std::abs(auc - oracle::brute_force_auc(s, l)));

    if (n >= 3) {
      const Eigen::MatrixXd xy = fixture::gaussian(n, 2, 7000 + f);
      std::vector<double> x = fixture::to_vector(xy.col(0));
      std::vector<double> y = fixture::to_vector(xy.col(1));
      for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] += 0.5 * x[static_cast<std::size_t>(i)] * (f % 4);
      Stopwatch lib2;
      const double r = pearson(x, y).r;
      const double e = nrmse(x, y);
      library_time += lib2.seconds();
      r_err = std::max(r_err, std::abs(r - oracle::pearson_r(x, y)));
      nrmse_err = std::max(nrmse_err, std::abs(e - oracle::nrmse(x, y)));
    }
  }
  const double elapsed = total.seconds();
  const bool pass = auc_err <= 1e-12 && r_err <= 1e-12 && nrmse_err <= 1e-12 && elapsed < 10.0;
  return {pass, fmt("100 fixtures, max |auc-oracle|=%.3g, |r-oracle|=%.3g, |nrmse-oracle|=%.3g, %.2fs (library %.3fs)",
                    auc_err, r_err, nrmse_err, elapsed, library_time)};
}

// ---------------------------------------------------------------------------

double kkt_violation(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LinearModel& m, double alpha) {
  const Eigen::VectorXd r = y - X * m.weights - Eigen::VectorXd::Constant(y.size(), m.bias);
  const Eigen::VectorXd g = X.transpose() * r / static_cast<double>(y.size());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double v = m.weights(j) != 0.0 ? std::abs(g(j) - alpha * (m.weights(j) > 0 ? 1.0 : -1.0))
                                         : std::max(0.0, std::abs(g(j)) - alpha);
    worst = std::max(worst, v);
  }
  return worst;
}

Outcome optimization() {
  Stopwatch total;
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<int> rows(30, 200);
  std::uniform_real_distribution<double> frac(0.001, 0.9);
  double kkt = 0.0, ls = 0.0, logit = 0.0;
  for (int p = 0; p < 50; ++p) {
    const int n = rows(gen);
    const int k = std::uniform_int_distribution<int>(2, std::min(40, n / 3))(gen);
    Eigen::MatrixXd X = fixture::gaussian(n, k, 100 + p);
    X.col(0) *= 5.0;  // uneven column scales
    Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
    for (int j = 0; j < k; j += 3) w(j) = std::sin(j + p) * 2.0;
    const Eigen::VectorXd y = X * w + fixture::gaussian(n, 1, 200 + p).col(0) + Eigen::VectorXd::Constant(n, 1.5);
    const double alpha = frac(gen) * lasso_alpha_max(X, y);
    kkt = std::max(kkt, kkt_violation(X, y, fit_lasso(X, y, alpha), alpha));

    const auto zero = fit_lasso(X, y, 0.0);
    const auto [w_ls, b_ls] = oracle::least_squares(X, y);
    ls = std::max({ls, (zero.weights - w_ls).cwiseAbs().maxCoeff(), std::abs(zero.bias - b_ls)});
  }
  for (int p = 0; p < 20; ++p) {
    const int n = std::uniform_int_distribution<int>(40, 300)(gen);
    const int k = std::uniform_int_distribution<int>(2, 15)(gen);
    const Eigen::MatrixXd X = fixture::gaussian(n, k, 300 + p);
    const Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(k, -1.5, 2.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = u(gen) < 1.0 / (1.0 + std::exp(-X.row(i).dot(w) + 0.4)) ? 1.0 : 0.0;
    if (y.minCoeff() == y.maxCoeff()) y(0) = 1.0 - y(0);
    const double lambda = std::pow(10.0, -3.0 + 4.0 * p / 19.0);
    const auto model = fit_logistic(X, y, lambda);
    const Eigen::VectorXd ref = oracle::newton_logistic(X, y, lambda);
    logit = std::max({logit, (model.weights - ref.head(k)).cwiseAbs().maxCoeff(), std::abs(model.bias - ref(k))});
  }
  const double elapsed = total.seconds();
  const bool pass = kkt < 1e-6 && ls < 1e-8 && logit < 1e-4 && elapsed < 60.0;
  return {pass, fmt("lasso KKT max violation %.3g over 50 problems, |w(0)-LS| %.3g, logistic |theta-Newton| %.3g "
                    "over 20 problems, %.2fs",
                    kkt, ls, logit, elapsed)};
}

// ---------------------------------------------------------------------------

Outcome pca() {
  const std::vector<std::pair<int, int>> shapes{{10, 5}, {30, 8}, {50, 20}, {25, 40}, {100, 12}, {12, 12}};
  double comp_err = 0.0, var_err = 0.0;
  bool monotone = true;
  int fixtures = 0;
  for (std::size_t s = 0; s < shapes.size(); ++s) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto [n, d] = shapes[s];
      Eigen::MatrixXd X = fixture::gaussian(n, d, 900 + 10 * s + seed);
      for (int j = 0; j < d; ++j) X.col(j) *= 1.0 + 0.5 * j;  // separated spectrum
      const Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
      const auto svd = oracle::jacobi_svd(centered);
      const int k = std::min(n - 1, d);
      const auto model = fit_pca(X, k);
      for (int j = 0; j < k; ++j) {
        const Eigen::VectorXd ours = model.components.row(j).transpose();
        const Eigen::VectorXd ref = svd.right.col(j);
        const double sign = ours.dot(ref) < 0 ? -1.0 : 1.0;
        comp_err = std::max(comp_err, (ours - sign * ref).cwiseAbs().maxCoeff());
        const double v = svd.values(j) * svd.values(j) / (n - 1);
        var_err = std::max(var_err, std::abs(model.explained_variance(j) - v) / v);
      }
      double previous = std::numeric_limits<double>::infinity();
      for (int kk = 1; kk <= k; ++kk) {
        const auto m = fit_pca(X, kk);
        const double err = (reconstruct_pca(m, apply_pca(m, X)) - X).squaredNorm();
        monotone = monotone && err <= previous * (1.0 + 1e-12) + 1e-12;
        previous = err;
      }
      ++fixtures;
    }
  }
  const bool pass = comp_err < 1e-8 && var_err < 1e-8 && monotone;
  return {pass, fmt("%d fixtures vs one-sided Jacobi SVD: max component diff %.3g (up to sign), variance rel diff %.3g; "
                    "reconstruction error non-increasing in k: %s",
                    fixtures, comp_err, var_err, monotone ? "yes" : "no")};
}

// ---------------------------------------------------------------------------

struct PlantedRun {
  double clean = 0.0;
  double noisy = 0.0;
  double bayes = 0.0;
  double seconds = 0.0;
};

PlantedRun planted_alignment(bool with_pca) {
  const Eigen::Index n = 200, d = 50, targets = 3;
  const Eigen::MatrixXd X = fixture::gaussian(n, d, 4242);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(d, targets);
  std::mt19937_64 gen(99);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(d) - 1);
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  for (Eigen::Index t = 0; t < targets; ++t) {
    for (int s = 0; s < 5; ++s) W(pick(gen), t) = mag(gen) * (s % 2 == 0 ? 1.0 : -1.0);
  }
  const Eigen::MatrixXd clean = X * W;

  // With unit Gaussian features, var(x.w) = |w|^2, so noise variance
  // |w|^2 (1/rho^2 - 1) puts the Bayes-optimal correlation at rho.
  const double rho = 0.70;
  Eigen::MatrixXd noisy = clean;
  const Eigen::MatrixXd e = fixture::gaussian(n, targets, 4343);
  for (Eigen::Index t = 0; t < targets; ++t) {
    noisy.col(t) += e.col(t) * std::sqrt(W.col(t).squaredNorm() * (1.0 / (rho * rho) - 1.0));
  }

  std::vector<std::string> keys, names{"t0", "t1", "t2"};
  for (Eigen::Index i = 0; i < n; ++i) keys.push_back("r" + std::to_string(i));
  const SplitPlan plan{.n = n, .repetitions = 30, .test_fraction = 0.2, .inner_folds = 5, .base_seed = 2024};
  ProbeConfig config;
  config.kind = ModelKind::lasso;
  config.grid = HyperGrid::default_lasso();
  config.preprocessing.pca = with_pca;
  config.preprocessing.pca_k = 20;

  const auto mean_cc = [&](const Eigen::MatrixXd& Y) {
    const auto scores = score_regression(run_probe_protocol(X, Y, names, keys, plan, config));
    double sum = 0.0;
    for (const auto& s : scores) sum += summarize(s.cc).mean;
    return sum / static_cast<double>(scores.size());
  };
  Stopwatch watch;
  PlantedRun out;
  out.clean = mean_cc(clean);
  out.noisy = mean_cc(noisy);
  out.bayes = rho;
  out.seconds = watch.seconds();
  return out;
}

Outcome planted_recovery() {
  const auto run = planted_alignment(true);
  const auto reference = planted_alignment(false);
  std::cout << fmt("[INFO] planted_recovery without PCA (same data, seeds, lasso + nested CV): noise-free CC %.4f, "
                   "noisy CC %.4f (Bayes %.2f), %.1fs",
                   reference.clean, reference.noisy, reference.bayes, reference.seconds)
            << '\n';
  const bool pass = run.clean >= 0.99 && std::abs(run.noisy - run.bayes) <= 0.05 && run.seconds < 300.0;
  return {pass, fmt("PCA-20 -> z-score -> lasso nested CV, 30 splits, X 200x50 unit Gaussian: noise-free mean CC %.4f "
                    "(need >= 0.99), noisy mean CC %.4f (need %.2f +/- 0.05), %.1fs",
                    run.clean, run.noisy, run.bayes, run.seconds)};
}

// ---------------------------------------------------------------------------

EmbeddingTable random_table(int rows, int dim, std::uint64_t seed) {
  std::vector<MoleculeId> ids;
  for (int i = 0; i < rows; ++i) ids.emplace_back("m" + std::to_string(i));
  return EmbeddingTable(ids, fixture::gaussian(rows, dim, seed), "toy", Layer::final_layer());
}

std::vector<std::pair<Odorant, Odorant>> all_pairs(int rows) {
  std::vector<std::pair<Odorant, Odorant>> pairs;
  for (int i = 0; i < rows; ++i) {
    for (int j = i + 1; j < rows; ++j) {
      pairs.emplace_back(parse_odorant_key("m" + std::to_string(i)), parse_odorant_key("m" + std::to_string(j)));
    }
  }
  for (int i = 0; i + 3 < rows; i += 2) {
    pairs.emplace_back(parse_odorant_key("m" + std::to_string(i) + ";m" + std::to_string(i + 1)),
                       parse_odorant_key("m" + std::to_string(i + 3)));
  }
  return pairs;
}

Outcome rsa_identity() {
  bool exact = true, bitwise = true;
  int fixtures = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto table = random_table(30, 16 + 16 * static_cast<int>(seed), 50 + seed);
    const auto pairs = all_pairs(30);
    const SimilarityJudgmentSet probe(pairs, std::vector<double>(pairs.size(), 0.0), {-1, 1}, Polarity::similarity);
    const auto sims = pairwise_model_similarities(table, probe);
    const SimilarityJudgmentSet human(pairs, sims.values, {-1, 1}, Polarity::similarity);
    const auto r = rsa_correlation(sims.values, human);
    exact = exact && r.r == 1.0;

    // Independent human scores, original vs scaled embeddings.
    const Eigen::MatrixXd noise = fixture::gaussian(static_cast<Eigen::Index>(pairs.size()), 1, 60 + seed);
    std::vector<double> scores(pairs.size());
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = std::tanh(noise(static_cast<Eigen::Index>(i), 0));
    const std::vector<NamedPairs> datasets{{"same", human, "sha256:x"},
                                           {"other", SimilarityJudgmentSet(pairs, scores, {-1, 1}, Polarity::similarity),
                                            "sha256:y"}};
    const std::vector<std::string> digest{"sha256:t"};
    const auto a = run_similarity_rsa(std::vector<EmbeddingTable>{table}, datasets, SimilarityMeasure::cosine, digest);
    const auto b =
        run_similarity_rsa(std::vector<EmbeddingTable>{table.scaled(3.7)}, datasets, SimilarityMeasure::cosine, digest);
    exact = exact && a.results[0].r == 1.0;
    bitwise = bitwise && a.report.to_csv() == b.report.to_csv();
    for (std::size_t i = 0; i < a.results.size(); ++i) {
      bitwise = bitwise && same_bits(a.results[i].r, b.results[i].r) && same_bits(a.results[i].p, b.results[i].p) &&
                a.results[i].n_pairs == b.results[i].n_pairs;
    }
    const auto sa = pairwise_model_similarities(table, probe);
    const auto sb = pairwise_model_similarities(table.scaled(3.7), probe);
    for (std::size_t i = 0; i < sa.values.size(); ++i) bitwise = bitwise && same_bits(sa.values[i], sb.values[i]);
    ++fixtures;
  }
  return {exact && bitwise, fmt("%d fixtures: r == 1.0 exactly when human = model cosine: %s; x3.7 scaling leaves "
                                "similarities, r, p and report bytes unchanged: %s",
                                fixtures, exact ? "yes" : "no", bitwise ? "yes" : "no")};
}

// ---------------------------------------------------------------------------

struct Artifacts {
  std::map<std::string, std::string> files;
};

Artifacts run_all_pipelines(int jobs, const std::filesystem::path& dir) {
  Artifacts art;
  const auto table = random_table(60, 24, 5);
  const SplitPlan plan{.repetitions = 5, .base_seed = 17};
  PipelineOptions options;
  options.jobs = jobs;

  std::vector<Odorant> odorants;
  for (int i = 0; i < 60; ++i) odorants.push_back(parse_odorant_key("m" + std::to_string(i)));
  Eigen::MatrixXd L(60, 3);
  L.col(0) = (table.matrix().col(0).array() > 0).cast<double>();
  L.col(1) = (table.matrix().col(1).array() + table.matrix().col(2).array() > 0.3).cast<double>();
  L.col(2) = 1.0 - L.col(0).array();
  const BinaryLabelSet labels(odorants, {"a", "b", "c"}, L);
  Eigen::MatrixXd R(60, 2);
  R.col(0) = table.matrix().col(3) + 0.3 * fixture::gaussian(60, 1, 6).col(0);
  R.col(1) = table.matrix().col(4) - table.matrix().col(5);
  const RatingSet ratings(odorants, {"x", "y"}, R, {-100, 100});

  const auto record = [&](const std::string& tag, const AlignmentReport& report, const PlotExtras& extras) {
    art.files[tag + "/report.csv"] = report.to_csv();
    for (const auto& p : render_plots(report, extras, dir / tag)) art.files[tag + "/" + p.filename().string()] = fixture::read(p);
  };

  const auto cls = run_label_classification(join(table, labels, "labels"), plan, HyperGrid::default_logistic(), options);
  art.files["classify/predictions.csv"] = prediction_dump_csv(cls.run);
  record("classify", cls.report, {.roc = cls.curves});

  const auto reg = run_rating_regression(join(table, ratings, "ratings"), plan, HyperGrid::default_lasso(), options);
  art.files["regress/predictions.csv"] = prediction_dump_csv(reg.run);
  record("regress", reg.report, {});

  std::vector<EmbeddingTable> layers;
  for (int l = 0; l < 3; ++l) {
    layers.emplace_back(table.ids(), table.matrix() + fixture::gaussian(60, 24, 70 + l) * (0.3 * l), "toy", Layer::at(l));
  }
  const auto pairs = all_pairs(12);
  std::vector<double> scores(pairs.size());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = std::sin(static_cast<double>(i) * 0.7);
  const std::vector<NamedPairs> datasets{{"pairs", SimilarityJudgmentSet(pairs, scores, {-1, 1}, Polarity::similarity), "sha256:p"}};
  record("rsa", run_similarity_rsa(layers, datasets).report, {});

  std::vector<std::string> names;
  for (int j = 0; j < 15; ++j) names.push_back("p" + std::to_string(j));
  Eigen::MatrixXd V(60, 15);
  for (int j = 0; j < 15; ++j) V.col(j) = table.matrix().col(j) + 0.5 * fixture::gaussian(60, 1, 80 + j).col(0);
  record("physchem", run_physchem(layers, DescriptorTable(table.ids(), names, V), plan, HyperGrid::default_lasso(), options).report, {});

  const auto rsm = build_rsm(table, std::span<const Odorant>(odorants).first(12), &datasets[0].pairs);
  std::vector<std::string> broad{"a", "b"};
  const auto scatter = run_pca_scatter(table, labels, broad, std::vector<std::string>{"c"});
  record("figures", reg.report, {.scatter = &scatter, .rsm = &rsm});
  return art;
}

Outcome determinism() {
  log::set_level(log::Level::error);
  fixture::TempDir a, b, c;
  const auto first = run_all_pipelines(1, a.path());
  const auto second = run_all_pipelines(1, b.path());
  const auto threaded = run_all_pipelines(4, c.path());
  std::size_t csv = 0, svg = 0, mismatched = 0;
  for (const auto& [name, bytes] : first.files) {
    const bool same = second.files.count(name) && second.files.at(name) == bytes && threaded.files.count(name) &&
                      threaded.files.at(name) == bytes;
    if (!same) {
      ++mismatched;
      std::cout << "  differs: " << name << '\n';
    }
    if (name.ends_with(".csv")) ++csv;
    if (name.ends_with(".svg")) ++svg;
  }
  const bool pass = mismatched == 0 && first.files.size() == second.files.size() && svg >= 5 && csv >= 5;
  return {pass, fmt("classify/regress/rsa/physchem reruns (jobs 1, 1, 4): %zu CSV and %zu SVG artifacts, %zu differ",
                    csv, svg, mismatched)};
}

// ---------------------------------------------------------------------------

Outcome noise_ceiling_identity() {
  std::mt19937_64 gen(5);
  bool exact = true;
  std::size_t descriptors_checked = 0;
  for (int f = 0; f < 20; ++f) {
    const int subjects = std::uniform_int_distribution<int>(2, 10)(gen);
    const int odorants = std::uniform_int_distribution<int>(5, 60)(gen);
    const int descriptors = std::uniform_int_distribution<int>(1, 20)(gen);
    Eigen::MatrixXd base = fixture::gaussian(odorants, descriptors, 500 + f) * (1.0 + f);
    for (int i = 0; i < odorants; i += 7) base(i, i % descriptors) = std::nan("");  // same gaps for all subjects
    std::vector<std::string> ids;
    for (int s = 0; s < subjects; ++s) ids.push_back("s" + std::to_string(s));
    std::vector<Odorant> o;
    for (int i = 0; i < odorants; ++i) o.push_back(parse_odorant_key("m" + std::to_string(i)));
    std::vector<std::string> d;
    for (int j = 0; j < descriptors; ++j) d.push_back("d" + std::to_string(j));
    const PerSubjectRatings data(ids, o, d, std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(subjects), base));
    const auto out = run_noise_ceiling(data, "identical");
    for (std::size_t j = 0; j < d.size(); ++j) {
      exact = exact && out.ceiling.defined[j] && out.ceiling.per_descriptor[j] == 1.0;
      ++descriptors_checked;
    }
    for (const auto& row : out.report.rows) {
      if (row.metric == "noise_ceiling") exact = exact && row.mean == 1.0;
    }
  }
  return {exact, fmt("20 identical-subject fixtures, %zu descriptors: NC == 1.0 exactly for all: %s", descriptors_checked,
                     exact ? "yes" : "no")};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> list{
      {"metric_oracle", metric_oracle},       {"optimization", optimization},
      {"pca", pca},                           {"planted_recovery", planted_recovery},
      {"rsa_identity", rsa_identity},         {"determinism", determinism},
      {"noise_ceiling", noise_ceiling_identity},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  log::set_level(log::Level::error);
  const std::string only = argc > 1 ? argv[1] : "";
  if (only == "--list") {
    for (const auto& [name, _] : criteria()) std::cout << name << '\n';
    return 0;
  }
  bool found = false, all_pass = true;
  for (const auto& [name, check] : criteria()) {
    if (!only.empty() && only != name) continue;
    found = true;
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (outcome.pass ? "PASS " : "FAIL ") << name << ": " << outcome.detail << std::endl;
    all_pass = all_pass && outcome.pass;
  }
  if (!found) {
    std::cerr << "unknown criterion '" << only << "'\n";
    return 2;
  }
  return all_pass ? 0 : 1;
}
