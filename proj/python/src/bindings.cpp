#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "olfalign/cli.hpp"
#include "olfalign/core_data.hpp"
#include "olfalign/error.hpp"
#include "olfalign/log.hpp"
#include "olfalign/metrics.hpp"
#include "olfalign/physchem.hpp"
#include "olfalign/pipelines.hpp"
#include "olfalign/preproc.hpp"
#include "olfalign/probes.hpp"
#include "olfalign/rsa.hpp"

namespace py = pybind11;
using namespace olfalign;

namespace {

Layer to_layer(const py::object& value) {
  if (value.is_none()) return Layer::final_layer();
  if (py::isinstance<py::int_>(value)) return Layer::at(value.cast<int>());
  return Layer::parse(value.cast<std::string>());
}

std::vector<MoleculeId> to_ids(const std::vector<std::string>& tokens) {
  std::vector<MoleculeId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.emplace_back(t);
  return ids;
}

std::vector<std::string> id_strings(const std::vector<MoleculeId>& ids) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(id.str());
  return out;
}

std::vector<std::string> odorant_keys(const std::vector<Odorant>& odorants) {
  std::vector<std::string> out;
  out.reserve(odorants.size());
  for (const auto& o : odorants) out.push_back(o.key());
  return out;
}

std::vector<Odorant> parse_keys(const std::vector<std::string>& keys) {
  std::vector<Odorant> out;
  out.reserve(keys.size());
  for (const auto& k : keys) out.push_back(parse_odorant_key(k));
  return out;
}

SplitPlan make_plan(int repetitions, double test_fraction, int inner_folds, std::uint64_t seed) {
  SplitPlan plan;
  plan.repetitions = repetitions;
  plan.test_fraction = test_fraction;
  plan.inner_folds = inner_folds;
  plan.base_seed = seed;
  return plan;
}

PipelineOptions make_options(bool pca, Index pca_k, bool zscore, const std::string& pca_fit, int jobs) {
  PipelineOptions options;
  options.preprocessing.pca = pca;
  options.preprocessing.pca_k = pca_k;
  options.preprocessing.zscore = zscore;
  if (pca_fit == "global") options.preprocessing.pca_fit = PcaFit::global;
  else if (pca_fit == "per_split") options.preprocessing.pca_fit = PcaFit::per_split;
  else throw ArgumentError("pca_fit must be 'per_split' or 'global'");
  options.jobs = jobs;
  return options;
}

HyperGrid make_grid(const std::optional<std::vector<double>>& values, bool relative, HyperGrid fallback) {
  if (!values) return fallback;
  HyperGrid grid{*values, relative};
  grid.validate();
  return grid;
}

py::dict row_dict(const ReportRow& row) {
  py::dict d;
  d["dataset"] = row.dataset;
  d["model"] = row.model;
  d["layer"] = row.layer;
  d["descriptor"] = row.descriptor;
  d["metric"] = row.metric;
  d["mean"] = row.mean;
  d["std"] = row.std ? py::cast(*row.std) : py::none();
  d["n"] = row.n;
  d["input_digest"] = row.input_digest;
  return d;
}

py::dict rsa_dict(const RsaResult& r) {
  py::dict d;
  d["r"] = r.r;
  d["p"] = r.p;
  d["n_pairs"] = r.n_pairs;
  d["dropped"] = r.dropped;
  d["model"] = r.model_name;
  d["layer"] = r.layer.to_string();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Olfactory representational alignment toolkit (C++ core)";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<SchemaError>(m, "SchemaError", error);
  py::register_exception<IngestionError>(m, "IngestionError", error);
  py::register_exception<LookupError>(m, "LookupError", error);
  py::register_exception<JoinError>(m, "JoinError", error);
  py::register_exception<DimensionError>(m, "DimensionError", error);
  py::register_exception<ArgumentError>(m, "ArgumentError", error);
  py::register_exception<DegenerateTargetError>(m, "DegenerateTargetError", error);
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", error);
  py::register_exception<SelectionError>(m, "SelectionError", error);

  m.def(
      "set_log_level",
      [](const std::string& level) {
        static const std::map<std::string, log::Level> levels{{"debug", log::Level::debug},
                                                              {"info", log::Level::info},
                                                              {"warn", log::Level::warn},
                                                              {"error", log::Level::error},
                                                              {"off", log::Level::off}};
        const auto it = levels.find(level);
        if (it == levels.end()) throw ArgumentError("unknown log level '" + level + "'");
        log::set_level(it->second);
      },
      py::arg("level"));

  // core data -------------------------------------------------------------
  m.def(
      "parse_odorant_key",
      [](const std::string& key) {
        const auto o = parse_odorant_key(key);
        std::vector<std::string> parts;
        for (const auto& c : o.components()) parts.push_back(c.str());
        return parts;
      },
      py::arg("key"), "Components of a ';'-joined odorant key.");

  py::class_<EmbeddingTable>(m, "EmbeddingTable")
      .def(py::init([](const std::vector<std::string>& ids, const Eigen::MatrixXd& matrix, const std::string& model,
                       const py::object& layer) { return EmbeddingTable(to_ids(ids), matrix, model, to_layer(layer)); }),
           py::arg("ids"), py::arg("matrix"), py::arg("model_name"), py::arg("layer") = py::none())
      .def_property_readonly("ids", [](const EmbeddingTable& t) { return id_strings(t.ids()); })
      .def_property_readonly("matrix", [](const EmbeddingTable& t) { return Eigen::MatrixXd(t.matrix()); })
      .def_property_readonly("model_name", &EmbeddingTable::model_name)
      .def_property_readonly("layer", [](const EmbeddingTable& t) { return t.layer().to_string(); })
      .def_property_readonly("rows", &EmbeddingTable::rows)
      .def_property_readonly("dim", &EmbeddingTable::dim)
      .def("scaled", &EmbeddingTable::scaled, py::arg("factor"))
      .def(
          "mixture_embedding",
          [](const EmbeddingTable& t, const std::string& key) {
            return Eigen::VectorXd(mixture_embedding(t, parse_odorant_key(key)));
          },
          py::arg("key"))
      .def("__repr__", [](const EmbeddingTable& t) {
        return "<EmbeddingTable model='" + t.model_name() + "' layer=" + t.layer().to_string() +
               " rows=" + std::to_string(t.rows()) + " dim=" + std::to_string(t.dim()) + ">";
      });

  m.def("load_embedding_table", &load_embedding_table, py::arg("csv_path"), py::arg("manifest_path"));
  m.def("write_embedding_table", &write_embedding_table, py::arg("table"), py::arg("csv_path"),
        py::arg("manifest_path"));

  py::class_<BinaryLabelSet>(m, "BinaryLabelSet")
      .def(py::init([](const std::vector<std::string>& keys, const std::vector<std::string>& descriptors,
                       const Eigen::MatrixXd& labels) { return BinaryLabelSet(parse_keys(keys), descriptors, labels); }),
           py::arg("odorants"), py::arg("descriptors"), py::arg("labels"))
      .def_property_readonly("odorants", [](const BinaryLabelSet& s) { return odorant_keys(s.odorants()); })
      .def_property_readonly("descriptors", &BinaryLabelSet::descriptors)
      .def_property_readonly("labels", [](const BinaryLabelSet& s) { return Eigen::MatrixXd(s.labels()); });

  py::class_<RatingSet>(m, "RatingSet")
      .def(py::init([](const std::vector<std::string>& keys, const std::vector<std::string>& descriptors,
                       const Eigen::MatrixXd& ratings, std::pair<double, double> range) {
             return RatingSet(parse_keys(keys), descriptors, ratings, {range.first, range.second});
           }),
           py::arg("odorants"), py::arg("descriptors"), py::arg("ratings"), py::arg("range"))
      .def_property_readonly("odorants", [](const RatingSet& s) { return odorant_keys(s.odorants()); })
      .def_property_readonly("descriptors", &RatingSet::descriptors)
      .def_property_readonly("ratings", [](const RatingSet& s) { return Eigen::MatrixXd(s.ratings()); })
      .def_property_readonly("range", [](const RatingSet& s) { return std::make_pair(s.range().lo, s.range().hi); });

  py::class_<PerSubjectRatings>(m, "PerSubjectRatings")
      .def(py::init([](const std::vector<std::string>& subjects, const std::vector<std::string>& keys,
                       const std::vector<std::string>& descriptors, const std::vector<Eigen::MatrixXd>& ratings) {
             return PerSubjectRatings(subjects, parse_keys(keys), descriptors, ratings);
           }),
           py::arg("subjects"), py::arg("odorants"), py::arg("descriptors"), py::arg("ratings"))
      .def_property_readonly("subjects", &PerSubjectRatings::subjects)
      .def_property_readonly("odorants", [](const PerSubjectRatings& s) { return odorant_keys(s.odorants()); })
      .def_property_readonly("descriptors", &PerSubjectRatings::descriptors)
      .def("subject", [](const PerSubjectRatings& s, std::size_t i) { return Eigen::MatrixXd(s.subject(i)); });

  py::class_<SimilarityJudgmentSet>(m, "SimilarityJudgmentSet")
      .def(py::init([](const std::vector<std::pair<std::string, std::string>>& pairs, std::vector<double> scores,
                       std::pair<double, double> range, const std::string& polarity) {
             std::vector<std::pair<Odorant, Odorant>> p;
             for (const auto& [a, b] : pairs) p.emplace_back(parse_odorant_key(a), parse_odorant_key(b));
             if (polarity != "similarity" && polarity != "distance") {
               throw ArgumentError("polarity must be 'similarity' or 'distance'");
             }
             return SimilarityJudgmentSet(std::move(p), std::move(scores), {range.first, range.second},
                                          polarity == "distance" ? Polarity::distance : Polarity::similarity);
           }),
           py::arg("pairs"), py::arg("scores"), py::arg("range"), py::arg("polarity") = "similarity")
      .def_property_readonly("pairs",
                             [](const SimilarityJudgmentSet& s) {
                               std::vector<std::pair<std::string, std::string>> out;
                               for (const auto& [a, b] : s.pairs()) out.emplace_back(a.key(), b.key());
                               return out;
                             })
      .def_property_readonly("scores", &SimilarityJudgmentSet::scores)
      .def_property_readonly("polarity",
                             [](const SimilarityJudgmentSet& s) {
                               return s.polarity() == Polarity::distance ? "distance" : "similarity";
                             })
      .def("__len__", &SimilarityJudgmentSet::size);

  m.def("load_labels", &load_labels, py::arg("path"));
  m.def("load_ratings", &load_ratings, py::arg("path"), py::arg("sidecar") = std::nullopt);
  m.def("load_per_subject", &load_per_subject, py::arg("path"), py::arg("sidecar") = std::nullopt);
  m.def("load_pairs", &load_pairs, py::arg("path"), py::arg("sidecar") = std::nullopt);

  // preprocessing ------------------------------------------------------------
  py::class_<PcaModel>(m, "PcaModel")
      .def_readonly("mean", &PcaModel::mean)
      .def_readonly("components", &PcaModel::components)
      .def_readonly("explained_variance", &PcaModel::explained_variance)
      .def_readonly("truncated", &PcaModel::truncated)
      .def_property_readonly("k", &PcaModel::k)
      .def("transform", [](const PcaModel& model, const Eigen::MatrixXd& X) { return apply_pca(model, X); })
      .def("inverse_transform",
           [](const PcaModel& model, const Eigen::MatrixXd& scores) { return reconstruct_pca(model, scores); });
  m.def(
      "fit_pca", [](const Eigen::MatrixXd& X, Index k, bool strict) { return fit_pca(X, k, {.strict = strict}); },
      py::arg("X"), py::arg("k"), py::arg("strict") = false);
  m.def(
      "cosine_similarity",
      [](const Eigen::VectorXd& u, const Eigen::VectorXd& v) { return cosine_similarity(u, v); }, py::arg("u"),
      py::arg("v"));

  // metrics ------------------------------------------------------------------
  m.def(
      "roc_auc", [](const std::vector<double>& s, const std::vector<double>& l) { return roc_auc(s, l); },
      py::arg("scores"), py::arg("labels"));
  m.def("roc_auc_micro", &roc_auc_micro, py::arg("scores"), py::arg("labels"));
  m.def(
      "nrmse", [](const std::vector<double>& t, const std::vector<double>& p) { return nrmse(t, p); },
      py::arg("y_true"), py::arg("y_pred"));
  m.def(
      "pearson",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const auto r = pearson(x, y);
        return std::make_pair(r.r, r.p);
      },
      py::arg("x"), py::arg("y"), "(r, two-sided p) with n - 2 degrees of freedom.");
  m.def(
      "noise_ceiling",
      [](const PerSubjectRatings& data, bool leave_one_out) {
        const auto nc = noise_ceiling(data, {.leave_one_out = leave_one_out});
        py::dict d;
        d["descriptors"] = nc.descriptors;
        d["per_descriptor"] = nc.per_descriptor;
        d["per_subject"] = nc.per_subject;
        d["mean"] = nc.overall.mean;
        d["std"] = nc.overall.std;
        return d;
      },
      py::arg("data"), py::arg("leave_one_out") = false);

  // probes -------------------------------------------------------------------
  m.def(
      "make_splits",
      [](Index n, int repetitions, double test_fraction, int inner_folds, std::uint64_t seed) {
        auto plan = make_plan(repetitions, test_fraction, inner_folds, seed);
        plan.n = n;
        std::vector<std::pair<std::vector<Index>, std::vector<Index>>> out;
        for (auto& s : make_splits(plan)) out.emplace_back(std::move(s.train), std::move(s.test));
        return out;
      },
      py::arg("n"), py::arg("repetitions") = 30, py::arg("test_fraction") = 0.2, py::arg("inner_folds") = 5,
      py::arg("seed"));
  m.def(
      "fit_logistic",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2) {
        const auto model = fit_logistic(X, y, l2);
        return std::make_pair(model.weights, model.bias);
      },
      py::arg("X"), py::arg("y"), py::arg("l2_strength"), "(weights, bias) of an L2-regularized logistic fit.");
  m.def(
      "fit_lasso",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha) {
        const auto model = fit_lasso(X, y, alpha);
        return std::make_pair(model.weights, model.bias);
      },
      py::arg("X"), py::arg("y"), py::arg("alpha"), "(weights, bias) minimizing |y - Xw - b|^2 / 2n + alpha |w|_1.");
  m.def("lasso_alpha_max", &lasso_alpha_max, py::arg("X"), py::arg("y"));

  // rsa ----------------------------------------------------------------------
  m.def(
      "pairwise_model_similarities",
      [](const EmbeddingTable& table, const SimilarityJudgmentSet& pairs, bool angle) {
        const auto s =
            pairwise_model_similarities(table, pairs, angle ? SimilarityMeasure::angle : SimilarityMeasure::cosine);
        return std::make_pair(s.values, s.pair_indices);
      },
      py::arg("table"), py::arg("pairs"), py::arg("angle") = false, "(similarities, indices of the scored pairs)");
  m.def(
      "run_rsa",
      [](const EmbeddingTable& table, const SimilarityJudgmentSet& pairs, bool angle) {
        return rsa_dict(run_rsa(table, pairs, angle ? SimilarityMeasure::angle : SimilarityMeasure::cosine));
      },
      py::arg("table"), py::arg("pairs"), py::arg("angle") = false);

  // pipelines ----------------------------------------------------------------
  py::class_<AlignmentReport>(m, "AlignmentReport")
      .def_readonly("task", &AlignmentReport::task)
      .def_readonly("seed", &AlignmentReport::seed)
      .def_property_readonly("rows",
                             [](const AlignmentReport& r) {
                               py::list rows;
                               for (const auto& row : r.rows) rows.append(row_dict(row));
                               return rows;
                             })
      .def_property_readonly("config", [](const AlignmentReport& r) { return r.snapshot().dump(); })
      .def("to_csv", &AlignmentReport::to_csv)
      .def("write", &AlignmentReport::write, py::arg("directory"))
      .def("__len__", [](const AlignmentReport& r) { return r.rows.size(); });

  m.def(
      "run_label_classification",
      [](const EmbeddingTable& table, const BinaryLabelSet& labels, std::uint64_t seed, const std::string& dataset,
         int repetitions, double test_fraction, int inner_folds, std::optional<std::vector<double>> grid, bool pca,
         Index pca_k, bool zscore, const std::string& pca_fit, bool stratify, int jobs) {
        auto options = make_options(pca, pca_k, zscore, pca_fit, jobs);
        options.stratify = stratify;
        return run_label_classification(join(table, labels, dataset),
                                        make_plan(repetitions, test_fraction, inner_folds, seed),
                                        make_grid(grid, false, HyperGrid::default_logistic()), options)
            .report;
      },
      py::arg("table"), py::arg("labels"), py::kw_only(), py::arg("seed"), py::arg("dataset") = "labels",
      py::arg("repetitions") = 30, py::arg("test_fraction") = 0.2, py::arg("inner_folds") = 5,
      py::arg("grid") = std::nullopt, py::arg("pca") = true, py::arg("pca_k") = 20, py::arg("zscore") = true,
      py::arg("pca_fit") = "per_split", py::arg("stratify") = false, py::arg("jobs") = 1);

  m.def(
      "run_rating_regression",
      [](const EmbeddingTable& table, const RatingSet& ratings, std::uint64_t seed, const std::string& dataset,
         int repetitions, double test_fraction, int inner_folds, std::optional<std::vector<double>> grid,
         bool grid_relative, bool pca, Index pca_k, bool zscore, const std::string& pca_fit, int jobs) {
        return run_rating_regression(join(table, ratings, dataset),
                                     make_plan(repetitions, test_fraction, inner_folds, seed),
                                     make_grid(grid, grid_relative, HyperGrid::default_lasso()),
                                     make_options(pca, pca_k, zscore, pca_fit, jobs))
            .report;
      },
      py::arg("table"), py::arg("ratings"), py::kw_only(), py::arg("seed"), py::arg("dataset") = "ratings",
      py::arg("repetitions") = 30, py::arg("test_fraction") = 0.2, py::arg("inner_folds") = 5,
      py::arg("grid") = std::nullopt, py::arg("grid_relative") = false, py::arg("pca") = true, py::arg("pca_k") = 20,
      py::arg("zscore") = true, py::arg("pca_fit") = "per_split", py::arg("jobs") = 1);

  m.def(
      "run_similarity_rsa",
      [](const std::vector<EmbeddingTable>& tables, const std::map<std::string, SimilarityJudgmentSet>& datasets,
         bool angle) {
        std::vector<NamedPairs> named;
        for (const auto& [name, pairs] : datasets) named.push_back({name, pairs, ""});
        return run_similarity_rsa(tables, named, angle ? SimilarityMeasure::angle : SimilarityMeasure::cosine).report;
      },
      py::arg("tables"), py::arg("datasets"), py::arg("angle") = false);

  m.def(
      "run_noise_ceiling",
      [](const PerSubjectRatings& data, const std::string& dataset, bool leave_one_out) {
        return run_noise_ceiling(data, dataset, {.leave_one_out = leave_one_out}).report;
      },
      py::arg("data"), py::arg("dataset") = "ratings", py::arg("leave_one_out") = false);

  m.def(
      "run_physchem",
      [](const std::vector<EmbeddingTable>& tables, const std::vector<std::string>& ids,
         const std::vector<std::string>& names, const Eigen::MatrixXd& values, std::uint64_t seed, int repetitions,
         double test_fraction, int inner_folds, int jobs) {
        const DescriptorTable descriptors(to_ids(ids), names, values);
        PipelineOptions options;
        options.jobs = jobs;
        return run_physchem(tables, descriptors, make_plan(repetitions, test_fraction, inner_folds, seed),
                            HyperGrid::default_lasso(), options)
            .report;
      },
      py::arg("tables"), py::arg("ids"), py::arg("names"), py::arg("values"), py::kw_only(), py::arg("seed"),
      py::arg("repetitions") = 30, py::arg("test_fraction") = 0.2, py::arg("inner_folds") = 5, py::arg("jobs") = 1);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "olfalign");
        py::gil_scoped_release release;
        return cli::execute(args);
      },
      py::arg("args"), "Runs one olfalign subcommand and returns its exit code.");
}
