#include "olfalign/physchem.hpp"

#include <cmath>
#include <set>

#include "olfalign/csv.hpp"
#include "olfalign/error.hpp"
#include "olfalign/log.hpp"
#include "olfalign/rsa.hpp"

namespace olfalign {

DescriptorTable::DescriptorTable(std::vector<MoleculeId> ids, std::vector<std::string> names, Eigen::MatrixXd values)
    : ids_(std::move(ids)), names_(std::move(names)), values_(std::move(values)) {
  if (static_cast<Index>(names_.size()) != kPhyschemDescriptorCount) {
    throw SchemaError("descriptor table needs " + std::to_string(kPhyschemDescriptorCount) + " columns, got " +
                      std::to_string(names_.size()));
  }
  if (values_.rows() != static_cast<Index>(ids_.size()) || values_.cols() != static_cast<Index>(names_.size())) {
    throw DimensionError("descriptor matrix shape does not match ids/names");
  }
  if (!values_.allFinite()) throw SchemaError("descriptor table holds a non-finite value");
  std::set<std::string> seen;
  for (const auto& id : ids_) {
    if (!seen.insert(id.str()).second) throw SchemaError("descriptor table: duplicate id '" + id.str() + "'");
  }
  if (std::set<std::string>(names_.begin(), names_.end()).size() != names_.size()) {
    throw SchemaError("descriptor table: duplicate descriptor name");
  }
}

DescriptorTable DescriptorTable::permuted_columns(std::span<const Index> order) const {
  if (static_cast<Index>(order.size()) != values_.cols()) throw DimensionError("column permutation has the wrong length");
  std::vector<std::string> names;
  Eigen::MatrixXd values(values_.rows(), values_.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    names.push_back(names_.at(static_cast<std::size_t>(order[k])));
    values.col(static_cast<Index>(k)) = values_.col(order[k]);
  }
  return DescriptorTable(ids_, std::move(names), std::move(values));
}

DescriptorTable load_descriptor_table(const std::filesystem::path& path) {
  const auto doc = csv::read_file(path);
  if (doc.header.empty() || doc.header[0] != "id") throw SchemaError(doc.source + ": first header column must be 'id'");
  std::vector<std::string> names(doc.header.begin() + 1, doc.header.end());
  if (static_cast<Index>(names.size()) != kPhyschemDescriptorCount) {
    throw SchemaError(doc.source + ": expected " + std::to_string(kPhyschemDescriptorCount) +
                      " descriptor columns, found " + std::to_string(names.size()));
  }
  std::vector<MoleculeId> ids;
  Eigen::MatrixXd values(static_cast<Index>(doc.rows.size()), kPhyschemDescriptorCount);
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto where = doc.source + ":" + std::to_string(doc.line_numbers[r]);
    const auto& row = doc.rows[r];
    if (row.size() != doc.header.size()) throw SchemaError(where + ": wrong number of fields");
    try {
      ids.emplace_back(row[0]);
    } catch (const SchemaError& e) {
      throw SchemaError(where + ": " + e.what());
    }
    for (std::size_t c = 1; c < row.size(); ++c) {
      const auto v = csv::parse_double(row[c]);
      if (!v || !std::isfinite(*v)) throw SchemaError(where + " column '" + doc.header[c] + "': not a finite number");
      values(static_cast<Index>(r), static_cast<Index>(c - 1)) = *v;
    }
  }
  try {
    return DescriptorTable(std::move(ids), std::move(names), std::move(values));
  } catch (const SchemaError& e) {
    throw SchemaError(doc.source + ": " + e.what());
  }
}

DecodingResult run_physchem_decoding(const EmbeddingTable& table, const DescriptorTable& descriptors,
                                     const SplitPlan& plan, ProbeConfig config) {
  config.kind = ModelKind::lasso;
  config.preprocessing.zscore_targets = true;

  std::vector<Index> embedding_rows;
  std::vector<Index> descriptor_rows;
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < descriptors.ids().size(); ++i) {
    if (const auto row = table.find(descriptors.ids()[i])) {
      embedding_rows.push_back(*row);
      descriptor_rows.push_back(static_cast<Index>(i));
      keys.push_back(descriptors.ids()[i].str());
    }
  }
  if (embedding_rows.empty()) throw JoinError("no descriptor-table id is present in table '" + table.model_name() + "'");

  const auto n = static_cast<Index>(embedding_rows.size());
  Eigen::MatrixXd X(n, table.dim());
  Eigen::MatrixXd all_targets(n, descriptors.values().cols());
  for (Index i = 0; i < n; ++i) {
    X.row(i) = table.matrix().row(embedding_rows[static_cast<std::size_t>(i)]);
    all_targets.row(i) = descriptors.values().row(descriptor_rows[static_cast<std::size_t>(i)]);
  }

  DecodingResult result;
  result.model_name = table.model_name();
  result.layer = table.layer();
  result.rows = n;
  result.descriptors.resize(descriptors.names().size());

  std::vector<Index> fitted;
  for (Index j = 0; j < all_targets.cols(); ++j) {
    result.descriptors[static_cast<std::size_t>(j)].name = descriptors.names()[static_cast<std::size_t>(j)];
    if (all_targets.col(j).maxCoeff() > all_targets.col(j).minCoeff()) {
      fitted.push_back(j);
    } else {
      log::warn("physchem: descriptor '" + descriptors.names()[static_cast<std::size_t>(j)] +
                "' is constant over the shared molecules; marked undefined");
    }
  }
  if (fitted.empty()) return result;

  Eigen::MatrixXd targets(n, static_cast<Index>(fitted.size()));
  std::vector<std::string> names;
  for (std::size_t k = 0; k < fitted.size(); ++k) {
    targets.col(static_cast<Index>(k)) = all_targets.col(fitted[k]);
    names.push_back(descriptors.names()[static_cast<std::size_t>(fitted[k])]);
  }
  result.run = run_probe_protocol(X, targets, std::move(names), std::move(keys), plan, config);
  const auto scores = score_regression(result.run);
  for (std::size_t k = 0; k < fitted.size(); ++k) {
    auto& d = result.descriptors[static_cast<std::size_t>(fitted[k])];
    d.scores = scores[k];
    d.defined = scores[k].defined;
    d.cc = summarize(d.scores.cc);
    d.nrmse = summarize(d.scores.nrmse);
  }
  return result;
}

std::vector<DecodingResult> physchem_layer_sweep(std::span<const EmbeddingTable> tables,
                                                 const DescriptorTable& descriptors, const SplitPlan& plan,
                                                 ProbeConfig config) {
  std::vector<DecodingResult> results;
  for (const auto* table : ordered_layers(tables)) {
    results.push_back(run_physchem_decoding(*table, descriptors, plan, config));
  }
  return results;
}

}  // namespace olfalign
