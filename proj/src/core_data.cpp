#include "olfalign/core_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <json.hpp>
#include <set>
#include <sstream>

#include "olfalign/csv.hpp"
#include "olfalign/error.hpp"
#include "olfalign/log.hpp"

namespace olfalign {

namespace {

using nlohmann::json;

std::string at_cell(const csv::Document& doc, std::size_t row, std::size_t col) {
  std::ostringstream out;
  out << doc.source << ':' << doc.line_numbers[row];
  if (col < doc.header.size()) out << " column '" << doc.header[col] << "'";
  return out.str();
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(csv::read_text(path));
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": invalid JSON: " + e.what());
  }
}

RatingRange parse_range(const json& doc, const std::filesystem::path& path) {
  if (!doc.contains("range") || !doc["range"].is_array() || doc["range"].size() != 2 ||
      !doc["range"][0].is_number() || !doc["range"][1].is_number()) {
    throw SchemaError(path.string() + ": sidecar must declare \"range\": [a, b]");
  }
  RatingRange range{doc["range"][0].get<double>(), doc["range"][1].get<double>()};
  if (!(range.lo < range.hi)) throw SchemaError(path.string() + ": range requires a < b");
  return range;
}

std::vector<std::string> descriptor_header(const csv::Document& doc, std::size_t leading,
                                           std::span<const std::string_view> expected_leading) {
  if (doc.header.size() <= leading) {
    throw SchemaError(doc.source + ": header needs at least one descriptor column");
  }
  for (std::size_t i = 0; i < leading; ++i) {
    if (doc.header[i] != expected_leading[i]) {
      throw SchemaError(doc.source + ": header column " + std::to_string(i + 1) + " must be '" +
                        std::string(expected_leading[i]) + "', found '" + doc.header[i] + "'");
    }
  }
  std::vector<std::string> names(doc.header.begin() + static_cast<std::ptrdiff_t>(leading), doc.header.end());
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (name.empty()) throw SchemaError(doc.source + ": empty descriptor name in header");
    if (!seen.insert(name).second) throw SchemaError(doc.source + ": duplicate descriptor name '" + name + "'");
  }
  return names;
}

void require_width(const csv::Document& doc, std::size_t row) {
  if (doc.rows[row].size() != doc.header.size()) {
    throw SchemaError(doc.source + ":" + std::to_string(doc.line_numbers[row]) + ": expected " +
                      std::to_string(doc.header.size()) + " fields, found " + std::to_string(doc.rows[row].size()));
  }
}

Odorant parse_odorant_cell(const csv::Document& doc, std::size_t row, std::size_t col) {
  try {
    return parse_odorant_key(doc.rows[row][col]);
  } catch (const SchemaError& e) {
    throw SchemaError(at_cell(doc, row, col) + ": " + e.what());
  }
}

double parse_number_cell(const csv::Document& doc, std::size_t row, std::size_t col) {
  const auto value = csv::parse_double(doc.rows[row][col]);
  if (!value) throw SchemaError(at_cell(doc, row, col) + ": not a number: '" + doc.rows[row][col] + "'");
  if (!std::isfinite(*value)) throw SchemaError(at_cell(doc, row, col) + ": non-finite value");
  return *value;
}

template <typename Matrix>
Matrix take_rows(const Matrix& m, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

template <typename T>
std::vector<T> take(const std::vector<T>& items, std::span<const Index> rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (const auto r : rows) out.push_back(items.at(static_cast<std::size_t>(r)));
  return out;
}

void require_unique_odorants(const std::vector<Odorant>& odorants, std::string_view what) {
  std::set<std::string> seen;
  for (const auto& o : odorants) {
    if (!seen.insert(o.key()).second) {
      throw SchemaError(std::string(what) + ": duplicate odorant '" + o.key() + "'");
    }
  }
}

std::pair<std::string, std::string> unordered_key(const Odorant& a, const Odorant& b) {
  auto ka = a.key();
  auto kb = b.key();
  if (kb < ka) std::swap(ka, kb);
  return {std::move(ka), std::move(kb)};
}

}  // namespace

// ---------------------------------------------------------------------------

MoleculeId::MoleculeId(std::string token) : token_(std::move(token)) {
  if (token_.empty()) throw SchemaError("molecule id must be non-empty");
  if (token_.find(';') != std::string::npos) {
    throw SchemaError("molecule id '" + token_ + "' contains the reserved separator ';'");
  }
}

Odorant::Odorant(std::vector<MoleculeId> components) : components_(std::move(components)) {
  if (components_.empty()) throw SchemaError("odorant needs at least one component");
}

std::string Odorant::key() const {
  std::string out;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (i) out.push_back(';');
    out += components_[i].str();
  }
  return out;
}

Odorant parse_odorant_key(std::string_view key) {
  if (csv::trim(key).empty()) throw SchemaError("empty odorant key");
  std::vector<MoleculeId> components;
  std::size_t start = 0;
  while (true) {
    const auto end = key.find(';', start);
    const auto token = csv::trim(key.substr(start, end == std::string_view::npos ? end : end - start));
    if (token.empty()) throw SchemaError("empty component in odorant key '" + std::string(key) + "'");
    components.emplace_back(std::string(token));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return Odorant(std::move(components));
}

// ---------------------------------------------------------------------------

Layer Layer::at(int index) {
  if (index < 0) throw SchemaError("layer index must be >= 0, got " + std::to_string(index));
  Layer layer;
  layer.index_ = index;
  return layer;
}

std::string Layer::to_string() const { return index_ ? std::to_string(*index_) : std::string("final"); }

Layer Layer::parse(std::string_view text) {
  text = csv::trim(text);
  if (text == "final") return final_layer();
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw SchemaError("layer must be a non-negative integer or \"final\", got '" + std::string(text) + "'");
  }
  return at(value);
}

std::strong_ordering Layer::operator<=>(const Layer& other) const {
  if (is_final() && other.is_final()) return std::strong_ordering::equal;
  if (is_final()) return std::strong_ordering::greater;
  if (other.is_final()) return std::strong_ordering::less;
  return *index_ <=> *other.index_;
}

// ---------------------------------------------------------------------------

EmbeddingManifest load_manifest(const std::filesystem::path& path) {
  const json doc = read_json(path);
  if (!doc.is_object()) throw SchemaError(path.string() + ": manifest must be a JSON object");
  EmbeddingManifest manifest;
  if (!doc.contains("model_name") || !doc["model_name"].is_string()) {
    throw SchemaError(path.string() + ": manifest needs string field 'model_name'");
  }
  manifest.model_name = doc["model_name"].get<std::string>();
  if (!doc.contains("layer")) throw SchemaError(path.string() + ": manifest needs field 'layer'");
  const auto& layer = doc["layer"];
  if (layer.is_number_integer()) {
    manifest.layer = Layer::at(layer.get<int>());
  } else if (layer.is_string() && layer.get<std::string>() == "final") {
    manifest.layer = Layer::final_layer();
  } else {
    throw SchemaError(path.string() + ": 'layer' must be an integer or \"final\"");
  }
  if (!doc.contains("dim") || !doc["dim"].is_number_integer() || doc["dim"].get<long long>() <= 0) {
    throw SchemaError(path.string() + ": manifest needs positive integer field 'dim'");
  }
  manifest.dim = static_cast<Index>(doc["dim"].get<long long>());
  if (doc.contains("notes") && doc["notes"].is_string()) manifest.notes = doc["notes"].get<std::string>();
  return manifest;
}

EmbeddingTable::EmbeddingTable(std::vector<MoleculeId> ids, Eigen::MatrixXd matrix, std::string model_name,
                               Layer layer) {
  if (static_cast<Index>(ids.size()) != matrix.rows()) {
    throw DimensionError("embedding table: " + std::to_string(ids.size()) + " ids for " +
                         std::to_string(matrix.rows()) + " rows");
  }
  if (matrix.cols() <= 0) throw DimensionError("embedding table: dimension must be positive");
  if (!matrix.allFinite()) throw IngestionError("embedding table: non-finite value");
  auto data = std::make_shared<Data>();
  data->index.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!data->index.emplace(ids[i].str(), static_cast<Index>(i)).second) {
      throw IngestionError("embedding table: duplicate id '" + ids[i].str() + "'");
    }
  }
  data->ids = std::move(ids);
  data->matrix = std::move(matrix);
  data->model_name = std::move(model_name);
  data->layer = layer;
  data_ = std::move(data);
}

std::optional<Index> EmbeddingTable::find(const MoleculeId& id) const {
  const auto it = data_->index.find(id.str());
  if (it == data_->index.end()) return std::nullopt;
  return it->second;
}

EmbeddingTable EmbeddingTable::scaled(double factor) const {
  return EmbeddingTable(ids(), matrix() * factor, model_name(), layer());
}

EmbeddingTable load_embedding_table(const std::filesystem::path& csv_path,
                                    const std::filesystem::path& manifest_path) {
  const auto manifest = load_manifest(manifest_path);
  const auto doc = csv::read_file(csv_path);
  const auto dim = manifest.dim;

  if (static_cast<Index>(doc.header.size()) != dim + 1) {
    throw IngestionError(doc.source + ": header has " + std::to_string(doc.header.size() - 1) +
                         " feature columns, manifest declares dim=" + std::to_string(dim));
  }
  if (doc.header[0] != "id") throw IngestionError(doc.source + ": first header column must be 'id'");
  for (Index j = 0; j < dim; ++j) {
    const auto expected = "f" + std::to_string(j);
    if (doc.header[static_cast<std::size_t>(j + 1)] != expected) {
      throw IngestionError(doc.source + ": header column " + std::to_string(j + 2) + " must be '" + expected +
                           "', found '" + doc.header[static_cast<std::size_t>(j + 1)] + "'");
    }
  }
  if (doc.rows.empty()) throw IngestionError(doc.source + ": no data rows");

  const auto n = static_cast<Index>(doc.rows.size());
  Eigen::MatrixXd matrix(n, dim);
  std::vector<MoleculeId> ids;
  ids.reserve(doc.rows.size());
  std::set<std::string> seen;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& row = doc.rows[r];
    const auto where = doc.source + ":" + std::to_string(doc.line_numbers[r]);
    if (static_cast<Index>(row.size()) != dim + 1) {
      throw IngestionError(where + ": expected " + std::to_string(dim) + " values, found " +
                           std::to_string(row.size() - 1));
    }
    try {
      ids.emplace_back(row[0]);
    } catch (const SchemaError& e) {
      throw IngestionError(where + ": " + e.what());
    }
    if (!seen.insert(row[0]).second) throw IngestionError(where + ": duplicate id '" + row[0] + "'");
    for (Index j = 0; j < dim; ++j) {
      const auto& cell = row[static_cast<std::size_t>(j + 1)];
      const auto value = csv::parse_double(cell);
      if (!value) throw IngestionError(where + " column f" + std::to_string(j) + ": not a number: '" + cell + "'");
      if (!std::isfinite(*value)) throw IngestionError(where + " column f" + std::to_string(j) + ": non-finite value");
      matrix(static_cast<Index>(r), j) = *value;
    }
  }
  return EmbeddingTable(std::move(ids), std::move(matrix), manifest.model_name, manifest.layer);
}

void write_embedding_table(const EmbeddingTable& table, const std::filesystem::path& csv_path,
                           const std::filesystem::path& manifest_path) {
  std::string out = "id";
  for (Index j = 0; j < table.dim(); ++j) out += ",f" + std::to_string(j);
  out.push_back('\n');
  for (Index i = 0; i < table.rows(); ++i) {
    out += csv::escape(table.ids()[static_cast<std::size_t>(i)].str());
    for (Index j = 0; j < table.dim(); ++j) {
      out.push_back(',');
      out += csv::format_double(table.matrix()(i, j));
    }
    out.push_back('\n');
  }
  csv::write_text(csv_path, out);

  json manifest;
  manifest["model_name"] = table.model_name();
  if (table.layer().is_final()) {
    manifest["layer"] = "final";
  } else {
    manifest["layer"] = *table.layer().index();
  }
  manifest["dim"] = table.dim();
  csv::write_text(manifest_path, manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

BinaryLabelSet::BinaryLabelSet(std::vector<Odorant> odorants, std::vector<std::string> descriptors,
                               Eigen::MatrixXd labels)
    : odorants_(std::move(odorants)), descriptors_(std::move(descriptors)), labels_(std::move(labels)) {
  if (labels_.rows() != static_cast<Index>(odorants_.size()) ||
      labels_.cols() != static_cast<Index>(descriptors_.size())) {
    throw DimensionError("label matrix shape does not match odorant/descriptor counts");
  }
  if (std::set<std::string>(descriptors_.begin(), descriptors_.end()).size() != descriptors_.size()) {
    throw SchemaError("descriptor names must be unique");
  }
  for (Index i = 0; i < labels_.rows(); ++i) {
    bool positive = false;
    for (Index j = 0; j < labels_.cols(); ++j) {
      const double v = labels_(i, j);
      if (v != 0.0 && v != 1.0) {
        throw SchemaError("label for '" + odorants_[static_cast<std::size_t>(i)].key() + "' / '" +
                          descriptors_[static_cast<std::size_t>(j)] + "' is not 0 or 1");
      }
      positive = positive || v == 1.0;
    }
    if (!positive) {
      throw SchemaError("odorant '" + odorants_[static_cast<std::size_t>(i)].key() + "' has no positive label");
    }
  }
}

BinaryLabelSet BinaryLabelSet::subset(std::span<const Index> rows) const {
  return BinaryLabelSet(take(odorants_, rows), descriptors_, take_rows(labels_, rows));
}

RatingSet::RatingSet(std::vector<Odorant> odorants, std::vector<std::string> descriptors, Eigen::MatrixXd ratings,
                     RatingRange range)
    : odorants_(std::move(odorants)), descriptors_(std::move(descriptors)), ratings_(std::move(ratings)),
      range_(range) {
  if (!(range_.lo < range_.hi)) throw SchemaError("rating range requires a < b");
  if (ratings_.rows() != static_cast<Index>(odorants_.size()) ||
      ratings_.cols() != static_cast<Index>(descriptors_.size())) {
    throw DimensionError("rating matrix shape does not match odorant/descriptor counts");
  }
  if (std::set<std::string>(descriptors_.begin(), descriptors_.end()).size() != descriptors_.size()) {
    throw SchemaError("descriptor names must be unique");
  }
  for (Index i = 0; i < ratings_.rows(); ++i) {
    for (Index j = 0; j < ratings_.cols(); ++j) {
      const double v = ratings_(i, j);
      if (!std::isfinite(v) || !range_.contains(v)) {
        throw SchemaError("rating for '" + odorants_[static_cast<std::size_t>(i)].key() + "' / '" +
                          descriptors_[static_cast<std::size_t>(j)] + "' is outside [" +
                          csv::format_double(range_.lo) + ", " + csv::format_double(range_.hi) + "]");
      }
    }
  }
}

RatingSet RatingSet::subset(std::span<const Index> rows) const {
  return RatingSet(take(odorants_, rows), descriptors_, take_rows(ratings_, rows), range_);
}

PerSubjectRatings::PerSubjectRatings(std::vector<std::string> subjects, std::vector<Odorant> odorants,
                                     std::vector<std::string> descriptors,
                                     std::vector<Eigen::MatrixXd> ratings_by_subject,
                                     std::optional<RatingRange> range)
    : subjects_(std::move(subjects)), odorants_(std::move(odorants)), descriptors_(std::move(descriptors)),
      ratings_(std::move(ratings_by_subject)), range_(range) {
  if (std::set<std::string>(subjects_.begin(), subjects_.end()).size() != subjects_.size()) {
    throw SchemaError("subject ids must be unique");
  }
  if (ratings_.size() != subjects_.size()) throw DimensionError("one rating matrix per subject required");
  if (range_ && !(range_->lo < range_->hi)) throw SchemaError("rating range requires a < b");
  for (std::size_t s = 0; s < ratings_.size(); ++s) {
    const auto& m = ratings_[s];
    if (m.rows() != static_cast<Index>(odorants_.size()) || m.cols() != static_cast<Index>(descriptors_.size())) {
      throw DimensionError("rating matrix for subject '" + subjects_[s] + "' has the wrong shape");
    }
    for (Index i = 0; i < m.size(); ++i) {
      const double v = m.data()[i];
      if (std::isnan(v)) continue;
      if (!std::isfinite(v) || (range_ && !range_->contains(v))) {
        throw SchemaError("rating for subject '" + subjects_[s] + "' is non-finite or out of range");
      }
    }
  }
}

SimilarityJudgmentSet::SimilarityJudgmentSet(std::vector<std::pair<Odorant, Odorant>> pairs,
                                             std::vector<double> scores, RatingRange range, Polarity polarity)
    : pairs_(std::move(pairs)), scores_(std::move(scores)), range_(range), polarity_(polarity) {
  if (pairs_.size() != scores_.size()) throw DimensionError("one score per odorant pair required");
  if (!(range_.lo < range_.hi)) throw SchemaError("score range requires a < b");
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    auto key = unordered_key(pairs_[i].first, pairs_[i].second);
    if (!seen.insert(key).second) {
      throw SchemaError("duplicate unordered pair ('" + key.first + "', '" + key.second + "')");
    }
    if (!std::isfinite(scores_[i]) || !range_.contains(scores_[i])) {
      throw SchemaError("score for pair ('" + key.first + "', '" + key.second + "') is outside the declared range");
    }
  }
}

std::vector<double> SimilarityJudgmentSet::similarity_oriented_scores() const {
  std::vector<double> out = scores_;
  if (polarity_ == Polarity::distance) {
    for (auto& v : out) v = -v;
  }
  return out;
}

SimilarityJudgmentSet SimilarityJudgmentSet::subset(std::span<const std::size_t> indices) const {
  std::vector<std::pair<Odorant, Odorant>> pairs;
  std::vector<double> scores;
  for (const auto i : indices) {
    pairs.push_back(pairs_.at(i));
    scores.push_back(scores_.at(i));
  }
  return SimilarityJudgmentSet(std::move(pairs), std::move(scores), range_, polarity_);
}

std::vector<Odorant> SimilarityJudgmentSet::odorants() const {
  std::vector<Odorant> out;
  std::set<std::string> seen;
  for (const auto& [a, b] : pairs_) {
    if (seen.insert(a.key()).second) out.push_back(a);
    if (seen.insert(b.key()).second) out.push_back(b);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::filesystem::path default_sidecar(const std::filesystem::path& path) {
  auto sidecar = path;
  sidecar.replace_extension(".json");
  return sidecar;
}

BinaryLabelSet load_labels(const std::filesystem::path& path) {
  const auto doc = csv::read_file(path);
  constexpr std::string_view leading[] = {"odorant"};
  auto descriptors = descriptor_header(doc, 1, leading);
  std::vector<Odorant> odorants;
  Eigen::MatrixXd labels(static_cast<Index>(doc.rows.size()), static_cast<Index>(descriptors.size()));
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    require_width(doc, r);
    odorants.push_back(parse_odorant_cell(doc, r, 0));
    for (std::size_t c = 1; c < doc.header.size(); ++c) {
      const double v = parse_number_cell(doc, r, c);
      if (v != 0.0 && v != 1.0) {
        throw SchemaError(at_cell(doc, r, c) + ": label must be 0 or 1, found '" + doc.rows[r][c] + "'");
      }
      labels(static_cast<Index>(r), static_cast<Index>(c - 1)) = v;
    }
  }
  require_unique_odorants(odorants, doc.source);
  try {
    return BinaryLabelSet(std::move(odorants), std::move(descriptors), std::move(labels));
  } catch (const SchemaError& e) {
    throw SchemaError(doc.source + ": " + e.what());
  }
}

RatingSet load_ratings(const std::filesystem::path& path, const std::optional<std::filesystem::path>& sidecar) {
  const auto sidecar_path = sidecar.value_or(default_sidecar(path));
  const auto range = parse_range(read_json(sidecar_path), sidecar_path);
  const auto doc = csv::read_file(path);
  constexpr std::string_view leading[] = {"odorant"};
  auto descriptors = descriptor_header(doc, 1, leading);
  std::vector<Odorant> odorants;
  Eigen::MatrixXd ratings(static_cast<Index>(doc.rows.size()), static_cast<Index>(descriptors.size()));
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    require_width(doc, r);
    odorants.push_back(parse_odorant_cell(doc, r, 0));
    for (std::size_t c = 1; c < doc.header.size(); ++c) {
      const double v = parse_number_cell(doc, r, c);
      if (!range.contains(v)) {
        throw SchemaError(at_cell(doc, r, c) + ": rating " + doc.rows[r][c] + " outside [" +
                          csv::format_double(range.lo) + ", " + csv::format_double(range.hi) + "]");
      }
      ratings(static_cast<Index>(r), static_cast<Index>(c - 1)) = v;
    }
  }
  require_unique_odorants(odorants, doc.source);
  return RatingSet(std::move(odorants), std::move(descriptors), std::move(ratings), range);
}

PerSubjectRatings load_per_subject(const std::filesystem::path& path,
                                   const std::optional<std::filesystem::path>& sidecar) {
  std::optional<RatingRange> range;
  if (sidecar) {
    range = parse_range(read_json(*sidecar), *sidecar);
  } else if (const auto implicit = default_sidecar(path); std::filesystem::exists(implicit)) {
    range = parse_range(read_json(implicit), implicit);
  }

  const auto doc = csv::read_file(path);
  constexpr std::string_view leading[] = {"subject", "odorant"};
  auto descriptors = descriptor_header(doc, 2, leading);
  const auto d = static_cast<Index>(descriptors.size());

  std::vector<std::string> subjects;
  std::unordered_map<std::string, std::size_t> subject_index;
  std::vector<Odorant> odorants;
  std::unordered_map<std::string, Index> odorant_index;
  struct Cell {
    std::size_t subject;
    Index odorant;
    std::vector<double> values;
  };
  std::vector<Cell> cells;
  std::set<std::pair<std::size_t, Index>> seen;

  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    require_width(doc, r);
    const auto& subject = doc.rows[r][0];
    if (subject.empty()) throw SchemaError(at_cell(doc, r, 0) + ": empty subject id");
    auto odorant = parse_odorant_cell(doc, r, 1);
    const auto [sit, s_new] = subject_index.emplace(subject, subjects.size());
    if (s_new) subjects.push_back(subject);
    const auto key = odorant.key();
    const auto [oit, o_new] = odorant_index.emplace(key, static_cast<Index>(odorants.size()));
    if (o_new) odorants.push_back(std::move(odorant));
    if (!seen.emplace(sit->second, oit->second).second) {
      throw SchemaError(doc.source + ":" + std::to_string(doc.line_numbers[r]) + ": duplicate rating of '" + key +
                        "' by subject '" + subject + "'");
    }
    Cell cell{sit->second, oit->second, std::vector<double>(static_cast<std::size_t>(d))};
    for (std::size_t c = 2; c < doc.header.size(); ++c) {
      if (csv::trim(doc.rows[r][c]).empty()) {
        cell.values[c - 2] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const double v = parse_number_cell(doc, r, c);
      if (range && !range->contains(v)) throw SchemaError(at_cell(doc, r, c) + ": rating outside declared range");
      cell.values[c - 2] = v;
    }
    cells.push_back(std::move(cell));
  }

  const auto n = static_cast<Index>(odorants.size());
  std::vector<Eigen::MatrixXd> ratings(subjects.size(),
                                       Eigen::MatrixXd::Constant(n, d, std::numeric_limits<double>::quiet_NaN()));
  for (const auto& cell : cells) {
    for (Index j = 0; j < d; ++j) ratings[cell.subject](cell.odorant, j) = cell.values[static_cast<std::size_t>(j)];
  }
  return PerSubjectRatings(std::move(subjects), std::move(odorants), std::move(descriptors), std::move(ratings),
                           range);
}

SimilarityJudgmentSet load_pairs(const std::filesystem::path& path,
                                 const std::optional<std::filesystem::path>& sidecar) {
  const auto sidecar_path = sidecar.value_or(default_sidecar(path));
  const json meta = read_json(sidecar_path);
  const auto range = parse_range(meta, sidecar_path);
  if (!meta.contains("polarity") || !meta["polarity"].is_string()) {
    throw SchemaError(sidecar_path.string() + ": sidecar must declare \"polarity\"");
  }
  const auto polarity_name = meta["polarity"].get<std::string>();
  Polarity polarity;
  if (polarity_name == "similarity") {
    polarity = Polarity::similarity;
  } else if (polarity_name == "distance") {
    polarity = Polarity::distance;
  } else {
    throw SchemaError(sidecar_path.string() + ": polarity must be \"similarity\" or \"distance\"");
  }

  const auto doc = csv::read_file(path);
  if (doc.header != std::vector<std::string>{"odorant_a", "odorant_b", "score"}) {
    throw SchemaError(doc.source + ": header must be 'odorant_a,odorant_b,score'");
  }
  std::vector<std::pair<Odorant, Odorant>> pairs;
  std::vector<double> scores;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    require_width(doc, r);
    auto a = parse_odorant_cell(doc, r, 0);
    auto b = parse_odorant_cell(doc, r, 1);
    const double score = parse_number_cell(doc, r, 2);
    if (!range.contains(score)) throw SchemaError(at_cell(doc, r, 2) + ": score outside declared range");
    if (!seen.insert(unordered_key(a, b)).second) {
      throw SchemaError(doc.source + ":" + std::to_string(doc.line_numbers[r]) + ": duplicate unordered pair ('" +
                        a.key() + "', '" + b.key() + "')");
    }
    pairs.emplace_back(std::move(a), std::move(b));
    scores.push_back(score);
  }
  return SimilarityJudgmentSet(std::move(pairs), std::move(scores), range, polarity);
}

PerceptualData load_perceptual(const std::filesystem::path& path, PerceptualKind kind,
                               const std::optional<std::filesystem::path>& sidecar) {
  switch (kind) {
    case PerceptualKind::labels:
      return load_labels(path);
    case PerceptualKind::ratings:
      return load_ratings(path, sidecar);
    case PerceptualKind::per_subject:
      return load_per_subject(path, sidecar);
    case PerceptualKind::pairs:
      return load_pairs(path, sidecar);
  }
  throw ArgumentError("unknown perceptual kind");
}

// ---------------------------------------------------------------------------

bool resolvable(const EmbeddingTable& table, const Odorant& odorant) {
  return std::ranges::all_of(odorant.components(), [&](const MoleculeId& id) { return table.contains(id); });
}

Eigen::VectorXd mixture_embedding(const EmbeddingTable& table, const Odorant& odorant) {
  std::vector<Index> rows;
  std::vector<std::string> missing;
  for (const auto& id : odorant.components()) {
    if (const auto row = table.find(id)) {
      rows.push_back(*row);
    } else {
      missing.push_back(id.str());
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size(); ++i) list += (i ? ", " : "") + missing[i];
    throw LookupError("odorant '" + odorant.key() + "' has ids missing from table '" + table.model_name() +
                      "': " + list);
  }
  std::ranges::sort(rows);
  Eigen::VectorXd mean = table.matrix().row(rows.front()).transpose();
  for (std::size_t k = 1; k < rows.size(); ++k) {
    mean += (table.matrix().row(rows[k]).transpose() - mean) / static_cast<double>(k + 1);
  }
  return mean;
}

// ---------------------------------------------------------------------------

DatasetBundle::DatasetBundle(Eigen::MatrixXd features, PerceptualData perceptual, std::vector<Index> source_rows,
                             std::size_t dropped, Provenance provenance, std::optional<EmbeddingTable> table)
    : features_(std::move(features)), perceptual_(std::move(perceptual)), source_rows_(std::move(source_rows)),
      dropped_(dropped), provenance_(std::move(provenance)), table_(std::move(table)) {}

std::vector<std::string> DatasetBundle::row_keys() const {
  std::vector<std::string> keys;
  std::visit(
      [&](const auto& data) {
        using T = std::decay_t<decltype(data)>;
        if constexpr (std::is_same_v<T, BinaryLabelSet> || std::is_same_v<T, RatingSet>) {
          for (const auto& o : data.odorants()) keys.push_back(o.key());
        } else {
          throw ArgumentError("row keys exist only for label and rating bundles");
        }
      },
      perceptual_);
  return keys;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> DatasetBundle::pair_embeddings(std::size_t pair) const {
  const auto* pairs = std::get_if<SimilarityJudgmentSet>(&perceptual_);
  if (!pairs || !table_) throw ArgumentError("pair embeddings exist only for similarity bundles");
  const auto& [a, b] = pairs->pairs().at(pair);
  return {mixture_embedding(*table_, a), mixture_embedding(*table_, b)};
}

DatasetBundle join(const EmbeddingTable& table, const PerceptualData& perceptual, std::string dataset) {
  Provenance provenance{table.model_name(), table.layer(), std::move(dataset)};

  auto report_drops = [&](std::size_t dropped, std::size_t total) {
    if (dropped > 0) {
      log::warn("join '" + provenance.dataset + "' x '" + table.model_name() + "': dropped " +
                std::to_string(dropped) + " of " + std::to_string(total) + " rows with unresolvable ids");
    }
  };

  return std::visit(
      [&](const auto& data) -> DatasetBundle {
        using T = std::decay_t<decltype(data)>;
        if constexpr (std::is_same_v<T, BinaryLabelSet> || std::is_same_v<T, RatingSet>) {
          std::vector<Index> kept;
          for (std::size_t i = 0; i < data.odorants().size(); ++i) {
            if (resolvable(table, data.odorants()[i])) kept.push_back(static_cast<Index>(i));
          }
          if (kept.empty()) throw JoinError("no odorant of '" + provenance.dataset + "' resolves in the table");
          Eigen::MatrixXd features(static_cast<Index>(kept.size()), table.dim());
          for (std::size_t i = 0; i < kept.size(); ++i) {
            features.row(static_cast<Index>(i)) =
                mixture_embedding(table, data.odorants()[static_cast<std::size_t>(kept[i])]).transpose();
          }
          const auto dropped = data.odorants().size() - kept.size();
          report_drops(dropped, data.odorants().size());
          auto retained = data.subset(kept);
          return DatasetBundle(std::move(features), std::move(retained), std::move(kept), dropped,
                               std::move(provenance), std::nullopt);
        } else if constexpr (std::is_same_v<T, SimilarityJudgmentSet>) {
          std::vector<std::size_t> kept;
          for (std::size_t i = 0; i < data.size(); ++i) {
            const auto& [a, b] = data.pairs()[i];
            if (resolvable(table, a) && resolvable(table, b)) kept.push_back(i);
          }
          if (kept.empty()) throw JoinError("no pair of '" + provenance.dataset + "' resolves in the table");
          const auto dropped = data.size() - kept.size();
          report_drops(dropped, data.size());
          std::vector<Index> rows(kept.begin(), kept.end());
          auto retained = data.subset(kept);
          return DatasetBundle(Eigen::MatrixXd(0, table.dim()), std::move(retained), std::move(rows), dropped,
                               std::move(provenance), table);
        } else {
          throw JoinError("per-subject ratings are not joined with embeddings; use the noise-ceiling pipeline");
        }
      },
      perceptual);
}

}  // namespace olfalign
