#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "olfalign/core_data.hpp"
#include "olfalign/metrics.hpp"
#include "olfalign/probes.hpp"

namespace olfalign {

inline constexpr Index kPhyschemDescriptorCount = 15;

/// Per-molecule physicochemical descriptor values (ingested, never computed here).
class DescriptorTable {
 public:
  DescriptorTable(std::vector<MoleculeId> ids, std::vector<std::string> names, Eigen::MatrixXd values);

  const std::vector<MoleculeId>& ids() const noexcept { return ids_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  /// Same rows with columns reordered.
  DescriptorTable permuted_columns(std::span<const Index> order) const;

 private:
  std::vector<MoleculeId> ids_;
  std::vector<std::string> names_;
  Eigen::MatrixXd values_;
};

/// CSV `id,<15 descriptor names>`.
DescriptorTable load_descriptor_table(const std::filesystem::path& path);

struct DescriptorDecoding {
  std::string name;
  bool defined = false;  // false for constant columns and when no repetition could be scored
  RegressionScores scores;
  Summary cc;
  Summary nrmse;
};

struct DecodingResult {
  std::string model_name;
  Layer layer;
  Index rows = 0;  // molecules present in both tables
  std::vector<DescriptorDecoding> descriptors;
  ProbeRun run;    // over the defined descriptors only
};

/// Lasso probe with nested CV per descriptor under the split protocol.
/// Targets are z-scored on each training split and predictions mapped back,
/// so NRMSE is on the original descriptor scale.
DecodingResult run_physchem_decoding(const EmbeddingTable& table, const DescriptorTable& descriptors,
                                     const SplitPlan& plan, ProbeConfig config = {});

/// run_physchem_decoding per layer, ordered by layer.
std::vector<DecodingResult> physchem_layer_sweep(std::span<const EmbeddingTable> tables,
                                                 const DescriptorTable& descriptors, const SplitPlan& plan,
                                                 ProbeConfig config = {});

}  // namespace olfalign
