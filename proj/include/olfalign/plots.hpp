#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "olfalign/metrics.hpp"
#include "olfalign/pipelines.hpp"
#include "olfalign/rsa.hpp"

namespace olfalign {

// Deterministic SVG rendering: fixed canvas, fonts, and number formatting.
namespace plots {

/// Thin per-split curves, a thick vertical-average mean, and the dashed chance diagonal.
std::string roc_svg(std::span<const RocCurve> curves, std::string_view title);
/// Long format `curve,fpr,tpr`; curve "mean" holds the vertical average on a 101-point grid.
std::string roc_curves_csv(std::span<const RocCurve> curves);

/// Mean TPR of the curves at evenly spaced FPR values 0, 1/(points-1), ..., 1.
std::vector<double> vertical_average(std::span<const RocCurve> curves, int points = 101);

std::string bar_svg(std::span<const std::string> labels, std::span<const double> values,
                    std::span<const double> errors, std::string_view title, std::string_view y_label);

struct LineSeries {
  std::string name;
  std::vector<double> y;  // aligned with the x labels; NaN leaves a gap
};

std::string line_svg(std::span<const std::string> x_labels, std::span<const LineSeries> series,
                     std::string_view title, std::string_view y_label);

std::string scatter_svg(const PcaScatter& scatter, std::string_view title);

std::string heatmap_svg(const Rsm& rsm, std::string_view title);

}  // namespace plots

struct PlotExtras {
  std::span<const RocCurve> roc;
  const PcaScatter* scatter = nullptr;
  const RsmSet* rsm = nullptr;
};

/// Writes the figures a report supports into `out_dir` and returns their
/// paths in write order. An empty report writes nothing and logs a warning.
std::vector<std::filesystem::path> render_plots(const AlignmentReport& report, const PlotExtras& extras,
                                                const std::filesystem::path& out_dir);

}  // namespace olfalign
