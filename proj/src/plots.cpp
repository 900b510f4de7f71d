#include "olfalign/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "olfalign/csv.hpp"
#include "olfalign/log.hpp"

namespace olfalign {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 480;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 90;

std::string num(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", v);
  return buffer;
}

std::string label_num(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.3g", v);
  return buffer;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

class Svg {
 public:
  Svg(double width = kWidth, double height = kHeight) {
    out_ = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
           "\" viewBox=\"0 0 " + num(width) + " " + num(height) +
           "\" font-family=\"DejaVu Sans, Arial, sans-serif\" font-size=\"12\">\n";
    out_ += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) + "\" fill=\"white\"/>\n";
  }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width,
            std::string_view extra = {}) {
    out_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
            "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + num(width) + "\"" + std::string(extra) + "/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& points, std::string_view stroke, double width,
                std::string_view extra = {}) {
    if (points.empty()) return;
    out_ += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + num(width) + "\"" +
            std::string(extra) + " points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (i) out_ += ' ';
      out_ += num(points[i].first) + ',' + num(points[i].second);
    }
    out_ += "\"/>\n";
  }

  void rect(double x, double y, double w, double h, std::string_view fill, std::string_view extra = {}) {
    out_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
            "\" fill=\"" + std::string(fill) + "\"" + std::string(extra) + "/>\n";
  }

  void circle(double cx, double cy, double r, std::string_view fill, std::string_view stroke, double stroke_width) {
    out_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" + std::string(fill) +
            "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + num(stroke_width) + "\"/>\n";
  }

  void text(double x, double y, std::string_view content, std::string_view anchor = "middle",
            std::string_view extra = {}) {
    out_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + std::string(anchor) + "\"" +
            std::string(extra) + ">" + xml_escape(content) + "</text>\n";
  }

  std::string finish() {
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  std::string out_;
};

struct Axes {
  double x0, x1, y0, y1;  // data ranges
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void draw_frame(Svg& svg, const Axes& axes, std::string_view title, std::string_view x_label,
                std::string_view y_label, bool x_ticks) {
  svg.text(kWidth / 2, 22, title, "middle", " font-size=\"15\"");
  svg.line(kLeft, kHeight - kBottom, kWidth - kRight, kHeight - kBottom, "black", 1);
  svg.line(kLeft, kTop, kLeft, kHeight - kBottom, "black", 1);
  for (int i = 0; i <= 4; ++i) {
    const double y = axes.y0 + (axes.y1 - axes.y0) * i / 4.0;
    svg.line(kLeft - 4, axes.py(y), kLeft, axes.py(y), "black", 1);
    svg.text(kLeft - 7, axes.py(y) + 4, label_num(y), "end");
    if (x_ticks) {
      const double x = axes.x0 + (axes.x1 - axes.x0) * i / 4.0;
      svg.line(axes.px(x), kHeight - kBottom, axes.px(x), kHeight - kBottom + 4, "black", 1);
      svg.text(axes.px(x), kHeight - kBottom + 18, label_num(x));
    }
  }
  if (!x_label.empty()) svg.text(kWidth / 2, kHeight - kBottom + 40, x_label);
  svg.text(18, (kTop + kHeight - kBottom) / 2, y_label, "middle",
           " transform=\"rotate(-90 18 " + num((kTop + kHeight - kBottom) / 2) + ")\"");
}

std::pair<double, double> padded_range(const std::vector<double>& values, bool include_zero) {
  double lo = include_zero ? 0.0 : std::numeric_limits<double>::infinity();
  double hi = include_zero ? 0.0 : -std::numeric_limits<double>::infinity();
  for (const double v : values) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!std::isfinite(lo)) return {0.0, 1.0};
  if (hi == lo) return {lo - 0.5, hi + 0.5};
  const double pad = 0.05 * (hi - lo);
  return {include_zero && lo == 0.0 ? 0.0 : lo - pad, include_zero && hi == 0.0 ? 0.0 : hi + pad};
}

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string palette(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

// Diverging blue-white-red on t in [0, 1].
std::string heat_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  int r, g, b;
  if (t < 0.5) {
    const double u = t / 0.5;
    r = static_cast<int>(std::lround(33 + u * (255 - 33)));
    g = static_cast<int>(std::lround(102 + u * (255 - 102)));
    b = static_cast<int>(std::lround(172 + u * (255 - 172)));
  } else {
    const double u = (t - 0.5) / 0.5;
    r = static_cast<int>(std::lround(255 + u * (178 - 255)));
    g = static_cast<int>(std::lround(255 + u * (24 - 255)));
    b = static_cast<int>(std::lround(255 + u * (43 - 255)));
  }
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "#%02x%02x%02x", r, g, b);
  return buffer;
}

}  // namespace

namespace plots {

std::vector<double> vertical_average(std::span<const RocCurve> curves, int points) {
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = static_cast<double>(i) / (points - 1);
  std::vector<double> mean(grid.size(), 0.0);
  if (curves.empty()) return mean;
  for (const auto& curve : curves) {
    const auto tpr = interpolate_tpr(curve, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) mean[i] += tpr[i];
  }
  for (auto& v : mean) v /= static_cast<double>(curves.size());
  return mean;
}

std::string roc_svg(std::span<const RocCurve> curves, std::string_view title) {
  Svg svg;
  const Axes axes{0, 1, 0, 1};
  draw_frame(svg, axes, title, "False positive rate", "True positive rate", true);
  svg.line(axes.px(0), axes.py(0), axes.px(1), axes.py(1), "#d62728", 1.5, " stroke-dasharray=\"6,4\"");
  for (const auto& curve : curves) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < curve.fpr.size(); ++i) pts.emplace_back(axes.px(curve.fpr[i]), axes.py(curve.tpr[i]));
    svg.polyline(pts, "#1f77b4", 0.6, " stroke-opacity=\"0.35\"");
  }
  if (!curves.empty()) {
    const auto mean = vertical_average(curves);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      pts.emplace_back(axes.px(static_cast<double>(i) / (mean.size() - 1)), axes.py(mean[i]));
    }
    svg.polyline(pts, "#08306b", 3);
  }
  double auc_sum = 0.0;
  for (const auto& c : curves) auc_sum += c.auc;
  const double lx = axes.px(0.45);
  const double ly = axes.py(0.22);
  svg.line(lx, ly, lx + 24, ly, "#1f77b4", 0.6);
  svg.text(lx + 30, ly + 4, std::to_string(curves.size()) + " splits", "start");
  svg.line(lx, ly + 18, lx + 24, ly + 18, "#08306b", 3);
  svg.text(lx + 30, ly + 22,
           "mean (vertical average), AUC " + (curves.empty() ? std::string("n/a") : label_num(auc_sum / curves.size())),
           "start");
  svg.line(lx, ly + 36, lx + 24, ly + 36, "#d62728", 1.5, " stroke-dasharray=\"6,4\"");
  svg.text(lx + 30, ly + 40, "chance", "start");
  return svg.finish();
}

std::string roc_curves_csv(std::span<const RocCurve> curves) {
  std::string out = "curve,fpr,tpr\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    for (std::size_t i = 0; i < curves[c].fpr.size(); ++i) {
      out += std::to_string(c) + ',' + csv::format_double(curves[c].fpr[i]) + ',' + csv::format_double(curves[c].tpr[i]) + '\n';
    }
  }
  const auto mean = vertical_average(curves);
  for (std::size_t i = 0; i < mean.size() && !curves.empty(); ++i) {
    out += "mean," + csv::format_double(static_cast<double>(i) / (mean.size() - 1)) + ',' + csv::format_double(mean[i]) + '\n';
  }
  return out;
}

std::string bar_svg(std::span<const std::string> labels, std::span<const double> values,
                    std::span<const double> errors, std::string_view title, std::string_view y_label) {
  std::vector<double> extent;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double e = i < errors.size() && std::isfinite(errors[i]) ? errors[i] : 0.0;
    extent.push_back(values[i] + e);
    extent.push_back(values[i] - e);
  }
  const auto [lo, hi] = padded_range(extent, true);
  const Axes axes{0, static_cast<double>(std::max<std::size_t>(values.size(), 1)), lo, hi};
  Svg svg;
  draw_frame(svg, axes, title, "", y_label, false);
  const double slot = (kWidth - kLeft - kRight) / std::max<std::size_t>(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = kLeft + slot * i + slot * 0.15;
    const double top = axes.py(std::max(values[i], 0.0));
    const double bottom = axes.py(std::min(values[i], 0.0));
    svg.rect(x, top, slot * 0.7, bottom - top, palette(0));
    if (i < errors.size() && std::isfinite(errors[i]) && errors[i] > 0) {
      const double cx = x + slot * 0.35;
      svg.line(cx, axes.py(values[i] - errors[i]), cx, axes.py(values[i] + errors[i]), "black", 1);
    }
    const double lx = x + slot * 0.35;
    const double ly = kHeight - kBottom + 12;
    svg.text(lx, ly, i < labels.size() ? labels[i] : std::string(), "end",
             " font-size=\"10\" transform=\"rotate(-45 " + num(lx) + " " + num(ly) + ")\"");
  }
  return svg.finish();
}

std::string line_svg(std::span<const std::string> x_labels, std::span<const LineSeries> series,
                     std::string_view title, std::string_view y_label) {
  std::vector<double> all;
  for (const auto& s : series) all.insert(all.end(), s.y.begin(), s.y.end());
  const auto [lo, hi] = padded_range(all, false);
  const double last = std::max<double>(1.0, static_cast<double>(x_labels.size()) - 1.0);
  const Axes axes{-0.25, last + 0.25, lo, hi};
  Svg svg;
  draw_frame(svg, axes, title, "layer", y_label, false);
  for (std::size_t i = 0; i < x_labels.size(); ++i) {
    svg.line(axes.px(i), kHeight - kBottom, axes.px(i), kHeight - kBottom + 4, "black", 1);
    svg.text(axes.px(i), kHeight - kBottom + 18, x_labels[i]);
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::vector<std::pair<double, double>> run;
    auto flush = [&] {
      svg.polyline(run, palette(k), 2);
      run.clear();
    };
    for (std::size_t i = 0; i < series[k].y.size(); ++i) {
      const double y = series[k].y[i];
      if (!std::isfinite(y)) {
        flush();
        continue;
      }
      run.emplace_back(axes.px(i), axes.py(y));
      svg.circle(axes.px(i), axes.py(y), 3, palette(k), palette(k), 1);
    }
    flush();
    svg.line(kLeft + 10, kTop + 8 + 16 * k, kLeft + 34, kTop + 8 + 16 * k, palette(k), 2);
    svg.text(kLeft + 40, kTop + 12 + 16 * k, series[k].name, "start");
  }
  return svg.finish();
}

std::string scatter_svg(const PcaScatter& scatter, std::string_view title) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (Index i = 0; i < scatter.coords.rows(); ++i) {
    xs.push_back(scatter.coords(i, 0));
    ys.push_back(scatter.coords(i, 1));
  }
  const auto [x0, x1] = padded_range(xs, false);
  const auto [y0, y1] = padded_range(ys, false);
  const Axes axes{x0, x1, y0, y1};
  Svg svg;
  draw_frame(svg, axes, title, "PC1", "PC2", true);
  const char* const shades[] = {"#e7298a", "#66a61e", "#7570b3"};
  auto shade = [&](int g) { return g < 0 ? std::string("#d9d9d9") : std::string(shades[static_cast<std::size_t>(g) % 3]); };
  // Unlabeled points first so the shaded groups stay visible.
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < scatter.row_keys.size(); ++i) {
      const int g = scatter.broad_group[i];
      if ((pass == 0) != (g < 0)) continue;
      const auto& outline = scatter.narrow_groups[i];
      const std::string stroke = outline.empty() ? "none" : palette(static_cast<std::size_t>(outline.front()) + 3);
      svg.circle(axes.px(xs[i]), axes.py(ys[i]), 3.5, shade(g), stroke, outline.empty() ? 0 : 1.5);
    }
  }
  for (std::size_t b = 0; b < scatter.broad.size(); ++b) {
    svg.circle(kWidth - 150, kTop + 10 + 16 * b, 4, shade(static_cast<int>(b)), "none", 0);
    svg.text(kWidth - 140, kTop + 14 + 16 * b, scatter.broad[b], "start");
  }
  for (std::size_t k = 0; k < scatter.narrow.size(); ++k) {
    const double y = kTop + 10 + 16 * (scatter.broad.size() + k);
    svg.circle(kWidth - 150, y, 4, "white", palette(k + 3), 1.5);
    svg.text(kWidth - 140, y + 4, scatter.narrow[k], "start");
  }
  return svg.finish();
}

std::string heatmap_svg(const Rsm& rsm, std::string_view title) {
  const auto n = rsm.values.rows();
  const double size = 520;
  const double left = 100;
  const double top = 50;
  Svg svg(left + size + 120, top + size + 40);
  svg.text((left + size) / 2 + 20, 25, title, "middle", " font-size=\"15\"");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (!rsm.mask(i, j)) continue;
      lo = std::min(lo, rsm.values(i, j));
      hi = std::max(hi, rsm.values(i, j));
    }
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  const double bound = std::max(std::abs(lo), std::abs(hi));
  const double scale_lo = lo >= 0.0 ? lo : -bound;
  const double scale_hi = lo >= 0.0 ? (hi > lo ? hi : lo + 1.0) : (bound > 0.0 ? bound : 1.0);
  const double cell = n > 0 ? size / static_cast<double>(n) : size;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const auto fill =
          rsm.mask(i, j) ? heat_color((rsm.values(i, j) - scale_lo) / (scale_hi - scale_lo)) : std::string("#bdbdbd");
      svg.rect(left + cell * j, top + cell * i, cell, cell, fill);
    }
    if (n <= 40) {
      svg.text(left - 4, top + cell * (i + 0.5) + 3, rsm.odorants[static_cast<std::size_t>(i)], "end",
               " font-size=\"8\"");
    }
  }
  for (int k = 0; k <= 10; ++k) {
    const double t = k / 10.0;
    svg.rect(left + size + 20, top + (10 - k) * size / 11.0, 16, size / 11.0, heat_color(t));
  }
  svg.text(left + size + 40, top + 10, label_num(scale_hi), "start");
  svg.text(left + size + 40, top + size, label_num(scale_lo), "start");
  svg.text(left + size + 20, top + size + 25, "gray: not rated", "start", " font-size=\"9\"");
  return svg.finish();
}

}  // namespace plots

namespace {

std::string primary_metric(const std::string& task) {
  if (task == "classify") return "roc_auc";
  if (task == "rsa") return "r";
  if (task == "noise_ceiling") return "noise_ceiling";
  return "cc";
}

bool is_summary_descriptor(const std::string& d) { return d == kAggregateDescriptor || d == "micro" || d == "pairs"; }

}  // namespace

std::vector<std::filesystem::path> render_plots(const AlignmentReport& report, const PlotExtras& extras,
                                                const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written;
  if (report.empty()) {
    log::warn("render_plots: report is empty; no figures written");
    return written;
  }
  auto emit = [&](const std::string& name, const std::string& content) {
    csv::write_text(out_dir / name, content);
    written.push_back(out_dir / name);
  };

  if (!extras.roc.empty()) {
    emit("roc.svg", plots::roc_svg(extras.roc, "ROC curves per split"));
    emit("roc_curves.csv", plots::roc_curves_csv(extras.roc));
  }

  const auto metric = primary_metric(report.task);
  // Groups in first-appearance order.
  std::vector<std::string> group_keys;
  std::map<std::string, std::vector<const ReportRow*>> groups;
  for (const auto& row : report.rows) {
    if (row.metric != metric) continue;
    const auto key = row.dataset + " | " + row.model + " | " + row.layer;
    if (!groups.contains(key)) group_keys.push_back(key);
    groups[key].push_back(&row);
  }

  std::vector<std::string> labels;
  std::vector<double> values;
  std::vector<double> errors;
  if (group_keys.size() == 1) {
    for (const auto* row : groups[group_keys.front()]) {
      if (is_summary_descriptor(row->descriptor) && report.task != "rsa") continue;
      labels.push_back(row->descriptor);
      values.push_back(row->mean);
      errors.push_back(row->std.value_or(0.0));
    }
  } else {
    for (const auto& key : group_keys) {
      for (const auto* row : groups[key]) {
        if (!is_summary_descriptor(row->descriptor)) continue;
        labels.push_back(key);
        values.push_back(row->mean);
        errors.push_back(row->std.value_or(0.0));
      }
    }
  }
  if (!values.empty()) emit("bars.svg", plots::bar_svg(labels, values, errors, report.task + ": " + metric, metric));

  // Layer trend: series per (dataset, model) with at least two layers.
  std::map<std::pair<std::string, std::string>, std::map<Layer, double>> trends;
  std::set<Layer> layers;
  for (const auto& key : group_keys) {
    for (const auto* row : groups[key]) {
      if (!is_summary_descriptor(row->descriptor) || row->layer == "-") continue;
      const auto layer = Layer::parse(row->layer);
      trends[{row->dataset, row->model}][layer] = row->mean;
    }
  }
  std::vector<plots::LineSeries> series;
  for (const auto& [key, points] : trends) {
    if (points.size() < 2) continue;
    for (const auto& [layer, v] : points) layers.insert(layer);
  }
  if (!layers.empty()) {
    std::vector<std::string> x_labels;
    for (const auto& l : layers) x_labels.push_back(l.to_string());
    std::string trend_csv = "dataset,model,layer," + metric + "\n";
    for (const auto& [key, points] : trends) {
      if (points.size() < 2) continue;
      plots::LineSeries s{key.first + " / " + key.second, {}};
      for (const auto& l : layers) {
        const auto it = points.find(l);
        s.y.push_back(it == points.end() ? std::numeric_limits<double>::quiet_NaN() : it->second);
        if (it != points.end()) {
          trend_csv += csv::escape(key.first) + ',' + csv::escape(key.second) + ',' + l.to_string() + ',' +
                       csv::format_double(it->second) + '\n';
        }
      }
      series.push_back(std::move(s));
    }
    emit("layer_trend.svg", plots::line_svg(x_labels, series, report.task + ": " + metric + " by layer", metric));
    emit("layer_trend.csv", trend_csv);
  }

  if (extras.scatter) {
    emit("pca_scatter.svg", plots::scatter_svg(*extras.scatter, "First two principal components"));
    emit("pca_scatter.csv", pca_scatter_csv(*extras.scatter));
  }
  if (extras.rsm) {
    emit("rsm_model.svg", plots::heatmap_svg(extras.rsm->model, "Model RSM (cosine)"));
    if (extras.rsm->human) emit("rsm_human.svg", plots::heatmap_svg(*extras.rsm->human, "Human RSM"));
  }
  return written;
}

}  // namespace olfalign
