#include "hotspot/localize.hpp"

#include <algorithm>

namespace hotspot {

std::string ThresholdRule::describe() const {
  switch (kind) {
    case ThresholdKind::hard: return "hard(" + std::to_string(cut) + ")";
    case ThresholdKind::soft: return "soft(" + std::to_string(cut) + ")";
    case ThresholdKind::order:
      return r <= 0 ? std::string("order(all)") : "order(" + std::to_string(r) + ")";
  }
  return "?";
}

Matrix hotspot_slice(const ModelFit& fit, int t_star) { return frontal_slice(fit.h_hat, t_star); }

namespace {

std::vector<HotspotCell> sorted_cells(std::vector<HotspotCell> cells) {
  std::sort(cells.begin(), cells.end(), [](const HotspotCell& a, const HotspotCell& b) {
    if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
    if (a.location != b.location) return a.location < b.location;
    return a.category < b.category;
  });
  return cells;
}

}  // namespace

std::vector<HotspotCell> threshold_hard(const Matrix& h, double cut) {
  if (cut < 0.0) throw std::invalid_argument("hard threshold must be >= 0");
  std::vector<HotspotCell> cells;
  for (int i = 0; i < h.rows(); ++i)
    for (int j = 0; j < h.cols(); ++j)
      if (h(i, j) > cut) cells.push_back({i, j, h(i, j)});
  return sorted_cells(std::move(cells));
}

std::vector<HotspotCell> threshold_soft(const Matrix& h, double cut) {
  if (cut < 0.0) throw std::invalid_argument("soft threshold must be >= 0");
  std::vector<HotspotCell> cells;
  for (int i = 0; i < h.rows(); ++i)
    for (int j = 0; j < h.cols(); ++j)
      if (h(i, j) - cut > 0.0) cells.push_back({i, j, h(i, j) - cut});
  return sorted_cells(std::move(cells));
}

std::vector<HotspotCell> threshold_order(const Matrix& h, int r) {
  std::vector<double> positives;
  for (int i = 0; i < h.rows(); ++i)
    for (int j = 0; j < h.cols(); ++j)
      if (h(i, j) > 0.0) positives.push_back(h(i, j));

  double cutoff = 0.0;  // keep everything positive by default
  if (r > 0 && static_cast<size_t>(r) <= positives.size()) {
    std::nth_element(positives.begin(), positives.begin() + (r - 1), positives.end(),
                     std::greater<>());
    cutoff = positives[r - 1];
  }

  std::vector<HotspotCell> cells;
  for (int i = 0; i < h.rows(); ++i)
    for (int j = 0; j < h.cols(); ++j)
      if (h(i, j) > 0.0 && h(i, j) >= cutoff) cells.push_back({i, j, h(i, j)});
  return sorted_cells(std::move(cells));
}

HotspotReport make_report(const ModelFit& fit, const ProblemData& data, int t_star,
                          const ThresholdRule& rule) {
  const Matrix slice = hotspot_slice(fit, t_star);
  HotspotReport report;
  report.t_star = t_star;
  report.lambda_star = fit.lambda;
  report.rule = rule.describe();
  switch (rule.kind) {
    case ThresholdKind::hard: report.cells = threshold_hard(slice, rule.cut); break;
    case ThresholdKind::soft: report.cells = threshold_soft(slice, rule.cut); break;
    case ThresholdKind::order: report.cells = threshold_order(slice, rule.r); break;
  }
  const auto& locs = data.counts().tensor().axis_labels(1);
  const auto& cats = data.counts().tensor().axis_labels(2);
  if (locs) report.location_labels = *locs;
  if (cats) report.category_labels = *cats;
  return report;
}

}  // namespace hotspot
