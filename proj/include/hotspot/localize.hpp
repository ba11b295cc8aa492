#ifndef HOTSPOT_LOCALIZE_HPP
#define HOTSPOT_LOCALIZE_HPP

#include <string>
#include <vector>

#include "hotspot/model.hpp"

namespace hotspot {

struct HotspotCell {
  int location = 0;  // 0-based row index
  int category = 0;  // 0-based column index
  double magnitude = 0.0;

  bool operator==(const HotspotCell&) const = default;
};

enum class ThresholdKind { hard, soft, order };

struct ThresholdRule {
  ThresholdKind kind = ThresholdKind::order;
  double cut = 0.0;  // hard/soft threshold level
  int r = 0;         // order statistic; r <= 0 keeps every positive entry

  std::string describe() const;
};

/// The time-t* frontal slice of the fitted hot-spot tensor. t_star is
/// 0-based.
Matrix hotspot_slice(const ModelFit& fit_at_lambda_star, int t_star);

/// Entries strictly above `cut`, magnitudes unchanged.
std::vector<HotspotCell> threshold_hard(const Matrix& h, double cut);

/// Entries with h - cut > 0, reported with the shrunken magnitude.
std::vector<HotspotCell> threshold_soft(const Matrix& h, double cut);

/// Strictly positive entries at or above the r-th largest positive
/// value (ties kept); all positives when fewer than r exist or r <= 0.
std::vector<HotspotCell> threshold_order(const Matrix& h, int r);

struct HotspotReport {
  int t_star = 0;  // 0-based alarm time
  double lambda_star = 0.0;
  std::vector<HotspotCell> cells;  // sorted by magnitude descending
  std::string rule;
  std::vector<std::string> location_labels;  // empty when unlabeled
  std::vector<std::string> category_labels;
};

/// Applies `rule` to the t*-th hot-spot slice and assembles the sorted
/// report, resolving labels from the data tensor when present.
HotspotReport make_report(const ModelFit& fit, const ProblemData& data, int t_star,
                          const ThresholdRule& rule);

}  // namespace hotspot

#endif  // HOTSPOT_LOCALIZE_HPP
