#pragma once

#include <utility>
#include <vector>

namespace f2v {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Threshold sweep from the largest score down; tied scores enter together.
/// Starts at (0,0) and ends at (1,1). UndefinedMetricError unless both
/// classes are present.
std::vector<RocPoint> roc_curve(const std::vector<double>& scores, const std::vector<int>& labels);

double trapezoid_area(const std::vector<RocPoint>& roc);

double frame_auc(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace f2v
