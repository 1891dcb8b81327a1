#include "f2v/evaluator/auc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "f2v/core/errors.hpp"

namespace f2v {

std::vector<RocPoint> roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw ShapeError("scores (" + std::to_string(scores.size()) + ") and labels (" + std::to_string(labels.size()) +
                     ") differ in length");
  }
  std::size_t pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw InvalidInputError("labels must be 0 or 1");
    pos += static_cast<std::size_t>(l);
  }
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) {
    throw UndefinedMetricError("AUC is undefined: labels contain only " + std::string(pos == 0 ? "normal" : "anomalous") +
                               " frames");
  }
  for (double s : scores) {
    if (std::isnan(s)) throw InvalidInputError("scores contain NaN");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> roc{{0.0, 0.0}};
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      if (labels[order[i]]) ++tp;
      else ++fp;
      ++i;
    }
    roc.push_back({static_cast<double>(fp) / neg, static_cast<double>(tp) / pos});
  }
  return roc;
}

double trapezoid_area(const std::vector<RocPoint>& roc) {
  double area = 0.0;
  for (std::size_t i = 1; i < roc.size(); ++i) {
    area += (roc[i].fpr - roc[i - 1].fpr) * (roc[i].tpr + roc[i - 1].tpr) * 0.5;
  }
  return area;
}

double frame_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  return trapezoid_area(roc_curve(scores, labels));
}

}  // namespace f2v
