#pragma once

#include <vector>

namespace f2v {

inline constexpr int kDefaultSgWindow = 15;
inline constexpr int kDefaultSgOrder = 3;

/// Least-squares weights that evaluate, at sample `at`, the degree-`order`
/// polynomial fitted to samples [begin, end). Requires end - begin > order.
std::vector<double> savgol_weights(int begin, int end, int at, int order);

/// Local polynomial smoothing with a symmetric window. Near the ends the
/// window is truncated at the series boundary (kept at >= order+1 samples).
/// Series shorter than the window pass through unchanged.
std::vector<double> smooth_scores(const std::vector<double>& raw, int window = kDefaultSgWindow,
                                  int polyorder = kDefaultSgOrder);

/// (s - min) / (max - min); all zeros for a constant series.
std::vector<double> normalize_scores(const std::vector<double>& s);

}  // namespace f2v
