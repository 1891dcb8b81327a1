#include "f2v/scorer/savgol.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Dense>

#include "f2v/core/errors.hpp"

namespace f2v {

std::vector<double> savgol_weights(int begin, int end, int at, int order) {
  const int m = end - begin;
  if (order < 0 || m <= order) throw ParameterError("need more than polyorder samples for the fit");
  const double scale = std::max(1, m / 2);
  Eigen::MatrixXd a(m, order + 1);
  for (int r = 0; r < m; ++r) {
    const double x = (begin + r - at) / scale;
    double p = 1.0;
    for (int c = 0; c <= order; ++c) {
      a(r, c) = p;
      p *= x;
    }
  }
  // value at x=0 is the constant coefficient: row 0 of pinv(a)
  const Eigen::MatrixXd pinv = a.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(m, m));
  std::vector<double> w(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) w[static_cast<std::size_t>(r)] = pinv(0, r);
  return w;
}

std::vector<double> smooth_scores(const std::vector<double>& raw, int window, int polyorder) {
  if (window < 1 || window % 2 == 0) throw ParameterError("window must be a positive odd integer, got " + std::to_string(window));
  if (polyorder < 0 || polyorder >= window) {
    throw ParameterError("polyorder must be in [0, window), got " + std::to_string(polyorder));
  }
  const int n = static_cast<int>(raw.size());
  if (n < window) return raw;
  const int half = window / 2;
  std::vector<double> out(raw.size());
  std::vector<double> interior = savgol_weights(0, window, half, polyorder);
  for (int i = 0; i < n; ++i) {
    int begin = std::max(0, i - half);
    int end = std::min(n, i + half + 1);
    const std::vector<double>* w = &interior;
    std::vector<double> edge;
    if (end - begin < window) {
      if (end - begin <= polyorder) {
        if (begin == 0) end = polyorder + 1;
        else begin = n - polyorder - 1;
      }
      edge = savgol_weights(begin, end, i, polyorder);
      w = &edge;
    }
    double acc = 0.0;
    for (int j = begin; j < end; ++j) acc += (*w)[static_cast<std::size_t>(j - begin)] * raw[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

std::vector<double> normalize_scores(const std::vector<double>& s) {
  if (s.empty()) throw InvalidInputError("cannot normalize an empty score series");
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  const double min = *lo;
  const double range = *hi - min;
  std::vector<double> out(s.size(), 0.0);
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = std::clamp((s[i] - min) / range, 0.0, 1.0);
  return out;
}

}  // namespace f2v
