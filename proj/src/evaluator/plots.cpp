#include "f2v/evaluator/plots.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "f2v/core/errors.hpp"

namespace f2v {
namespace {

constexpr double kW = 480;
constexpr double kH = 360;
constexpr double kPad = 48;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

double px(double x) { return kPad + x * (kW - 2 * kPad); }
double py(double y) { return kH - kPad - y * (kH - 2 * kPad); }

std::string header(const std::string& title) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW
    << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
    << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << kW - 2 * kPad << "\" height=\"" << kH - 2 * kPad
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  return s.str();
}

void axis_labels(std::ostringstream& s, const std::string& x, const std::string& y) {
  s << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">" << x << "</text>\n"
    << "<text x=\"14\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << kH / 2 << ")\">" << y
    << "</text>\n";
  for (double t : {0.0, 0.5, 1.0}) {
    s << "<text x=\"" << kPad - 6 << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
  }
}

void save(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << body << "</svg>\n";
}

}  // namespace

void write_roc_svg(const std::filesystem::path& path, const std::vector<RocPoint>& roc, double auc) {
  std::ostringstream s;
  s << header("ROC (AUC " + num(auc) + ")");
  s << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(1)
    << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (const auto& p : roc) s << num(px(p.fpr)) << ',' << num(py(p.tpr)) << ' ';
  s << "\"/>\n";
  axis_labels(s, "false positive rate", "true positive rate");
  save(path, s.str());
}

void write_timeline_svg(const std::filesystem::path& path, const AnomalyScoreSeries& series, const std::vector<int>& labels) {
  std::ostringstream s;
  s << header(series.clip_id);
  const std::size_t n = series.size();
  const double span = n > 1 ? static_cast<double>(n - 1) : 1.0;
  for (std::size_t i = 0; i < n && i < labels.size(); ++i) {
    if (!labels[i]) continue;
    const double x0 = px(std::max(0.0, (i - 0.5) / span));
    const double x1 = px(std::min(1.0, (i + 0.5) / span));
    s << "<rect x=\"" << num(x0) << "\" y=\"" << kPad << "\" width=\"" << num(x1 - x0) << "\" height=\""
      << kH - 2 * kPad << "\" fill=\"#f4c7c3\"/>\n";
  }
  s << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < n; ++i) s << num(px(i / span)) << ',' << num(py(series.normalized[i])) << ' ';
  s << "\"/>\n";
  axis_labels(s, "frame", "normalized score");
  save(path, s.str());
}

void write_timestep_svg(const std::filesystem::path& path, const std::vector<double>& auc, double auc_all) {
  std::ostringstream s;
  s << header("AUC per prediction timestep");
  const std::size_t bars = auc.size() + 1;
  const double slot = 1.0 / static_cast<double>(bars);
  for (std::size_t i = 0; i < bars; ++i) {
    const double v = i < auc.size() ? auc[i] : auc_all;
    const double x0 = px(i * slot + slot * 0.15);
    const double x1 = px((i + 1) * slot - slot * 0.15);
    s << "<rect x=\"" << num(x0) << "\" y=\"" << num(py(v)) << "\" width=\"" << num(x1 - x0) << "\" height=\""
      << num(py(0) - py(v)) << "\" fill=\"" << (i < auc.size() ? "steelblue" : "darkorange") << "\"/>\n";
    s << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(py(0) + 14) << "\" text-anchor=\"middle\">"
      << (i < auc.size() ? std::to_string(i + 1) : std::string("All")) << "</text>\n";
  }
  axis_labels(s, "timestep", "AUC");
  save(path, s.str());
}

}  // namespace f2v
