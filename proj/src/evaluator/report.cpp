#include "f2v/evaluator/report.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "f2v/core/errors.hpp"
#include "f2v/ingest/dataset.hpp"

namespace f2v {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

ScoreConfig score_config(const EvalConfig& cfg, int timestep) {
  ScoreConfig sc;
  sc.timestep = timestep;
  sc.sg_window = cfg.sg_window;
  sc.sg_order = cfg.sg_order;
  sc.order = cfg.order;
  return sc;
}

void check(const LabelledSeries& c) {
  if (c.series->size() != c.labels->size()) {
    throw ShapeError("clip " + c.series->clip_id + ": " + std::to_string(c.series->size()) + " scores but " +
                     std::to_string(c.labels->size()) + " labels");
  }
}

}  // namespace

std::vector<double> timestep_scores(const AnomalyScoreSeries& s, int timestep, const EvalConfig& cfg) {
  std::vector<double> raw;
  for (const auto& row : s.per_timestep_error) raw.push_back(row.at(static_cast<std::size_t>(timestep - 1)));
  return postprocess(raw, score_config(cfg, timestep));
}

GroupReport evaluate_group(const std::vector<LabelledSeries>& clips, const EvalConfig& cfg, std::vector<RocPoint>* roc) {
  GroupReport g;
  std::vector<double> scores;
  std::vector<int> labels;
  int horizon = 0;
  for (const auto& c : clips) {
    check(c);
    scores.insert(scores.end(), c.series->normalized.begin(), c.series->normalized.end());
    labels.insert(labels.end(), c.labels->begin(), c.labels->end());
    horizon = std::max(horizon, c.series->horizon);
  }
  g.num_frames = static_cast<int>(labels.size());
  for (int l : labels) g.num_anomalous += l;
  std::vector<RocPoint> curve = roc_curve(scores, labels);
  g.auc_all = trapezoid_area(curve);
  if (roc) *roc = std::move(curve);
  for (int k = 1; k <= horizon; ++k) {
    std::vector<double> col;
    for (const auto& c : clips) {
      const auto s = timestep_scores(*c.series, k, cfg);
      col.insert(col.end(), s.begin(), s.end());
    }
    g.auc_per_timestep.push_back(frame_auc(col, labels));
  }
  return g;
}

std::string group_of(const std::string& clip_id) {
  const auto pos = clip_id.find_last_of('_');
  if (pos == std::string::npos || pos + 1 == clip_id.size()) return clip_id;
  for (std::size_t i = pos + 1; i < clip_id.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(clip_id[i]))) return clip_id;
  }
  return clip_id.substr(0, pos);
}

EvalReport per_timestep_table(const std::vector<LabelledSeries>& clips, const EvalConfig& cfg) {
  EvalReport r;
  const GroupReport all = evaluate_group(clips, cfg, &r.roc_points);
  r.auc_all = all.auc_all;
  r.auc_per_timestep = all.auc_per_timestep;
  r.num_frames = all.num_frames;
  r.num_anomalous = all.num_anomalous;

  std::map<std::string, std::vector<LabelledSeries>> by_group;
  for (const auto& c : clips) by_group[group_of(c.series->clip_id)].push_back(c);
  for (const auto& [name, members] : by_group) {
    int pos = 0;
    std::size_t n = 0;
    for (const auto& m : members) {
      for (int l : *m.labels) pos += l;
      n += m.labels->size();
    }
    if (pos == 0 || static_cast<std::size_t>(pos) == n) continue;
    r.groups[name] = evaluate_group(members, cfg);
  }

  if (cfg.per_clip_average) {
    double acc = 0.0;
    int count = 0;
    for (const auto& c : clips) {
      int pos = 0;
      for (int l : *c.labels) pos += l;
      if (pos == 0 || static_cast<std::size_t>(pos) == c.labels->size()) continue;
      acc += frame_auc(c.series->normalized, *c.labels);
      ++count;
    }
    if (count == 0) throw UndefinedMetricError("no clip contains both normal and anomalous frames");
    r.auc_per_clip_mean = acc / count;
  }
  return r;
}

std::vector<std::vector<int>> load_labels_for(const fs::path& dataset_root, const std::vector<AnomalyScoreSeries>& series) {
  std::vector<std::vector<int>> out;
  for (const auto& s : series) out.push_back(read_labels_csv(dataset_root / "test" / s.clip_id / "labels.csv"));
  return out;
}

void write_report_json(const fs::path& path, const EvalReport& r, const EvalConfig& cfg) {
  auto group_json = [](const GroupReport& g) {
    return json{{"auc_all", g.auc_all},
                {"auc_per_timestep", g.auc_per_timestep},
                {"num_frames", g.num_frames},
                {"num_anomalous", g.num_anomalous}};
  };
  json doc;
  doc["auc_all"] = r.auc_all;
  doc["auc_per_timestep"] = r.auc_per_timestep;
  doc["num_frames"] = r.num_frames;
  doc["num_anomalous"] = r.num_anomalous;
  doc["auc_per_clip_mean"] = r.auc_per_clip_mean ? json(*r.auc_per_clip_mean) : json(nullptr);
  json roc = json::array();
  for (const auto& p : r.roc_points) roc.push_back({p.fpr, p.tpr});
  doc["roc_points"] = roc;
  doc["groups"] = json::object();
  for (const auto& [name, g] : r.groups) doc["groups"][name] = group_json(g);
  doc["config"] = {{"sg_window", cfg.sg_window},
                   {"sg_order", cfg.sg_order},
                   {"order", smooth_order_name(cfg.order)},
                   {"per_clip_average", cfg.per_clip_average}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

void write_report_csv(const fs::path& path, const EvalReport& r) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "scope";
  for (std::size_t k = 1; k <= r.auc_per_timestep.size(); ++k) out << ",ts_" << k;
  out << ",All\n";
  char buf[32];
  auto row = [&](const std::string& scope, const std::vector<double>& ts, double all) {
    out << scope;
    for (double v : ts) {
      std::snprintf(buf, sizeof buf, ",%.6f", v);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.6f\n", all);
    out << buf;
  };
  row("all", r.auc_per_timestep, r.auc_all);
  for (const auto& [name, g] : r.groups) row(name, g.auc_per_timestep, g.auc_all);
}

}  // namespace f2v
