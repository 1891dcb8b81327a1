#include "f2v/scorer/scores_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "f2v/core/errors.hpp"

namespace f2v {

void write_scores_csv(const std::filesystem::path& path, const std::vector<AnomalyScoreSeries>& series) {
  int horizon = 0;
  for (const auto& s : series) horizon = std::max(horizon, s.horizon);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "clip_id,frame_index,raw,smoothed,normalized";
  for (int k = 1; k <= horizon; ++k) out << ",ts_" << k;
  out << "\n";
  char buf[64];
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << s.clip_id << ',' << s.frame_index[i];
      for (double v : {s.raw[i], s.smoothed[i], s.normalized[i]}) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        out << buf;
      }
      for (double v : s.per_timestep_error[i]) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        out << buf;
      }
      out << "\n";
    }
  }
}

std::vector<AnomalyScoreSeries> read_scores_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("clip_id,frame_index,raw,smoothed,normalized", 0) != 0) {
    throw FormatError(path.string() + ": missing scores header");
  }
  int horizon = 0;
  for (char c : line) horizon += c == ',';
  horizon -= 4;
  std::vector<AnomalyScoreSeries> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != 5 + horizon) {
      throw FormatError(path.string() + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                        " fields, expected " + std::to_string(5 + horizon));
    }
    if (out.empty() || out.back().clip_id != cells[0]) {
      out.emplace_back();
      out.back().clip_id = cells[0];
      out.back().horizon = horizon;
    }
    auto& s = out.back();
    try {
      s.frame_index.push_back(std::stoi(cells[1]));
      s.raw.push_back(std::stod(cells[2]));
      s.smoothed.push_back(std::stod(cells[3]));
      s.normalized.push_back(std::stod(cells[4]));
      std::vector<double> ts;
      for (int k = 0; k < horizon; ++k) ts.push_back(std::stod(cells[static_cast<std::size_t>(5 + k)]));
      s.per_timestep_error.push_back(std::move(ts));
    } catch (const std::exception&) {
      throw FormatError(path.string() + ": row " + std::to_string(row) + " is not numeric");
    }
  }
  return out;
}

}  // namespace f2v
