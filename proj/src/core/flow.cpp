#include "f2v/core/flow.hpp"

#include <cmath>
#include <string>

#include "f2v/core/errors.hpp"

namespace f2v {

PolarFlow flow_to_polar(const FlowField& flow) {
  if (flow.u.size() != flow.size() || flow.v.size() != flow.size() ||
      flow.size() != static_cast<std::size_t>(flow.height) * flow.width) {
    throw ShapeError("flow field buffers do not match " + std::to_string(flow.height) + "x" +
                     std::to_string(flow.width));
  }
  std::size_t bad = 0;
  for (std::size_t i = 0; i < flow.size(); ++i) {
    if (!std::isfinite(flow.u[i]) || !std::isfinite(flow.v[i])) ++bad;
  }
  if (bad > 0) {
    throw InvalidInputError("flow field has " + std::to_string(bad) + " non-finite pixel(s)");
  }

  PolarFlow polar;
  polar.height = flow.height;
  polar.width = flow.width;
  polar.magnitude.resize(flow.size());
  polar.angle.resize(flow.size());
  for (std::size_t i = 0; i < flow.size(); ++i) {
    const double u = flow.u[i];
    const double v = flow.v[i];
    polar.magnitude[i] = static_cast<float>(std::hypot(u, v));
    // atan2 returns -pi for (negative u, -0.0); fold it onto +pi.
    double a = (u == 0.0 && v == 0.0) ? 0.0 : std::atan2(v, u);
    if (a <= -M_PI) a = M_PI;
    polar.angle[i] = static_cast<float>(a);
  }
  return polar;
}

DirectionMap compute_direction_map(const FlowField& flow, float eps_motion) {
  if (!(eps_motion > 0.0f)) {
    throw ParameterError("eps_motion must be positive");
  }
  const PolarFlow polar = flow_to_polar(flow);
  DirectionMap dm;
  dm.height = flow.height;
  dm.width = flow.width;
  dm.c0.assign(flow.size(), 0.0f);
  dm.c1.assign(flow.size(), 0.0f);
  for (std::size_t i = 0; i < flow.size(); ++i) {
    if (polar.magnitude[i] < eps_motion) continue;
    // Normalizing the vector directly keeps c0^2 + c1^2 = 1 to float precision.
    const double m = std::hypot(static_cast<double>(flow.u[i]), static_cast<double>(flow.v[i]));
    dm.c0[i] = static_cast<float>(std::abs(flow.u[i] / m));
    dm.c1[i] = static_cast<float>(std::abs(flow.v[i] / m));
  }
  return dm;
}

}  // namespace f2v
