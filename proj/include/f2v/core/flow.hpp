#pragma once

#include "f2v/core/types.hpp"

namespace f2v {

inline constexpr float kDefaultMotionEpsilon = 1e-3f;

/// Polar decomposition of a flow field. The angle of a zero vector is 0.
/// Throws InvalidInputError if any component is non-finite.
PolarFlow flow_to_polar(const FlowField& flow);

/// (|cos|, |sin|) of the flow angle wherever the magnitude reaches
/// `eps_motion`; (0, 0) elsewhere.
DirectionMap compute_direction_map(const FlowField& flow, float eps_motion = kDefaultMotionEpsilon);

}  // namespace f2v
