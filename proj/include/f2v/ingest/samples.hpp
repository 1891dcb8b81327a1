#pragma once

#include <vector>

#include "f2v/core/flow.hpp"
#include "f2v/core/types.hpp"
#include "f2v/ingest/dataset.hpp"

namespace f2v {

inline constexpr int kDefaultHorizon = 10;

struct TrainingSample {
  SemanticFrame initial;
  DirectionMap direction;
  FlowField flow;
  VideoTensor target;
};

/// Valid initial frame indices t in [1, len - horizon - 1]. Frame 0 is never
/// an initial frame because its motion cue needs flow[t-1].
std::vector<int> initial_frame_indices(int clip_length, int horizon);

/// One sample per initial index: direction and flow from flow[t-1], target
/// frames t+1 .. t+horizon. Too-short clips yield an empty list.
std::vector<TrainingSample> make_training_samples(const Clip& clip, int horizon = kDefaultHorizon,
                                                  float eps_motion = kDefaultMotionEpsilon);

}  // namespace f2v
