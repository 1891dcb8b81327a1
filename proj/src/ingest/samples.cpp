#include "f2v/ingest/samples.hpp"

namespace f2v {

std::vector<int> initial_frame_indices(int clip_length, int horizon) {
  std::vector<int> out;
  for (int t = 1; t <= clip_length - horizon - 1; ++t) out.push_back(t);
  return out;
}

std::vector<TrainingSample> make_training_samples(const Clip& clip, int horizon, float eps_motion) {
  std::vector<TrainingSample> samples;
  for (int t : initial_frame_indices(clip.num_frames(), horizon)) {
    TrainingSample s;
    s.initial = clip.frames[t];
    s.flow = clip.flows[t - 1];
    s.direction = compute_direction_map(s.flow, eps_motion);
    for (int k = 1; k <= horizon; ++k) s.target.frames.push_back(clip.frames[t + k].image);
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace f2v
