#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "codetect/core.hpp"
#include "codetect/rng.hpp"

namespace codetect {

struct Candidate {
  BoundingBox box;
  std::string generator;
};

// Per-frame single-frame box hypotheses (frames 1..T).
class CandidateSet {
 public:
  explicit CandidateSet(std::vector<std::vector<Candidate>> frames) : frames_(std::move(frames)) {}

  // Drops candidates above 1/20 of the frame area and interleaves the two
  // generators half/half up to N per frame; a short list is topped up from the
  // other one.
  static CandidateSet merge(const VideoMeta& video, const std::vector<std::vector<BoundingBox>>& first,
                            const std::string& first_tag,
                            const std::vector<std::vector<BoundingBox>>& second,
                            const std::string& second_tag, std::size_t n_per_frame);

  int frame_count() const { return static_cast<int>(frames_.size()); }
  const std::vector<Candidate>& frame(int t) const { return frames_[static_cast<std::size_t>(t - 1)]; }

 private:
  std::vector<std::vector<Candidate>> frames_;
};

inline constexpr double kMaxCandidateAreaFraction = 1.0 / 20.0;
inline constexpr double kStationaryFlowEpsilon = 1e-6;

struct SamplerConfig {
  std::size_t k = 240;  // proposals per video
  std::size_t n = 500;  // candidates per frame
  double moving_prob = 1.0 / 3.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// One propagation step of a box between adjacent frames.
class Tracker {
 public:
  virtual ~Tracker() = default;
  virtual BoundingBox propagate_step(const BoundingBox& box, int from_frame, int to_frame,
                                     const FlowGrid& flow, MotionClass motion_class) const = 0;
};

// Moving boxes translate by the mean flow vector inside them; stationary
// boxes stay put. Size never changes.
class FlowAdvectionTracker final : public Tracker {
 public:
  BoundingBox propagate_step(const BoundingBox& box, int from_frame, int to_frame,
                             const FlowGrid& flow, MotionClass motion_class) const override;
};

std::vector<double> seed_frame_weights(const FlowGrid& flow, int frame_count);
int sample_seed_frame(const FlowGrid& flow, int frame_count, Rng& rng);

MotionClass sample_motion_class(double moving_prob, Rng& rng);

std::vector<double> candidate_weights(const std::vector<Candidate>& candidates, int frame,
                                      MotionClass motion_class, const FlowGrid& flow);
std::size_t sample_candidate(const std::vector<Candidate>& candidates, int frame,
                             MotionClass motion_class, const FlowGrid& flow, Rng& rng);

// Tracks the seed forward to T and backward to 1, clamping to the frame.
Proposal propagate(const VideoMeta& video, const Detection& seed, const Tracker& tracker,
                   const FlowGrid& flow, MotionClass motion_class);

std::vector<Proposal> generate_proposals(const VideoMeta& video, const CandidateSet& candidates,
                                         const FlowGrid& flow, const SamplerConfig& config,
                                         const Tracker& tracker);

}  // namespace codetect
