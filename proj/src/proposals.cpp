#include "codetect/proposals.hpp"

#include <algorithm>

namespace codetect {

namespace {

std::vector<BoundingBox> admissible(const VideoMeta& video, const std::vector<BoundingBox>& boxes) {
  const double limit = kMaxCandidateAreaFraction * video.width() * video.height();
  std::vector<BoundingBox> out;
  for (const auto& b : boxes) {
    auto clamped = video.clamp(b);
    if (clamped && box_area(*clamped) <= limit) out.push_back(*clamped);
  }
  return out;
}

}  // namespace

CandidateSet CandidateSet::merge(const VideoMeta& video,
                                 const std::vector<std::vector<BoundingBox>>& first,
                                 const std::string& first_tag,
                                 const std::vector<std::vector<BoundingBox>>& second,
                                 const std::string& second_tag, std::size_t n_per_frame) {
  const auto T = static_cast<std::size_t>(video.frame_count());
  if ((!first.empty() && first.size() != T) || (!second.empty() && second.size() != T)) {
    throw Error(ErrorCode::DimMismatch, "candidate file frame count differs from video '" + video.id() + "'");
  }
  std::vector<std::vector<Candidate>> frames(T);
  for (std::size_t t = 0; t < T; ++t) {
    const auto a = first.empty() ? std::vector<BoundingBox>{} : admissible(video, first[t]);
    const auto b = second.empty() ? std::vector<BoundingBox>{} : admissible(video, second[t]);
    std::size_t take_a = std::min(a.size(), (n_per_frame + 1) / 2);
    std::size_t take_b = std::min(b.size(), n_per_frame - take_a);
    take_a = std::min(a.size(), n_per_frame - take_b);
    auto& out = frames[t];
    for (std::size_t i = 0; i < std::max(take_a, take_b); ++i) {
      if (i < take_a) out.push_back({a[i], first_tag});
      if (i < take_b) out.push_back({b[i], second_tag});
    }
  }
  return CandidateSet(std::move(frames));
}

void SamplerConfig::validate() const {
  if (k < 1 || n < 1) throw Error(ErrorCode::InvalidArgument, "K and N must be >= 1");
  if (!(moving_prob > 0.0 && moving_prob < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "moving probability must lie in (0, 1)");
  }
}

BoundingBox FlowAdvectionTracker::propagate_step(const BoundingBox& box, int from_frame,
                                                 int to_frame, const FlowGrid& flow,
                                                 MotionClass motion_class) const {
  if (motion_class == MotionClass::Stationary) return box;
  // Flow at frame t carries t -> t+1; stepping backwards inverts the flow of
  // the earlier frame.
  if (to_frame > from_frame) {
    const auto [u, v] = flow.mean_vector(from_frame, box);
    return box.translated(u, v);
  }
  const auto [u, v] = flow.mean_vector(to_frame, box);
  return box.translated(-u, -v);
}

std::vector<double> seed_frame_weights(const FlowGrid& flow, int frame_count) {
  std::vector<double> w(static_cast<std::size_t>(frame_count));
  double total = 0.0;
  for (int t = 1; t <= frame_count; ++t) {
    w[static_cast<std::size_t>(t - 1)] = flow.frame_mean_magnitude(t);
    total += w[static_cast<std::size_t>(t - 1)];
  }
  if (!(total > 0.0)) std::fill(w.begin(), w.end(), 1.0);
  return w;
}

int sample_seed_frame(const FlowGrid& flow, int frame_count, Rng& rng) {
  const auto w = seed_frame_weights(flow, frame_count);
  return static_cast<int>(rng.categorical(w)) + 1;
}

MotionClass sample_motion_class(double moving_prob, Rng& rng) {
  return rng.bernoulli(moving_prob) ? MotionClass::Moving : MotionClass::Stationary;
}

std::vector<double> candidate_weights(const std::vector<Candidate>& candidates, int frame,
                                      MotionClass motion_class, const FlowGrid& flow) {
  std::vector<double> w;
  w.reserve(candidates.size());
  double total = 0.0;
  for (const auto& c : candidates) {
    const double m = flow.mean_magnitude(frame, c.box);
    w.push_back(motion_class == MotionClass::Moving ? m : 1.0 / (m + kStationaryFlowEpsilon));
    total += w.back();
  }
  // A frame without any flow gives every moving candidate zero mass; fall
  // back to uniform so the draw stays defined.
  if (!(total > 0.0)) std::fill(w.begin(), w.end(), 1.0);
  return w;
}

std::size_t sample_candidate(const std::vector<Candidate>& candidates, int frame,
                             MotionClass motion_class, const FlowGrid& flow, Rng& rng) {
  if (candidates.empty()) {
    throw Error(ErrorCode::EmptyCandidates, "no candidates in frame " + std::to_string(frame));
  }
  return rng.categorical(candidate_weights(candidates, frame, motion_class, flow));
}

Proposal propagate(const VideoMeta& video, const Detection& seed, const Tracker& tracker,
                   const FlowGrid& flow, MotionClass motion_class) {
  const int T = video.frame_count();
  if (!video.contains_frame(seed.frame)) {
    throw Error(ErrorCode::InvalidArgument, "seed frame outside video '" + video.id() + "'");
  }
  if (flow.frame_count() < T) throw Error(ErrorCode::InvalidArgument, "flow does not cover the video");

  std::vector<std::optional<BoundingBox>> boxes(static_cast<std::size_t>(T));
  boxes[static_cast<std::size_t>(seed.frame - 1)] = seed.box;

  // Moving boxes keep their size while translating; clamping can shrink them
  // at the frame border, so we track the unclamped box and clamp per frame.
  auto step = [&](int from, int to) {
    const BoundingBox& prev = *boxes[static_cast<std::size_t>(from - 1)];
    BoundingBox next = tracker.propagate_step(prev, from, to, flow, motion_class);
    // Re-centre inside the frame rather than clipping so size is preserved.
    double dx = 0.0, dy = 0.0;
    if (next.x_min() < 0) dx = -next.x_min();
    if (next.x_max() > video.width()) dx = video.width() - next.x_max();
    if (next.y_min() < 0) dy = -next.y_min();
    if (next.y_max() > video.height()) dy = video.height() - next.y_max();
    if (dx != 0.0 || dy != 0.0) next = next.translated(dx, dy);
    auto clamped = video.clamp(next);
    if (!clamped || clamped->width() < 1.0 || clamped->height() < 1.0) {
      throw Error(ErrorCode::DegenerateTrack, "track collapsed below 1px at frame " + std::to_string(to));
    }
    boxes[static_cast<std::size_t>(to - 1)] = *clamped;
  };
  for (int t = seed.frame; t < T; ++t) step(t, t + 1);
  for (int t = seed.frame; t > 1; --t) step(t, t - 1);

  std::vector<Detection> dets;
  dets.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    const auto& b = *boxes[static_cast<std::size_t>(t - 1)];
    dets.push_back(Detection{t, b, flow.orientation_at(t, b)});
  }
  return Proposal(video.id(), std::move(dets), motion_class, seed.frame);
}

std::vector<Proposal> generate_proposals(const VideoMeta& video, const CandidateSet& candidates,
                                         const FlowGrid& flow, const SamplerConfig& config,
                                         const Tracker& tracker) {
  config.validate();
  if (candidates.frame_count() != video.frame_count() || flow.frame_count() < video.frame_count()) {
    throw Error(ErrorCode::InvalidArgument, "candidates and flow must cover video '" + video.id() + "'");
  }
  Rng rng = Rng(config.rng_seed).child("proposals/" + video.id());
  std::vector<Proposal> out;
  out.reserve(config.k);
  const auto frame_w = seed_frame_weights(flow, video.frame_count());
  for (std::size_t k = 0; k < config.k; ++k) {
    const int t = static_cast<int>(rng.categorical(frame_w)) + 1;
    const MotionClass cls = sample_motion_class(config.moving_prob, rng);
    const auto& cands = candidates.frame(t);
    const std::size_t idx = sample_candidate(cands, t, cls, flow, rng);
    out.push_back(propagate(video, Detection{t, cands[idx].box, {}}, tracker, flow, cls));
  }
  return out;
}

}  // namespace codetect
