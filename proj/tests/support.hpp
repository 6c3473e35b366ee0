#pragma once

// Hand-built tubes and fields shared by the unit tests. Frames are 128x128 so
// normalized coordinates of integer boxes are exact binary fractions.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "codetect/core.hpp"
#include "codetect/predicates.hpp"

namespace testing {

using namespace codetect;

inline constexpr double kSide = 128.0;

inline VideoMeta video(int frames, const std::string& id = "v") { return VideoMeta(id, kSide, kSide, frames); }

// Box of side `size` centred at (cx, cy) in pixels.
inline BoundingBox box_at(double cx, double cy, double size = 8.0) {
  return BoundingBox(cx - size / 2, cy - size / 2, cx + size / 2, cy + size / 2);
}

// Tube whose frame-t box is f(t).
inline Proposal tube(int frames, const std::function<BoundingBox(int)>& f, const std::string& id = "v",
                     MotionClass cls = MotionClass::Stationary) {
  std::vector<Detection> d;
  for (int t = 1; t <= frames; ++t) d.push_back(Detection{t, f(t), {}});
  return Proposal(id, std::move(d), cls, 1);
}

inline Proposal static_tube(int frames, double cx, double cy, double size = 8.0, const std::string& id = "v") {
  return tube(frames, [=](int) { return box_at(cx, cy, size); }, id);
}

// Linear motion from (x0, y0) at frame 1 to (x1, y1) at frame T.
inline Proposal linear_tube(int frames, double x0, double y0, double x1, double y1, double size = 8.0,
                            const std::string& id = "v") {
  return tube(
      frames,
      [=](int t) {
        const double a = frames == 1 ? 0.0 : double(t - 1) / double(frames - 1);
        return box_at(x0 + a * (x1 - x0), y0 + a * (y1 - y0), size);
      },
      id);
}

inline Proposal reflect_x(const Proposal& p) {
  return tube(p.frame_count(), [&](int t) {
    const auto& b = p.at(t).box;
    return BoundingBox(kSide - b.x_max(), b.y_min(), kSide - b.x_min(), b.y_max());
  });
}

inline Proposal reflect_y(const Proposal& p) {
  return tube(p.frame_count(), [&](int t) {
    const auto& b = p.at(t).box;
    return BoundingBox(b.x_min(), kSide - b.y_max(), b.x_max(), kSide - b.y_min());
  });
}

// Flow with the same (u, v) in every cell; per-frame values from f.
inline FlowGrid uniform_flow(int frames, const std::function<std::pair<float, float>(int)>& f, int cells = 16) {
  std::vector<FlowGrid::Frame> out;
  const auto n = static_cast<std::size_t>(cells * cells);
  for (int t = 1; t <= frames; ++t) {
    const auto [u, v] = f(t);
    out.push_back({std::vector<float>(n, u), std::vector<float>(n, v), {}});
  }
  return FlowGrid(cells, cells, kSide / cells, std::move(out));
}

// Independent log-logistic gate: log(1 / (1 + exp(20 (x - a)))).
inline double oracle_dlt(double x, double a) {
  const double z = 20.0 * (x - a);
  return z > 0 ? -(z + std::log1p(std::exp(-z))) : -std::log1p(std::exp(z));
}
inline double oracle_dgt(double x, double a) { return oracle_dlt(-x, -a); }

}  // namespace testing
