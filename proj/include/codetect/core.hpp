#pragma once

#include <compare>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "codetect/error.hpp"

namespace codetect {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Log-domain score. -inf is a legal value and absorbs addition; +inf and NaN
// never arise from library code.
class Score {
 public:
  constexpr Score() = default;
  constexpr explicit Score(double value) : value_(value) {}

  static constexpr Score impossible() { return Score(kNegInf); }

  constexpr double value() const { return value_; }
  constexpr bool is_impossible() const { return value_ == kNegInf; }

  constexpr Score& operator+=(Score other) {
    value_ += other.value_;
    return *this;
  }
  friend constexpr Score operator+(Score a, Score b) { return a += b; }
  friend constexpr bool operator==(Score a, Score b) { return a.value_ == b.value_; }
  friend constexpr std::partial_ordering operator<=>(Score a, Score b) {
    return a.value_ <=> b.value_;
  }

 private:
  double value_ = 0.0;
};

// Axis-aligned box in continuous pixel coordinates.
class BoundingBox {
 public:
  BoundingBox(double x_min, double y_min, double x_max, double y_max);

  double x_min() const { return x_min_; }
  double y_min() const { return y_min_; }
  double x_max() const { return x_max_; }
  double y_max() const { return y_max_; }
  double width() const { return x_max_ - x_min_; }
  double height() const { return y_max_ - y_min_; }
  double center_x() const { return 0.5 * (x_min_ + x_max_); }
  double center_y() const { return 0.5 * (y_min_ + y_max_); }

  BoundingBox translated(double dx, double dy) const;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

 private:
  double x_min_, y_min_, x_max_, y_max_;
};

double box_area(const BoundingBox& b);

class VideoMeta {
 public:
  VideoMeta(std::string id, double width, double height, int frame_count, double fps = 30.0);

  const std::string& id() const { return id_; }
  double width() const { return width_; }
  double height() const { return height_; }
  int frame_count() const { return frame_count_; }
  double fps() const { return fps_; }

  bool contains_frame(int t) const { return t >= 1 && t <= frame_count_; }

  // Clamps raw coordinates into [0,W]x[0,H]; nullopt when nothing of positive
  // extent remains.
  std::optional<BoundingBox> clamp(double x_min, double y_min, double x_max, double y_max) const;
  std::optional<BoundingBox> clamp(const BoundingBox& b) const {
    return clamp(b.x_min(), b.y_min(), b.x_max(), b.y_max());
  }

 private:
  std::string id_;
  double width_;
  double height_;
  int frame_count_;
  double fps_;
};

struct Detection {
  int frame = 1;  // 1-based
  BoundingBox box;
  std::optional<double> orientation;  // radians in (-pi, pi]
};

enum class MotionClass { Moving, Stationary };

std::string_view to_string(MotionClass c);
MotionClass motion_class_from_string(std::string_view s);

// One box per frame 1..T of a single video.
class Proposal {
 public:
  Proposal(std::string video_id, std::vector<Detection> boxes, MotionClass motion_class,
           int seed_frame);

  const std::string& video_id() const { return video_id_; }
  int frame_count() const { return static_cast<int>(boxes_.size()); }
  const Detection& at(int t) const { return boxes_[static_cast<std::size_t>(t - 1)]; }
  const std::vector<Detection>& detections() const { return boxes_; }
  MotionClass motion_class() const { return motion_class_; }
  int seed_frame() const { return seed_frame_; }
  bool has_orientation() const;

 private:
  std::string video_id_;
  std::vector<Detection> boxes_;
  MotionClass motion_class_;
  int seed_frame_;
};

// Dense per-frame motion field on a regular grid, optionally carrying a
// per-cell in-plane orientation channel. Flow at frame t describes motion
// from t to t+1.
class FlowGrid {
 public:
  struct Frame {
    std::vector<float> u;
    std::vector<float> v;
    std::vector<float> theta;  // empty when no orientation channel
  };

  FlowGrid(int grid_x, int grid_y, double cell_px, std::vector<Frame> frames);

  // All-zero field covering `frame_count` frames.
  static FlowGrid zeros(int grid_x, int grid_y, double cell_px, int frame_count);

  int grid_x() const { return gx_; }
  int grid_y() const { return gy_; }
  double cell_px() const { return cell_px_; }
  int frame_count() const { return static_cast<int>(frames_.size()); }
  const Frame& frame(int t) const { return frames_[static_cast<std::size_t>(t - 1)]; }
  bool has_orientation() const { return has_orientation_; }

  // Overlap-area weighted mean of per-cell flow magnitude inside the box.
  double mean_magnitude(int t, const BoundingBox& b) const;
  // Overlap-area weighted mean flow vector inside the box.
  std::pair<double, double> mean_vector(int t, const BoundingBox& b) const;
  double frame_mean_magnitude(int t) const;
  // Orientation of the cell holding the box center.
  std::optional<double> orientation_at(int t, const BoundingBox& b) const;

 private:
  template <typename F>
  double weighted_mean(const BoundingBox& b, F&& cell_value) const;

  int gx_, gy_;
  double cell_px_;
  std::vector<Frame> frames_;
  std::vector<std::vector<float>> magnitude_;  // cached per frame
  bool has_orientation_ = false;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

Point2 normalized_center(const BoundingBox& b, const VideoMeta& v);
inline Point2 normalized_center(const Detection& d, const VideoMeta& v) {
  return normalized_center(d.box, v);
}

double normalized_dist(const BoundingBox& a, const BoundingBox& b, const VideoMeta& v);
inline double normalized_dist(const Detection& a, const Detection& b, const VideoMeta& v) {
  return normalized_dist(a.box, b.box, v);
}

// Wraps an angle into (-pi, pi].
double wrap_angle(double radians);

}  // namespace codetect
