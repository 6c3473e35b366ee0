#include "codetect/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace codetect {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownWord: return "UnknownWord";
    case ErrorCode::NoTemplateMatch: return "NoTemplateMatch";
    case ErrorCode::MalformedRules: return "MalformedRules";
    case ErrorCode::UnknownPredicate: return "UnknownPredicate";
    case ErrorCode::MissingOrientation: return "MissingOrientation";
    case ErrorCode::VideoMismatch: return "VideoMismatch";
    case ErrorCode::EmptyCandidates: return "EmptyCandidates";
    case ErrorCode::DegenerateTrack: return "DegenerateTrack";
    case ErrorCode::DegenerateCrop: return "DegenerateCrop";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::MissingDescriptor: return "MissingDescriptor";
    case ErrorCode::MissingScore: return "MissingScore";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NoOverlapFrames: return "NoOverlapFrames";
    case ErrorCode::InsufficientAnnotators: return "InsufficientAnnotators";
    case ErrorCode::SpecInfeasible: return "SpecInfeasible";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
  }
  return "Unknown";
}

BoundingBox::BoundingBox(double x_min, double y_min, double x_max, double y_max)
    : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
  if (!(std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
        std::isfinite(y_max))) {
    throw Error(ErrorCode::InvalidArgument, "bounding box coordinates must be finite");
  }
  if (!(x_min < x_max && y_min < y_max)) {
    throw Error(ErrorCode::InvalidArgument, "bounding box must have positive extent");
  }
}

BoundingBox BoundingBox::translated(double dx, double dy) const {
  return BoundingBox(x_min_ + dx, y_min_ + dy, x_max_ + dx, y_max_ + dy);
}

double box_area(const BoundingBox& b) { return b.width() * b.height(); }

VideoMeta::VideoMeta(std::string id, double width, double height, int frame_count, double fps)
    : id_(std::move(id)), width_(width), height_(height), frame_count_(frame_count), fps_(fps) {
  if (!(width > 0 && height > 0)) {
    throw Error(ErrorCode::InvalidArgument, "video '" + id_ + "' needs positive frame size");
  }
  if (frame_count < 2) {
    throw Error(ErrorCode::InvalidArgument, "video '" + id_ + "' needs at least 2 frames");
  }
  if (!(fps > 0)) throw Error(ErrorCode::InvalidArgument, "fps must be positive");
}

std::optional<BoundingBox> VideoMeta::clamp(double x_min, double y_min, double x_max,
                                            double y_max) const {
  const double x0 = std::clamp(x_min, 0.0, width_);
  const double y0 = std::clamp(y_min, 0.0, height_);
  const double x1 = std::clamp(x_max, 0.0, width_);
  const double y1 = std::clamp(y_max, 0.0, height_);
  if (!(x0 < x1 && y0 < y1)) return std::nullopt;
  return BoundingBox(x0, y0, x1, y1);
}

std::string_view to_string(MotionClass c) {
  return c == MotionClass::Moving ? "moving" : "stationary";
}

MotionClass motion_class_from_string(std::string_view s) {
  if (s == "moving") return MotionClass::Moving;
  if (s == "stationary") return MotionClass::Stationary;
  throw Error(ErrorCode::Format, "unknown motion class '" + std::string(s) + "'");
}

Proposal::Proposal(std::string video_id, std::vector<Detection> boxes, MotionClass motion_class,
                   int seed_frame)
    : video_id_(std::move(video_id)),
      boxes_(std::move(boxes)),
      motion_class_(motion_class),
      seed_frame_(seed_frame) {
  if (boxes_.empty()) throw Error(ErrorCode::InvalidArgument, "proposal has no boxes");
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    if (boxes_[i].frame != static_cast<int>(i) + 1) {
      throw Error(ErrorCode::InvalidArgument, "proposal frames must be consecutive from 1");
    }
  }
  if (seed_frame_ < 1 || seed_frame_ > frame_count()) {
    throw Error(ErrorCode::InvalidArgument, "proposal seed frame out of range");
  }
  if (motion_class_ == MotionClass::Stationary) {
    const double w = boxes_.front().box.width();
    const double h = boxes_.front().box.height();
    for (const auto& d : boxes_) {
      if (std::abs(d.box.width() - w) > 1e-9 || std::abs(d.box.height() - h) > 1e-9) {
        throw Error(ErrorCode::InvalidArgument, "stationary proposal must keep a constant size");
      }
    }
  }
}

bool Proposal::has_orientation() const {
  return std::all_of(boxes_.begin(), boxes_.end(),
                     [](const Detection& d) { return d.orientation.has_value(); });
}

FlowGrid::FlowGrid(int grid_x, int grid_y, double cell_px, std::vector<Frame> frames)
    : gx_(grid_x), gy_(grid_y), cell_px_(cell_px), frames_(std::move(frames)) {
  if (gx_ < 1 || gy_ < 1) throw Error(ErrorCode::InvalidArgument, "flow grid must be >= 1x1");
  if (!(cell_px_ > 0)) throw Error(ErrorCode::InvalidArgument, "flow cell size must be positive");
  if (frames_.empty()) throw Error(ErrorCode::InvalidArgument, "flow grid has no frames");
  const auto cells = static_cast<std::size_t>(gx_) * static_cast<std::size_t>(gy_);
  has_orientation_ = true;
  magnitude_.reserve(frames_.size());
  for (const auto& f : frames_) {
    if (f.u.size() != cells || f.v.size() != cells) {
      throw Error(ErrorCode::DimMismatch, "flow frame does not match grid size");
    }
    if (f.theta.empty()) {
      has_orientation_ = false;
    } else if (f.theta.size() != cells) {
      throw Error(ErrorCode::DimMismatch, "orientation channel does not match grid size");
    }
    std::vector<float> mag(cells);
    for (std::size_t i = 0; i < cells; ++i) mag[i] = std::hypot(f.u[i], f.v[i]);
    magnitude_.push_back(std::move(mag));
  }
}

FlowGrid FlowGrid::zeros(int grid_x, int grid_y, double cell_px, int frame_count) {
  const auto cells = static_cast<std::size_t>(grid_x) * static_cast<std::size_t>(grid_y);
  std::vector<Frame> frames(static_cast<std::size_t>(frame_count),
                            Frame{std::vector<float>(cells, 0.0f), std::vector<float>(cells, 0.0f), {}});
  return FlowGrid(grid_x, grid_y, cell_px, std::move(frames));
}

template <typename F>
double FlowGrid::weighted_mean(const BoundingBox& b, F&& cell_value) const {
  const int i0 = std::max(0, static_cast<int>(std::floor(b.x_min() / cell_px_)));
  const int i1 = std::min(gx_ - 1, static_cast<int>(std::ceil(b.x_max() / cell_px_)) - 1);
  const int j0 = std::max(0, static_cast<int>(std::floor(b.y_min() / cell_px_)));
  const int j1 = std::min(gy_ - 1, static_cast<int>(std::ceil(b.y_max() / cell_px_)) - 1);
  double sum = 0.0;
  double weight = 0.0;
  for (int j = j0; j <= j1; ++j) {
    const double oy = std::min(b.y_max(), (j + 1) * cell_px_) - std::max(b.y_min(), j * cell_px_);
    if (oy <= 0) continue;
    for (int i = i0; i <= i1; ++i) {
      const double ox =
          std::min(b.x_max(), (i + 1) * cell_px_) - std::max(b.x_min(), i * cell_px_);
      if (ox <= 0) continue;
      const double w = ox * oy;
      sum += w * cell_value(static_cast<std::size_t>(j) * static_cast<std::size_t>(gx_) +
                            static_cast<std::size_t>(i));
      weight += w;
    }
  }
  return weight > 0 ? sum / weight : 0.0;
}

double FlowGrid::mean_magnitude(int t, const BoundingBox& b) const {
  const auto& mag = magnitude_[static_cast<std::size_t>(t - 1)];
  return weighted_mean(b, [&](std::size_t k) { return static_cast<double>(mag[k]); });
}

std::pair<double, double> FlowGrid::mean_vector(int t, const BoundingBox& b) const {
  const auto& f = frame(t);
  return {weighted_mean(b, [&](std::size_t k) { return static_cast<double>(f.u[k]); }),
          weighted_mean(b, [&](std::size_t k) { return static_cast<double>(f.v[k]); })};
}

double FlowGrid::frame_mean_magnitude(int t) const {
  const auto& mag = magnitude_[static_cast<std::size_t>(t - 1)];
  double sum = 0.0;
  for (float m : mag) sum += m;
  return sum / static_cast<double>(mag.size());
}

std::optional<double> FlowGrid::orientation_at(int t, const BoundingBox& b) const {
  if (!has_orientation_) return std::nullopt;
  const int i = std::clamp(static_cast<int>(std::floor(b.center_x() / cell_px_)), 0, gx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(b.center_y() / cell_px_)), 0, gy_ - 1);
  return wrap_angle(frame(t).theta[static_cast<std::size_t>(j) * static_cast<std::size_t>(gx_) +
                                   static_cast<std::size_t>(i)]);
}

Point2 normalized_center(const BoundingBox& b, const VideoMeta& v) {
  return {b.center_x() / v.width(), b.center_y() / v.height()};
}

double normalized_dist(const BoundingBox& a, const BoundingBox& b, const VideoMeta& v) {
  const Point2 pa = normalized_center(a, v);
  const Point2 pb = normalized_center(b, v);
  return std::hypot(pa.x - pb.x, pa.y - pb.y);
}

double wrap_angle(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(radians, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  if (r > std::numbers::pi) r -= two_pi;
  return r;
}

}  // namespace codetect
