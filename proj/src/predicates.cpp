#include "codetect/predicates.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace codetect {

namespace {

constexpr std::array<std::string_view, 25> kCatalogue = {
    "move",         "moveUp",       "moveDown",    "moveVertical", "moveLeftwards",
    "moveRightwards", "moveHorizontal", "rotate",  "towards",      "awayFrom",
    "leftOfStart",  "leftOfEnd",    "rightOfStart", "rightOfEnd",  "onTopOfStart",
    "onTopOfEnd",   "nearStart",    "nearEnd",     "inStart",      "inEnd",
    "belowStart",   "belowEnd",     "aboveStart",  "aboveEnd",     "over"};
constexpr std::size_t kUnaryCount = 8;

// log(1 / (1 + exp(z))) = -softplus(z), evaluated without overflow.
double neg_softplus(double z) {
  if (z > 0) return -(z + std::log1p(std::exp(-z)));
  return -std::log1p(std::exp(z));
}

// Quantities over the first or last L frames of a proposal (window clipped
// to [1, T]).
struct Window {
  int begin;
  int end;  // inclusive
};

Window start_window(int frames, int L) { return {1, std::min(frames, L)}; }
Window end_window(int frames, int L) { return {std::max(1, frames - L + 1), frames}; }

template <typename F>
double window_mean(Window w, F&& f) {
  double sum = 0.0;
  for (int t = w.begin; t <= w.end; ++t) sum += f(t);
  return sum / static_cast<double>(w.end - w.begin + 1);
}

const VideoMeta& video_of(const PredicateContext& ctx) {
  if (!ctx.video) throw Error(ErrorCode::InvalidArgument, "predicate context has no video");
  return *ctx.video;
}

double mean_x(const Proposal& p, Window w, const VideoMeta& v) {
  return window_mean(w, [&](int t) { return normalized_center(p.at(t), v).x; });
}
double mean_y(const Proposal& p, Window w, const VideoMeta& v) {
  return window_mean(w, [&](int t) { return normalized_center(p.at(t), v).y; });
}
double mean_dist(const Proposal& a, const Proposal& b, Window w, const VideoMeta& v) {
  return window_mean(w, [&](int t) { return normalized_dist(a.at(t), b.at(t), v); });
}
double mean_area(const Proposal& p, Window w) {
  return window_mean(w, [&](int t) { return box_area(p.at(t).box); });
}

void check_frames(const Proposal& p, const VideoMeta& v) {
  if (p.frame_count() != v.frame_count()) {
    throw Error(ErrorCode::VideoMismatch, "proposal length does not match video '" + v.id() + "'");
  }
}

}  // namespace

std::span<const std::string_view> predicate_catalogue() { return kCatalogue; }

std::optional<int> predicate_arity(std::string_view name) {
  for (std::size_t i = 0; i < kCatalogue.size(); ++i) {
    if (kCatalogue[i] == name) return i < kUnaryCount ? 1 : 2;
  }
  return std::nullopt;
}

bool predicate_implies_moving(std::string_view name) {
  const auto arity = predicate_arity(name);
  return (arity && *arity == 1) || name == "towards" || name == "awayFrom";
}

bool predicate_implies_stationary_reference(std::string_view name) {
  const auto arity = predicate_arity(name);
  return arity && *arity == 2 && name != "towards" && name != "awayFrom";
}

void PredicateConstants::validate() const {
  if (!(dist_large > 0 && dist_small > 0 && angle > 0 && von_mises_kappa > 0)) {
    throw Error(ErrorCode::InvalidArgument, "predicate constants must be positive");
  }
  if (!(logistic_slope < 0)) throw Error(ErrorCode::InvalidArgument, "logistic slope must be < 0");
  if (lookback < 1 || endpoint_window < 1) {
    throw Error(ErrorCode::InvalidArgument, "lookback and endpoint window must be >= 1");
  }
}

Score dist_less_than(double x, double a, double slope) {
  // log[1 / (1 + exp(-b (x - a)))]
  return Score(neg_softplus(-slope * (x - a)));
}

Score dist_greater_than(double x, double a, double slope) { return dist_less_than(-x, -a, slope); }

double med_flow_mag_raw(const Proposal& p, const FlowGrid& flow) {
  if (flow.frame_count() < p.frame_count()) {
    throw Error(ErrorCode::InvalidArgument, "flow does not cover every proposal frame");
  }
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(p.frame_count()));
  for (const auto& d : p.detections()) means.push_back(flow.mean_magnitude(d.frame, d.box));
  const auto mid = means.begin() + static_cast<long>((means.size() - 1) / 2);
  std::nth_element(means.begin(), mid, means.end());
  return *mid;
}

Score flow_score(double raw_median, const FlowRange& range) {
  double scaled = 0.0;
  if (range.hi > range.lo) scaled = std::clamp((raw_median - range.lo) / (range.hi - range.lo), 0.0, 1.0);
  return Score(std::log(kFlowScoreEpsilon + (1.0 - kFlowScoreEpsilon) * scaled));
}

Score med_flow_mag(const Proposal& p, const PredicateContext& ctx) {
  if (!ctx.flow) throw Error(ErrorCode::InvalidArgument, "predicate context has no flow");
  return flow_score(med_flow_mag_raw(p, *ctx.flow), ctx.flow_range);
}

Score temp_coher(const Proposal& p, const PredicateContext& ctx) {
  const auto& v = video_of(ctx);
  const int T = p.frame_count();
  if (T < 2) throw Error(ErrorCode::InvalidArgument, "temporal coherence needs T >= 2");
  double sum = 0.0;
  for (int t = 1; t < T; ++t) {
    sum += dist_less_than(normalized_dist(p.at(t), p.at(t + 1), v), ctx.constants.dist_small,
                          ctx.constants.logistic_slope)
               .value();
  }
  return Score(sum / static_cast<double>(T - 1));
}

double rot_angle(const Proposal& p, int t, int lookback) {
  if (t - lookback < 1 || t > p.frame_count()) {
    throw Error(ErrorCode::InvalidArgument, "rotation angle needs t > lookback");
  }
  const auto& now = p.at(t).orientation;
  const auto& then = p.at(t - lookback).orientation;
  if (!now || !then) throw Error(ErrorCode::MissingOrientation, "proposal has no orientation channel");
  return wrap_angle(*now - *then);
}

double bessel_i0(double x) {
  // Power series sum_k ((x/2)^k / k!)^2; converges quickly for the small
  // concentrations used here.
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

Score has_rotation(double alpha, double beta, double kappa) {
  return Score(kappa * std::cos(alpha - beta) - std::log(2.0 * std::numbers::pi) -
               std::log(bessel_i0(kappa)));
}

Score smaller(const BoundingBox& a, const BoundingBox& b) {
  return box_area(a) < box_area(b) ? Score(0.0) : Score::impossible();
}

Score eval_unary(std::string_view name, const Proposal& p, const PredicateContext& ctx) {
  const auto arity = predicate_arity(name);
  if (!arity || *arity != 1) {
    throw Error(ErrorCode::UnknownPredicate, "'" + std::string(name) + "' is not a unary predicate");
  }
  const auto& v = video_of(ctx);
  check_frames(p, v);
  const auto& c = ctx.constants;
  const double b = c.logistic_slope;
  const Score move = med_flow_mag(p, ctx);
  if (name == "move") return move;
  if (name == "rotate") {
    if (!p.has_orientation()) {
      throw Error(ErrorCode::MissingOrientation, "rotate needs an orientation channel");
    }
    Score best = Score::impossible();
    for (int t = c.lookback + 1; t <= p.frame_count(); ++t) {
      best = std::max(best, has_rotation(rot_angle(p, t, c.lookback), c.angle, c.von_mises_kappa));
    }
    return move + best;
  }
  const int T = p.frame_count();
  const Window first = start_window(T, c.endpoint_window);
  const Window last = end_window(T, c.endpoint_window);
  const double dy = mean_y(p, last, v) - mean_y(p, first, v);
  const double dx = mean_x(p, last, v) - mean_x(p, first, v);
  if (name == "moveUp") return move + dist_less_than(dy, -c.dist_large, b);
  if (name == "moveDown") return move + dist_greater_than(dy, c.dist_large, b);
  if (name == "moveVertical") return move + dist_greater_than(std::abs(dy), c.dist_large, b);
  if (name == "moveLeftwards") return move + dist_less_than(dx, -c.dist_large, b);
  if (name == "moveRightwards") return move + dist_greater_than(dx, c.dist_large, b);
  // moveHorizontal
  return move + dist_greater_than(std::abs(dx), c.dist_large, b);
}

Score eval_binary(std::string_view name, const Proposal& p1, const Proposal& p2,
                  const PredicateContext& ctx) {
  const auto arity = predicate_arity(name);
  if (!arity || *arity != 2) {
    throw Error(ErrorCode::UnknownPredicate, "'" + std::string(name) + "' is not a binary predicate");
  }
  if (p1.video_id() != p2.video_id()) {
    throw Error(ErrorCode::VideoMismatch, "binary predicate over proposals from different videos");
  }
  const auto& v = video_of(ctx);
  check_frames(p1, v);
  check_frames(p2, v);
  const auto& c = ctx.constants;
  const double b = c.logistic_slope;
  const int T = p1.frame_count();
  const Window first = start_window(T, c.endpoint_window);
  const Window last = end_window(T, c.endpoint_window);

  if (name == "towards" || name == "awayFrom") {
    const double change = mean_dist(p1, p2, last, v) - mean_dist(p1, p2, first, v);
    const Score move = med_flow_mag(p1, ctx);
    return name == "towards" ? move + dist_less_than(change, -c.dist_large, b)
                             : move + dist_greater_than(change, c.dist_large, b);
  }

  const Score coher = temp_coher(p2, ctx);
  if (name == "over") {
    Score best = Score::impossible();
    for (int t = 1; t <= T; ++t) {
      const Point2 a = normalized_center(p1.at(t), v);
      const Point2 r = normalized_center(p2.at(t), v);
      best = std::max(best, dist_less_than(a.y - r.y, -c.dist_small, b) +
                                dist_less_than(std::abs(a.x - r.x), c.dist_large, b));
    }
    return coher + best;
  }

  const bool at_start = name.ends_with("Start");
  const Window w = at_start ? first : last;
  const double x_gap = mean_x(p1, w, v) - mean_x(p2, w, v);
  const double y_gap = mean_y(p1, w, v) - mean_y(p2, w, v);
  const std::string_view stem = name.substr(0, name.size() - (at_start ? 5 : 3));

  if (stem == "leftOf") return coher + dist_less_than(x_gap, -c.dist_small, b);
  if (stem == "rightOf") return coher + dist_greater_than(x_gap, c.dist_small, b);
  if (stem == "below") return coher + dist_greater_than(y_gap, c.dist_small, b);
  if (stem == "above") return coher + dist_less_than(y_gap, -c.dist_small, b);
  if (stem == "onTopOf") {
    return coher + dist_greater_than(y_gap, -2.0 * c.dist_large, b) + dist_less_than(y_gap, 0.0, b) +
           dist_less_than(std::abs(x_gap), 2.0 * c.dist_small, b);
  }
  const Score near = coher + dist_less_than(mean_dist(p1, p2, w, v), 2.0 * c.dist_small, b);
  if (stem == "near") return near;
  // in: tempCoher(p2) + near(p1, p2) + smaller(p1, p2), with window-averaged areas.
  const Score size_gate = mean_area(p1, w) < mean_area(p2, w) ? Score(0.0) : Score::impossible();
  return coher + near + size_gate;
}

FlowRange flow_range_of(std::span<const double> raw_medians) {
  if (raw_medians.empty()) return {};
  const auto [lo, hi] = std::minmax_element(raw_medians.begin(), raw_medians.end());
  return {*lo, *hi};
}

}  // namespace codetect
