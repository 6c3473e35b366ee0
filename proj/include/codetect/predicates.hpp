#pragma once

#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "codetect/core.hpp"

namespace codetect {

// Names of every scoring predicate, in table order: eight unary rows followed
// by seventeen binary rows.
std::span<const std::string_view> predicate_catalogue();

// 1 or 2 for catalogue names, nullopt otherwise.
std::optional<int> predicate_arity(std::string_view name);

// Predicates whose score contains the flow term of their (first) argument.
bool predicate_implies_moving(std::string_view name);
// Binary predicates whose score contains the temporal coherence of their
// second argument.
bool predicate_implies_stationary_reference(std::string_view name);

struct PredicateConstants {
  double dist_large = 0.25;
  double dist_small = 0.05;
  double angle = std::numbers::pi / 2.0;
  double logistic_slope = -20.0;  // b
  double von_mises_kappa = 4.0;
  int lookback = 30;              // frames (one second at 30 fps)
  int endpoint_window = 15;       // L

  void validate() const;
};

// Set-level min-max range of raw median flow magnitudes, used to map the raw
// flow quantity onto the log-score scale.
struct FlowRange {
  double lo = 0.0;
  double hi = 0.0;
};

inline constexpr double kFlowScoreEpsilon = 1e-3;

struct PredicateContext {
  const VideoMeta* video = nullptr;
  const FlowGrid* flow = nullptr;
  PredicateConstants constants;
  FlowRange flow_range;
};

// ---- primitive functions ----

Score dist_less_than(double x, double a, double slope = -20.0);
Score dist_greater_than(double x, double a, double slope = -20.0);

// Lower median of the per-frame mean flow magnitude inside the proposal.
double med_flow_mag_raw(const Proposal& p, const FlowGrid& flow);
// log(eps + (1-eps) * m), m = raw median min-max scaled by the context range.
Score flow_score(double raw_median, const FlowRange& range);
Score med_flow_mag(const Proposal& p, const PredicateContext& ctx);

Score temp_coher(const Proposal& p, const PredicateContext& ctx);

// orientation(t) - orientation(t - lookback), wrapped into (-pi, pi].
double rot_angle(const Proposal& p, int t, int lookback = 30);

double bessel_i0(double x);
// von Mises log-density of alpha with location beta.
Score has_rotation(double alpha, double beta, double kappa = 4.0);

Score smaller(const BoundingBox& a, const BoundingBox& b);

// ---- table rows ----

Score eval_unary(std::string_view name, const Proposal& p, const PredicateContext& ctx);
Score eval_binary(std::string_view name, const Proposal& p1, const Proposal& p2,
                  const PredicateContext& ctx);

// Min-max range of a population of raw median flows.
FlowRange flow_range_of(std::span<const double> raw_medians);

}  // namespace codetect
