#include <doctest.h>

#include <numbers>

#include "codetect/error.hpp"
#include "codetect/predicates.hpp"
#include "support.hpp"

using namespace codetect;
using namespace testing;
using std::numbers::pi;

namespace {

// High-precision values (30 digits, evaluated offline) of the closed forms.
constexpr double kLogHalf = -0.693147180559945309417;
constexpr double kGateMinus = -0.00671534848911806861642;  // dLT(-0.25, 0)
constexpr double kGatePlus = -5.00671534848911806861642;   // dLT(0.25, 0)
constexpr double kI0of4 = 11.3019219521363304963563;
constexpr double kRotSame = -0.262849861924804793489825;
constexpr double kRotQuarter = -4.26284986192480479348983;
constexpr double kRotHalf = -8.26284986192480479348983;
constexpr double kCoherStatic = -0.313261687518222819119748;  // dLT(0, 0.05)
constexpr double kCoherQuarter = -4.01814992791780968584227;  // dLT(0.25, 0.05)
constexpr double kNearCoincident = -0.126928011042972483209544;  // dLT(0, 0.1)

struct Scene {
  int frames;
  VideoMeta meta;
  FlowGrid flow;
  PredicateContext ctx;

  explicit Scene(int t, FlowGrid f, int window = 1)
      : frames(t), meta(video(t)), flow(std::move(f)), ctx{&meta, &flow, {}, {0.0, 2.0}} {
    ctx.constants.endpoint_window = window;
  }
  static Scene still(int t, int window = 1) {
    return Scene(t, uniform_flow(t, [](int) { return std::pair{0.0f, 0.0f}; }), window);
  }
};

}  // namespace

TEST_SUITE("predicates") {
  TEST_CASE("log-logistic gates") {
    CHECK(dist_less_than(0, 0).value() == doctest::Approx(kLogHalf).epsilon(1e-14));
    CHECK(dist_less_than(-0.25, 0).value() == doctest::Approx(kGateMinus).epsilon(1e-12));
    CHECK(dist_less_than(0.25, 0).value() == doctest::Approx(kGatePlus).epsilon(1e-14));
    CHECK(dist_greater_than(0.25, 0).value() == doctest::Approx(kGateMinus).epsilon(1e-12));
    CHECK(dist_greater_than(-0.25, 0).value() == doctest::Approx(kGatePlus).epsilon(1e-14));
    // Far tails stay finite and monotone.
    CHECK(dist_less_than(100, 0).value() == doctest::Approx(-2000.0));
    CHECK(dist_less_than(-100, 0).value() == 0.0);
    double prev = 1.0;
    for (double x = -1; x <= 1; x += 0.01) {
      const double s = dist_less_than(x, 0.1).value();
      CHECK(s < prev);
      CHECK(s <= 0.0);
      prev = s;
    }
  }

  TEST_CASE("von Mises rotation likelihood") {
    CHECK(bessel_i0(4.0) == doctest::Approx(kI0of4).epsilon(1e-14));
    CHECK(bessel_i0(0.0) == 1.0);
    CHECK(has_rotation(0.3, 0.3).value() == doctest::Approx(kRotSame).epsilon(1e-13));
    CHECK(has_rotation(pi / 2, 0).value() == doctest::Approx(kRotQuarter).epsilon(1e-13));
    CHECK(has_rotation(pi, 0).value() == doctest::Approx(kRotHalf).epsilon(1e-13));
    for (double a = -3; a < 3; a += 0.1) CHECK(has_rotation(a, pi / 2).value() <= has_rotation(pi / 2, pi / 2).value());
  }

  TEST_CASE("rotation angle looks back and wraps") {
    std::vector<Detection> d;
    for (int t = 1; t <= 31; ++t) d.push_back(Detection{t, box_at(20, 20), t == 1 ? 3.0 : -3.0});
    const Proposal p("v", d, MotionClass::Moving, 1);
    CHECK(rot_angle(p, 31) == doctest::Approx(2 * pi - 6.0));
    CHECK_THROWS_AS(rot_angle(p, 30), Error);
    const Proposal bare = static_tube(31, 20, 20);
    CHECK_THROWS_WITH_AS(rot_angle(bare, 31), doctest::Contains("MissingOrientation"), Error);
  }

  TEST_CASE("median flow uses the lower median") {
    const std::vector<float> means{4, 1, 3, 2};
    const auto flow = uniform_flow(4, [&](int t) { return std::pair{means[std::size_t(t - 1)], 0.0f}; });
    CHECK(med_flow_mag_raw(static_tube(4, 64, 64), flow) == doctest::Approx(2.0));
    const auto three = uniform_flow(3, [](int t) { return std::pair{float(t == 1 ? 1 : t == 2 ? 3 : 2), 0.0f}; });
    CHECK(med_flow_mag_raw(static_tube(3, 64, 64), three) == doctest::Approx(2.0));
    const auto zero = uniform_flow(3, [](int) { return std::pair{0.0f, 0.0f}; });
    CHECK(med_flow_mag_raw(static_tube(3, 64, 64), zero) == 0.0);
  }

  TEST_CASE("flow score is min-max scaled then logged") {
    const FlowRange r{1.0, 3.0};
    CHECK(flow_score(3.0, r).value() == doctest::Approx(0.0));
    CHECK(flow_score(1.0, r).value() == doctest::Approx(std::log(1e-3)));
    CHECK(flow_score(2.0, r).value() == doctest::Approx(std::log(1e-3 + 0.999 * 0.5)));
    CHECK(flow_score(5.0, r).value() == doctest::Approx(0.0));
    CHECK(flow_score(2.0, FlowRange{2.0, 2.0}).value() == doctest::Approx(std::log(1e-3)));
    const std::vector<double> raws{0.5, 2.0, 0.1};
    const auto range = flow_range_of(raws);
    CHECK(range.lo == 0.1);
    CHECK(range.hi == 2.0);
  }

  TEST_CASE("temporal coherence") {
    auto s = Scene::still(5);
    CHECK(temp_coher(static_tube(5, 64, 64), s.ctx).value() == doctest::Approx(kCoherStatic).epsilon(1e-13));
    // 32 px per frame on a 128 px frame is 0.25 normalized units.
    const auto moving = linear_tube(3, 16, 64, 80, 64);
    CHECK(temp_coher(moving, Scene::still(3).ctx).value() == doctest::Approx(kCoherQuarter).epsilon(1e-13));
    CHECK(temp_coher(static_tube(2, 10, 10), Scene::still(2).ctx).value() ==
          doctest::Approx(kCoherStatic).epsilon(1e-13));
    // Translation invariance.
    const auto shifted = linear_tube(3, 20, 70, 84, 70);
    CHECK(temp_coher(shifted, Scene::still(3).ctx).value() == temp_coher(moving, Scene::still(3).ctx).value());
  }

  TEST_CASE("smaller is strict") {
    CHECK(smaller(BoundingBox(0, 0, 2, 2), BoundingBox(0, 0, 3, 3)).value() == 0.0);
    CHECK(smaller(BoundingBox(0, 0, 3, 3), BoundingBox(0, 0, 2, 2)).is_impossible());
    CHECK(smaller(BoundingBox(0, 0, 2, 2), BoundingBox(5, 5, 7, 7)).is_impossible());
  }

  TEST_CASE("catalogue has every table row") {
    CHECK(predicate_catalogue().size() == 25);
    int unary = 0;
    for (auto n : predicate_catalogue()) unary += *predicate_arity(n) == 1;
    CHECK(unary == 8);
    CHECK_FALSE(predicate_arity("near").has_value());
    auto s = Scene::still(3);
    CHECK_THROWS_WITH_AS(eval_unary("quickly", static_tube(3, 64, 64), s.ctx), doctest::Contains("UnknownPredicate"),
                         Error);
    CHECK_THROWS_AS(eval_binary("move", static_tube(3, 64, 64), static_tube(3, 64, 64), s.ctx), Error);
    CHECK_THROWS_WITH_AS(eval_binary("nearEnd", static_tube(3, 64, 64, 8, "a"), static_tube(3, 64, 64, 8, "b"), s.ctx),
                         doctest::Contains("VideoMismatch"), Error);
  }
}

// One case per table row: the expected value is composed from the primitive
// oracles above on a hand-built tube.
TEST_SUITE("predicates") {
  namespace {
  // Flow of 1 px/frame everywhere; with range [0, 2] the move term is
  // log(eps + (1 - eps) / 2).
  Scene half_flow(int t, int window = 1) {
    return Scene(t, uniform_flow(t, [](int) { return std::pair{1.0f, 0.0f}; }), window);
  }
  const double kMoveHalf = std::log(1e-3 + 0.999 * 0.5);
  }  // namespace

  TEST_CASE("move") {
    auto s = half_flow(4);
    CHECK(eval_unary("move", static_tube(4, 64, 64), s.ctx).value() == doctest::Approx(kMoveHalf));
  }

  TEST_CASE("moveUp") {
    auto s = half_flow(5);
    // Centre rises by 64 px = 0.5 normalized.
    const auto p = linear_tube(5, 64, 96, 64, 32);
    CHECK(eval_unary("moveUp", p, s.ctx).value() == doctest::Approx(kMoveHalf + oracle_dlt(-0.5, -0.25)));
    CHECK(oracle_dlt(-0.5, -0.25) == doctest::Approx(kGateMinus).epsilon(1e-12));
  }

  TEST_CASE("moveDown") {
    auto s = Scene::still(5);
    const double eps_move = std::log(1e-3);
    CHECK(eval_unary("moveDown", static_tube(5, 64, 64), s.ctx).value() ==
          doctest::Approx(eps_move + kGatePlus).epsilon(1e-12));
    auto h = half_flow(5);
    const auto p = linear_tube(5, 64, 32, 64, 96);
    CHECK(eval_unary("moveDown", p, h.ctx).value() == doctest::Approx(kMoveHalf + oracle_dgt(0.5, 0.25)));
  }

  TEST_CASE("moveVertical") {
    auto s = half_flow(5);
    const auto up = linear_tube(5, 64, 96, 64, 64);
    CHECK(eval_unary("moveVertical", up, s.ctx).value() == doctest::Approx(kMoveHalf + oracle_dgt(0.25, 0.25)));
    // Never below either signed variant on the same tube.
    for (const auto& p : {up, linear_tube(5, 64, 20, 64, 100), static_tube(5, 64, 64)}) {
      const double v = eval_unary("moveVertical", p, s.ctx).value();
      CHECK(v >= eval_unary("moveUp", p, s.ctx).value());
      CHECK(v >= eval_unary("moveDown", p, s.ctx).value());
    }
  }

  TEST_CASE("moveLeftwards") {
    auto s = half_flow(5);
    const auto p = linear_tube(5, 100, 64, 36, 64);
    CHECK(eval_unary("moveLeftwards", p, s.ctx).value() == doctest::Approx(kMoveHalf + oracle_dlt(-0.5, -0.25)));
  }

  TEST_CASE("moveRightwards") {
    auto s = half_flow(5);
    const auto p = linear_tube(5, 36, 64, 68, 64);
    CHECK(eval_unary("moveRightwards", p, s.ctx).value() == doctest::Approx(kMoveHalf + oracle_dgt(0.25, 0.25)));
    CHECK(oracle_dgt(0.25, 0.25) == doctest::Approx(kLogHalf));
  }

  TEST_CASE("moveHorizontal") {
    auto s = half_flow(5);
    const auto p = linear_tube(5, 80, 64, 48, 64);
    CHECK(eval_unary("moveHorizontal", p, s.ctx).value() == doctest::Approx(kMoveHalf + kLogHalf));
  }

  TEST_CASE("rotate") {
    // Orientation turns by pi/2 over 30 frames and then holds.
    const int T = 40;
    std::vector<Detection> d;
    for (int t = 1; t <= T; ++t) d.push_back(Detection{t, box_at(64, 64), std::min(t - 1, 30) * (pi / 2) / 30});
    const Proposal p("v", d, MotionClass::Moving, 1);
    auto s = half_flow(T);
    CHECK(eval_unary("rotate", p, s.ctx).value() == doctest::Approx(kMoveHalf + kRotSame));
    // No turn at all: the best look-back difference is 0, a quarter turn off.
    std::vector<Detection> still;
    for (int t = 1; t <= T; ++t) still.push_back(Detection{t, box_at(64, 64), 0.0});
    CHECK(eval_unary("rotate", Proposal("v", still, MotionClass::Moving, 1), s.ctx).value() ==
          doctest::Approx(kMoveHalf + kRotQuarter));
    // Too short to look back: unsatisfiable.
    std::vector<Detection> brief(d.begin(), d.begin() + 30);
    CHECK(eval_unary("rotate", Proposal("v", brief, MotionClass::Moving, 1), half_flow(30).ctx).is_impossible());
    CHECK_THROWS_AS(eval_unary("rotate", static_tube(T, 64, 64), s.ctx), Error);
  }

  TEST_CASE("towards") {
    auto s = half_flow(5);
    // Gap shrinks from 0.5 to 0.25.
    const auto p1 = linear_tube(5, 16, 64, 48, 64);
    const auto p2 = static_tube(5, 80, 64);
    CHECK(eval_binary("towards", p1, p2, s.ctx).value() == doctest::Approx(kMoveHalf + kLogHalf));
  }

  TEST_CASE("awayFrom") {
    auto s = half_flow(5);
    const auto p1 = linear_tube(5, 72, 64, 8, 64);
    const auto p2 = static_tube(5, 80, 64);
    CHECK(eval_binary("awayFrom", p1, p2, s.ctx).value() == doctest::Approx(kMoveHalf + oracle_dgt(0.5, 0.25)));
  }

  TEST_CASE("leftOfStart and leftOfEnd") {
    auto s = Scene::still(5);
    const auto p1 = linear_tube(5, 32, 64, 96, 64);
    const auto p2 = static_tube(5, 64, 64);
    CHECK(eval_binary("leftOfStart", p1, p2, s.ctx).value() ==
          doctest::Approx(kCoherStatic + oracle_dlt(-0.25, -0.05)));
    CHECK(eval_binary("leftOfEnd", p1, p2, s.ctx).value() == doctest::Approx(kCoherStatic + oracle_dlt(0.25, -0.05)));
  }

  TEST_CASE("rightOfStart and rightOfEnd") {
    auto s = Scene::still(5);
    const auto p1 = linear_tube(5, 32, 64, 96, 64);
    const auto p2 = static_tube(5, 64, 64);
    CHECK(eval_binary("rightOfStart", p1, p2, s.ctx).value() ==
          doctest::Approx(kCoherStatic + oracle_dgt(-0.25, 0.05)));
    CHECK(eval_binary("rightOfEnd", p1, p2, s.ctx).value() == doctest::Approx(kCoherStatic + oracle_dgt(0.25, 0.05)));
  }

  TEST_CASE("onTopOfStart and onTopOfEnd") {
    auto s = Scene::still(5);
    // Starts 16 px above the reference, ends 8 px to its right at the same height.
    const auto p1 = linear_tube(5, 64, 48, 72, 64);
    const auto p2 = static_tube(5, 64, 64);
    const double start = oracle_dgt(-0.125, -0.5) + oracle_dlt(-0.125, 0) + oracle_dlt(0, 0.1);
    const double end = oracle_dgt(0, -0.5) + oracle_dlt(0, 0) + oracle_dlt(0.0625, 0.1);
    CHECK(eval_binary("onTopOfStart", p1, p2, s.ctx).value() == doctest::Approx(kCoherStatic + start));
    CHECK(eval_binary("onTopOfEnd", p1, p2, s.ctx).value() == doctest::Approx(kCoherStatic + end));
  }

  TEST_CASE("nearStart and nearEnd") {
    auto s = Scene::still(5);
    const auto p1 = linear_tube(5, 32, 64, 64, 64);
    const auto p2 = static_tube(5, 64, 64);
    CHECK(eval_binary("nearEnd", p1, p2, s.ctx).value() ==
          doctest::Approx(kCoherStatic + kNearCoincident).epsilon(1e-12));
    CHECK(eval_binary("nearStart", p1, p2, s.ctx).value() == doctest::Approx(kCoherStatic + oracle_dlt(0.25, 0.1)));
  }

  TEST_CASE("inStart and inEnd") {
    auto s = Scene::still(5);
    // Small object leaves a big container; the container's coherence enters
    // once on its own and once through near, as the table composes it.
    const auto p1 = linear_tube(5, 64, 64, 96, 64, 8);
    const auto p2 = static_tube(5, 64, 64, 24);
    CHECK(eval_binary("inStart", p1, p2, s.ctx).value() ==
          doctest::Approx(2 * kCoherStatic + kNearCoincident).epsilon(1e-12));
    CHECK(eval_binary("inEnd", p1, p2, s.ctx).value() ==
          doctest::Approx(2 * kCoherStatic + oracle_dlt(0.25, 0.1)));
    // The larger object cannot be inside the smaller one.
    CHECK(eval_binary("inStart", p2, p1, s.ctx).is_impossible());
  }

  TEST_CASE("belowStart and belowEnd") {
    auto s = Scene::still(5);
    const auto p1 = linear_tube(5, 64, 96, 64, 32);
    const auto p2 = static_tube(5, 64, 64);
    CHECK(eval_binary("belowStart", p1, p2, s.ctx).value() == doctest::Approx(kCoherStatic + oracle_dgt(0.25, 0.05)));
    CHECK(eval_binary("belowEnd", p1, p2, s.ctx).value() == doctest::Approx(kCoherStatic + oracle_dgt(-0.25, 0.05)));
  }

  TEST_CASE("aboveStart and aboveEnd") {
    auto s = Scene::still(5);
    const auto p1 = linear_tube(5, 64, 96, 64, 32);
    const auto p2 = static_tube(5, 64, 64);
    CHECK(eval_binary("aboveStart", p1, p2, s.ctx).value() == doctest::Approx(kCoherStatic + oracle_dlt(0.25, -0.05)));
    CHECK(eval_binary("aboveEnd", p1, p2, s.ctx).value() == doctest::Approx(kCoherStatic + oracle_dlt(-0.25, -0.05)));
  }

  TEST_CASE("over sums its two gates at the best frame") {
    auto s = Scene::still(5);
    // Passes over the reference: 32 px above it, x offset 64, 32, 0, -32, -64 px.
    const auto p1 = linear_tube(5, 0 + 8, 32, 128 - 8, 32);
    const auto p2 = static_tube(5, 64, 64);
    double best = -1e300;
    for (int t = 1; t <= 5; ++t) {
      const double dx = (p1.at(t).box.center_x() - 64) / kSide;
      best = std::max(best, oracle_dlt(-0.25, -0.05) + oracle_dlt(std::abs(dx), 0.25));
    }
    CHECK(best == doctest::Approx(oracle_dlt(-0.25, -0.05) + oracle_dlt(0, 0.25)));
    CHECK(eval_binary("over", p1, p2, s.ctx).value() == doctest::Approx(kCoherStatic + best));
  }

  TEST_CASE("endpoint quantities average the first and last L frames") {
    // Rise of 60 px over 31 frames at 2 px/frame; with L = 5 the endpoint
    // means sit 4 px inside each end, so the displacement is 52 px.
    auto s = half_flow(31, 5);
    const auto p = linear_tube(31, 64, 94, 64, 34);
    CHECK(eval_unary("moveUp", p, s.ctx).value() == doctest::Approx(kMoveHalf + oracle_dlt(-52.0 / 128, -0.25)));
    // Windows longer than the clip are clipped to it.
    auto w = half_flow(3, 15);
    const auto q = linear_tube(3, 64, 96, 64, 32);
    CHECK(eval_unary("moveUp", q, w.ctx).value() == doctest::Approx(kMoveHalf + oracle_dlt(0, -0.25)));
  }

  TEST_CASE("mirror symmetry") {
    // Five frames keep every interpolated centre a binary fraction, so the
    // reflections are exact.
    auto s = Scene::still(5);
    const auto p1 = linear_tube(5, 20, 30, 90, 100);
    const auto p2 = linear_tube(5, 70, 50, 40, 20);
    const auto p2s = static_tube(5, 56, 72);
    for (const auto& ref : {p2, p2s}) {
      const auto x1 = reflect_x(p1), x2 = reflect_x(ref);
      const auto y1 = reflect_y(p1), y2 = reflect_y(ref);
      CHECK(eval_binary("leftOfStart", p1, ref, s.ctx) == eval_binary("rightOfStart", x1, x2, s.ctx));
      CHECK(eval_binary("leftOfEnd", p1, ref, s.ctx) == eval_binary("rightOfEnd", x1, x2, s.ctx));
      CHECK(eval_binary("aboveStart", p1, ref, s.ctx) == eval_binary("belowStart", y1, y2, s.ctx));
      CHECK(eval_binary("aboveEnd", p1, ref, s.ctx) == eval_binary("belowEnd", y1, y2, s.ctx));
      CHECK(eval_binary("nearEnd", p1, ref, s.ctx) == eval_binary("nearEnd", x1, x2, s.ctx));
      CHECK(eval_binary("over", p1, ref, s.ctx) == eval_binary("over", x1, x2, s.ctx));
    }
    CHECK(eval_unary("moveLeftwards", p1, s.ctx) == eval_unary("moveRightwards", reflect_x(p1), s.ctx));
    CHECK(eval_unary("moveUp", p1, s.ctx) == eval_unary("moveDown", reflect_y(p1), s.ctx));
  }

  TEST_CASE("scores never exceed zero") {
    auto s = half_flow(8);
    const auto a = linear_tube(8, 20, 20, 100, 90);
    const auto b = static_tube(8, 60, 60, 20);
    for (auto name : predicate_catalogue()) {
      if (name == "rotate") continue;
      const Score v = *predicate_arity(name) == 1 ? eval_unary(name, a, s.ctx) : eval_binary(name, a, b, s.ctx);
      CHECK(v.value() <= 0.0);
    }
  }
}
