#include <doctest.h>

#include <numbers>
#include <set>

#include "codetect/core.hpp"
#include "codetect/error.hpp"
#include "codetect/rng.hpp"
#include "support.hpp"

using namespace codetect;

TEST_SUITE("core") {
  TEST_CASE("box geometry") {
    const BoundingBox b(2, 4, 6, 10);
    CHECK(b.width() == 4);
    CHECK(b.height() == 6);
    CHECK(b.center_x() == 4);
    CHECK(b.center_y() == 7);
    CHECK(box_area(b) == 24);
    CHECK(b.translated(1, -1) == BoundingBox(3, 3, 7, 9));
    CHECK_THROWS_AS(BoundingBox(1, 1, 1, 2), Error);
    CHECK_THROWS_AS(BoundingBox(0, 0, std::nan(""), 1), Error);
  }

  TEST_CASE("clamping to the frame") {
    const VideoMeta v("v", 100, 50, 10);
    CHECK(*v.clamp(-5, -5, 20, 20) == BoundingBox(0, 0, 20, 20));
    CHECK(*v.clamp(90, 40, 120, 70) == BoundingBox(90, 40, 100, 50));
    CHECK_FALSE(v.clamp(120, 0, 130, 10).has_value());
    CHECK_THROWS_AS(VideoMeta("v", 100, 50, 1), Error);
  }

  TEST_CASE("normalized geometry") {
    const VideoMeta v("v", 128, 64, 5);
    const auto c = normalized_center(BoundingBox(0, 0, 64, 32), v);
    CHECK(c.x == 0.25);
    CHECK(c.y == 0.25);
    CHECK(normalized_dist(BoundingBox(0, 0, 2, 2), BoundingBox(0, 0, 2, 2), v) == 0.0);
    CHECK(normalized_dist(BoundingBox(0, 0, 2, 2), BoundingBox(32, 0, 34, 2), v) == 0.25);
  }

  TEST_CASE("angle wrapping lands in (-pi, pi]") {
    using std::numbers::pi;
    CHECK(wrap_angle(pi) == doctest::Approx(pi));
    CHECK(wrap_angle(-pi) == doctest::Approx(pi));
    CHECK(wrap_angle(-6.0) == doctest::Approx(-6.0 + 2 * pi));
    CHECK(wrap_angle(7 * pi / 2) == doctest::Approx(-pi / 2));
  }

  TEST_CASE("scores absorb -inf") {
    const Score s = Score(-1.5) + Score::impossible();
    CHECK(s.is_impossible());
    CHECK(Score(-1.0) > Score(-2.0));
  }

  TEST_CASE("proposal invariants") {
    CHECK_THROWS_AS(Proposal("v", {}, MotionClass::Stationary, 1), Error);
    std::vector<Detection> gap{{1, BoundingBox(0, 0, 1, 1), {}}, {3, BoundingBox(0, 0, 1, 1), {}}};
    CHECK_THROWS_AS(Proposal("v", gap, MotionClass::Moving, 1), Error);
    std::vector<Detection> grow{{1, BoundingBox(0, 0, 1, 1), {}}, {2, BoundingBox(0, 0, 2, 2), {}}};
    CHECK_THROWS_AS(Proposal("v", grow, MotionClass::Stationary, 1), Error);
    CHECK(motion_class_from_string(to_string(MotionClass::Moving)) == MotionClass::Moving);
  }

  TEST_CASE("flow means are overlap weighted") {
    // Left half of a 2x1 grid moves at 2 px/frame, right half is still.
    FlowGrid f(2, 1, 10.0, {{{2.0f, 0.0f}, {0.0f, 0.0f}, {}}});
    CHECK(f.mean_magnitude(1, BoundingBox(0, 0, 10, 10)) == doctest::Approx(2.0));
    CHECK(f.mean_magnitude(1, BoundingBox(5, 0, 15, 10)) == doctest::Approx(1.0));
    CHECK(f.mean_magnitude(1, BoundingBox(10, 0, 20, 10)) == doctest::Approx(0.0));
    CHECK(f.frame_mean_magnitude(1) == doctest::Approx(1.0));
    const auto [u, v] = f.mean_vector(1, BoundingBox(0, 0, 20, 10));
    CHECK(u == doctest::Approx(1.0));
    CHECK(v == doctest::Approx(0.0));
    CHECK_THROWS_AS(FlowGrid(2, 2, 1.0, {{{0.0f}, {0.0f}, {}}}), Error);
  }

  TEST_CASE("rng streams are reproducible and keyed") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    // A child does not depend on how far the parent has advanced.
    Rng fresh(42);
    CHECK(a.child("x").next_u64() == fresh.child("x").next_u64());
    CHECK(fresh.child("x").next_u64() != fresh.child("y").next_u64());
    Rng u(7);
    for (int i = 0; i < 1000; ++i) {
      const double x = u.uniform();
      CHECK((x >= 0.0 && x < 1.0));
      CHECK(u.index(5) < 5);
    }
  }

  TEST_CASE("rng first draws are frozen") {
    // Portable across standard libraries: mt19937_64 output is specified.
    Rng r(5489);
    CHECK(r.next_u64() == 14514284786278117030ull);
  }

  TEST_CASE("categorical skips zero weights") {
    Rng r(3);
    const std::vector<double> w{0.0, 1.0, 0.0, 3.0};
    std::set<std::size_t> seen;
    for (int i = 0; i < 200; ++i) seen.insert(r.categorical(w));
    CHECK(seen == std::set<std::size_t>{1, 3});
    CHECK_THROWS_AS(r.categorical(std::vector<double>{0.0, 0.0}), Error);
    CHECK_THROWS_AS(r.categorical(std::vector<double>{-1.0, 2.0}), Error);
  }
}
