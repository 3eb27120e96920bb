#include "doctest.h"

#include <cmath>

#include "navstack/geometry.hpp"
#include "navstack/rng.hpp"

using namespace navstack;

TEST_CASE("normalize_deg maps any angle into [0, 360)") {
  CHECK(normalize_deg(0.0) == doctest::Approx(0.0));
  CHECK(normalize_deg(360.0) == doctest::Approx(0.0));
  CHECK(normalize_deg(-30.0) == doctest::Approx(330.0));
  CHECK(normalize_deg(725.0) == doctest::Approx(5.0));
  CHECK(normalize_deg(-720.0) == doctest::Approx(0.0));
  CHECK(normalize_deg(359.999) == doctest::Approx(359.999));

  Rng rng(17);
  for (int i = 0; i < 10000; ++i) {
    const double a = (rng.uniform() - 0.5) * 8000.0;
    const double r = normalize_deg(a);
    CHECK(r >= 0.0);
    CHECK(r < 360.0);
    // Difference from the input is an exact multiple of 360.
    const double k = (a - r) / 360.0;
    CHECK(std::abs(k - std::round(k)) < 1e-9);
  }
}

TEST_CASE("signed_deg maps into (-180, 180] keeping 180 positive") {
  CHECK(signed_deg(180.0) == doctest::Approx(180.0));
  CHECK(signed_deg(190.0) == doctest::Approx(-170.0));
  CHECK(signed_deg(350.0) == doctest::Approx(-10.0));
  CHECK(signed_deg(10.0) == doctest::Approx(10.0));
  CHECK(signed_deg(-10.0) == doctest::Approx(-10.0));

  Rng rng(18);
  for (int i = 0; i < 10000; ++i) {
    const double a = (rng.uniform() - 0.5) * 8000.0;
    const double s = signed_deg(a);
    CHECK(s > -180.0);
    CHECK(s <= 180.0);
    CHECK(normalize_deg(s) == doctest::Approx(normalize_deg(a)).epsilon(1e-9));
  }
}

TEST_CASE("heading_dir gives a unit vector along the heading") {
  CHECK(heading_dir(0.0).x == doctest::Approx(1.0));
  CHECK(heading_dir(0.0).y == doctest::Approx(0.0));
  CHECK(heading_dir(90.0).x == doctest::Approx(0.0));
  CHECK(heading_dir(90.0).y == doctest::Approx(1.0));
  CHECK(heading_dir(180.0).x == doctest::Approx(-1.0));
  CHECK(heading_dir(270.0).y == doctest::Approx(-1.0));
  for (double h = -400.0; h <= 400.0; h += 7.3) {
    CHECK(heading_dir(h).norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("rotate composes additively and preserves length") {
  const Vec2 v{3.0, -2.0};
  const Vec2 r1 = rotate(rotate(v, 40.0), 50.0);
  const Vec2 r2 = rotate(v, 90.0);
  CHECK(r1.x == doctest::Approx(r2.x));
  CHECK(r1.y == doctest::Approx(r2.y));
  CHECK(rotate(v, 0.0).x == doctest::Approx(v.x));
  CHECK(rotate(v, 360.0).y == doctest::Approx(v.y));
  CHECK(rotate(v, 123.0).norm() == doctest::Approx(v.norm()));

  // Counterclockwise positive: +90 maps (1, 0) onto (0, 1).
  const Vec2 e = rotate(Vec2{1.0, 0.0}, 90.0);
  CHECK(e.x == doctest::Approx(0.0));
  CHECK(e.y == doctest::Approx(1.0));
}

TEST_CASE("relative_to expresses a pose in another frame") {
  // Frame at (2, 2) facing +y; a pose one meter ahead of it along +y.
  const Pose2D frame{2.0, 2.0, 90.0};
  const Pose2D p{2.0, 3.0, 90.0};
  const Pose2D rel = relative_to(p, frame);
  CHECK(rel.x == doctest::Approx(1.0));
  CHECK(rel.y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rel.heading_deg == doctest::Approx(0.0));

  // Identity frame leaves the pose unchanged (modulo normalization).
  const Pose2D q{-1.5, 4.0, 370.0};
  const Pose2D same = relative_to(q, Pose2D{});
  CHECK(same.x == doctest::Approx(q.x));
  CHECK(same.y == doctest::Approx(q.y));
  CHECK(same.heading_deg == doctest::Approx(10.0));
}

TEST_CASE("compose is the inverse of relative_to") {
  Rng rng(19);
  for (int i = 0; i < 2000; ++i) {
    const Pose2D frame{rng.uniform() * 20.0 - 10.0, rng.uniform() * 20.0 - 10.0,
                       rng.uniform() * 720.0 - 360.0};
    const Pose2D p{rng.uniform() * 20.0 - 10.0, rng.uniform() * 20.0 - 10.0,
                   rng.uniform() * 720.0 - 360.0};
    const Pose2D round = compose(frame, relative_to(p, frame));
    CHECK(round.x == doctest::Approx(p.x).epsilon(1e-9));
    CHECK(round.y == doctest::Approx(p.y).epsilon(1e-9));
    CHECK(round.heading_deg ==
          doctest::Approx(normalize_deg(p.heading_deg)).epsilon(1e-9));

    const Pose2D local{rng.uniform() * 4.0 - 2.0, rng.uniform() * 4.0 - 2.0,
                       rng.uniform() * 360.0};
    const Pose2D back = relative_to(compose(frame, local), frame);
    CHECK(back.x == doctest::Approx(local.x).epsilon(1e-9));
    CHECK(back.y == doctest::Approx(local.y).epsilon(1e-9));
  }
}

TEST_CASE("vector arithmetic basics") {
  const Vec2 a{1.0, 2.0};
  const Vec2 b{3.0, -1.0};
  CHECK((a + b).x == doctest::Approx(4.0));
  CHECK((a - b).y == doctest::Approx(3.0));
  CHECK((a * 2.0).x == doctest::Approx(2.0));
  CHECK(a.dot(b) == doctest::Approx(1.0));
  CHECK(Vec2{3.0, 4.0}.norm() == doctest::Approx(5.0));
  CHECK(distance(Vec2{0.0, 0.0}, Vec2{3.0, 4.0}) == doctest::Approx(5.0));
}
