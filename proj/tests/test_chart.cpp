#include <doctest.h>

#include <cmath>

#include "akm/chart.hpp"

using namespace akm;

namespace {

ChartDomain whole() { return ChartDomain({"x", "y", "t"}, {}); }

}  // namespace

TEST_CASE("partial derivatives of known functions") {
  const ChartDomain dom = whole();
  const ScalarField sq = [](const Point& p) { return p[2] * p[2]; };
  CHECK(std::abs(partial_derivative(sq, Point(0, 0, 3), 2, dom) - 6.0) < 1e-9);
  const ScalarField ex = [](const Point& p) { return std::exp(2 * p[2]); };
  CHECK(std::abs(partial_derivative(ex, Point(0, 0, 0), 2, dom) - 2.0) < 1e-8);
  const ScalarField cst = [](const Point&) { return 4.25; };
  for (int axis = 0; axis < 3; ++axis) {
    CHECK(std::abs(partial_derivative(cst, Point(0.3, -2, 5), axis, dom)) < 1e-12);
  }
}

TEST_CASE("derivative error drops at fourth order") {
  const ChartDomain dom = whole();
  const ScalarField f = [](const Point& p) { return std::sin(p[0]) * std::exp(p[0]); };
  const Point p(0.4, 0, 0);
  const double exact = std::exp(0.4) * (std::sin(0.4) + std::cos(0.4));
  double prev = 0.0;
  for (double h : {0.1, 0.05, 0.025}) {
    const double err = std::abs(partial_derivative(f, p, 0, dom, DiffScheme::with_step(h)) - exact);
    if (prev > 0.0) CHECK(prev / err >= 8.0);
    prev = err;
  }
}

TEST_CASE("stencils shift inward near a boundary") {
  const ChartDomain half({"x", "y", "z"}, {Interval{}, Interval{}, Interval{-kInf, -1.0}});
  const ScalarField f = [](const Point& p) { return std::sqrt(-1.0 - p[2]); };
  const Point p(0, 0, -1.003);
  const double exact = -0.5 / std::sqrt(0.003);
  const double d = partial_derivative(f, p, 2, half, DiffScheme::with_step(2e-4));
  CHECK(std::abs(d - exact) / std::abs(exact) < 1e-4);

  const ChartDomain thin({"x", "y", "z"}, {Interval{0.0, 1e-4}, Interval{}, Interval{}});
  const ScalarField g = [](const Point& q) { return q[0]; };
  CHECK_THROWS_AS(partial_derivative(g, Point(5e-5, 0, 0), 0, thin), BoundaryError);
}

TEST_CASE("lie brackets") {
  const ChartDomain dom = whole();
  const VectorField dx = [](const Point&) { return Vec3(1, 0, 0); };
  const VectorField dy = [](const Point&) { return Vec3(0, 1, 0); };
  CHECK(lie_bracket(dx, dy, Point(1, 2, 3), dom).norm() < 1e-10);

  // [d_x, x d_y] = d_y
  const VectorField xdy = [](const Point& p) { return Vec3(0, p[0], 0); };
  CHECK((lie_bracket(dx, xdy, Point(0.5, 0, 0), dom) - Vec3(0, 1, 0)).norm() < 1e-10);

  const VectorField a = [](const Point& p) { return Vec3(std::sin(p[1]), p[0] * p[2], 1.0); };
  const VectorField b = [](const Point& p) { return Vec3(p[2], std::exp(p[0]), p[1] * p[1]); };
  const Point q(0.3, -0.7, 1.1);
  CHECK((lie_bracket(a, b, q, dom) + lie_bracket(b, a, q, dom)).norm() < 1e-12);
}

TEST_CASE("domains and boxes") {
  const ChartDomain half({"x", "y", "z"}, {Interval{}, Interval{}, Interval{-kInf, -1.0}},
                         [](const Point& p) { return p[0] > -5.0; });
  CHECK(half.contains(Point(0, 0, -2)));
  CHECK_FALSE(half.contains(Point(0, 0, -1)));
  CHECK_FALSE(half.contains(Point(-6, 0, -2)));
  CHECK(half.axis_of("z") == 2);
  CHECK(half.axis_of("t") == -1);
  CHECK(Box{{0, 0, -3}, {1, 1, -1.5}}.inside(half));
  CHECK_FALSE(Box{{0, 0, -3}, {1, 1, 0}}.inside(half));
}
