#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <type_traits>

#include "akm/errors.hpp"

namespace akm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Coordinates of a point in a single chart. Axis labels live on the owning
/// ChartDomain, e.g. (x, y, z) or (x, y, t).
using Point = Vec3;

// Component conventions: a (1,1) tensor T acts on column component vectors,
// (T X)^i = T(i, j) X^j. A metric stores g(i, j) = g_ij. A 1-form stores its
// components w_i and a 2-form its antisymmetric components w_ij.
using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Vec3(const Point&)>;
using Tensor11Field = std::function<Mat3(const Point&)>;
using MetricField = std::function<Mat3(const Point&)>;
using OneFormField = std::function<Vec3(const Point&)>;
using TwoFormField = std::function<Mat3(const Point&)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Open interval (lo, hi); either end may be infinite.
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  bool contains(double v) const { return v > lo && v < hi; }
};

/// Open coordinate domain of a chart: a product of open intervals, optionally
/// cut down further by a predicate.
class ChartDomain {
 public:
  using Predicate = std::function<bool(const Point&)>;

  ChartDomain(std::array<std::string, 3> labels, std::array<Interval, 3> intervals,
              Predicate extra = {});

  bool contains(const Point& p) const;

  const std::array<std::string, 3>& labels() const noexcept { return labels_; }
  const Interval& interval(int axis) const { return intervals_.at(static_cast<std::size_t>(axis)); }

  /// Index of the axis called `label`, or -1.
  int axis_of(const std::string& label) const;

 private:
  std::array<std::string, 3> labels_;
  std::array<Interval, 3> intervals_;
  Predicate extra_;
};

/// Closed axis-aligned box used for sampling.
struct Box {
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};

  /// Every corner and the centre lie in `dom` (the domains used here are
  /// products of intervals, so this implies containment of the whole box).
  bool inside(const ChartDomain& dom) const;
};

/// Step control for central differences.
///
/// `step` is the relative step for derivatives of closed-form fields. Fields
/// that are themselves produced by differentiation (Christoffel symbols, h) are
/// differentiated with `outer_step`, twice as large so that the rounding noise
/// of the inner derivative is not amplified. Actual steps are scaled by
/// max(1, |coordinate|).
struct DiffScheme {
  double step = 1e-3;
  double outer_step = 2e-3;

  static DiffScheme with_step(double h) { return DiffScheme{h, 2.0 * h}; }
  DiffScheme halved() const { return DiffScheme{step / 2.0, outer_step / 2.0}; }
};

namespace detail {

struct Stencil {
  std::array<int, 5> offsets;
  std::array<double, 5> weights;  // divided by 12 h
  int size;
};

// Fourth-order first-derivative stencils: centred, shifted by one node each
// way, and fully one-sided.
inline constexpr std::array<Stencil, 5> kStencils{{
    {{-2, -1, 1, 2, 0}, {1.0, -8.0, 8.0, -1.0, 0.0}, 4},
    {{-1, 0, 1, 2, 3}, {-3.0, -10.0, 18.0, -6.0, 1.0}, 5},
    {{-3, -2, -1, 0, 1}, {-1.0, 6.0, -18.0, 10.0, 3.0}, 5},
    {{0, 1, 2, 3, 4}, {-25.0, 48.0, -36.0, 16.0, -3.0}, 5},
    {{-4, -3, -2, -1, 0}, {3.0, -16.0, 36.0, -48.0, 25.0}, 5},
}};

}  // namespace detail

/// Absolute step used along `axis` at `p` for relative step `rel_step`.
inline double scaled_step(const Point& p, int axis, double rel_step) {
  return rel_step * std::max(1.0, std::abs(p[axis]));
}

/// Fourth-order finite-difference derivative of `f` along coordinate `axis`.
///
/// Works for any field whose value supports `+`, scalar `*` (double, Vec3,
/// Mat3, ...). Falls back to a shifted or one-sided stencil when the centred
/// one leaves the domain; throws BoundaryError if no five-point window fits.
template <class F>
auto partial(const F& f, const Point& p, int axis, const ChartDomain& dom, double rel_step)
    -> std::decay_t<decltype(f(p))> {
  using Value = std::decay_t<decltype(f(p))>;
  const double h = scaled_step(p, axis, rel_step);
  for (const auto& st : detail::kStencils) {
    bool fits = true;
    for (int i = 0; i < st.size && fits; ++i) {
      Point q = p;
      q[axis] += st.offsets[static_cast<std::size_t>(i)] * h;
      fits = dom.contains(q);
    }
    if (!fits) continue;
    auto term = [&](int i) -> Value {
      const auto k = static_cast<std::size_t>(i);
      Point q = p;
      q[axis] += st.offsets[k] * h;
      return f(q) * st.weights[k];
    };
    Value acc = term(0);
    for (int i = 1; i < st.size; ++i) acc = acc + term(i);
    acc = acc * (1.0 / (12.0 * h));
    return acc;
  }
  throw BoundaryError("finite-difference stencil leaves the chart domain along axis '" +
                      dom.labels()[static_cast<std::size_t>(axis)] + "'");
}

/// All three partial derivatives of `f` at `p`.
template <class F>
auto gradient_parts(const F& f, const Point& p, const ChartDomain& dom, double rel_step)
    -> std::array<std::decay_t<decltype(f(p))>, 3> {
  return {partial(f, p, 0, dom, rel_step), partial(f, p, 1, dom, rel_step),
          partial(f, p, 2, dom, rel_step)};
}

double partial_derivative(const ScalarField& f, const Point& p, int axis, const ChartDomain& dom,
                          const DiffScheme& scheme = {});

/// J(i, k) = d_k V^i.
Mat3 jacobian(const VectorField& v, const Point& p, const ChartDomain& dom, double rel_step);

/// [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i.
Vec3 lie_bracket(const VectorField& x, const VectorField& y, const Point& p,
                 const ChartDomain& dom, const DiffScheme& scheme = {});

}  // namespace akm
