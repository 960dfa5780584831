#include "akm/chart.hpp"

namespace akm {

ChartDomain::ChartDomain(std::array<std::string, 3> labels, std::array<Interval, 3> intervals,
                         Predicate extra)
    : labels_(std::move(labels)), intervals_(intervals), extra_(std::move(extra)) {}

bool ChartDomain::contains(const Point& p) const {
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(p[i]) || !intervals_[static_cast<std::size_t>(i)].contains(p[i])) {
      return false;
    }
  }
  return !extra_ || extra_(p);
}

int ChartDomain::axis_of(const std::string& label) const {
  for (int i = 0; i < 3; ++i) {
    if (labels_[static_cast<std::size_t>(i)] == label) return i;
  }
  return -1;
}

bool Box::inside(const ChartDomain& dom) const {
  for (int mask = 0; mask < 8; ++mask) {
    Point c;
    for (int a = 0; a < 3; ++a) {
      const auto k = static_cast<std::size_t>(a);
      c[a] = (mask >> a) & 1 ? hi[k] : lo[k];
    }
    if (!dom.contains(c)) return false;
  }
  Point mid;
  for (int a = 0; a < 3; ++a) {
    const auto k = static_cast<std::size_t>(a);
    mid[a] = 0.5 * (lo[k] + hi[k]);
  }
  return dom.contains(mid);
}

double partial_derivative(const ScalarField& f, const Point& p, int axis, const ChartDomain& dom,
                          const DiffScheme& scheme) {
  return partial(f, p, axis, dom, scheme.step);
}

Mat3 jacobian(const VectorField& v, const Point& p, const ChartDomain& dom, double rel_step) {
  Mat3 j;
  for (int k = 0; k < 3; ++k) j.col(k) = partial(v, p, k, dom, rel_step);
  return j;
}

Vec3 lie_bracket(const VectorField& x, const VectorField& y, const Point& p,
                 const ChartDomain& dom, const DiffScheme& scheme) {
  const Mat3 jx = jacobian(x, p, dom, scheme.step);
  const Mat3 jy = jacobian(y, p, dom, scheme.step);
  return jy * x(p) - jx * y(p);
}

}  // namespace akm
