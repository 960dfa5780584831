#include "akm/matrix_ode.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "akm/errors.hpp"

namespace akm::ode {

const Mat2& basis_m1() {
  static const Mat2 m = (Mat2() << 1, 0, 0, -1).finished();
  return m;
}

const Mat2& basis_m2() {
  static const Mat2 m = (Mat2() << 0, 1, -1, 0).finished();
  return m;
}

const Mat2& basis_m3() {
  static const Mat2 m = (Mat2() << 0, 1, 1, 0).finished();
  return m;
}

void check_basis() {
  const Mat2 id = Mat2::Identity();
  if (basis_m1() * basis_m1() != id || basis_m3() * basis_m3() != id ||
      basis_m2() * basis_m2() != -id) {
    throw ConsistencyError("basis matrices do not satisfy M1^2 = M3^2 = I, M2^2 = -I");
  }
}

namespace {

Mat2 assemble(double c1, double c2, double c3) {
  return c1 * basis_m1() + c2 * basis_m2() + c3 * basis_m3();
}

}  // namespace

Mat2 StateFHB::F() const { return assemble(f(1), f(2), f(3)); }
Mat2 StateFHB::H() const { return assemble(h(1), h(2), h(3)); }
Mat2 StateFHB::B() const { return assemble(b(1), b(2), b(3)); }

StateFHB StateFHB::initial(Nullity variant) {
  StateFHB s;
  s.y[1] = 1.0;   // f2
  s.y[5] = -1.0;  // h3
  s.y[6] = variant == Nullity::Kmu ? -1.0 : 1.0;  // b1
  return s;
}

double lambda_bar(Nullity variant, const StateFHB& s) {
  return variant == Nullity::Kmu ? std::exp(-2.0 * s.t) : std::exp(-s.phase());
}

StateFHB::Vector rhs(Nullity variant, const StateFHB& s, double mu_value) {
  const double lam = lambda_bar(variant, s);
  const double l2 = lam * lam;
  StateFHB::Vector d = StateFHB::Vector::Zero();
  for (int i = 1; i <= 3; ++i) {
    const double f = s.f(i);
    const double h = s.h(i);
    const double b = s.b(i);
    d[i - 1] = 2.0 * h;
    if (variant == Nullity::Kmu) {
      d[i + 2] = 2.0 * l2 * f - 2.0 * h - mu_value * b;
      d[i + 5] = mu_value * h - 2.0 * b;
    } else {
      d[i + 2] = 2.0 * l2 * f - (mu_value + 2.0) * h;
      d[i + 5] = -(mu_value + 2.0) * b;
    }
  }
  d[StateFHB::kPhase] = variant == Nullity::Kmu ? 2.0 : mu_value + 2.0;
  return d;
}

const std::array<std::string_view, AlgebraicResiduals::kCount>& AlgebraicResiduals::names(
    Nullity variant) {
  static const std::array<std::string_view, kCount> kmu{
      "F^2+I", "H^2-l^2I", "B^2-l^2I", "HF+FH", "BF+FB", "BH+HB",
      "BH-l^2F", "BF-H", "FH-B", "detG-1"};
  static const std::array<std::string_view, kCount> kmup{
      "F^2+I", "H^2-l^2I", "B^2-l^2I", "HF+FH", "BF+FB", "BH+HB",
      "BH+l^2F", "BF+H", "HF-B", "detG-1"};
  return variant == Nullity::Kmu ? kmu : kmup;
}

double AlgebraicResiduals::max() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, v);
  return m;
}

AlgebraicResiduals algebraic_residuals(Nullity variant, const StateFHB& s) {
  const Mat2 f = s.F();
  const Mat2 h = s.H();
  const Mat2 b = s.B();
  const Mat2 id = Mat2::Identity();
  const double lam = lambda_bar(variant, s);
  const double l2 = lam * lam;
  auto norm = [](const Mat2& m) { return m.cwiseAbs().maxCoeff(); };

  AlgebraicResiduals r;
  r.values[0] = norm(f * f + id);
  r.values[1] = norm(h * h - l2 * id);
  r.values[2] = norm(b * b - l2 * id);
  r.values[3] = norm(h * f + f * h);
  r.values[4] = norm(b * f + f * b);
  r.values[5] = norm(b * h + h * b);
  if (variant == Nullity::Kmu) {
    r.values[6] = norm(b * h - l2 * f);
    r.values[7] = norm(b * f - h);
    r.values[8] = norm(f * h - b);
  } else {
    r.values[6] = norm(b * h + l2 * f);
    r.values[7] = norm(b * f + h);
    r.values[8] = norm(h * f - b);
  }
  const Mat2 g = -basis_m2() * f;
  r.values[9] = std::abs(g.determinant() - 1.0);
  return r;
}

Mat2 metric_from_state(const StateFHB& s) {
  Mat2 g;
  g << s.f(2) - s.f(3), s.f(1), s.f(1), s.f(2) + s.f(3);
  if (!(g(0, 0) > 0.0) || !(g.determinant() > 0.0)) {
    throw ConsistencyError("leaf metric G lost positive definiteness at t = " + std::to_string(s.t));
  }
  return g;
}

void startup_consistency_check() {
  check_basis();
  for (Nullity v : {Nullity::Kmu, Nullity::KmuPrime}) {
    const StateFHB s = StateFHB::initial(v);
    const AlgebraicResiduals r = algebraic_residuals(v, s);
    for (std::size_t i = 0; i < AlgebraicResiduals::kCount; ++i) {
      if (r.values[i] != 0.0) {
        throw ConsistencyError("fatal: initial state of variant " + std::string(to_string(v)) +
                               " violates " + std::string(AlgebraicResiduals::names(v)[i]));
      }
    }
    if (metric_from_state(s) != Mat2::Identity()) {
      throw ConsistencyError("fatal: G(0) is not the identity");
    }
  }
}

StateFHB rk4_step(Nullity variant, const Expr& mu, const StateFHB& s, double dt) {
  auto eval = [&](double t, const StateFHB::Vector& y) {
    StateFHB tmp;
    tmp.t = t;
    tmp.y = y;
    return rhs(variant, tmp, mu.eval(t));
  };
  const double t = s.t;
  const StateFHB::Vector k1 = eval(t, s.y);
  const StateFHB::Vector k2 = eval(t + 0.5 * dt, s.y + 0.5 * dt * k1);
  const StateFHB::Vector k3 = eval(t + 0.5 * dt, s.y + 0.5 * dt * k2);
  const StateFHB::Vector k4 = eval(t + dt, s.y + dt * k3);
  StateFHB out;
  out.t = t + dt;
  out.y = s.y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return out;
}

Trajectory Trajectory::integrate(Nullity variant, Expr mu, double t0, double t1, double step,
                                 const StateFHB& ic) {
  if (!(step > 0.0) || step > 1e-2) throw ConfigError("RK4 step must lie in (0, 1e-2]");
  if (!(t0 <= 0.0 && 0.0 <= t1) || !std::isfinite(t0) || !std::isfinite(t1)) {
    throw ConfigError("t-range must be finite and contain 0");
  }
  if (ic.t != 0.0) throw ConfigError("initial state must be given at t = 0");
  if (algebraic_residuals(variant, ic).max() > 1e-12) {
    throw ConsistencyError("initial state violates the algebraic relations of the flow");
  }

  const auto count = [step](double len) {
    return static_cast<std::size_t>(std::ceil(len / step - 1e-9));
  };
  const std::size_t n_fwd = count(t1);
  const std::size_t n_bwd = count(-t0);

  Trajectory tr(variant, std::move(mu), step);
  tr.nodes_.resize(n_bwd + n_fwd + 1);
  tr.zero_ = n_bwd;
  tr.nodes_[n_bwd] = ic;

  auto advance = [&](std::size_t from, std::size_t to, double dt) {
    StateFHB next = rk4_step(variant, tr.mu_, tr.nodes_[from], dt);
    next.t = (static_cast<double>(to) - static_cast<double>(n_bwd)) * step;
    if (!next.y.allFinite()) {
      throw NumericError("ODE state became non-finite near t = " + std::to_string(next.t));
    }
    tr.nodes_[to] = next;
  };
  for (std::size_t i = 0; i < n_fwd; ++i) advance(n_bwd + i, n_bwd + i + 1, step);
  for (std::size_t i = 0; i < n_bwd; ++i) advance(n_bwd - i, n_bwd - i - 1, -step);
  return tr;
}

StateFHB Trajectory::at(double t) const {
  if (!(t >= t_min() && t <= t_max())) {
    throw Error("t = " + std::to_string(t) + " outside the integrated interval");
  }
  const std::size_t n_fwd = nodes_.size() - 1 - zero_;
  const std::size_t n_bwd = zero_;
  std::size_t base = zero_;
  if (t >= 0.0) {
    if (n_fwd == 0) return nodes_[zero_];
    auto i = std::min(static_cast<std::size_t>(std::floor(t / step_)), n_fwd - 1);
    if (nodes_[zero_ + i + 1].t <= t) ++i;  // t / step rounded down past a node
    if (i == n_fwd) return nodes_.back();
    base = zero_ + i;
  } else {
    if (n_bwd == 0) return nodes_[zero_];
    auto i = std::min(static_cast<std::size_t>(std::floor(-t / step_)), n_bwd - 1);
    if (nodes_[zero_ - i - 1].t >= t) ++i;
    if (i == n_bwd) return nodes_.front();
    base = zero_ - i;
  }
  const StateFHB& node = nodes_[base];
  const double dt = t - node.t;
  if (dt == 0.0) return node;
  return rk4_step(variant_, mu_, node, dt);
}

void Trajectory::write_csv(std::ostream& os) const {
  os << "t,f1,f2,f3,h1,h2,h3,b1,b2,b3,lambda,k,maxAlgResidual,detG\n";
  char buf[64];
  auto put = [&](double v, bool last = false) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf << (last ? '\n' : ',');
  };
  for (const StateFHB& s : nodes_) {
    put(s.t);
    for (int i = 0; i < 9; ++i) put(s.y[i]);
    const double lam = lambda_bar(variant_, s);
    put(lam);
    put(-1.0 - lam * lam);
    put(algebraic_residuals(variant_, s).max());
    put((-basis_m2() * s.F()).determinant(), true);
  }
}

}  // namespace akm::ode
