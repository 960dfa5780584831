#include "akm/almost_contact.hpp"

#include <Eigen/Eigenvalues>
#include <array>

#include "akm/errors.hpp"
#include "akm/geometry.hpp"

namespace akm {

namespace {

constexpr std::array<std::pair<Family, std::string_view>, 5> kFamilyNames{{
    {Family::KmuChart, "kmu-chart"},
    {Family::KmupChart, "kmup-chart"},
    {Family::KmuDarboux, "kmu-darboux"},
    {Family::KmupDarboux, "kmup-darboux"},
    {Family::KenmotsuBaseline, "kenmotsu-baseline"},
}};

double max_abs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

std::string_view to_string(Family f) {
  for (const auto& [fam, name] : kFamilyNames) {
    if (fam == f) return name;
  }
  return "unknown";
}

std::optional<Family> family_from_string(std::string_view s) {
  for (const auto& [fam, name] : kFamilyNames) {
    if (name == s) return fam;
  }
  return std::nullopt;
}

bool is_darboux(Family f) { return f == Family::KmuDarboux || f == Family::KmupDarboux; }

Mat3 lie_derivative_tensor11(const Tensor11Field& t, const VectorField& v, const Point& p,
                             const ChartDomain& dom, double rel_step) {
  const auto dt = gradient_parts(t, p, dom, rel_step);
  const Mat3 jv = jacobian(v, p, dom, rel_step);
  const Vec3 vp = v(p);
  const Mat3 tp = t(p);
  Mat3 out = Mat3::Zero();
  for (int k = 0; k < 3; ++k) out += vp[k] * dt[static_cast<std::size_t>(k)];
  return out - jv * tp + tp * jv;
}

Mat3 compute_h(const AlmostContactModel& m, const Point& p, const DiffScheme& scheme) {
  return 0.5 * lie_derivative_tensor11(m.phi, m.xi, p, m.domain, scheme.step);
}

HOperators compute_h_operators(const AlmostContactModel& m, const Point& p,
                               const DiffScheme& scheme) {
  const Mat3 h = compute_h(m, p, scheme);
  const Mat3 phi = m.phi(p);
  return {h, h * phi, phi * h};
}

Mat3 nullity_operator(const AlmostContactModel& m, const Point& p, const DiffScheme& scheme) {
  const Mat3 h = compute_h(m, p, scheme);
  return m.variant == Nullity::Kmu ? h : Mat3(h * m.phi(p));
}

Eigenframe eigenframe_of(const Mat3& t, const Mat3& g, const Mat3& phi, const Vec3& xi,
                         const Point& p) {
  // g-orthonormal basis of ker eta: Gram-Schmidt on xi followed by the
  // coordinate axes, keeping the two best-conditioned survivors.
  auto gdot = [&g](const Vec3& a, const Vec3& b) { return a.dot(g * b); };
  const Vec3 xi_unit = xi / std::sqrt(gdot(xi, xi));
  std::array<Vec3, 3> cand;
  std::array<double, 3> norms{};
  for (int i = 0; i < 3; ++i) {
    Vec3 v = Vec3::Unit(i);
    v -= gdot(v, xi_unit) * xi_unit;
    cand[static_cast<std::size_t>(i)] = v;
    norms[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, gdot(v, v)));
  }
  std::size_t first = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (norms[i] > norms[first]) first = i;
  }
  const Vec3 u0 = cand[first] / norms[first];
  Vec3 u1 = Vec3::Zero();
  double best = -1.0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (i == first) continue;
    Vec3 v = cand[i] - gdot(cand[i], u0) * u0;
    const double n = std::sqrt(std::max(0.0, gdot(v, v)));
    if (n > best) {
      best = n;
      u1 = v / n;
    }
  }

  Eigen::Matrix2d block;
  block(0, 0) = gdot(u0, t * u0);
  block(1, 1) = gdot(u1, t * u1);
  block(0, 1) = block(1, 0) = 0.5 * (gdot(u0, t * u1) + gdot(u1, t * u0));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(block);
  if (es.info() != Eigen::Success) throw NumericError("eigen-decomposition did not converge");

  Eigenframe fr;
  fr.point = p;
  fr.xi = xi;
  const double top = es.eigenvalues()[1];
  Vec3 x;
  if (top < 1e-10) {
    fr.lambda = 0.0;
    fr.degenerate = true;
    x = u0;
  } else {
    fr.lambda = top;
    const Eigen::Vector2d c = es.eigenvectors().col(1);
    x = c[0] * u0 + c[1] * u1;
  }
  x /= std::sqrt(gdot(x, x));
  for (int i = 0; i < 3; ++i) {
    if (std::abs(x[i]) > 1e-8) {
      if (x[i] < 0.0) x = -x;
      break;
    }
  }
  fr.x = x;
  fr.phi_x = phi * x;
  return fr;
}

Eigenframe eigenframe(const AlmostContactModel& m, const Point& p, const DiffScheme& scheme) {
  return eigenframe_of(nullity_operator(m, p, scheme), m.g(p), m.phi(p), m.xi(p), p);
}

double fundamental_two_form(const AlmostContactModel& m, const Point& p, const Vec3& x,
                            const Vec3& y) {
  return x.dot(m.g(p) * (m.phi(p) * y));
}

Vec3 nijenhuis(const AlmostContactModel& m, const Point& p, const Vec3& x, const Vec3& y,
               const DiffScheme& scheme) {
  const VectorField fx = [x](const Point&) { return x; };
  const VectorField fy = [y](const Point&) { return y; };
  const VectorField phix = [&m, x](const Point& q) { return Vec3(m.phi(q) * x); };
  const VectorField phiy = [&m, y](const Point& q) { return Vec3(m.phi(q) * y); };
  const Mat3 phi = m.phi(p);

  // [X, Y] vanishes for constant-coefficient fields.
  const Vec3 bracket = lie_bracket(phix, phiy, p, m.domain, scheme) -
                       phi * lie_bracket(phix, fy, p, m.domain, scheme) -
                       phi * lie_bracket(fx, phiy, p, m.domain, scheme);
  const Mat3 deta = exterior_derivative(m.eta, p, m.domain, scheme);
  return bracket + x.dot(deta * y) * m.xi(p);
}

double StructureResiduals::max() const {
  return std::max({phi_squared, eta_xi, metric_dual, compatibility, lambda_k, metric_symmetry});
}

StructureResiduals structure_residuals(const AlmostContactModel& m, const Point& p) {
  const Mat3 phi = m.phi(p);
  const Vec3 xi = m.xi(p);
  const Vec3 eta = m.eta(p);
  const Mat3 g = m.g(p);
  StructureResiduals r;
  r.phi_squared = max_abs(phi * phi + Mat3::Identity() - xi * eta.transpose());
  r.eta_xi = std::abs(eta.dot(xi) - 1.0);
  r.metric_dual = (g * xi - eta).cwiseAbs().maxCoeff();
  r.compatibility = max_abs(phi.transpose() * g * phi - g + eta * eta.transpose());
  const double lam = m.lambda(p);
  r.lambda_k = std::abs(lam * lam + 1.0 + m.k(p));
  r.metric_symmetry = max_abs(g - g.transpose());
  return r;
}

}  // namespace akm
