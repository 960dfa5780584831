#include "akm/identities.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <thread>

#include "akm/errors.hpp"
#include "akm/geometry.hpp"

namespace akm {

namespace {

struct IdentityInfo {
  IdentityId id;
  std::string_view name;
  Profile profile;
  std::string_view formula;
};

constexpr std::array<IdentityInfo, 28> kIdentities{{
    {IdentityId::NablaXi, "NABLA_XI", Profile::Fd1, "nabla_X xi = X - eta(X) xi - phi h X"},
    {IdentityId::AkDeta, "AK_DETA", Profile::Fd1, "d eta = 0"},
    {IdentityId::AkDphi, "AK_DPHI", Profile::Fd1, "d Phi = 2 eta ^ Phi"},
    {IdentityId::Kleaves, "KLEAVES", Profile::Fd1,
     "(nabla_X phi)Y = g(phi X + h X, Y) xi - eta(Y)(phi X + h X)"},
    {IdentityId::Curv1, "CURV1", Profile::Fd2,
     "R(Y,Z)xi = eta(Y)(Z - phi h Z) - eta(Z)(Y - phi h Y) + (nabla_Z phi h)Y - (nabla_Y phi h)Z"},
    {IdentityId::LId, "L_ID", Profile::Fd2,
     "phi l phi - l = 2(-phi^2 + h^2), l(X) = R(X,xi)xi"},
    {IdentityId::Curv2, "CURV2", Profile::Fd2,
     "g(R(xi,X)Y,Z) - g(R(xi,X)phi Y,phi Z) + g(R(xi,phi X)Y,phi Z) + g(R(xi,phi X)phi Y,Z) "
     "= 2(nabla_{hX} Phi)(Y,Z) + 2 eta(Y) g(Z, X - phi h X) - 2 eta(Z) g(Y, X - phi h X)"},
    {IdentityId::CodazziHp, "CODAZZI_HP", Profile::Fd2,
     "(nabla_X h')Y - (nabla_Y h')X = 0 for X, Y in ker eta"},
    {IdentityId::H2, "H2", Profile::Fd1, "h^2 = h'^2 = (k+1) phi^2"},
    {IdentityId::Qxi, "QXI", Profile::Fd2, "Q xi = 2 k xi"},
    {IdentityId::Nh, "NH", Profile::Fd2,
     "nabla_xi h = -2h - mu phi h, d lambda(xi) = -2 lambda, dk(xi) = -4(k+1)"},
    {IdentityId::Nhp, "NHP", Profile::Fd2,
     "nabla_xi h' = -(mu+2)h', d lambda(xi) = -lambda(mu+2), dk(xi) = -2(k+1)(mu+2)"},
    {IdentityId::Lie1, "LIE1", Profile::Fd2,
     "L_xi h = 2 lambda^2 phi - 2h + mu h', L_xi h' = -mu h - 2h'"},
    {IdentityId::Lie2, "LIE2", Profile::Fd2,
     "L_xi h' = -(mu+2)h', L_xi h = 2 lambda^2 phi - (mu+2)h"},
    {IdentityId::TrHp, "TR_HP", Profile::Fd2, "sum_i (nabla_{X_i} h')X_i = Q xi + 2 xi"},
    {IdentityId::TrPhi, "TR_PHI", Profile::Fd1, "sum_i (nabla_{X_i} phi)X_i = 0"},
    {IdentityId::TrH, "TR_H", Profile::Fd2, "sum_i (nabla_{X_i} h)X_i = phi Q xi"},
    {IdentityId::Grad, "GRAD", Profile::Fd1, "T(grad mu) = grad k - (xi k) xi"},
    {IdentityId::RicciForm, "RICCI_FORM", Profile::Fd2,
     "Q = a I + b eta (x) xi + mu T, a = Sc/2 - k, b = 3k - Sc/2"},
    {IdentityId::NullKmu, "NULL_KMU", Profile::Fd2,
     "R(X,Y)xi = k(eta(Y)X - eta(X)Y) + mu(eta(Y)hX - eta(X)hY)"},
    {IdentityId::NullKmup, "NULL_KMUP", Profile::Fd2,
     "R(X,Y)xi = k(eta(Y)X - eta(X)Y) + mu(eta(Y)h'X - eta(X)h'Y)"},
    {IdentityId::ConnKmu, "CONN_KMU", Profile::Fd2,
     "hX = lambda X: nabla_X xi = X - lambda phi X, nabla_{phi X} xi = phi X - lambda X, "
     "nabla_{phi X} phi X = X(lambda)/(2 lambda) X - xi, "
     "nabla_X X = phi X(lambda)/(2 lambda) phi X - xi, "
     "nabla_X phi X = lambda xi - phi X(lambda)/(2 lambda) X, "
     "nabla_{phi X} X = lambda xi - X(lambda)/(2 lambda) phi X, "
     "nabla_xi X = -(mu/2) phi X, nabla_xi phi X = (mu/2) X"},
    {IdentityId::ConnKmup, "CONN_KMUP", Profile::Fd2,
     "h'X = lambda X: nabla_X xi = (1+lambda)X, nabla_{phi X} xi = (1-lambda) phi X, "
     "nabla_{phi X} phi X = X(lambda)/(2 lambda) X - (1-lambda) xi, "
     "nabla_X X = phi X(lambda)/(2 lambda) phi X - (1+lambda) xi, "
     "nabla_X phi X = -phi X(lambda)/(2 lambda) X, "
     "nabla_{phi X} X = -X(lambda)/(2 lambda) phi X, nabla_xi X = 0, nabla_xi phi X = 0"},
    {IdentityId::FlatLeaf, "FLAT_LEAF", Profile::Fd2,
     "K(X, phi X) + 1 - lambda^2 = 0 and the leaf curvature from the Gauss equation vanishes"},
    {IdentityId::Weyl3, "WEYL3", Profile::Fd2,
     "R(X,Y)Z = g(Y,Z)QX - g(X,Z)QY + g(QY,Z)X - g(QX,Z)Y - (Sc/2)(g(Y,Z)X - g(X,Z)Y)"},
    {IdentityId::DkEta, "DK_ETA", Profile::Strict, "dk ^ eta = 0"},
    {IdentityId::Bsq, "BSQ", Profile::Fd1, "B^2 = lambda^2 I on the leaf block, B = phi h or h'"},
    {IdentityId::Phi12, "PHI12", Profile::Strict, "Phi_12 = e^{2t}, other components zero"},
}};

const IdentityInfo& info(IdentityId id) {
  for (const auto& i : kIdentities) {
    if (i.id == id) return i;
  }
  throw Error("unknown identity");
}

constexpr std::array<IdentityId, 28> kAll = [] {
  std::array<IdentityId, 28> out{};
  for (std::size_t i = 0; i < kIdentities.size(); ++i) out[i] = kIdentities[i].id;
  return out;
}();

// Packs h, h' and phi h side by side so they share one stencil.
using HPack = Eigen::Matrix<double, 3, 9>;

HPack pack(const HOperators& ops) {
  HPack out;
  out << ops.h, ops.h_prime, ops.phi_h;
  return out;
}

Vec3 scalar_gradient(const ScalarField& f, const Point& p, const ChartDomain& dom, double step) {
  return Vec3(partial(f, p, 0, dom, step), partial(f, p, 1, dom, step),
              partial(f, p, 2, dom, step));
}

/// Everything an identity may need at one point, computed on first use.
class PointContext {
 public:
  PointContext(const AlmostContactModel& m, const Point& p, const DiffScheme& s)
      : model(m),
        point(p),
        scheme(s),
        g(m.g(p)),
        ginv(checked_inverse_metric(g)),
        phi(m.phi(p)),
        xi(m.xi(p)),
        eta(m.eta(p)),
        chol(g) {}

  const AlmostContactModel& model;
  const Point point;
  const DiffScheme scheme;
  const Mat3 g;
  const Mat3 ginv;
  const Mat3 phi;
  const Vec3 xi;
  const Vec3 eta;
  const Eigen::LLT<Mat3> chol;

  double dot(const Vec3& a, const Vec3& b) const { return a.dot(g * b); }
  double norm(const Vec3& v) const { return std::sqrt(std::max(0.0, dot(v, v))); }
  Vec3 unit(const Vec3& v) const { return v / norm(v); }

  /// Operator norm of a (1,1) tensor with respect to g.
  double op_norm(const Mat3& a) const {
    const Mat3 l = chol.matrixL();
    const Mat3 m = l.transpose() * a * l.transpose().inverse();
    return Eigen::JacobiSVD<Mat3>(m).singularValues()[0];
  }

  /// Norm of a 2-form induced by g.
  double form_norm(const Mat3& w) const {
    return std::sqrt(std::max(0.0, 0.5 * (ginv * w * ginv * w.transpose()).trace()));
  }

  const Connection& gamma() {
    if (!gamma_) gamma_ = christoffel(model.g, point, model.domain, scheme);
    return *gamma_;
  }

  const Curvature& curvature() {
    if (!curv_) curv_ = riemann(model.g, point, model.domain, scheme);
    return *curv_;
  }

  const HOperators& hops() {
    if (!hops_) hops_ = compute_h_operators(model, point, scheme);
    return *hops_;
  }
  const Mat3& h() { return hops().h; }
  const Mat3& hp() { return hops().h_prime; }
  const Mat3& phih() { return hops().phi_h; }
  const Mat3& nullity_t() { return model.variant == Nullity::Kmu ? h() : hp(); }

  const std::array<Mat3, 3>& dphi() {
    if (!dphi_) dphi_ = gradient_parts(model.phi, point, model.domain, scheme.step);
    return *dphi_;
  }

  const Mat3& jxi() {
    if (!jxi_) jxi_ = jacobian(model.xi, point, model.domain, scheme.step);
    return *jxi_;
  }

  const std::array<HPack, 3>& dhpack() {
    if (!dhpack_) {
      auto at = [this](const Point& q) { return pack(compute_h_operators(model, q, scheme)); };
      dhpack_ = gradient_parts(at, point, model.domain, scheme.outer_step);
    }
    return *dhpack_;
  }

  std::array<Mat3, 3> dh_block(int block) {
    const auto& d = dhpack();
    return {d[0].middleCols<3>(3 * block), d[1].middleCols<3>(3 * block),
            d[2].middleCols<3>(3 * block)};
  }

  const Eigenframe& frame() {
    if (!frame_) frame_ = eigenframe_of(nullity_t(), g, phi, xi, point);
    return *frame_;
  }

  double k() { return model.k(point); }
  double mu() { return model.mu(point); }
  double lambda() { return model.lambda(point); }

  const Vec3& dk() {
    if (!dk_) dk_ = scalar_gradient(model.k, point, model.domain, scheme.step);
    return *dk_;
  }
  const Vec3& dmu() {
    if (!dmu_) dmu_ = scalar_gradient(model.mu, point, model.domain, scheme.step);
    return *dmu_;
  }
  const Vec3& dlambda() {
    if (!dlambda_) dlambda_ = scalar_gradient(model.lambda, point, model.domain, scheme.step);
    return *dlambda_;
  }

  Vec3 nabla_xi(const Vec3& x) { return covariant_derivative(gamma(), xi, jxi(), x); }
  Mat3 nabla_phi(const Vec3& x) { return covariant_derivative(gamma(), phi, dphi(), x); }
  Mat3 nabla_h(const Vec3& x) { return covariant_derivative(gamma(), h(), dh_block(0), x); }
  Mat3 nabla_hp(const Vec3& x) { return covariant_derivative(gamma(), hp(), dh_block(1), x); }
  Mat3 nabla_phih(const Vec3& x) { return covariant_derivative(gamma(), phih(), dh_block(2), x); }

  /// L_xi of the packed tensor `block` (0: h, 1: h').
  Mat3 lie_xi(int block) {
    const auto d = dh_block(block);
    const Mat3 t = block == 0 ? h() : hp();
    Mat3 out = Mat3::Zero();
    for (int k = 0; k < 3; ++k) out += xi[k] * d[static_cast<std::size_t>(k)];
    return out - jxi() * t + t * jxi();
  }

 private:
  std::optional<Connection> gamma_;
  std::optional<Curvature> curv_;
  std::optional<HOperators> hops_;
  std::optional<std::array<Mat3, 3>> dphi_;
  std::optional<Mat3> jxi_;
  std::optional<std::array<HPack, 3>> dhpack_;
  std::optional<Eigenframe> frame_;
  std::optional<Vec3> dk_;
  std::optional<Vec3> dmu_;
  std::optional<Vec3> dlambda_;
};

/// Frame {xi, X, phi X} followed by the plan's random vectors, all g-unit.
std::vector<Vec3> test_vectors(PointContext& c, const PlanSample& s) {
  std::vector<Vec3> out;
  const Eigenframe& fr = c.frame();
  out.push_back(c.unit(c.xi));
  out.push_back(fr.x);
  out.push_back(fr.phi_x);
  for (const Vec3& v : s.vectors) out.push_back(c.unit(v));
  return out;
}

std::vector<std::array<Vec3, 2>> test_pairs(const std::vector<Vec3>& v) {
  std::vector<std::array<Vec3, 2>> out;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) out.push_back({v[a], v[b]});
  }
  for (std::size_t i = 3; i + 1 < v.size(); i += 2) out.push_back({v[i], v[i + 1]});
  return out;
}

std::vector<std::array<Vec3, 3>> test_triples(const std::vector<Vec3>& v) {
  std::vector<std::array<Vec3, 3>> out;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      for (std::size_t c = 0; c < 3; ++c) out.push_back({v[a], v[b], v[c]});
    }
  }
  const std::size_t n = v.size() - 3;
  for (std::size_t i = 0; i + 1 < n; i += 2) {
    out.push_back({v[3 + i], v[3 + i + 1], v[3 + (i + 2) % n]});
  }
  return out;
}

/// g-orthonormal frames used by the trace identities: the eigenframe and one
/// built from the random vectors by Gram-Schmidt.
std::vector<std::array<Vec3, 3>> trace_frames(PointContext& c, const PlanSample& s) {
  const Eigenframe& fr = c.frame();
  std::vector<std::array<Vec3, 3>> out{{c.unit(c.xi), fr.x, fr.phi_x}};
  std::vector<Vec3> cand = s.vectors;
  for (int i = 0; i < 3; ++i) cand.push_back(Vec3::Unit(i));
  std::vector<Vec3> basis;
  for (const Vec3& v : cand) {
    Vec3 w = v;
    for (const Vec3& b : basis) w -= c.dot(w, b) * b;
    const double n = c.norm(w);
    if (n > 1e-3) basis.push_back(w / n);
    if (basis.size() == 3) break;
  }
  out.push_back({basis[0], basis[1], basis[2]});
  return out;
}

struct PointResult {
  double value = 0.0;
  std::map<std::string, double> parts;
};

void put(PointResult& r, const std::string& name, double v) {
  r.value = std::max(r.value, v);
  auto [it, inserted] = r.parts.emplace(name, v);
  if (!inserted) it->second = std::max(it->second, v);
}

Vec3 nullity_rhs(double k, double mu, const Mat3& t, const Vec3& eta, const Vec3& x,
                 const Vec3& y) {
  const double ex = eta.dot(x);
  const double ey = eta.dot(y);
  return k * (ey * x - ex * y) + mu * (ey * (t * x) - ex * (t * y));
}

PointResult eval_nullity(PointContext& c, const PlanSample& s, Nullity variant,
                         const ScalarField& kf, const ScalarField& muf) {
  PointResult r;
  const Mat3& t = variant == Nullity::Kmu ? c.h() : c.hp();
  const double k = kf ? kf(c.point) : c.k();
  const double mu = muf ? muf(c.point) : c.mu();
  for (const auto& [x, y] : test_pairs(test_vectors(c, s))) {
    const Vec3 res = c.curvature().apply(x, y, c.xi) - nullity_rhs(k, mu, t, c.eta, x, y);
    put(r, "nullity", c.norm(res));
  }
  return r;
}

/// Levi-Civita connection on the eigenframe fields X, phi X, xi. The
/// eigenvector field is sign-aligned with its value at the centre point.
PointResult eval_connection(PointContext& c, bool primed) {
  PointResult r;
  const AlmostContactModel& m = c.model;
  const DiffScheme scheme = c.scheme;
  const Vec3 x0 = c.frame().x;
  const VectorField xf = [&m, scheme, x0](const Point& q) {
    Vec3 v = eigenframe(m, q, scheme).x;
    return v.dot(x0) < 0.0 ? Vec3(-v) : v;
  };
  const VectorField pxf = [&m, &xf](const Point& q) { return Vec3(m.phi(q) * xf(q)); };
  const Mat3 jx = jacobian(xf, c.point, m.domain, scheme.outer_step);
  const Mat3 jpx = jacobian(pxf, c.point, m.domain, scheme.outer_step);
  const Vec3 x = xf(c.point);
  const Vec3 px = c.phi * x;
  const Vec3 xi = c.xi;
  const Connection& gam = c.gamma();
  auto nabla = [&](const Vec3& a, const Vec3& b, const Mat3& jb) {
    return covariant_derivative(gam, b, jb, a);
  };

  const double lam = c.lambda();
  const double mu = c.mu();
  const double x_lam = c.dlambda().dot(x) / (2.0 * lam);
  const double px_lam = c.dlambda().dot(px) / (2.0 * lam);

  auto check = [&](const char* name, const Vec3& lhs, const Vec3& rhs) {
    put(r, name, c.norm(lhs - rhs));
  };
  if (!primed) {
    check("nabla_X xi", c.nabla_xi(x), x - lam * px);
    check("nabla_phiX xi", c.nabla_xi(px), px - lam * x);
    check("nabla_phiX phiX", nabla(px, px, jpx), x_lam * x - xi);
    check("nabla_X X", nabla(x, x, jx), px_lam * px - xi);
    check("nabla_X phiX", nabla(x, px, jpx), lam * xi - px_lam * x);
    check("nabla_phiX X", nabla(px, x, jx), lam * xi - x_lam * px);
    check("nabla_xi X", nabla(xi, x, jx), -0.5 * mu * px);
    check("nabla_xi phiX", nabla(xi, px, jpx), 0.5 * mu * x);
  } else {
    check("nabla_X xi", c.nabla_xi(x), (1.0 + lam) * x);
    check("nabla_phiX xi", c.nabla_xi(px), (1.0 - lam) * px);
    check("nabla_phiX phiX", nabla(px, px, jpx), x_lam * x - (1.0 - lam) * xi);
    check("nabla_X X", nabla(x, x, jx), px_lam * px - (1.0 + lam) * xi);
    check("nabla_X phiX", nabla(x, px, jpx), -px_lam * x);
    check("nabla_phiX X", nabla(px, x, jx), -x_lam * px);
    check("nabla_xi X", nabla(xi, x, jx), Vec3::Zero());
    check("nabla_xi phiX", nabla(xi, px, jpx), Vec3::Zero());
  }
  return r;
}

PointResult evaluate(IdentityId id, PointContext& c, const PlanSample& s) {
  PointResult r;
  const Mat3 id3 = Mat3::Identity();
  switch (id) {
    case IdentityId::NablaXi:
      for (const Vec3& x : test_vectors(c, s)) {
        const Vec3 rhs = x - c.eta.dot(x) * c.xi - c.phih() * x;
        put(r, "nabla xi", c.norm(c.nabla_xi(x) - rhs));
      }
      break;

    case IdentityId::AkDeta:
      put(r, "d eta", c.form_norm(exterior_derivative(c.model.eta, c.point, c.model.domain,
                                                       c.scheme)));
      break;

    case IdentityId::AkDphi: {
      const TwoFormField big_phi = [&m = c.model](const Point& q) { return m.fundamental_form(q); };
      const double d = exterior_derivative(big_phi, c.point, c.model.domain, c.scheme);
      const double w = wedge(c.eta, c.model.fundamental_form(c.point));
      put(r, "d Phi", std::abs(d - 2.0 * w) / std::sqrt(c.g.determinant()));
      break;
    }

    case IdentityId::Kleaves:
      for (const auto& [x, y] : test_pairs(test_vectors(c, s))) {
        const Vec3 a = c.phi * x + c.h() * x;
        const Vec3 rhs = c.dot(a, y) * c.xi - c.eta.dot(y) * a;
        put(r, "nabla phi", c.norm(c.nabla_phi(x) * y - rhs));
      }
      break;

    case IdentityId::Curv1:
      for (const auto& [y, z] : test_pairs(test_vectors(c, s))) {
        const Mat3& ph = c.phih();
        const Vec3 rhs = c.eta.dot(y) * (z - ph * z) - c.eta.dot(z) * (y - ph * y) +
                         c.nabla_phih(z) * y - c.nabla_phih(y) * z;
        put(r, "R(Y,Z)xi", c.norm(c.curvature().apply(y, z, c.xi) - rhs));
      }
      break;

    case IdentityId::LId: {
      Mat3 l;
      for (int j = 0; j < 3; ++j) l.col(j) = c.curvature().apply(Vec3::Unit(j), c.xi, c.xi);
      const Mat3 res = c.phi * l * c.phi - l - 2.0 * (-c.phi * c.phi + c.h() * c.h());
      put(r, "l", c.op_norm(res));
      break;
    }

    case IdentityId::Curv2:
      for (const auto& [x, y, z] : test_triples(test_vectors(c, s))) {
        const Curvature& rm = c.curvature();
        const Vec3 px = c.phi * x;
        const Vec3 py = c.phi * y;
        const Vec3 pz = c.phi * z;
        const double lhs = c.dot(rm.apply(c.xi, x, y), z) - c.dot(rm.apply(c.xi, x, py), pz) +
                           c.dot(rm.apply(c.xi, px, y), pz) + c.dot(rm.apply(c.xi, px, py), z);
        const Vec3 w = x - c.phih() * x;
        const double rhs = 2.0 * c.dot(y, c.nabla_phi(c.h() * x) * z) +
                           2.0 * c.eta.dot(y) * c.dot(z, w) - 2.0 * c.eta.dot(z) * c.dot(y, w);
        put(r, "curv2", std::abs(lhs - rhs));
      }
      break;

    case IdentityId::CodazziHp: {
      std::vector<Vec3> d;
      for (const Vec3& v : test_vectors(c, s)) {
        const Vec3 w = v - c.eta.dot(v) * c.xi;
        if (c.norm(w) > 1e-6) d.push_back(c.unit(w));
      }
      for (const Vec3& x : d) {
        for (const Vec3& y : d) {
          put(r, "codazzi", c.norm(c.nabla_hp(x) * y - c.nabla_hp(y) * x));
        }
      }
      break;
    }

    case IdentityId::H2: {
      const Mat3 target = (c.k() + 1.0) * c.phi * c.phi;
      put(r, "h^2", c.op_norm(c.h() * c.h() - target));
      put(r, "h'^2", c.op_norm(c.hp() * c.hp() - target));
      break;
    }

    case IdentityId::Qxi:
      put(r, "Q xi", c.norm(c.curvature().ricci_operator * c.xi - 2.0 * c.k() * c.xi));
      break;

    case IdentityId::Nh: {
      const Mat3 target = -2.0 * c.h() - c.mu() * c.phih();
      put(r, "nabla_xi h", c.op_norm(c.nabla_h(c.xi) - target));
      put(r, "dlambda(xi)", std::abs(c.dlambda().dot(c.xi) + 2.0 * c.lambda()));
      put(r, "dk(xi)", std::abs(c.dk().dot(c.xi) + 4.0 * (c.k() + 1.0)));
      break;
    }

    case IdentityId::Nhp: {
      const double m2 = c.mu() + 2.0;
      put(r, "nabla_xi h'", c.op_norm(c.nabla_hp(c.xi) + m2 * c.hp()));
      put(r, "dlambda(xi)", std::abs(c.dlambda().dot(c.xi) + c.lambda() * m2));
      put(r, "dk(xi)", std::abs(c.dk().dot(c.xi) + 2.0 * (c.k() + 1.0) * m2));
      break;
    }

    case IdentityId::Lie1: {
      const double lam = c.lambda();
      const double mu = c.mu();
      put(r, "L_xi h", c.op_norm(c.lie_xi(0) - (2.0 * lam * lam * c.phi - 2.0 * c.h() + mu * c.hp())));
      put(r, "L_xi h'", c.op_norm(c.lie_xi(1) - (-mu * c.h() - 2.0 * c.hp())));
      break;
    }

    case IdentityId::Lie2: {
      const double lam = c.lambda();
      const double m2 = c.mu() + 2.0;
      put(r, "L_xi h'", c.op_norm(c.lie_xi(1) + m2 * c.hp()));
      put(r, "L_xi h", c.op_norm(c.lie_xi(0) - (2.0 * lam * lam * c.phi - m2 * c.h())));
      break;
    }

    case IdentityId::TrHp:
    case IdentityId::TrPhi:
    case IdentityId::TrH: {
      const Vec3 qxi = c.curvature().ricci_operator * c.xi;
      for (const auto& fr : trace_frames(c, s)) {
        Vec3 sum = Vec3::Zero();
        for (const Vec3& x : fr) {
          if (id == IdentityId::TrHp) {
            sum += c.nabla_hp(x) * x;
          } else if (id == IdentityId::TrPhi) {
            sum += c.nabla_phi(x) * x;
          } else {
            sum += c.nabla_h(x) * x;
          }
        }
        const Vec3 target = id == IdentityId::TrHp   ? Vec3(qxi + 2.0 * c.xi)
                            : id == IdentityId::TrPhi ? Vec3(Vec3::Zero())
                                                      : Vec3(c.phi * qxi);
        put(r, "trace", c.norm(sum - target));
      }
      break;
    }

    case IdentityId::Grad: {
      const Vec3 grad_mu = c.ginv * c.dmu();
      const Vec3 grad_k = c.ginv * c.dk();
      const Vec3 res = c.nullity_t() * grad_mu - grad_k + c.dk().dot(c.xi) * c.xi;
      put(r, "grad", c.norm(res));
      break;
    }

    case IdentityId::RicciForm: {
      const Curvature& rm = c.curvature();
      const double k = c.k();
      const double a = rm.scalar / 2.0 - k;
      const double b = 3.0 * k - rm.scalar / 2.0;
      const Mat3 target = a * id3 + b * c.xi * c.eta.transpose() + c.mu() * c.nullity_t();
      put(r, "Q", c.op_norm(rm.ricci_operator - target));
      break;
    }

    case IdentityId::NullKmu:
      return eval_nullity(c, s, Nullity::Kmu, {}, {});
    case IdentityId::NullKmup:
      return eval_nullity(c, s, Nullity::KmuPrime, {}, {});

    case IdentityId::ConnKmu:
      return eval_connection(c, false);
    case IdentityId::ConnKmup:
      return eval_connection(c, true);

    case IdentityId::FlatLeaf: {
      const Eigenframe& fr = c.frame();
      const Vec3 x = fr.x;
      const Vec3 px = fr.phi_x;
      const double k_amb = c.curvature().sectional(x, px);
      auto shape = [&](const Vec3& v) { return Vec3(-c.nabla_xi(v)); };
      const Vec3 ax = shape(x);
      const Vec3 apx = shape(px);
      const double leaf = k_amb + c.dot(ax, x) * c.dot(apx, px) - c.dot(ax, px) * c.dot(apx, x);
      const double lam = c.lambda();
      put(r, "K(X,phiX)+1-lambda^2", std::abs(k_amb + 1.0 - lam * lam));
      put(r, "leaf curvature", std::abs(leaf));
      break;
    }

    case IdentityId::Weyl3:
      for (const auto& [x, y, z] : test_triples(test_vectors(c, s))) {
        const Curvature& rm = c.curvature();
        const Mat3& q = rm.ricci_operator;
        const Vec3 qx = q * x;
        const Vec3 qy = q * y;
        const Vec3 rhs = c.dot(y, z) * qx - c.dot(x, z) * qy + c.dot(qy, z) * x -
                         c.dot(qx, z) * y - 0.5 * rm.scalar * (c.dot(y, z) * x - c.dot(x, z) * y);
        put(r, "weyl", c.norm(rm.apply(x, y, z) - rhs));
      }
      break;

    case IdentityId::DkEta:
      put(r, "dk^eta", c.form_norm(wedge(c.dk(), c.eta)));
      break;

    case IdentityId::Bsq: {
      const Mat3& b = c.model.variant == Nullity::Kmu ? c.phih() : c.hp();
      const Eigen::Matrix2d leaf = b.topLeftCorner<2, 2>();
      const double lam = c.lambda();
      put(r, "B^2", (leaf * leaf - lam * lam * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff());
      break;
    }

    case IdentityId::Phi12: {
      const Mat3 f = c.model.fundamental_form(c.point);
      const double t = c.point[2];
      put(r, "Phi_12", std::abs(f(0, 1) - std::exp(2.0 * t)));
      put(r, "Phi_1t", std::abs(f(0, 2)));
      put(r, "Phi_2t", std::abs(f(1, 2)));
      break;
    }
  }
  return r;
}

using PointEvaluator = std::function<PointResult(PointContext&, const PlanSample&)>;

/// Evaluates `eval` at every plan point (in parallel) and max-reduces in plan order.
ResidualReport sweep(const AlmostContactModel& m, IdentityId id, const SamplePlan& plan,
                     const DiffScheme& scheme, const PointEvaluator& eval) {
  const std::vector<PlanSample> samples = plan.samples(m.domain);
  std::vector<PointResult> results(samples.size());
  std::vector<std::exception_ptr> errors(samples.size());

  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, samples.size());
  auto work = [&](std::size_t first) {
    for (std::size_t i = first; i < samples.size(); i += workers) {
      try {
        PointContext ctx(m, samples[i].point, scheme);
        results[i] = eval(ctx, samples[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work, w);
  work(0);
  pool.clear();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ResidualReport rep;
  rep.id = id;
  rep.samples = samples.size();
  rep.residual = -1.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const PointResult& pr = results[i];
    if (!std::isfinite(pr.value)) throw NumericError("non-finite residual");
    if (pr.value > rep.residual) {
      rep.residual = pr.value;
      rep.max_point = samples[i].point;
    }
    for (const auto& [name, v] : pr.parts) {
      auto [it, inserted] = rep.parts.emplace(name, v);
      if (!inserted) it->second = std::max(it->second, v);
    }
  }
  if (rep.residual < 0.0) rep.residual = 0.0;
  return rep;
}

void finish(ResidualReport& rep, Profile profile, const CheckOptions& opts) {
  rep.profile = profile;
  rep.tolerance = opts.tolerance.value_or(tolerance(profile));
  rep.verdict = rep.residual <= rep.tolerance ? Verdict::Pass : Verdict::Fail;
}

void refine(ResidualReport& rep, const AlmostContactModel& m, const SamplePlan& plan,
            const CheckOptions& opts, const PointEvaluator& eval) {
  if (rep.verdict != Verdict::Fail || !opts.refine_on_failure || rep.profile == Profile::Strict) {
    return;
  }
  const ResidualReport finer = sweep(m, rep.id, plan, opts.scheme.halved(), eval);
  rep.refined_residual = finer.residual;
  rep.note = finer.residual < rep.residual / 4.0
                 ? "residual shrinks under step halving: discretisation error"
                 : "residual persists under step halving: structural failure";
}

}  // namespace

std::string_view to_string(IdentityId id) { return info(id).name; }

std::optional<IdentityId> identity_from_string(std::string_view s) {
  for (const auto& i : kIdentities) {
    if (i.name == s) return i.id;
  }
  return std::nullopt;
}

std::span<const IdentityId> all_identities() { return kAll; }

std::string_view formula(IdentityId id) { return info(id).formula; }

std::string_view to_string(Profile p) {
  switch (p) {
    case Profile::Strict:
      return "strict";
    case Profile::Fd1:
      return "fd1";
    case Profile::Fd2:
      return "fd2";
  }
  return "fd1";
}

std::optional<Profile> profile_from_string(std::string_view s) {
  for (Profile p : {Profile::Strict, Profile::Fd1, Profile::Fd2}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

double tolerance(Profile p) {
  switch (p) {
    case Profile::Strict:
      return 1e-10;
    case Profile::Fd1:
      return 1e-6;
    case Profile::Fd2:
      return 5e-5;
  }
  return 1e-6;
}

Profile default_profile(IdentityId id) { return info(id).profile; }

bool is_applicable(IdentityId id, const AlmostContactModel& m) {
  const bool hvar = m.variant == Nullity::Kmu;
  const bool baseline = m.family == Family::KenmotsuBaseline;
  switch (id) {
    case IdentityId::Nh:
    case IdentityId::Lie1:
    case IdentityId::NullKmu:
      return hvar;
    case IdentityId::ConnKmu:
      return hvar && !baseline;
    case IdentityId::Nhp:
    case IdentityId::Lie2:
    case IdentityId::NullKmup:
    case IdentityId::ConnKmup:
      return !hvar;
    case IdentityId::Bsq:
    case IdentityId::Phi12:
      return is_darboux(m.family);
    default:
      return true;
  }
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::NotApplicable:
      return "not-applicable";
  }
  return "fail";
}

std::optional<Verdict> verdict_from_string(std::string_view s) {
  for (Verdict v : {Verdict::Pass, Verdict::Fail, Verdict::NotApplicable}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

SamplePlan SamplePlan::for_model(const AlmostContactModel& m) {
  SamplePlan p;
  p.box = m.box;
  return p;
}

std::vector<PlanSample> SamplePlan::samples(const ChartDomain& dom) const {
  for (int n : grid) {
    if (n < 1) throw ConfigError("grid resolution must be at least 1 on every axis");
  }
  if (random_pairs < 0) throw ConfigError("random pair count must be non-negative");
  for (std::size_t a = 0; a < 3; ++a) {
    if (!(box.lo[a] <= box.hi[a])) throw ConfigError("sample box must have lo <= hi");
  }

  auto coord = [this](std::size_t axis, int i) {
    const int n = grid[axis];
    if (n == 1) return 0.5 * (box.lo[axis] + box.hi[axis]);
    return box.lo[axis] + (box.hi[axis] - box.lo[axis]) * i / (n - 1);
  };

  // Raw 64-bit draws mapped to [-1, 1) so the plan is identical on every platform.
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0; };
  auto unit_vector = [&] {
    for (;;) {
      const Vec3 v(uniform(), uniform(), uniform());
      const double n = v.norm();
      if (n > 1e-3 && n <= 1.0) return Vec3(v / n);
    }
  };

  std::vector<PlanSample> out;
  out.reserve(static_cast<std::size_t>(grid[0] * grid[1] * grid[2]));
  for (int i = 0; i < grid[0]; ++i) {
    for (int j = 0; j < grid[1]; ++j) {
      for (int k = 0; k < grid[2]; ++k) {
        PlanSample s;
        s.point = Point(coord(0, i), coord(1, j), coord(2, k));
        if (!dom.contains(s.point)) {
          throw ConfigError("sample point outside the chart domain; shrink the box");
        }
        for (int v = 0; v < 2 * random_pairs; ++v) s.vectors.push_back(unit_vector());
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

ResidualReport check_identity(const AlmostContactModel& m, IdentityId id, const SamplePlan& plan,
                              const CheckOptions& opts) {
  const Profile profile = opts.profile.value_or(default_profile(id));
  if (!is_applicable(id, m)) {
    ResidualReport rep;
    rep.id = id;
    rep.profile = profile;
    rep.tolerance = opts.tolerance.value_or(tolerance(profile));
    rep.verdict = Verdict::NotApplicable;
    rep.note = "identity does not apply to " + std::string(to_string(m.family));
    return rep;
  }
  const PointEvaluator eval = [id](PointContext& c, const PlanSample& s) {
    return evaluate(id, c, s);
  };
  ResidualReport rep = sweep(m, id, plan, opts.scheme, eval);
  finish(rep, profile, opts);
  refine(rep, m, plan, opts, eval);
  return rep;
}

ResidualReport nullity_residual(const AlmostContactModel& m, Nullity variant,
                                const SamplePlan& plan, const CheckOptions& opts,
                                const ScalarField& k, const ScalarField& mu) {
  const IdentityId id = variant == Nullity::Kmu ? IdentityId::NullKmu : IdentityId::NullKmup;
  const PointEvaluator eval = [variant, k, mu](PointContext& c, const PlanSample& s) {
    return eval_nullity(c, s, variant, k, mu);
  };
  ResidualReport rep = sweep(m, id, plan, opts.scheme, eval);
  finish(rep, opts.profile.value_or(Profile::Fd2), opts);
  refine(rep, m, plan, opts, eval);
  return rep;
}

KMuEstimate infer_k_mu(const AlmostContactModel& m, const Point& p, const DiffScheme& scheme) {
  PointContext c(m, p, scheme);
  const Eigenframe& fr = c.frame();
  const Curvature& rm = c.curvature();
  const double lx = c.dot(rm.apply(fr.x, c.xi, c.xi), fr.x);
  const double lpx = c.dot(rm.apply(fr.phi_x, c.xi, c.xi), fr.phi_x);
  KMuEstimate est;
  est.k = 0.5 * (lx + lpx);
  est.lambda = fr.lambda;
  if (fr.lambda >= 1e-6) est.mu = (lx - lpx) / (2.0 * fr.lambda);
  return est;
}

}  // namespace akm
