#include "akm/geometry.hpp"

#include <Eigen/Eigenvalues>

namespace akm {

Vec3 Connection::contract(const Vec3& x, const Vec3& y) const {
  Vec3 out = Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) out[i] += (*this)(i, j, k) * x[j] * y[k];
    }
  }
  return out;
}

double Connection::symmetry_residual() const {
  double r = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) r = std::max(r, std::abs((*this)(i, j, k) - (*this)(i, k, j)));
    }
  }
  return r;
}

Vec3 Curvature::apply(const Vec3& x, const Vec3& y, const Vec3& z) const {
  Vec3 out = Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) out[i] += (*this)(i, j, k, l) * z[j] * x[k] * y[l];
      }
    }
  }
  return out;
}

double Curvature::sectional(const Vec3& x, const Vec3& y) const {
  const double xx = x.dot(metric * x);
  const double yy = y.dot(metric * y);
  const double xy = x.dot(metric * y);
  const double den = xx * yy - xy * xy;
  if (den < 1e-12) throw DegeneratePlaneError("vectors do not span a plane");
  return apply(x, y, y).dot(metric * x) / den;
}

Mat3 checked_inverse_metric(const Mat3& g) {
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff())) {
    throw DegenerateMetricError("metric is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(g, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    throw DegenerateMetricError("metric is not positive definite or is ill-conditioned");
  }
  return g.inverse();
}

namespace {

Connection::Packed christoffel_packed(const MetricField& g, const Point& p, const ChartDomain& dom,
                                      double rel_step) {
  const Mat3 ginv = checked_inverse_metric(g(p));
  const auto dg = gradient_parts(g, p, dom, rel_step);
  Connection::Packed out = Connection::Packed::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = j; k < 3; ++k) {
        double s = 0.0;
        for (int m = 0; m < 3; ++m) {
          s += ginv(i, m) * (dg[static_cast<std::size_t>(j)](m, k) +
                             dg[static_cast<std::size_t>(k)](m, j) -
                             dg[static_cast<std::size_t>(m)](j, k));
        }
        out(3 * i + j, k) = 0.5 * s;
        out(3 * i + k, j) = 0.5 * s;
      }
    }
  }
  return out;
}

}  // namespace

Connection christoffel(const MetricField& g, const Point& p, const ChartDomain& dom,
                       const DiffScheme& scheme) {
  return Connection(christoffel_packed(g, p, dom, scheme.step));
}

Curvature riemann(const MetricField& g, const Point& p, const ChartDomain& dom,
                  const DiffScheme& scheme) {
  const Connection gam(christoffel_packed(g, p, dom, scheme.step));
  auto packed_at = [&](const Point& q) { return christoffel_packed(g, q, dom, scheme.step); };
  const auto dgam_packed = gradient_parts(packed_at, p, dom, scheme.outer_step);
  std::array<Connection, 3> dgam{Connection(dgam_packed[0]), Connection(dgam_packed[1]),
                                 Connection(dgam_packed[2])};

  Curvature c;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) {
          double v = dgam[static_cast<std::size_t>(k)](i, l, j) -
                     dgam[static_cast<std::size_t>(l)](i, k, j);
          for (int s = 0; s < 3; ++s) v += gam(i, k, s) * gam(s, l, j) - gam(i, l, s) * gam(s, k, j);
          c(i, j, k, l) = v;
        }
      }
    }
  }
  c.metric = g(p);
  c.inverse_metric = c.metric.inverse();
  c.ricci.setZero();
  for (int j = 0; j < 3; ++j) {
    for (int l = 0; l < 3; ++l) {
      for (int k = 0; k < 3; ++k) c.ricci(j, l) += c(k, j, k, l);
    }
  }
  c.ricci_operator = c.inverse_metric * c.ricci;
  c.scalar = c.ricci_operator.trace();
  return c;
}

double sectional_curvature(const MetricField& g, const Point& p, const ChartDomain& dom,
                           const Vec3& x, const Vec3& y, const DiffScheme& scheme) {
  return riemann(g, p, dom, scheme).sectional(x, y);
}

Vec3 covariant_derivative(const Connection& gamma, const Vec3& y, const Mat3& jy, const Vec3& x) {
  return jy * x + gamma.contract(x, y);
}

Mat3 covariant_derivative(const Connection& gamma, const Mat3& t, const std::array<Mat3, 3>& dt,
                          const Vec3& x) {
  // A(i, s) = Gamma^i_{ks} X^k, the connection matrix in direction X.
  Mat3 a = Mat3::Zero();
  Mat3 dx = Mat3::Zero();
  for (int k = 0; k < 3; ++k) {
    dx += x[k] * dt[static_cast<std::size_t>(k)];
    for (int i = 0; i < 3; ++i) {
      for (int s = 0; s < 3; ++s) a(i, s) += gamma(i, k, s) * x[k];
    }
  }
  return dx + a * t - t * a;
}

Mat3 covariant_derivative_02(const Connection& gamma, const Mat3& b, const std::array<Mat3, 3>& db,
                             const Vec3& x) {
  Mat3 a = Mat3::Zero();
  Mat3 dx = Mat3::Zero();
  for (int k = 0; k < 3; ++k) {
    dx += x[k] * db[static_cast<std::size_t>(k)];
    for (int i = 0; i < 3; ++i) {
      for (int s = 0; s < 3; ++s) a(i, s) += gamma(i, k, s) * x[k];
    }
  }
  return dx - a.transpose() * b - b * a;
}

Mat3 covariant_derivative_tensor11(const MetricField& g, const Tensor11Field& t, const Vec3& x,
                                   const Point& p, const ChartDomain& dom,
                                   const DiffScheme& scheme) {
  const Connection gam = christoffel(g, p, dom, scheme);
  return covariant_derivative(gam, t(p), gradient_parts(t, p, dom, scheme.step), x);
}

Vec3 covariant_derivative_vector(const MetricField& g, const VectorField& y, const Vec3& x,
                                 const Point& p, const ChartDomain& dom,
                                 const DiffScheme& scheme) {
  const Connection gam = christoffel(g, p, dom, scheme);
  return covariant_derivative(gam, y(p), jacobian(y, p, dom, scheme.step), x);
}

double metric_compatibility_residual(const MetricField& g, const Point& p, const ChartDomain& dom,
                                     const DiffScheme& scheme) {
  const Connection gam = christoffel(g, p, dom, scheme);
  const auto dg = gradient_parts(g, p, dom, scheme.step);
  const Mat3 gp = g(p);
  double r = 0.0;
  for (int k = 0; k < 3; ++k) {
    r = std::max(r, covariant_derivative_02(gam, gp, dg, Vec3::Unit(k)).cwiseAbs().maxCoeff());
  }
  return r;
}

Mat3 exterior_derivative(const OneFormField& w, const Point& p, const ChartDomain& dom,
                         const DiffScheme& scheme) {
  Mat3 d;
  for (int i = 0; i < 3; ++i) d.row(i) = partial(w, p, i, dom, scheme.step).transpose();
  // d(i, j) = d_i w_j
  return d - d.transpose();
}

double exterior_derivative(const TwoFormField& w, const Point& p, const ChartDomain& dom,
                           const DiffScheme& scheme) {
  auto comp = [&](int a, int b) {
    return [&w, a, b](const Point& q) { return w(q)(a, b); };
  };
  return partial(comp(1, 2), p, 0, dom, scheme.step) + partial(comp(2, 0), p, 1, dom, scheme.step) +
         partial(comp(0, 1), p, 2, dom, scheme.step);
}

Mat3 wedge(const Vec3& a, const Vec3& b) { return a * b.transpose() - b * a.transpose(); }

double wedge(const Vec3& a, const Mat3& w) {
  return a[0] * w(1, 2) + a[1] * w(2, 0) + a[2] * w(0, 1);
}

}  // namespace akm
