#pragma once

#include <array>

#include "akm/chart.hpp"

namespace akm {

/// Christoffel symbols of the Levi-Civita connection at a point.
class Connection {
 public:
  /// Packed storage: row 3*i + j, column k holds Gamma^i_{jk}.
  using Packed = Eigen::Matrix<double, 9, 3>;

  Connection() : packed_(Packed::Zero()) {}
  explicit Connection(const Packed& packed) : packed_(packed) {}

  double operator()(int i, int j, int k) const { return packed_(3 * i + j, k); }
  const Packed& packed() const noexcept { return packed_; }

  /// Gamma^i_{jk} X^j Y^k.
  Vec3 contract(const Vec3& x, const Vec3& y) const;

  /// max |Gamma^i_{jk} - Gamma^i_{kj}|.
  double symmetry_residual() const;

 private:
  Packed packed_;
};

/// Riemann tensor and its contractions at a point.
///
/// Convention: R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,
/// stored as R^i_{jkl} with R(d_k, d_l) d_j = R^i_{jkl} d_i. With this sign the
/// round sphere has positive sectional curvature.
class Curvature {
 public:
  double& operator()(int i, int j, int k, int l) { return r_[index(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return r_[index(i, j, k, l)]; }

  /// R(X,Y)Z.
  Vec3 apply(const Vec3& x, const Vec3& y, const Vec3& z) const;

  /// g(R(X,Y)Y, X) / (|X|^2 |Y|^2 - g(X,Y)^2). Throws DegeneratePlaneError.
  double sectional(const Vec3& x, const Vec3& y) const;

  Mat3 metric;
  Mat3 inverse_metric;
  Mat3 ricci;           // Ric_{jl}
  Mat3 ricci_operator;  // Q^i_j = g^{is} Ric_{sj}
  double scalar = 0.0;

 private:
  static constexpr std::size_t index(int i, int j, int k, int l) {
    return static_cast<std::size_t>(((i * 3 + j) * 3 + k) * 3 + l);
  }
  std::array<double, 81> r_{};
};

/// Inverse of g after checking it is positive definite with condition number
/// at most 1e12. Throws DegenerateMetricError.
Mat3 checked_inverse_metric(const Mat3& g);

Connection christoffel(const MetricField& g, const Point& p, const ChartDomain& dom,
                       const DiffScheme& scheme = {});

/// Curvature from Gamma and its numeric derivatives (outer step).
Curvature riemann(const MetricField& g, const Point& p, const ChartDomain& dom,
                  const DiffScheme& scheme = {});

double sectional_curvature(const MetricField& g, const Point& p, const ChartDomain& dom,
                           const Vec3& x, const Vec3& y, const DiffScheme& scheme = {});

/// (nabla_X Y)^i = X^k d_k Y^i + Gamma^i_{ks} X^k Y^s, with jy(i, k) = d_k Y^i.
Vec3 covariant_derivative(const Connection& gamma, const Vec3& y, const Mat3& jy, const Vec3& x);

/// (nabla_X T)^i_j = X(T^i_j) + Gamma^i_{ks} X^k T^s_j - Gamma^s_{kj} X^k T^i_s,
/// with dt[k] = d_k T.
Mat3 covariant_derivative(const Connection& gamma, const Mat3& t, const std::array<Mat3, 3>& dt,
                          const Vec3& x);

/// Same for a (0,2) tensor: (nabla_X B)_ij = X(B_ij) - Gamma^s_{ki} X^k B_sj - Gamma^s_{kj} X^k B_is.
Mat3 covariant_derivative_02(const Connection& gamma, const Mat3& b, const std::array<Mat3, 3>& db,
                             const Vec3& x);

Mat3 covariant_derivative_tensor11(const MetricField& g, const Tensor11Field& t, const Vec3& x,
                                   const Point& p, const ChartDomain& dom,
                                   const DiffScheme& scheme = {});

Vec3 covariant_derivative_vector(const MetricField& g, const VectorField& y, const Vec3& x,
                                 const Point& p, const ChartDomain& dom,
                                 const DiffScheme& scheme = {});

/// max_{ijk} |(nabla_k g)_ij|.
double metric_compatibility_residual(const MetricField& g, const Point& p, const ChartDomain& dom,
                                     const DiffScheme& scheme = {});

/// (dw)_ij = d_i w_j - d_j w_i.
Mat3 exterior_derivative(const OneFormField& w, const Point& p, const ChartDomain& dom,
                         const DiffScheme& scheme = {});

/// Coefficient of dx^0 ^ dx^1 ^ dx^2 in dw for a 2-form w with components w_ij:
/// d_0 w_12 + d_1 w_20 + d_2 w_01.
double exterior_derivative(const TwoFormField& w, const Point& p, const ChartDomain& dom,
                           const DiffScheme& scheme = {});

/// (a ^ b)_ij = a_i b_j - a_j b_i.
Mat3 wedge(const Vec3& a, const Vec3& b);

/// Coefficient of dx^0 ^ dx^1 ^ dx^2 in a ^ w.
double wedge(const Vec3& a, const Mat3& w);

}  // namespace akm
