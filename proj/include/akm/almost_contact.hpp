#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "akm/chart.hpp"
#include "akm/expr.hpp"
#include "akm/matrix_ode.hpp"
#include "akm/nullity.hpp"

namespace akm {

enum class Family { KmuChart, KmupChart, KmuDarboux, KmupDarboux, KenmotsuBaseline };

std::string_view to_string(Family f);
std::optional<Family> family_from_string(std::string_view s);
bool is_darboux(Family f);

/// Inputs a model was built from, kept for serialization and reports.
struct ModelParams {
  std::optional<Expr> mu;
  std::optional<Expr> f;
  std::optional<Expr> r;
  double c = 1.0;  // warping constant of the Kenmotsu baseline
  double t0 = 0.0;
  double t1 = 0.0;
  double step = 0.0;
};

/// An almost contact metric structure (phi, xi, eta, g) on a chart, with the
/// scalar fields k, mu, lambda it is claimed to carry.
struct AlmostContactModel {
  Family family;
  Nullity variant;
  ChartDomain domain;
  Box box;  // default sample box

  Tensor11Field phi;
  VectorField xi;
  OneFormField eta;
  MetricField g;

  ScalarField k;
  ScalarField mu;
  ScalarField lambda;

  ModelParams params;
  std::shared_ptr<const ode::Trajectory> trajectory;  // Darboux families only
  std::vector<std::string> warnings;

  /// Phi_ij = g(d_i, phi d_j).
  Mat3 fundamental_form(const Point& p) const { return g(p) * phi(p); }
};

/// (L_V T)^i_j = V^k d_k T^i_j - T^k_j d_k V^i + T^i_k d_j V^k.
Mat3 lie_derivative_tensor11(const Tensor11Field& t, const VectorField& v, const Point& p,
                             const ChartDomain& dom, double rel_step);

/// h = (1/2) L_xi phi, computed from the Lie derivative.
Mat3 compute_h(const AlmostContactModel& m, const Point& p, const DiffScheme& scheme = {});

struct HOperators {
  Mat3 h;
  Mat3 h_prime;  // h o phi
  Mat3 phi_h;    // phi o h
};

HOperators compute_h_operators(const AlmostContactModel& m, const Point& p,
                               const DiffScheme& scheme = {});

/// h for Kmu models, h' for KmuPrime models.
Mat3 nullity_operator(const AlmostContactModel& m, const Point& p, const DiffScheme& scheme = {});

struct Eigenframe {
  Point point;
  double lambda = 0.0;
  Vec3 x;      // unit, T x = lambda x
  Vec3 phi_x;  // phi x
  Vec3 xi;
  bool degenerate = false;  // lambda < 1e-10: T vanishes and x is arbitrary in ker eta
};

/// Eigenframe of a g-symmetric operator `t` that kills xi, from pointwise data.
Eigenframe eigenframe_of(const Mat3& t, const Mat3& g, const Mat3& phi, const Vec3& xi,
                         const Point& p);

Eigenframe eigenframe(const AlmostContactModel& m, const Point& p, const DiffScheme& scheme = {});

/// Phi(X, Y) = g(X, phi Y).
double fundamental_two_form(const AlmostContactModel& m, const Point& p, const Vec3& x,
                            const Vec3& y);

/// N(X,Y) = [phi,phi](X,Y) + 2 d eta(X,Y) xi for constant-coefficient X, Y, with
/// d eta(X,Y) = (1/2)(X eta(Y) - Y eta(X) - eta([X,Y])).
Vec3 nijenhuis(const AlmostContactModel& m, const Point& p, const Vec3& x, const Vec3& y,
               const DiffScheme& scheme = {});

/// Pointwise algebraic residuals of the structure (no differentiation).
struct StructureResiduals {
  double phi_squared = 0.0;    // |phi^2 + I - eta (x) xi|
  double eta_xi = 0.0;         // |eta(xi) - 1|
  double metric_dual = 0.0;    // |g(., xi) - eta|
  double compatibility = 0.0;  // |g(phi., phi.) - g + eta (x) eta|
  double lambda_k = 0.0;       // |lambda^2 + 1 + k|
  double metric_symmetry = 0.0;

  double max() const;
};

StructureResiduals structure_residuals(const AlmostContactModel& m, const Point& p);

}  // namespace akm
