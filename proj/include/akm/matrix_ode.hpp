#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "akm/expr.hpp"
#include "akm/nullity.hpp"

namespace akm::ode {

using Mat2 = Eigen::Matrix2d;

/// M1 = diag(1,-1), M2 = [[0,1],[-1,0]], M3 = [[0,1],[1,0]].
const Mat2& basis_m1();
const Mat2& basis_m2();
const Mat2& basis_m3();

/// Checks M1^2 = M3^2 = I and M2^2 = -I exactly. Throws ConsistencyError.
void check_basis();

/// Nine coefficients of F, H, B in the (M1, M2, M3) basis plus the running
/// integral f(t) of (mu + 2) used by the primed variant.
struct StateFHB {
  using Vector = Eigen::Matrix<double, 10, 1>;
  static constexpr int kPhase = 9;  // index of f(t) in `y`

  double t = 0.0;
  Vector y = Vector::Zero();  // f1 f2 f3 h1 h2 h3 b1 b2 b3 f

  double f(int i) const { return y[i - 1]; }
  double h(int i) const { return y[i + 2]; }
  double b(int i) const { return y[i + 5]; }
  double phase() const { return y[kPhase]; }

  Mat2 F() const;
  Mat2 H() const;
  Mat2 B() const;

  /// Initial state at t = 0: F = M2, H = -M3, and B = FH = -M1 for Kmu,
  /// B = HF = M1 for KmuPrime.
  static StateFHB initial(Nullity variant);
};

/// lambda-bar: exp(-2t) for Kmu, exp(-f(t)) for KmuPrime.
double lambda_bar(Nullity variant, const StateFHB& s);

/// Time derivative of s.y given mu-bar(s.t).
StateFHB::Vector rhs(Nullity variant, const StateFHB& s, double mu_value);

/// Residuals of the algebraic relations carried by the flow, in this order:
///   F^2 + I, H^2 - l^2 I, B^2 - l^2 I, HF + FH, BF + FB, BH + HB,
///   then for Kmu: BH - l^2 F, BF - H, FH - B,
///   for KmuPrime: BH + l^2 F, BF + H, HF - B,
///   and finally det(-M2 F) - 1  (l = lambda-bar, max-norm for matrices).
struct AlgebraicResiduals {
  static constexpr std::size_t kCount = 10;
  static const std::array<std::string_view, kCount>& names(Nullity variant);

  std::array<double, kCount> values{};
  double max() const;
};

AlgebraicResiduals algebraic_residuals(Nullity variant, const StateFHB& s);

/// G = -M2 F = [[f2 - f3, f1], [f1, f2 + f3]]. Throws ConsistencyError unless
/// G is positive definite.
Mat2 metric_from_state(const StateFHB& s);

/// Verifies, by direct 2x2 multiplication, that the built-in initial states
/// of both variants satisfy every algebraic relation exactly. Throws
/// ConsistencyError otherwise.
void startup_consistency_check();

/// Fixed-step RK4 solution on [t_min, t_max] with nodes at multiples of the
/// step, integrated outward from t = 0 in both directions.
class Trajectory {
 public:
  /// Requires 0 < step <= 1e-2, t0 <= 0 <= t1, and an initial state at t = 0
  /// whose algebraic residuals are below 1e-12. Throws ConfigError,
  /// ConsistencyError, or NumericError on a non-finite state.
  static Trajectory integrate(Nullity variant, Expr mu, double t0, double t1, double step,
                              const StateFHB& ic);

  Nullity variant() const noexcept { return variant_; }
  const Expr& mu() const noexcept { return mu_; }
  double step() const noexcept { return step_; }
  double t_min() const { return nodes_.front().t; }
  double t_max() const { return nodes_.back().t; }

  /// Nodes in increasing t.
  const std::vector<StateFHB>& nodes() const noexcept { return nodes_; }
  const StateFHB& origin() const { return nodes_[zero_]; }

  /// Dense output: one partial RK4 step from the neighbouring node on the
  /// side of t = 0. Reproduces every node exactly and is continuous.
  StateFHB at(double t) const;

  double lambda_at(double t) const { return lambda_bar(variant_, at(t)); }

  /// CSV with columns t, f1..f3, h1..h3, b1..b3, lambda, k, maxAlgResidual, detG.
  void write_csv(std::ostream& os) const;

 private:
  Trajectory(Nullity variant, Expr mu, double step)
      : variant_(variant), mu_(std::move(mu)), step_(step) {}

  Nullity variant_;
  Expr mu_;
  double step_;
  std::vector<StateFHB> nodes_;
  std::size_t zero_ = 0;
};

/// One classical RK4 step of signed size `dt`.
StateFHB rk4_step(Nullity variant, const Expr& mu, const StateFHB& s, double dt);

}  // namespace akm::ode
