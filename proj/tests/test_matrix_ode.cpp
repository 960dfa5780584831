#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "akm/errors.hpp"
#include "akm/matrix_ode.hpp"

using namespace akm;
using namespace akm::ode;

TEST_CASE("basis matrices") {
  CHECK_NOTHROW(check_basis());
  CHECK(basis_m1() * basis_m1() == Mat2::Identity());
  CHECK(basis_m3() * basis_m3() == Mat2::Identity());
  CHECK(basis_m2() * basis_m2() == Mat2(-Mat2::Identity()));
}

TEST_CASE("initial states satisfy the algebraic relations exactly") {
  CHECK_NOTHROW(startup_consistency_check());
  for (Nullity v : {Nullity::Kmu, Nullity::KmuPrime}) {
    const StateFHB s = StateFHB::initial(v);
    CHECK(algebraic_residuals(v, s).max() == 0.0);
    CHECK(metric_from_state(s) == Mat2::Identity());
    CHECK(s.F() == basis_m2());
    CHECK(s.H() == Mat2(-basis_m3()));
  }
  // direct products: FH = -M1 = B, BF = -M3 = H, BH = M2 = F
  const StateFHB s = StateFHB::initial(Nullity::Kmu);
  CHECK(s.B() == Mat2(-basis_m1()));
  CHECK(s.F() * s.H() == s.B());
  CHECK(s.B() * s.F() == s.H());
  CHECK(s.B() * s.H() == s.F());
  CHECK(StateFHB::initial(Nullity::KmuPrime).B() == basis_m1());
}

TEST_CASE("right-hand side") {
  const StateFHB zero;
  CHECK(rhs(Nullity::Kmu, zero, 1.0).head<9>().isZero());
  CHECK(rhs(Nullity::KmuPrime, zero, 1.0).head<9>().isZero());

  const StateFHB s = StateFHB::initial(Nullity::Kmu);
  const auto d = rhs(Nullity::Kmu, s, 0.7);
  for (int i = 0; i < 3; ++i) CHECK(d[i] == 2.0 * s.h(i + 1));

  StateFHB p = StateFHB::initial(Nullity::KmuPrime);
  const auto dp = rhs(Nullity::KmuPrime, p, -2.0);
  for (int i = 6; i < 9; ++i) CHECK(dp[i] == 0.0);
  CHECK(dp[StateFHB::kPhase] == 0.0);
}

TEST_CASE("determinant of G stays 1 along the flow") {
  const auto traj = Trajectory::integrate(Nullity::Kmu, Expr::parse("1", "t"), -1.0, 1.0, 1e-3,
                                          StateFHB::initial(Nullity::Kmu));
  CHECK(traj.nodes().size() == 2001);
  double worst = 0.0;
  for (const auto& s : traj.nodes()) {
    worst = std::max(worst, std::abs((-basis_m2() * s.F()).determinant() - 1.0));
    const Mat2 g = metric_from_state(s);
    CHECK(g(0, 1) == g(1, 0));
  }
  // RK4 truncation on the growing backward branch dominates here; the drift
  // is tracked precisely by the acceptance suite.
  CHECK(worst < 1e-4);
  CHECK(traj.origin().t == 0.0);
  CHECK(traj.origin().y == StateFHB::initial(Nullity::Kmu).y);
}

TEST_CASE("B is frozen when mu = -2 in the primed flow") {
  const auto traj = Trajectory::integrate(Nullity::KmuPrime, Expr::parse("-2", "t"), -1.0, 1.0,
                                          1e-3, StateFHB::initial(Nullity::KmuPrime));
  const auto b0 = traj.origin().y.segment<3>(6);
  for (const auto& s : traj.nodes()) {
    CHECK((s.y.segment<3>(6) - b0).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(lambda_bar(Nullity::KmuPrime, s) == 1.0);
  }
}

TEST_CASE("backward integration retraces the forward one") {
  const Expr mu = Expr::parse("sin(t)", "t");
  const auto traj = Trajectory::integrate(Nullity::Kmu, mu, 0.0, 1.0, 1e-3,
                                          StateFHB::initial(Nullity::Kmu));
  StateFHB s = traj.nodes().back();
  const int steps = static_cast<int>(traj.nodes().size()) - 1;
  for (int n = 0; n < steps; ++n) s = rk4_step(Nullity::Kmu, mu, s, -1e-3);
  CHECK(std::abs(s.t) < 1e-12);
  CHECK((s.y - StateFHB::initial(Nullity::Kmu).y).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("dense output") {
  const auto traj = Trajectory::integrate(Nullity::Kmu, Expr::parse("1", "t"), -0.5, 0.5, 1e-2,
                                          StateFHB::initial(Nullity::Kmu));
  for (const auto& n : traj.nodes()) CHECK(traj.at(n.t).y == n.y);
  const double t = 0.123456;
  const double h = 1e-9;
  CHECK((traj.at(t + h).y - traj.at(t).y).norm() < 1e-7);
  CHECK(algebraic_residuals(Nullity::Kmu, traj.at(t)).max() < 1e-7);
  CHECK_THROWS_AS(traj.at(0.6), Error);
}

TEST_CASE("integration rejects bad input") {
  const Expr one = Expr::parse("1", "t");
  const auto ic = StateFHB::initial(Nullity::Kmu);
  CHECK_THROWS_AS(Trajectory::integrate(Nullity::Kmu, one, -1, 1, 0.1, ic), ConfigError);
  CHECK_THROWS_AS(Trajectory::integrate(Nullity::Kmu, one, 0.5, 1, 1e-3, ic), ConfigError);
  StateFHB flipped = ic;
  flipped.y[6] = 1.0;  // b1(0) = +1 breaks B = FH under column-vector composition
  CHECK_THROWS_AS(Trajectory::integrate(Nullity::Kmu, one, -1, 1, 1e-3, flipped), ConsistencyError);
  CHECK_THROWS_AS(Trajectory::integrate(Nullity::Kmu, Expr::parse("exp(exp(exp(t*3)))", "t"), 0, 1,
                                        1e-2, ic),
                  Error);
}

TEST_CASE("CSV export") {
  const auto traj = Trajectory::integrate(Nullity::Kmu, Expr::parse("0", "t"), -0.01, 0.01, 1e-3,
                                          StateFHB::initial(Nullity::Kmu));
  std::ostringstream os;
  traj.write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,f1,f2,f3,h1,h2,h3,b1,b2,b3,lambda,k,maxAlgResidual,detG");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 13);
  }
  CHECK(rows == 21);
}
