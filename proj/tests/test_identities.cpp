#include <doctest.h>

#include <cmath>

#include "akm/errors.hpp"
#include "akm/identities.hpp"
#include "akm/models.hpp"

using namespace akm;

namespace {

std::vector<AlmostContactModel> families() {
  std::vector<AlmostContactModel> out;
  out.push_back(build_kenmotsu_baseline(1.0));
  out.push_back(build_kmu_chart_model({Expr::parse("1", "z")}));
  out.push_back(build_kmu_prime_chart_model({Expr::parse("-1", "z")}));
  DarbouxParams dp;
  dp.mu = Expr::parse("sin(t)", "t");
  out.push_back(build_darboux_model(dp));
  dp.variant = Nullity::KmuPrime;
  dp.mu = Expr::parse("0", "t");
  out.push_back(build_darboux_model(dp));
  return out;
}

}  // namespace

TEST_CASE("identity names and profiles") {
  CHECK(all_identities().size() == 28);
  for (IdentityId id : all_identities()) {
    CHECK(identity_from_string(to_string(id)) == id);
    CHECK_FALSE(formula(id).empty());
  }
  CHECK(tolerance(Profile::Strict) == 1e-10);
  CHECK(tolerance(Profile::Fd1) == 1e-6);
  CHECK(tolerance(Profile::Fd2) == 5e-5);
  CHECK(profile_from_string("fd2") == Profile::Fd2);
  CHECK_FALSE(profile_from_string("loose").has_value());
  CHECK(verdict_from_string("not-applicable") == Verdict::NotApplicable);
}

TEST_CASE("every applicable identity passes on every family") {
  for (const auto& m : families()) {
    const SamplePlan plan = SamplePlan::for_model(m);
    for (IdentityId id : all_identities()) {
      CAPTURE(to_string(m.family));
      CAPTURE(to_string(id));
      const ResidualReport r = check_identity(m, id, plan);
      if (!is_applicable(id, m)) {
        CHECK(r.verdict == Verdict::NotApplicable);
        continue;
      }
      CHECK(r.verdict == Verdict::Pass);
      CHECK(r.residual <= r.tolerance);
      CHECK(r.tolerance == tolerance(r.profile));
      CHECK(r.samples == 125);
    }
  }
}

TEST_CASE("headline residuals") {
  const auto base = build_kenmotsu_baseline(1.0);
  CHECK(check_identity(base, IdentityId::NablaXi, SamplePlan::for_model(base)).residual <= 1e-6);
  const auto kmu = build_kmu_chart_model({});
  CHECK(check_identity(kmu, IdentityId::H2, SamplePlan::for_model(kmu)).residual <= 1e-8);
  const auto kmup = build_kmu_prime_chart_model({});
  CHECK(check_identity(kmup, IdentityId::CodazziHp, SamplePlan::for_model(kmup)).residual <= 1e-6);
}

TEST_CASE("variant mismatch is not applicable") {
  const auto kmu = build_kmu_chart_model({});
  const auto r = check_identity(kmu, IdentityId::ConnKmup, SamplePlan::for_model(kmu));
  CHECK(r.verdict == Verdict::NotApplicable);
  const auto base = build_kenmotsu_baseline(1.0);
  CHECK(check_identity(base, IdentityId::Bsq, SamplePlan::for_model(base)).verdict ==
        Verdict::NotApplicable);
}

TEST_CASE("nullity residuals with nominal fields") {
  const auto base = build_kenmotsu_baseline(1.0);
  const ScalarField minus_one = [](const Point&) { return -1.0; };
  const ScalarField zero = [](const Point&) { return 0.0; };
  CHECK(nullity_residual(base, Nullity::Kmu, SamplePlan::for_model(base), {}, minus_one, zero)
            .residual <= 5e-5);
  const auto kmu = build_kmu_chart_model({});
  CHECK(nullity_residual(kmu, Nullity::Kmu, SamplePlan::for_model(kmu)).residual <= 5e-5);
  const auto kmup = build_kmu_prime_chart_model({});
  CHECK(nullity_residual(kmup, Nullity::KmuPrime, SamplePlan::for_model(kmup)).residual <= 5e-5);

  // wrong k must be caught
  const ScalarField off = [](const Point& p) { return p[2] + 0.01; };
  const auto bad = nullity_residual(kmu, Nullity::Kmu, SamplePlan::for_model(kmu), {}, off);
  CHECK(bad.verdict == Verdict::Fail);
  CHECK(bad.refined_residual.has_value());
  CHECK(bad.note.find("structural") != std::string::npos);
}

TEST_CASE("k and mu recovered from curvature") {
  DarbouxParams dp;
  dp.mu = Expr::parse("1", "t");
  const auto d = build_darboux_model(dp);
  const auto est = infer_k_mu(d, Point(0.5, 0.5, 0.0));
  CHECK(std::abs(est.k + 2.0) < 5e-5);
  REQUIRE(est.mu.has_value());
  CHECK(std::abs(*est.mu - 1.0) < 5e-5);

  const auto base = build_kenmotsu_baseline(1.0);
  const auto b = infer_k_mu(base, Point(0, 0, 0));
  CHECK(std::abs(b.k + 1.0) < 5e-5);
  CHECK_FALSE(b.mu.has_value());

  const auto kmup = build_kmu_prime_chart_model({});
  CHECK(std::abs(infer_k_mu(kmup, Point(0.5, 0.5, -2)).k + 2.0) < 5e-5);
}

TEST_CASE("k and mu agree with the nominal fields on the plan") {
  for (const auto& m : families()) {
    CAPTURE(to_string(m.family));
    const SamplePlan plan = SamplePlan::for_model(m);
    for (const auto& s : plan.samples(m.domain)) {
      const auto est = infer_k_mu(m, s.point);
      CHECK(std::abs(est.k - m.k(s.point)) < 5e-5);
      if (est.lambda >= 1e-3) {
        REQUIRE(est.mu.has_value());
        CHECK(std::abs(*est.mu - m.mu(s.point)) < 5e-5);
      }
    }
  }
}

TEST_CASE("sample plans are deterministic and unit-normalised") {
  const auto m = build_kmu_chart_model({});
  SamplePlan plan = SamplePlan::for_model(m);
  const auto a = plan.samples(m.domain);
  const auto b = plan.samples(m.domain);
  REQUIRE(a.size() == 125);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].point == b[i].point);
    REQUIRE(a[i].vectors.size() == 8);
    for (std::size_t k = 0; k < a[i].vectors.size(); ++k) {
      CHECK(a[i].vectors[k] == b[i].vectors[k]);
      CHECK(std::abs(a[i].vectors[k].norm() - 1.0) < 1e-14);
    }
    CHECK(m.domain.contains(a[i].point));
  }
  plan.seed = 43;
  CHECK(plan.samples(m.domain)[0].vectors[0] != a[0].vectors[0]);

  plan.box.hi[2] = 0.0;
  CHECK_THROWS_AS(plan.samples(m.domain), ConfigError);
  plan = SamplePlan::for_model(m);
  plan.grid = {0, 5, 5};
  CHECK_THROWS_AS(plan.samples(m.domain), ConfigError);
}

TEST_CASE("tolerance overrides and refinement") {
  const auto m = build_kmu_chart_model({});
  CheckOptions opts;
  opts.tolerance = 1e-15;
  const auto r = check_identity(m, IdentityId::Curv2, SamplePlan::for_model(m), opts);
  CHECK(r.verdict == Verdict::Fail);
  CHECK(r.tolerance == 1e-15);
  CHECK(r.refined_residual.has_value());
  CHECK_FALSE(r.note.empty());

  opts = {};
  opts.profile = Profile::Strict;
  const auto s = check_identity(m, IdentityId::H2, SamplePlan::for_model(m), opts);
  CHECK(s.profile == Profile::Strict);
  CHECK(s.tolerance == 1e-10);
}
