// Acceptance suite: one PASS/FAIL line per criterion, details indented below.

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "akm/errors.hpp"
#include "akm/geometry.hpp"
#include "akm/identities.hpp"
#include "akm/models.hpp"
#include "akm/report.hpp"

using namespace akm;

namespace {

constexpr double kFd1 = 1e-6;
constexpr double kFd2 = 5e-5;

class Criterion {
 public:
  explicit Criterion(std::string title) : title_(std::move(title)) {}

  bool check(const std::string& what, double value, double bound) {
    const bool ok = value <= bound;
    char line[256];
    std::snprintf(line, sizeof line, "    %-4s %-58s %.3e <= %.1e", ok ? "ok" : "FAIL", what.c_str(),
                  value, bound);
    details_ << line << "\n";
    pass_ = pass_ && ok;
    return ok;
  }

  bool require(const std::string& what, bool ok) {
    details_ << "    " << (ok ? "ok  " : "FAIL") << " " << what << "\n";
    pass_ = pass_ && ok;
    return ok;
  }

  void report(int number, std::ostream& os) const {
    os << (pass_ ? "PASS" : "FAIL") << " criterion " << number << ": " << title_ << "\n"
       << details_.str();
  }

  bool passed() const { return pass_; }

 private:
  std::string title_;
  std::ostringstream details_;
  bool pass_ = true;
};

void check_identities(Criterion& c, const AlmostContactModel& m, const std::string& tag,
                      std::initializer_list<IdentityId> ids) {
  const SamplePlan plan = SamplePlan::for_model(m);
  for (IdentityId id : ids) {
    const ResidualReport r = check_identity(m, id, plan);
    if (r.verdict == Verdict::NotApplicable) {
      c.require(tag + " " + std::string(to_string(id)) + " applicable", false);
      continue;
    }
    c.check(tag + " " + std::string(to_string(id)) + " [" + std::string(to_string(r.profile)) + "]",
            r.residual, r.tolerance);
  }
}

std::vector<Vec3> plane_vectors(const PlanSample& s) {
  std::vector<Vec3> v{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  v.insert(v.end(), s.vectors.begin(), s.vectors.end());
  return v;
}

// 1
bool baseline_suite(std::ostream& os) {
  Criterion c("baseline suite");
  const auto m = build_kenmotsu_baseline(1.0);
  check_identities(c, m, "baseline",
                   {IdentityId::NablaXi, IdentityId::AkDeta, IdentityId::AkDphi, IdentityId::Kleaves,
                    IdentityId::Curv1, IdentityId::LId, IdentityId::H2, IdentityId::Qxi});

  const SamplePlan plan = SamplePlan::for_model(m);
  double worst = 0.0;
  for (const auto& s : plan.samples(m.domain)) {
    const auto vs = plane_vectors(s);
    for (std::size_t i = 0; i < vs.size(); ++i) {
      for (std::size_t j = i + 1; j < vs.size(); ++j) {
        const double k = sectional_curvature(m.g, s.point, m.domain, vs[i], vs[j]);
        worst = std::max(worst, std::abs(k + 1.0));
      }
    }
  }
  c.check("every sectional curvature equals -1", worst, 5e-6);

  const ScalarField minus_one = [](const Point&) { return -1.0; };
  const ScalarField zero = [](const Point&) { return 0.0; };
  c.check("nullity residual, h, k = -1, mu = 0",
          nullity_residual(m, Nullity::Kmu, plan, {}, minus_one, zero).residual, kFd2);
  c.report(1, os);
  return c.passed();
}

// 2
bool kmu_chart_suite(std::ostream& os) {
  Criterion c("chart model with h");
  for (const char* mu_text : {"0", "1", "z+1"}) {
    const Expr mu = Expr::parse(mu_text, "z");
    const auto m = build_kmu_chart_model({mu});
    const std::string tag = std::string("mu=") + mu_text;
    check_identities(c, m, tag,
                     {IdentityId::NablaXi, IdentityId::H2, IdentityId::Qxi, IdentityId::Nh,
                      IdentityId::Lie1, IdentityId::TrH, IdentityId::TrPhi, IdentityId::TrHp,
                      IdentityId::Grad, IdentityId::RicciForm, IdentityId::ConnKmu,
                      IdentityId::FlatLeaf, IdentityId::DkEta, IdentityId::Weyl3});
    const SamplePlan plan = SamplePlan::for_model(m);
    const auto nh = check_identity(m, IdentityId::Nh, plan);
    c.check(tag + " dlambda(xi) = -2 lambda", nh.parts.at("dlambda(xi)"), kFd1);

    const ScalarField k_is_z = [](const Point& p) { return p[2]; };
    const ScalarField mu_field = [mu](const Point& p) { return mu(p[2]); };
    c.check(tag + " nullity residual, h, k = z",
            nullity_residual(m, Nullity::Kmu, plan, {}, k_is_z, mu_field).residual, kFd2);

    double dk = 0.0, dmu = 0.0;
    bool mu_found = true;
    for (const auto& s : plan.samples(m.domain)) {
      const auto est = infer_k_mu(m, s.point);
      dk = std::max(dk, std::abs(est.k - s.point[2]));
      if (!est.mu) {
        mu_found = false;
        continue;
      }
      dmu = std::max(dmu, std::abs(*est.mu - mu(s.point[2])));
    }
    c.check(tag + " inferred k = z", dk, kFd2);
    c.require(tag + " inferred mu defined at every grid point", mu_found);
    c.check(tag + " inferred mu = mu(z)", dmu, kFd2);
  }
  c.report(2, os);
  return c.passed();
}

// 3
bool kmup_chart_suite(std::ostream& os) {
  Criterion c("chart model with h'");
  for (const char* mu_text : {"0", "-1"}) {
    const Expr mu = Expr::parse(mu_text, "z");
    const auto m = build_kmu_prime_chart_model({mu});
    const std::string tag = std::string("mu=") + mu_text;
    check_identities(c, m, tag,
                     {IdentityId::CodazziHp, IdentityId::Nhp, IdentityId::Lie2, IdentityId::ConnKmup,
                      IdentityId::FlatLeaf, IdentityId::NablaXi, IdentityId::H2, IdentityId::Qxi,
                      IdentityId::TrH, IdentityId::TrPhi, IdentityId::TrHp, IdentityId::Grad,
                      IdentityId::RicciForm, IdentityId::DkEta, IdentityId::Weyl3});
    const SamplePlan plan = SamplePlan::for_model(m);
    const ScalarField k_is_z = [](const Point& p) { return p[2]; };
    const ScalarField mu_field = [mu](const Point& p) { return mu(p[2]); };
    c.check(tag + " nullity residual, h', k = z",
            nullity_residual(m, Nullity::KmuPrime, plan, {}, k_is_z, mu_field).residual, kFd2);

    const VectorField e1 = [](const Point&) { return Vec3(1, 0, 0); };
    const VectorField e2 = [](const Point&) { return Vec3(0, 1, 0); };
    double b13 = 0.0, b23 = 0.0;
    for (const auto& s : plan.samples(m.domain)) {
      const double lam = std::sqrt(-1.0 - s.point[2]);
      b13 = std::max(b13, (lie_bracket(e1, m.xi, s.point, m.domain) - (1 + lam) * Vec3(1, 0, 0)).norm());
      b23 = std::max(b23, (lie_bracket(e2, m.xi, s.point, m.domain) - (1 - lam) * Vec3(0, 1, 0)).norm());
    }
    c.check(tag + " [e1,e3] = (1+lambda) e1", b13, kFd1);
    c.check(tag + " [e2,e3] = (1-lambda) e2", b23, kFd1);
  }
  c.report(3, os);
  return c.passed();
}

struct FlowInvariants {
  double algebraic = 0.0;
  double det = 0.0;
  double min_eig = 1e300;
  double phi12 = 0.0;
  double bsq = 0.0;
};

// lambda_bar^2 computed independently of the flow from its closed form.
FlowInvariants flow_invariants(const AlmostContactModel& m,
                               const std::function<double(double)>& lambda_sq) {
  FlowInvariants out;
  const auto& traj = *m.trajectory;
  for (const auto& s : traj.nodes()) {
    out.algebraic = std::max(out.algebraic, ode::algebraic_residuals(traj.variant(), s).max());
    const ode::Mat2 g = -ode::basis_m2() * s.F();
    out.det = std::max(out.det, std::abs(g.determinant() - 1.0));
    out.min_eig = std::min(out.min_eig, Eigen::SelfAdjointEigenSolver<ode::Mat2>(g).eigenvalues()[0]);
    const Point p(0.5, 0.5, s.t);
    out.phi12 = std::max(out.phi12, std::abs(m.fundamental_form(p)(0, 1) - std::exp(2 * s.t)));
    const ode::Mat2 b2 = s.B() * s.B() - lambda_sq(s.t) * ode::Mat2::Identity();
    out.bsq = std::max(out.bsq, b2.cwiseAbs().maxCoeff());
  }
  return out;
}

void check_flow(Criterion& c, const std::string& tag, const FlowInvariants& f) {
  c.check(tag + " ten algebraic residuals along the trajectory", f.algebraic, 1e-9);
  c.check(tag + " det G - 1 along the trajectory", f.det, 1e-9);
  c.require(tag + " G positive definite at every node (min eig " + std::to_string(f.min_eig) + ")",
            f.min_eig > 0.0);
  c.check(tag + " Phi12 - e^{2t} along the trajectory", f.phi12, 1e-9);
  c.check(tag + " B^2 - lambda^2 I along the trajectory", f.bsq, 1e-8);
}

DarbouxParams darboux(Nullity variant, const char* mu) {
  DarbouxParams dp;
  dp.variant = variant;
  dp.mu = Expr::parse(mu, "t");
  dp.t0 = -1.0;
  dp.t1 = 1.0;
  dp.step = 1e-3;
  return dp;
}

// 4
bool kmu_darboux_suite(std::ostream& os) {
  Criterion c("Darboux model with h");
  for (const char* mu_text : {"0", "1", "sin(t)"}) {
    const auto m = build_darboux_model(darboux(Nullity::Kmu, mu_text));
    const Expr mu = m.params.mu.value();
    const std::string tag = std::string("mu=") + mu_text;
    check_flow(c, tag, flow_invariants(m, [](double t) { return std::exp(-4 * t); }));

    double dh = 0.0;
    for (const auto& s : SamplePlan::for_model(m).samples(m.domain)) {
      const Mat3 h = compute_h(m, s.point);
      const ode::Mat2 ref = m.trajectory->at(s.point[2]).H();
      dh = std::max(dh, (h.topLeftCorner<2, 2>() - ref).cwiseAbs().maxCoeff());
    }
    c.check(tag + " compute_h = H(t) on the default plan", dh, kFd1);

    const ScalarField k = [](const Point& p) { return -1.0 - std::exp(-4 * p[2]); };
    const ScalarField mu_field = [mu](const Point& p) { return mu(p[2]); };
    c.check(tag + " nullity residual, h, k = -1 - e^{-4t}",
            nullity_residual(m, Nullity::Kmu, SamplePlan::for_model(m), {}, k, mu_field).residual,
            kFd2);

    double dk = 0.0, dmu = 0.0;
    for (double t : {-0.5, 0.0, 0.5}) {
      const auto est = infer_k_mu(m, Point(0.5, 0.5, t));
      dk = std::max(dk, std::abs(est.k - k(Point(0, 0, t))));
      dmu = std::max(dmu, est.mu ? std::abs(*est.mu - mu(t)) : 1.0);
    }
    c.check(tag + " inferred k at t = -0.5, 0, 0.5", dk, kFd2);
    c.check(tag + " inferred mu at t = -0.5, 0, 0.5", dmu, kFd2);
  }
  const auto csv = std::filesystem::temp_directory_path() / "akm_acceptance_traj.csv";
  std::ostringstream sink;
  const int status = run_command({"trajectory", "--family", "kmu-darboux", "--mu", "1", "--t-range",
                                  "-1", "1", "--step", "1e-3", "--csv", csv.string()},
                                 sink, sink);
  std::ifstream is(csv);
  std::string line;
  std::getline(is, line);
  int rows = 0;
  double det = 0.0;
  while (std::getline(is, line)) {
    ++rows;
    det = std::max(det, std::abs(std::stod(line.substr(line.rfind(',') + 1)) - 1.0));
  }
  c.require("trajectory command exits 0 and writes 2001 rows", status == 0 && rows == 2001);
  c.check("trajectory CSV detG column within 1e-9 of 1", det, 1e-9);
  c.report(4, os);
  return c.passed();
}

// 5
bool kmup_darboux_suite(std::ostream& os) {
  Criterion c("Darboux model with h'");
  for (double mu_value : {0.0, 1.0}) {
    const std::string mu_text = mu_value == 0.0 ? "0" : "1";
    const auto m = build_darboux_model(darboux(Nullity::KmuPrime, mu_text.c_str()));
    const std::string tag = "mu=" + mu_text;
    // f(t) = (mu + 2) t for constant mu
    const double rate = mu_value + 2.0;
    check_flow(c, tag, flow_invariants(m, [rate](double t) { return std::exp(-2 * rate * t); }));
    const ScalarField k = [rate](const Point& p) { return -1.0 - std::exp(-2 * rate * p[2]); };
    const ScalarField mu_field = [mu_value](const Point&) { return mu_value; };
    c.check(tag + " nullity residual, h', k = -1 - e^{-2f}",
            nullity_residual(m, Nullity::KmuPrime, SamplePlan::for_model(m), {}, k, mu_field).residual,
            kFd2);
  }

  const auto frozen = build_darboux_model(darboux(Nullity::KmuPrime, "-2"));
  const auto& nodes = frozen.trajectory->nodes();
  const auto b0 = frozen.trajectory->origin().y.segment<3>(6);
  const double k0 = frozen.k(Point(0.5, 0.5, 0.0));
  double db = 0.0, dk = 0.0;
  for (const auto& s : nodes) {
    db = std::max(db, (s.y.segment<3>(6) - b0).cwiseAbs().maxCoeff());
    if (s.t > nodes.front().t && s.t < nodes.back().t) {
      dk = std::max(dk, std::abs(frozen.k(Point(0.5, 0.5, s.t)) - k0));
    }
  }
  c.check("mu=-2 every b_i constant", db, 1e-12);
  c.check("mu=-2 nominal k constant", dk, 1e-12);
  c.report(5, os);
  return c.passed();
}

// 6
bool convergence(std::ostream& os) {
  Criterion c("step-halving convergence");
  const auto m = build_kmu_chart_model({});
  const SamplePlan plan = SamplePlan::for_model(m);
  for (IdentityId id : {IdentityId::Curv1, IdentityId::LId, IdentityId::Qxi, IdentityId::NullKmu,
                        IdentityId::FlatLeaf}) {
    CheckOptions coarse;
    coarse.scheme = DiffScheme::with_step(4e-2);
    coarse.refine_on_failure = false;
    CheckOptions fine = coarse;
    fine.scheme = coarse.scheme.halved();
    const double r0 = check_identity(m, id, plan, coarse).residual;
    const double r1 = check_identity(m, id, plan, fine).residual;
    char what[128];
    std::snprintf(what, sizeof what, "%s FD residual %.2e -> %.2e, 8 / reduction",
                  std::string(to_string(id)).c_str(), r0, r1);
    if (r1 <= 1e-12) {
      c.require(std::string(what) + " (floor reached)", true);
    } else {
      c.check(what, 8.0 * r1 / r0, 1.0);
    }
  }

  for (const char* mu_text : {"0", "1", "sin(t)"}) {
    const Expr mu = Expr::parse(mu_text, "t");
    std::vector<double> sup;
    for (double step : {1e-2, 5e-3, 2.5e-3}) {
      const auto traj = ode::Trajectory::integrate(Nullity::Kmu, mu, -1.0, 1.0, step,
                                                   ode::StateFHB::initial(Nullity::Kmu));
      double worst = 0.0;
      for (const auto& s : traj.nodes()) {
        worst = std::max(worst, ode::algebraic_residuals(Nullity::Kmu, s).max());
      }
      sup.push_back(worst);
    }
    for (std::size_t i = 1; i < sup.size(); ++i) {
      char what[128];
      std::snprintf(what, sizeof what, "mu=%s RK4 residual %.2e -> %.2e, 8 / reduction", mu_text,
                    sup[i - 1], sup[i]);
      if (sup[i] <= 1e-12) {
        c.require(std::string(what) + " (floor reached)", true);
      } else {
        c.check(what, 8.0 * sup[i] / sup[i - 1], 1.0);
      }
    }
  }
  c.report(6, os);
  return c.passed();
}

// 7
bool startup(std::ostream& os) {
  Criterion c("startup consistency check");
  bool ok = true;
  try {
    ode::startup_consistency_check();
  } catch (const ConsistencyError&) {
    ok = false;
  }
  c.require("startup_consistency_check accepts the built-in convention", ok);
  for (Nullity v : {Nullity::Kmu, Nullity::KmuPrime}) {
    const auto s = ode::StateFHB::initial(v);
    c.check(std::string(to_string(v)) + " relation residuals at t = 0",
            ode::algebraic_residuals(v, s).max(), 0.0);
  }
  auto flipped = ode::StateFHB::initial(Nullity::Kmu);
  flipped.y[6] = -flipped.y[6];
  bool aborted = false;
  try {
    ode::Trajectory::integrate(Nullity::Kmu, Expr::parse("1", "t"), -1, 1, 1e-3, flipped);
  } catch (const ConsistencyError&) {
    aborted = true;
  }
  c.require("an inconsistent initial state aborts integration", aborted);
  c.report(7, os);
  return c.passed();
}

// 8
bool determinism(std::ostream& os) {
  Criterion c("determinism");
  const auto dir = std::filesystem::temp_directory_path() / "akm_acceptance";
  std::filesystem::create_directories(dir);
  const std::vector<std::vector<std::string>> commands{
      {"verify", "--family", "kenmotsu", "--seed", "11"},
      {"verify", "--family", "kmu-chart", "--mu", "z+1", "--seed", "12"},
      {"verify", "--family", "kmup-chart", "--mu", "-1", "--seed", "13", "--rand-pairs", "6"},
      {"verify", "--family", "kmu-darboux", "--mu", "sin(t)", "--seed", "14"},
      {"verify", "--family", "kmup-darboux", "--mu", "1", "--seed", "15", "--grid", "4"},
  };
  auto strip = [](const std::filesystem::path& p) {
    std::ifstream is(p);
    std::string line, out;
    while (std::getline(is, line)) {
      if (line.find("\"timestamp\"") == std::string::npos) out += line + "\n";
    }
    return out;
  };
  int n = 0;
  for (const auto& cmd : commands) {
    std::string texts[2];
    for (int rep = 0; rep < 2; ++rep) {
      const auto path = dir / ("run" + std::to_string(n) + "_" + std::to_string(rep) + ".json");
      auto args = cmd;
      args.insert(args.end(), {"--report", path.string()});
      std::ostringstream sink;
      run_command(args, sink, sink);
      texts[rep] = strip(path);
    }
    c.require(cmd[2] + " report identical across runs (" + std::to_string(texts[0].size()) + " bytes)",
              !texts[0].empty() && texts[0] == texts[1]);
    ++n;
  }
  c.report(8, os);
  return c.passed();
}

}  // namespace

int main() {
  const std::vector<std::function<bool(std::ostream&)>> criteria{
      baseline_suite, kmu_chart_suite, kmup_chart_suite, kmu_darboux_suite,
      kmup_darboux_suite, convergence, startup, determinism};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      if (!criteria[i](std::cout)) ++failed;
    } catch (const std::exception& e) {
      std::cout << "FAIL criterion " << i + 1 << ": aborted: " << e.what() << "\n";
      ++failed;
    }
    std::cout.flush();
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria failed")
            << "\n";
  return failed == 0 ? 0 : 1;
}
