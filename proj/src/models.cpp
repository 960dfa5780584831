#include "akm/models.hpp"

#include <cmath>
#include <string>

#include "akm/errors.hpp"

namespace akm {

namespace {

using nlohmann::json;

void require_variable(const Expr& e, const char* name, const char* var) {
  if (e.variable() != var) {
    throw ConfigError(std::string(name) + " must be an expression in '" + var + "'");
  }
}

void require_box(const Box& b) {
  for (int i = 0; i < 3; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!std::isfinite(b.lo[k]) || !std::isfinite(b.hi[k]) || !(b.lo[k] <= b.hi[k])) {
      throw ConfigError("sample box must be finite with lo <= hi on every axis");
    }
  }
}

// Evaluates each expression on a fine grid of [lo, hi] and returns the smallest
// |mu + 2| seen. Domain violations become ConfigError.
double scan_exprs(const Expr& mu, const Expr& f, const Expr& r, double lo, double hi) {
  constexpr int kSamples = 257;
  double min_gap = kInf;
  for (int i = 0; i < kSamples; ++i) {
    const double z = lo + (hi - lo) * i / (kSamples - 1);
    try {
      min_gap = std::min(min_gap, std::abs(mu(z) + 2.0));
      (void)f(z);
      (void)r(z);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("expression undefined on the sample box: ") + e.what());
    }
  }
  return min_gap;
}

void validate_chart(const Expr& mu, const Expr& f, const Expr& r, const Box& box) {
  require_variable(mu, "mu", "z");
  require_variable(f, "f", "z");
  require_variable(r, "r", "z");
  require_box(box);
  if (box.hi[2] > -1.0 - 1e-3) throw ConfigError("sample box must lie in z <= -1 - 1e-3");
}

ChartDomain chart_domain(const Expr& mu, const Expr& f, const Expr& r, bool mu_plus_two_nonzero) {
  auto ok = [=](const Point& p) {
    try {
      const double m = mu(p[2]);
      (void)f(p[2]);
      (void)r(p[2]);
      return !mu_plus_two_nonzero || m + 2.0 != 0.0;
    } catch (const DomainError&) {
      return false;
    }
  };
  return ChartDomain({"x", "y", "z"}, {Interval{}, Interval{}, Interval{-kInf, -1.0}}, ok);
}

double sqrt_minus_one_minus(double z) { return std::sqrt(-1.0 - z); }

}  // namespace

AlmostContactModel build_kmu_chart_model(const KmuChartParams& p) {
  validate_chart(p.mu, p.f, p.r, p.box);
  scan_exprs(p.mu, p.f, p.r, p.box.lo[2], p.box.hi[2]);

  const Expr mu = p.mu;
  const Expr f = p.f;
  const Expr r = p.r;
  // alpha, beta, gamma are the x, y and (minus) z components of xi.
  struct Coeffs {
    double alpha, beta, gamma;
  };
  auto coeffs = [=](const Point& q) {
    const double z = q[2];
    const double lam = sqrt_minus_one_minus(z);
    const double m = mu(z);
    return Coeffs{q[0] - (lam + 0.5 * m) * q[1] + f(z), q[1] + (0.5 * m - lam) * q[0] + r(z),
                  4.0 * (1.0 + z)};
  };

  AlmostContactModel m{
      Family::KmuChart,
      Nullity::Kmu,
      chart_domain(mu, f, r, false),
      p.box,
      [=](const Point& q) {
        const Coeffs c = coeffs(q);
        Mat3 phi;
        phi << 0.0, -1.0, -c.beta / c.gamma, 1.0, 0.0, c.alpha / c.gamma, 0.0, 0.0, 0.0;
        return phi;
      },
      [=](const Point& q) {
        const Coeffs c = coeffs(q);
        return Vec3(c.alpha, c.beta, -c.gamma);
      },
      [](const Point& q) { return Vec3(0.0, 0.0, -1.0 / (4.0 * (1.0 + q[2]))); },
      [=](const Point& q) {
        const Coeffs c = coeffs(q);
        const double a = c.alpha / c.gamma;
        const double b = c.beta / c.gamma;
        Mat3 g;
        g << 1.0, 0.0, a, 0.0, 1.0, b, a, b, (1.0 + c.alpha * c.alpha + c.beta * c.beta) /
                                                 (c.gamma * c.gamma);
        return g;
      },
      [](const Point& q) { return q[2]; },
      [mu](const Point& q) { return mu(q[2]); },
      [](const Point& q) { return sqrt_minus_one_minus(q[2]); },
      ModelParams{mu, f, r},
      nullptr,
      {},
  };
  return m;
}

AlmostContactModel build_kmu_prime_chart_model(const KmupChartParams& p) {
  validate_chart(p.mu, p.f, p.r, p.box);
  const double gap = scan_exprs(p.mu, p.f, p.r, p.box.lo[2], p.box.hi[2]);
  if (gap < 1e-6) throw ConfigError("mu + 2 must stay away from 0 on the sample box");

  const Expr mu = p.mu;
  const Expr f = p.f;
  const Expr r = p.r;
  struct Coeffs {
    double a, b, c;
  };
  auto coeffs = [=](const Point& q) {
    const double z = q[2];
    const double lam = sqrt_minus_one_minus(z);
    return Coeffs{q[0] * (1.0 + lam) + f(z), q[1] * (1.0 - lam) + r(z),
                  2.0 * (1.0 + z) * (mu(z) + 2.0)};
  };

  AlmostContactModel m{
      Family::KmupChart,
      Nullity::KmuPrime,
      chart_domain(mu, f, r, true),
      p.box,
      [=](const Point& q) {
        const Coeffs c = coeffs(q);
        Mat3 phi;
        phi << 0.0, -1.0, -c.b / c.c, 1.0, 0.0, c.a / c.c, 0.0, 0.0, 0.0;
        return phi;
      },
      [=](const Point& q) {
        const Coeffs c = coeffs(q);
        return Vec3(c.a, c.b, -c.c);
      },
      [=](const Point& q) { return Vec3(0.0, 0.0, -1.0 / coeffs(q).c); },
      [=](const Point& q) {
        const Coeffs c = coeffs(q);
        const double ac = c.a / c.c;
        const double bc = c.b / c.c;
        Mat3 g;
        g << 1.0, 0.0, ac, 0.0, 1.0, bc, ac, bc, (1.0 + c.a * c.a + c.b * c.b) / (c.c * c.c);
        return g;
      },
      [](const Point& q) { return q[2]; },
      [mu](const Point& q) { return mu(q[2]); },
      [](const Point& q) { return sqrt_minus_one_minus(q[2]); },
      ModelParams{mu, f, r},
      nullptr,
      {},
  };
  return m;
}

AlmostContactModel build_darboux_model(const DarbouxParams& p) {
  ode::startup_consistency_check();
  require_variable(p.mu, "mu", "t");
  if (!std::isfinite(p.t0) || !std::isfinite(p.t1) || !(p.t0 < 0.0 && 0.0 < p.t1)) {
    throw ConfigError("t-interval must be finite and contain 0 in its interior");
  }
  if (!(p.step > 0.0)) throw ConfigError("step must be positive");
  for (const auto& range : {p.x_range, p.y_range}) {
    if (!std::isfinite(range[0]) || !std::isfinite(range[1]) || !(range[0] <= range[1])) {
      throw ConfigError("spatial ranges must be finite with lo <= hi");
    }
  }

  std::vector<std::string> warnings;
  double min_gap = kInf;
  constexpr int kSamples = 1025;
  for (int i = 0; i < kSamples; ++i) {
    const double t = p.t0 + (p.t1 - p.t0) * i / (kSamples - 1);
    try {
      min_gap = std::min(min_gap, std::abs(p.mu(t) + 2.0));
    } catch (const DomainError& e) {
      throw ConfigError(std::string("mu undefined on the t-interval: ") + e.what());
    }
  }
  if (p.variant == Nullity::KmuPrime && min_gap < 1e-6) {
    warnings.emplace_back("mu + 2 vanishes on the interval: lambda and k are constant there");
  }

  auto traj = std::make_shared<const ode::Trajectory>(ode::Trajectory::integrate(
      p.variant, p.mu, p.t0, p.t1, p.step, ode::StateFHB::initial(p.variant)));
  for (const auto& node : traj->nodes()) (void)ode::metric_from_state(node);

  const Nullity variant = p.variant;
  const double span = p.t1 - p.t0;
  Box box{{p.x_range[0], p.y_range[0], p.t0 + 0.25 * span},
          {p.x_range[1], p.y_range[1], p.t1 - 0.25 * span}};

  auto lambda_of = [traj, variant](double t) {
    return variant == Nullity::Kmu ? std::exp(-2.0 * t) : traj->lambda_at(t);
  };
  const Expr mu = p.mu;

  AlmostContactModel m{
      variant == Nullity::Kmu ? Family::KmuDarboux : Family::KmupDarboux,
      variant,
      ChartDomain({"x", "y", "t"}, {Interval{}, Interval{}, Interval{p.t0, p.t1}}),
      box,
      [traj](const Point& q) {
        const ode::Mat2 f = traj->at(q[2]).F();
        Mat3 phi = Mat3::Zero();
        phi.topLeftCorner<2, 2>() = f;
        return phi;
      },
      [](const Point&) { return Vec3(0.0, 0.0, 1.0); },
      [](const Point&) { return Vec3(0.0, 0.0, 1.0); },
      [traj](const Point& q) {
        const double t = q[2];
        const ode::StateFHB s = traj->at(t);
        const ode::Mat2 leaf = -ode::basis_m2() * s.F();
        Mat3 g = Mat3::Zero();
        g.topLeftCorner<2, 2>() = std::exp(2.0 * t) * leaf;
        g(2, 2) = 1.0;
        return g;
      },
      [lambda_of](const Point& q) {
        const double lam = lambda_of(q[2]);
        return -1.0 - lam * lam;
      },
      [mu](const Point& q) { return mu(q[2]); },
      [lambda_of](const Point& q) { return lambda_of(q[2]); },
      ModelParams{mu, std::nullopt, std::nullopt, 1.0, p.t0, p.t1, p.step},
      traj,
      std::move(warnings),
  };
  return m;
}

AlmostContactModel build_kenmotsu_baseline(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("baseline constant c must be positive");
  Mat3 phi = Mat3::Zero();
  phi(1, 0) = 1.0;
  phi(0, 1) = -1.0;
  ModelParams params;
  params.c = c;
  AlmostContactModel m{
      Family::KenmotsuBaseline,
      Nullity::Kmu,
      ChartDomain({"x", "y", "t"}, {Interval{}, Interval{}, Interval{}}),
      Box{{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}},
      [phi](const Point&) { return phi; },
      [](const Point&) { return Vec3(0.0, 0.0, 1.0); },
      [](const Point&) { return Vec3(0.0, 0.0, 1.0); },
      [c](const Point& q) {
        const double w = c * c * std::exp(2.0 * q[2]);
        return Mat3(Vec3(w, w, 1.0).asDiagonal());
      },
      [](const Point&) { return -1.0; },
      [](const Point&) { return 0.0; },
      [](const Point&) { return 0.0; },
      params,
      nullptr,
      {},
  };
  return m;
}

namespace {

json box_to_json(const Box& b) {
  return json::array({json::array({b.lo[0], b.hi[0]}), json::array({b.lo[1], b.hi[1]}),
                      json::array({b.lo[2], b.hi[2]})});
}

Box box_from_json(const json& j) {
  Box b;
  for (std::size_t i = 0; i < 3; ++i) {
    b.lo[i] = j.at(i).at(0).get<double>();
    b.hi[i] = j.at(i).at(1).get<double>();
  }
  return b;
}

}  // namespace

json model_to_json(const AlmostContactModel& m) {
  json j;
  j["family"] = std::string(to_string(m.family));
  j["variant"] = std::string(to_string(m.variant));
  json params = json::object();
  if (m.params.mu) params["mu"] = m.params.mu->source();
  if (m.params.f) params["f"] = m.params.f->source();
  if (m.params.r) params["r"] = m.params.r->source();
  if (m.family == Family::KenmotsuBaseline) params["c"] = m.params.c;
  if (is_darboux(m.family)) {
    params["tRange"] = json::array({m.params.t0, m.params.t1});
    params["step"] = m.params.step;
  }
  j["params"] = params;
  j["box"] = box_to_json(m.box);
  if (m.trajectory) {
    json nodes = json::array();
    for (const auto& s : m.trajectory->nodes()) {
      json row = json::array({s.t});
      for (int i = 0; i < ode::StateFHB::Vector::RowsAtCompileTime; ++i) row.push_back(s.y[i]);
      nodes.push_back(std::move(row));
    }
    j["trajectory"] = {{"step", m.trajectory->step()},
                       {"columns", {"t", "f1", "f2", "f3", "h1", "h2", "h3", "b1", "b2", "b3", "phase"}},
                       {"nodes", std::move(nodes)}};
  }
  if (!m.warnings.empty()) j["warnings"] = m.warnings;
  return j;
}

AlmostContactModel model_from_json(const json& j) {
  try {
    const auto family = family_from_string(j.at("family").get<std::string>());
    if (!family) throw ConfigError("unknown model family");
    const json& params = j.at("params");
    const Box box = box_from_json(j.at("box"));
    auto expr = [&](const char* key, const char* var) {
      return params.contains(key) ? Expr::parse(params.at(key).get<std::string>(), var)
                                  : Expr::constant(0.0, var);
    };
    switch (*family) {
      case Family::KmuChart:
        return build_kmu_chart_model({expr("mu", "z"), expr("f", "z"), expr("r", "z"), box});
      case Family::KmupChart:
        return build_kmu_prime_chart_model({expr("mu", "z"), expr("f", "z"), expr("r", "z"), box});
      case Family::KenmotsuBaseline: {
        AlmostContactModel m = build_kenmotsu_baseline(params.value("c", 1.0));
        m.box = box;
        return m;
      }
      case Family::KmuDarboux:
      case Family::KmupDarboux: {
        DarbouxParams dp;
        dp.variant = *family == Family::KmuDarboux ? Nullity::Kmu : Nullity::KmuPrime;
        dp.mu = expr("mu", "t");
        dp.t0 = params.at("tRange").at(0).get<double>();
        dp.t1 = params.at("tRange").at(1).get<double>();
        dp.step = params.at("step").get<double>();
        dp.x_range = {box.lo[0], box.hi[0]};
        dp.y_range = {box.lo[1], box.hi[1]};
        AlmostContactModel m = build_darboux_model(dp);
        m.box = box;
        if (j.contains("trajectory")) {
          const json& nodes = j.at("trajectory").at("nodes");
          const auto& ours = m.trajectory->nodes();
          if (nodes.size() != ours.size()) {
            throw ConfigError("stored trajectory does not match the re-integrated one");
          }
          for (std::size_t n = 0; n < ours.size(); ++n) {
            const json& row = nodes.at(n);
            double diff = std::abs(row.at(0).get<double>() - ours[n].t);
            for (std::size_t i = 0; i < 10; ++i) {
              diff = std::max(diff, std::abs(row.at(i + 1).get<double>() -
                                             ours[n].y[static_cast<Eigen::Index>(i)]));
            }
            if (diff > 1e-12) {
              throw ConfigError("stored trajectory does not match the re-integrated one");
            }
          }
        }
        return m;
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model document: ") + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(std::string("malformed expression in model document: ") + e.what());
  }
  throw ConfigError("unknown model family");
}

}  // namespace akm
