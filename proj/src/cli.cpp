#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "akm/errors.hpp"
#include "akm/models.hpp"
#include "akm/report.hpp"

namespace akm {

using nlohmann::json;

namespace {

struct ModelOptions {
  std::string family;
  std::string model_path;
  std::optional<std::string> mu;
  std::optional<std::string> f;
  std::optional<std::string> r;
  std::vector<double> t_range{-1.0, 1.0};
  double step = 1e-3;
  double c = 1.0;
  std::string box;
};

struct PlanOptions {
  std::optional<int> grid;
  std::optional<int> rand_pairs;
  std::uint64_t seed = 42;
  std::string identities = "all";
  std::optional<std::string> tol_profile;
  std::vector<std::string> tol;
  std::optional<double> fd_step;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

double parse_double(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size() || !std::isfinite(v)) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number '" + s + "' in " + what);
  }
}

Box parse_box(const std::string& s) {
  const auto axes = split(s, ':');
  if (axes.size() != 3) throw ConfigError("--box expects \"x0,x1:y0,y1:z0,z1\"");
  Box b;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto ends = split(axes[i], ',');
    if (ends.size() != 2) throw ConfigError("--box expects \"x0,x1:y0,y1:z0,z1\"");
    b.lo[i] = parse_double(ends[0], "--box");
    b.hi[i] = parse_double(ends[1], "--box");
    if (!(b.lo[i] < b.hi[i])) throw ConfigError("--box intervals must satisfy lo < hi");
  }
  return b;
}

Family parse_family(const std::string& s) {
  if (s == "kenmotsu") return Family::KenmotsuBaseline;
  if (const auto f = family_from_string(s)) return *f;
  throw ConfigError("unknown family '" + s +
                    "' (expected kmu-chart, kmup-chart, kmu-darboux, kmup-darboux, kenmotsu)");
}

AlmostContactModel build_model(const ModelOptions& o, const std::optional<std::string>& mu_text) {
  if (!o.model_path.empty()) {
    std::ifstream is(o.model_path);
    if (!is) throw ConfigError("cannot read model file '" + o.model_path + "'");
    json j;
    try {
      is >> j;
    } catch (const json::exception& e) {
      throw ConfigError("model file is not valid JSON: " + std::string(e.what()));
    }
    AlmostContactModel m = model_from_json(j);
    if (!o.box.empty()) m.box = parse_box(o.box);
    return m;
  }
  if (o.family.empty()) throw ConfigError("either --family or --model is required");
  const Family family = parse_family(o.family);
  std::optional<Box> box;
  if (!o.box.empty()) box = parse_box(o.box);

  const bool chart = family == Family::KmuChart || family == Family::KmupChart;
  if (!chart && (o.f || o.r)) {
    throw ConfigError("--f and --r apply only to the chart families");
  }
  if (family == Family::KenmotsuBaseline && mu_text) {
    throw ConfigError("--mu does not apply to the kenmotsu baseline");
  }
  const std::string var = chart ? "z" : "t";
  auto expr = [&](const std::optional<std::string>& text) {
    return text ? Expr::parse(*text, var) : Expr::constant(0.0, var);
  };

  switch (family) {
    case Family::KmuChart: {
      KmuChartParams p{expr(mu_text), expr(o.f), expr(o.r), KmuChartParams::default_chart_box()};
      if (box) p.box = *box;
      return build_kmu_chart_model(p);
    }
    case Family::KmupChart: {
      KmupChartParams p{expr(mu_text), expr(o.f), expr(o.r), KmuChartParams::default_chart_box()};
      if (box) p.box = *box;
      return build_kmu_prime_chart_model(p);
    }
    case Family::KmuDarboux:
    case Family::KmupDarboux: {
      if (o.t_range.size() != 2) throw ConfigError("--t-range expects two numbers");
      DarbouxParams p;
      p.variant = family == Family::KmuDarboux ? Nullity::Kmu : Nullity::KmuPrime;
      p.mu = expr(mu_text);
      p.t0 = o.t_range[0];
      p.t1 = o.t_range[1];
      p.step = o.step;
      if (box) {
        p.x_range = {box->lo[0], box->hi[0]};
        p.y_range = {box->lo[1], box->hi[1]};
      }
      AlmostContactModel m = build_darboux_model(p);
      if (box) m.box = *box;
      return m;
    }
    case Family::KenmotsuBaseline: {
      AlmostContactModel m = build_kenmotsu_baseline(o.c);
      if (box) m.box = *box;
      return m;
    }
  }
  throw ConfigError("unknown family");
}

SamplePlan make_plan(const AlmostContactModel& m, const PlanOptions& o) {
  SamplePlan plan = SamplePlan::for_model(m);
  if (o.grid) {
    if (*o.grid < 1) throw ConfigError("--grid must be positive");
    plan.grid = {*o.grid, *o.grid, *o.grid};
  }
  if (o.rand_pairs) {
    if (*o.rand_pairs < 0) throw ConfigError("--rand-pairs must be non-negative");
    plan.random_pairs = *o.rand_pairs;
  }
  plan.seed = o.seed;
  if (!plan.box.inside(m.domain)) throw ConfigError("sample box lies outside the model's chart");
  return plan;
}

std::vector<IdentityId> parse_identities(const std::string& list) {
  std::vector<IdentityId> out;
  if (trim(list) == "all") return out;
  for (const auto& raw : split(list, ',')) {
    const std::string name = trim(raw);
    const auto id = identity_from_string(name);
    if (!id) throw ConfigError("unknown identity '" + name + "'");
    if (std::find(out.begin(), out.end(), *id) == out.end()) out.push_back(*id);
  }
  if (out.empty()) throw ConfigError("--identities is empty");
  return out;
}

ToleranceOverrides parse_overrides(const PlanOptions& o) {
  ToleranceOverrides ov;
  if (o.tol_profile) {
    ov.profile = profile_from_string(*o.tol_profile);
    if (!ov.profile) throw ConfigError("unknown tolerance profile '" + *o.tol_profile + "'");
  }
  for (const auto& item : o.tol) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--tol expects ID=VALUE, got '" + item + "'");
    const std::string name = trim(item.substr(0, eq));
    const auto id = identity_from_string(name);
    if (!id) throw ConfigError("unknown identity '" + name + "' in --tol");
    const double v = parse_double(item.substr(eq + 1), "--tol");
    if (!(v > 0.0)) throw ConfigError("--tol values must be positive");
    ov.per_identity[*id] = v;
  }
  return ov;
}

DiffScheme make_scheme(const PlanOptions& o) {
  if (!o.fd_step) return {};
  if (!(*o.fd_step > 0.0 && *o.fd_step < 0.1)) throw ConfigError("--fd-step must lie in (0, 0.1)");
  return DiffScheme::with_step(*o.fd_step);
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_file_atomic(path, content);
  }
}

void add_model_options(CLI::App* cmd, ModelOptions& o) {
  cmd->add_option("--family", o.family,
                  "kmu-chart, kmup-chart, kmu-darboux, kmup-darboux or kenmotsu");
  cmd->add_option("--model", o.model_path, "model JSON written by the build subcommand");
  cmd->add_option("--mu", o.mu, "mu as an expression in z (charts) or t (Darboux)");
  cmd->add_option("--f", o.f, "f(z) for the chart families");
  cmd->add_option("--r", o.r, "r(z) for the chart families");
  cmd->add_option("--t-range", o.t_range, "integration interval A B")->expected(2);
  cmd->add_option("--step", o.step, "RK4 step");
  cmd->add_option("--c", o.c, "warping constant of the kenmotsu baseline");
  cmd->add_option("--box", o.box, "sample box \"x0,x1:y0,y1:z0,z1\"");
}

void add_plan_options(CLI::App* cmd, PlanOptions& o) {
  cmd->add_option("--grid", o.grid, "grid points per axis");
  cmd->add_option("--rand-pairs", o.rand_pairs, "random vector pairs per point");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--identities", o.identities, "comma-separated identity list or 'all'");
  cmd->add_option("--tol-profile", o.tol_profile, "strict, fd1 or fd2 for every identity");
  cmd->add_option("--tol", o.tol, "per-identity tolerance ID=VALUE (repeatable)");
  cmd->add_option("--fd-step", o.fd_step, "relative finite-difference step");
}

int do_verify(const ModelOptions& mo, const PlanOptions& po, const std::string& report_path,
              std::ostream& out) {
  const AlmostContactModel m = build_model(mo, mo.mu);
  const SamplePlan plan = make_plan(m, po);
  const VerificationRun run =
      verify_model(m, parse_identities(po.identities), plan, parse_overrides(po), make_scheme(po));
  if (!report_path.empty()) write_file_atomic(report_path, to_json(run).dump(2) + "\n");
  out << summarize(run);
  return run.overall() ? 0 : 1;
}

int do_sweep(const ModelOptions& mo, const PlanOptions& po, const std::string& mu_values,
             const std::string& report_path, std::ostream& out) {
  if (!mo.model_path.empty()) throw ConfigError("sweep builds its own models; use --family");
  if (mo.mu) throw ConfigError("sweep takes --mu-values instead of --mu");
  std::vector<std::string> values;
  for (const auto& v : split(mu_values, ',')) {
    parse_double(v, "--mu-values");
    values.push_back(trim(v));
  }
  if (values.empty()) throw ConfigError("--mu-values is empty");

  const auto requested = parse_identities(po.identities);
  const auto overrides = parse_overrides(po);
  const DiffScheme scheme = make_scheme(po);

  struct Worst {
    double residual = -1.0;
    std::string mu;
    Verdict verdict = Verdict::NotApplicable;
    double tolerance = 0.0;
  };
  std::map<IdentityId, Worst> worst;
  json runs = json::array();
  bool ok = true;
  for (const auto& v : values) {
    const AlmostContactModel m = build_model(mo, v);
    const VerificationRun run = verify_model(m, requested, make_plan(m, po), overrides, scheme);
    ok = ok && run.overall();
    json rj = to_json(run);
    rj.erase("timestamp");
    runs.push_back({{"mu", v}, {"run", std::move(rj)}});
    for (const auto& r : run.reports) {
      Worst& w = worst[r.id];
      if (r.verdict == Verdict::NotApplicable) continue;
      auto rank = [](Verdict x) { return x == Verdict::Fail ? 2 : x == Verdict::Pass ? 1 : 0; };
      if (rank(r.verdict) > rank(w.verdict) ||
          (rank(r.verdict) == rank(w.verdict) && r.residual > w.residual)) {
        w = {r.residual, v, r.verdict, r.tolerance};
      }
    }
  }

  json agg = json::array();
  std::ostringstream table;
  table << "sweep over mu in {" << mu_values << "}\n";
  char line[160];
  for (const auto& [id, w] : worst) {
    json e{{"id", std::string(to_string(id))}, {"verdict", std::string(to_string(w.verdict))}};
    if (w.verdict != Verdict::NotApplicable) {
      e["worstResidual"] = w.residual;
      e["mu"] = w.mu;
      e["tolerance"] = w.tolerance;
      std::snprintf(line, sizeof line, "%-12s %-14.6e mu=%-10s %s\n",
                    std::string(to_string(id)).c_str(), w.residual, w.mu.c_str(),
                    std::string(to_string(w.verdict)).c_str());
    } else {
      std::snprintf(line, sizeof line, "%-12s %-14s %-13s %s\n", std::string(to_string(id)).c_str(),
                    "-", "", "not-applicable");
    }
    table << line;
    agg.push_back(std::move(e));
  }
  table << "overall: " << (ok ? "pass" : "fail") << "\n";

  json doc{{"family", mo.family},
           {"muValues", values},
           {"timestamp", utc_timestamp()},
           {"worst", std::move(agg)},
           {"runs", std::move(runs)},
           {"overall", ok ? "pass" : "fail"}};
  if (!report_path.empty()) write_file_atomic(report_path, doc.dump(2) + "\n");
  out << table.str();
  return ok ? 0 : 1;
}

int do_trajectory(const ModelOptions& mo, const std::string& csv_path, std::ostream& out) {
  if (!mo.model_path.empty()) throw ConfigError("trajectory takes --family, not --model");
  const Family family = parse_family(mo.family);
  if (!is_darboux(family)) throw ConfigError("trajectory requires a Darboux family");
  const AlmostContactModel m = build_model(mo, mo.mu);
  std::ostringstream csv;
  m.trajectory->write_csv(csv);
  emit(csv_path, csv.str(), out);
  if (!csv_path.empty() && csv_path != "-") {
    double worst = 0.0;
    for (const auto& s : m.trajectory->nodes()) {
      worst = std::max(worst, ode::algebraic_residuals(m.trajectory->variant(), s).max());
    }
    out << m.trajectory->nodes().size() << " nodes written to " << csv_path
        << ", max algebraic residual " << worst << "\n";
  }
  for (const auto& w : m.warnings) out << "warning: " << w << "\n";
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Verify curvature identities of almost Kenmotsu structures", "akmverify"};
  app.require_subcommand(1);

  ModelOptions build_mo, verify_mo, traj_mo, sweep_mo;
  PlanOptions verify_po, sweep_po;
  std::string out_path, report_path, sweep_report, csv_path, mu_values;

  auto* build = app.add_subcommand("build", "write a model as JSON");
  add_model_options(build, build_mo);
  build->add_option("--out", out_path, "output path (default stdout)");

  auto* verify = app.add_subcommand("verify", "run an identity suite on a model");
  add_model_options(verify, verify_mo);
  add_plan_options(verify, verify_po);
  verify->add_option("--report", report_path, "JSON report path");

  auto* traj = app.add_subcommand("trajectory", "export the F, H, B flow as CSV");
  add_model_options(traj, traj_mo);
  traj->add_option("--csv", csv_path, "CSV path (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "verify over a list of constant mu values");
  add_model_options(sweep, sweep_mo);
  add_plan_options(sweep, sweep_po);
  sweep->add_option("--mu-values", mu_values, "comma-separated constants")->required();
  sweep->add_option("--report", sweep_report, "JSON report path");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*build) {
      const AlmostContactModel m = build_model(build_mo, build_mo.mu);
      for (const auto& w : m.warnings) err << "warning: " << w << "\n";
      emit(out_path, model_to_json(m).dump(2) + "\n", out);
      return 0;
    }
    if (*verify) return do_verify(verify_mo, verify_po, report_path, out);
    if (*traj) return do_trajectory(traj_mo, csv_path, out);
    if (*sweep) return do_sweep(sweep_mo, sweep_po, mu_values, sweep_report, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "error: malformed expression: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace akm
