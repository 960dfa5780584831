#include "akm/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include "akm/errors.hpp"
#include "akm/models.hpp"

namespace akm {

using nlohmann::json;

namespace {

json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

IdentityId id_from(const json& j) {
  const auto id = identity_from_string(j.get<std::string>());
  if (!id) throw ConfigError("unknown identity '" + j.get<std::string>() + "'");
  return *id;
}

Profile profile_from(const json& j) {
  const auto p = profile_from_string(j.get<std::string>());
  if (!p) throw ConfigError("unknown tolerance profile '" + j.get<std::string>() + "'");
  return *p;
}

json report_to_json(const ResidualReport& r) {
  json j;
  j["id"] = std::string(to_string(r.id));
  j["formula"] = std::string(formula(r.id));
  j["residual"] = number(r.residual);
  j["tolerance"] = r.tolerance;
  j["profile"] = std::string(to_string(r.profile));
  j["maxPoint"] = json::array({number(r.max_point[0]), number(r.max_point[1]),
                               number(r.max_point[2])});
  j["verdict"] = std::string(to_string(r.verdict));
  j["samples"] = r.samples;
  json parts = json::object();
  for (const auto& [name, v] : r.parts) parts[name] = number(v);
  j["parts"] = std::move(parts);
  if (r.refined_residual) j["refinedResidual"] = number(*r.refined_residual);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

ResidualReport report_from_json(const json& j) {
  ResidualReport r;
  r.id = id_from(j.at("id"));
  r.residual = number_from(j.at("residual"));
  r.tolerance = j.at("tolerance").get<double>();
  r.profile = profile_from(j.at("profile"));
  const json& mp = j.at("maxPoint");
  for (int i = 0; i < 3; ++i) r.max_point[i] = number_from(mp.at(static_cast<std::size_t>(i)));
  const auto v = verdict_from_string(j.at("verdict").get<std::string>());
  if (!v) throw ConfigError("unknown verdict '" + j.at("verdict").get<std::string>() + "'");
  r.verdict = *v;
  r.samples = j.value("samples", std::size_t{0});
  if (j.contains("parts")) {
    for (const auto& [name, val] : j.at("parts").items()) r.parts[name] = number_from(val);
  }
  if (j.contains("refinedResidual")) r.refined_residual = number_from(j.at("refinedResidual"));
  r.note = j.value("note", std::string{});
  return r;
}

json box_json(const Box& b) {
  json out = json::array();
  for (int i = 0; i < 3; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out.push_back(json::array({b.lo[k], b.hi[k]}));
  }
  return out;
}

Box box_from(const json& j) {
  Box b;
  for (std::size_t i = 0; i < 3; ++i) {
    b.lo[i] = j.at(i).at(0).get<double>();
    b.hi[i] = j.at(i).at(1).get<double>();
  }
  return b;
}

}  // namespace

bool VerificationRun::overall() const {
  for (const auto& r : reports) {
    if (r.verdict == Verdict::Fail) return false;
  }
  return true;
}

nlohmann::json model_descriptor(const AlmostContactModel& m) {
  json j = model_to_json(m);
  j.erase("trajectory");
  return j;
}

VerificationRun verify_model(const AlmostContactModel& m, const std::vector<IdentityId>& requested,
                             const SamplePlan& plan, const ToleranceOverrides& overrides,
                             const DiffScheme& scheme) {
  VerificationRun run;
  run.model = model_descriptor(m);
  run.requested = requested;
  run.plan = plan;
  run.overrides = overrides;
  run.timestamp = utc_timestamp();

  std::vector<IdentityId> ids = requested;
  if (ids.empty()) {
    for (IdentityId id : all_identities()) {
      if (is_applicable(id, m)) ids.push_back(id);
    }
  }
  for (IdentityId id : ids) {
    CheckOptions opts;
    opts.scheme = scheme;
    opts.profile = overrides.profile;
    if (auto it = overrides.per_identity.find(id); it != overrides.per_identity.end()) {
      opts.tolerance = it->second;
    }
    run.reports.push_back(check_identity(m, id, plan, opts));
  }
  return run;
}

nlohmann::json to_json(const VerificationRun& run) {
  json j;
  j["model"] = run.model;
  json ids;
  if (run.requested.empty()) {
    ids = "all-applicable";
  } else {
    ids = json::array();
    for (IdentityId id : run.requested) ids.push_back(std::string(to_string(id)));
  }
  j["requested"] = std::move(ids);
  j["plan"] = {{"box", box_json(run.plan.box)},
               {"grid", run.plan.grid},
               {"randomPairs", run.plan.random_pairs},
               {"seed", run.plan.seed}};
  json ov = json::object();
  if (run.overrides.profile) ov["profile"] = std::string(to_string(*run.overrides.profile));
  json per = json::object();
  for (const auto& [id, tol] : run.overrides.per_identity) per[std::string(to_string(id))] = tol;
  ov["tolerances"] = std::move(per);
  j["overrides"] = std::move(ov);
  j["timestamp"] = run.timestamp;
  json reps = json::array();
  for (const auto& r : run.reports) reps.push_back(report_to_json(r));
  j["identities"] = std::move(reps);
  j["overall"] = run.overall() ? "pass" : "fail";
  return j;
}

VerificationRun run_from_json(const nlohmann::json& j) {
  try {
    VerificationRun run;
    run.model = j.at("model");
    const json& req = j.at("requested");
    if (req.is_array()) {
      for (const auto& e : req) run.requested.push_back(id_from(e));
    } else if (req.get<std::string>() != "all-applicable") {
      throw ConfigError("'requested' must be a list or \"all-applicable\"");
    }
    const json& plan = j.at("plan");
    run.plan.box = box_from(plan.at("box"));
    run.plan.grid = plan.at("grid").get<std::array<int, 3>>();
    run.plan.random_pairs = plan.at("randomPairs").get<int>();
    run.plan.seed = plan.at("seed").get<std::uint64_t>();
    const json& ov = j.at("overrides");
    if (ov.contains("profile")) run.overrides.profile = profile_from(ov.at("profile"));
    if (ov.contains("tolerances")) {
      for (const auto& [name, tol] : ov.at("tolerances").items()) {
        run.overrides.per_identity[id_from(json(name))] = tol.get<double>();
      }
    }
    run.timestamp = j.at("timestamp").get<std::string>();
    for (const auto& r : j.at("identities")) run.reports.push_back(report_from_json(r));
    const std::string overall = j.at("overall").get<std::string>();
    if (overall != (run.overall() ? "pass" : "fail")) {
      throw ConfigError("stored overall verdict disagrees with the identity verdicts");
    }
    return run;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

std::string summarize(const VerificationRun& run) {
  std::ostringstream os;
  const std::string family = run.model.value("family", std::string("?"));
  os << "model " << family << ", " << run.reports.size() << " identities, seed " << run.plan.seed
     << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %-14s %-10s %-6s %s\n", "identity", "residual",
                "tolerance", "prof", "verdict");
  os << line;
  for (const auto& r : run.reports) {
    if (r.verdict == Verdict::NotApplicable) {
      std::snprintf(line, sizeof line, "%-12s %-14s %-10s %-6s %s\n",
                    std::string(to_string(r.id)).c_str(), "-", "-", "-", "not-applicable");
    } else {
      std::snprintf(line, sizeof line, "%-12s %-14.6e %-10.1e %-6s %s\n",
                    std::string(to_string(r.id)).c_str(), r.residual, r.tolerance,
                    std::string(to_string(r.profile)).c_str(),
                    std::string(to_string(r.verdict)).c_str());
    }
    os << line;
    if (r.verdict == Verdict::Fail && !r.note.empty()) os << "    " << r.note << "\n";
  }
  os << "overall: " << (run.overall() ? "pass" : "fail") << "\n";
  return os.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot open '" + tmp.string() + "' for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) throw ConfigError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ConfigError("cannot rename onto '" + path.string() + "'");
  }
}

}  // namespace akm
