#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "akm/identities.hpp"

namespace akm {

/// Per-run tolerance controls: a profile forced on every identity and/or
/// explicit tolerances for individual identities (the latter win).
struct ToleranceOverrides {
  std::optional<Profile> profile;
  std::map<IdentityId, double> per_identity;
};

/// One verify invocation: what was checked, how, and the outcome.
struct VerificationRun {
  nlohmann::json model;                // model descriptor (family, params, box)
  std::vector<IdentityId> requested;   // empty means every applicable identity
  SamplePlan plan;
  ToleranceOverrides overrides;
  std::string timestamp;
  std::vector<ResidualReport> reports;

  /// Conjunction of the applicable verdicts.
  bool overall() const;
};

/// Runs the requested identities (or all applicable ones) on `m`.
VerificationRun verify_model(const AlmostContactModel& m, const std::vector<IdentityId>& requested,
                             const SamplePlan& plan, const ToleranceOverrides& overrides = {},
                             const DiffScheme& scheme = {});

/// Model descriptor without trajectory nodes.
nlohmann::json model_descriptor(const AlmostContactModel& m);

nlohmann::json to_json(const VerificationRun& run);
VerificationRun run_from_json(const nlohmann::json& j);

/// Fixed-width table, one line per identity, then the overall verdict.
std::string summarize(const VerificationRun& run);

/// Current UTC time as an ISO 8601 string.
std::string utc_timestamp();

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Entry point of the command-line tool. `args` excludes the program name.
/// Returns 0 when every requested check passes, 1 on a verification failure,
/// 2 on a usage or configuration error.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace akm
