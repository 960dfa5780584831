#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "akm/almost_contact.hpp"

namespace akm {

enum class IdentityId {
  NablaXi,
  AkDeta,
  AkDphi,
  Kleaves,
  Curv1,
  LId,
  Curv2,
  CodazziHp,
  H2,
  Qxi,
  Nh,
  Nhp,
  Lie1,
  Lie2,
  TrHp,
  TrPhi,
  TrH,
  Grad,
  RicciForm,
  NullKmu,
  NullKmup,
  ConnKmu,
  ConnKmup,
  FlatLeaf,
  Weyl3,
  DkEta,
  Bsq,
  Phi12,
};

/// Upper-case name such as "NABLA_XI".
std::string_view to_string(IdentityId id);
std::optional<IdentityId> identity_from_string(std::string_view s);
std::span<const IdentityId> all_identities();

/// Human-readable statement of the identity that is checked.
std::string_view formula(IdentityId id);

enum class Profile { Strict, Fd1, Fd2 };

std::string_view to_string(Profile p);
std::optional<Profile> profile_from_string(std::string_view s);

/// 1e-10, 1e-6, 5e-5.
double tolerance(Profile p);

Profile default_profile(IdentityId id);

/// Whether `id` makes a claim about models of this family and variant.
bool is_applicable(IdentityId id, const AlmostContactModel& m);

struct PlanSample {
  Point point;
  std::vector<Vec3> vectors;  // 2 * random_pairs Euclidean-unit vectors
};

/// Regular grid inside a box plus seeded random tangent vectors per point.
struct SamplePlan {
  Box box;
  std::array<int, 3> grid{5, 5, 5};
  int random_pairs = 4;
  std::uint64_t seed = 42;

  static SamplePlan for_model(const AlmostContactModel& m);

  /// Throws ConfigError if the grid is empty or a point falls outside `dom`.
  std::vector<PlanSample> samples(const ChartDomain& dom) const;
};

enum class Verdict { Pass, Fail, NotApplicable };

std::string_view to_string(Verdict v);
std::optional<Verdict> verdict_from_string(std::string_view s);

struct ResidualReport {
  IdentityId id = IdentityId::NablaXi;
  double residual = 0.0;
  Point max_point = Point::Zero();
  std::size_t samples = 0;
  Profile profile = Profile::Fd1;
  double tolerance = 0.0;
  Verdict verdict = Verdict::NotApplicable;

  /// Sup of each named sub-residual (e.g. the scalar laws along xi).
  std::map<std::string, double> parts;

  /// Residual of a rerun with halved steps, filled when a check fails and a
  /// refinement was attempted.
  std::optional<double> refined_residual;
  std::string note;
};

struct CheckOptions {
  DiffScheme scheme{};
  std::optional<Profile> profile;     // replaces the identity's default profile
  std::optional<double> tolerance;    // replaces the profile tolerance
  bool refine_on_failure = true;
};

/// Sup over the plan of |lhs - rhs| for one identity: g-norm for vectors,
/// g-operator norm for (1,1) tensors, absolute value for scalars.
ResidualReport check_identity(const AlmostContactModel& m, IdentityId id, const SamplePlan& plan,
                              const CheckOptions& opts = {});

/// Sup over the plan of |R(X,Y)xi - k(eta(Y)X - eta(X)Y) - mu(eta(Y)TX - eta(X)TY)|
/// with T = h or h' and the model's nominal k, mu unless overridden.
ResidualReport nullity_residual(const AlmostContactModel& m, Nullity variant,
                                const SamplePlan& plan, const CheckOptions& opts = {},
                                const ScalarField& k = {}, const ScalarField& mu = {});

struct KMuEstimate {
  double k = 0.0;
  std::optional<double> mu;  // empty when lambda < 1e-6
  double lambda = 0.0;
};

/// k and mu recovered from l(X) = R(X,xi)xi on the eigenframe.
KMuEstimate infer_k_mu(const AlmostContactModel& m, const Point& p, const DiffScheme& scheme = {});

}  // namespace akm
