#pragma once

#include <array>
#include <optional>

#include <json.hpp>

#include "akm/almost_contact.hpp"

namespace akm {

/// Three smooth functions of z for the chart family carrying h.
struct KmuChartParams {
  Expr mu = Expr::constant(0.0, "z");
  Expr f = Expr::constant(0.0, "z");
  Expr r = Expr::constant(0.0, "z");
  Box box = default_chart_box();

  /// [0,1] x [0,1] x [-3,-1.5].
  static Box default_chart_box() { return Box{{0.0, 0.0, -3.0}, {1.0, 1.0, -1.5}}; }
};

/// Same data for the chart family carrying h'; mu + 2 must not vanish on the box.
struct KmupChartParams {
  Expr mu = Expr::constant(0.0, "z");
  Expr f = Expr::constant(0.0, "z");
  Expr r = Expr::constant(0.0, "z");
  Box box = KmuChartParams::default_chart_box();
};

struct DarbouxParams {
  Nullity variant = Nullity::Kmu;
  Expr mu = Expr::constant(0.0, "t");
  double t0 = -1.0;
  double t1 = 1.0;
  double step = 1e-3;
  std::array<double, 2> x_range{0.0, 1.0};
  std::array<double, 2> y_range{0.0, 1.0};
};

/// Chart on {z < -1} with k = z and lambda = sqrt(-1 - z), variant h.
AlmostContactModel build_kmu_chart_model(const KmuChartParams& p);

/// Chart on {z < -1} with k = z and lambda = sqrt(-1 - z), variant h'.
AlmostContactModel build_kmu_prime_chart_model(const KmupChartParams& p);

/// Coordinates (x, y, t): integrates the F, H, B flow and builds phi from F,
/// g = dt^2 + e^{2t} G with G = -M2 F, xi = d_t, eta = dt. Throws ConfigError
/// for invalid parameters, NumericError or ConsistencyError from the flow.
AlmostContactModel build_darboux_model(const DarbouxParams& p);

/// g = dt^2 + c^2 e^{2t}(dx^2 + dy^2) in coordinates (x, y, t). Requires c > 0.
AlmostContactModel build_kenmotsu_baseline(double c = 1.0);

/// Family, parameter expressions as text, box, integration settings and, for
/// Darboux families, the stored trajectory nodes.
nlohmann::json model_to_json(const AlmostContactModel& m);

/// Rebuilds a model from model_to_json output (the trajectory is re-integrated
/// and compared against the stored nodes when present). Throws ConfigError.
AlmostContactModel model_from_json(const nlohmann::json& j);

}  // namespace akm
