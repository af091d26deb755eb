#pragma once

// The variational function H(x) = beta x^p + h x - I(x) and everything that
// is read off its global maximizers: point classification, the thermodynamic
// threshold, the special point(s), the critical curve and mixture weights.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pspin {

enum class PointClass { Regular, Special, WeaklyCritical, StronglyCritical };

std::string_view to_string(PointClass c);
bool is_critical(PointClass c);

/// Equality tolerances used by `analyze`.
struct Tolerances {
  double value = 1e-9;      // two maximizer values count as equal
  double curvature = 1e-7;  // |H''(m*)| below this counts as zero
};

struct StationaryPoint {
  double x = 0.0;
  double value = 0.0;             // H(x)
  double second_derivative = 0.0; // H''(x)
  bool local_max = false;
};

struct HAnalysis {
  double beta = 0.0;
  double h = 0.0;
  int p = 2;
  std::vector<double> maximizers;     // global maximizers, increasing
  std::vector<double> values;         // H at each maximizer
  std::vector<double> second_derivs;  // H'' at each maximizer
  std::vector<double> fourth_derivs;  // H'''' at each maximizer
  std::vector<double> weights;        // mixture weights, only when critical
  std::vector<StationaryPoint> stationary;  // every root of H' in (-1, 1)
  PointClass classification = PointClass::Regular;
};

/// Binary entropy I(x) = [(1+x)log(1+x) + (1-x)log(1-x)] / 2 on [-1, 1].
double entropy(double x);

double h_value(double beta, double h, int p, double x);

/// [H, H', H'', H''', H''''] at x, truncated after `max_order` (0..4).
std::vector<double> h_derivatives(double beta, double h, int p, double x, int max_order);

/// Roots of H' located by splitting (-1, 1) at the roots of H'' (where H' is
/// monotone on each piece) and polishing each sign change.
std::vector<StationaryPoint> stationary_points(double beta, double h, int p);

/// Independent route: sign-change scan of H' on `grid` points of
/// (-1 + 1e-9, 1 - 1e-9), each bracket polished by bisection.
std::vector<double> scan_stationary_points(double beta, double h, int p, int grid = 4096);

HAnalysis analyze(double beta, double h, int p, const Tolerances& tol = {});

/// p_k proportional to [(m_k^2 - 1) H''(m_k)]^{-1/2}.
std::vector<double> mixture_weights(const std::vector<double>& maximizers,
                                    const std::vector<double>& second_derivs);

/// Smallest beta >= 0 at which (beta, 0) is critical.
double beta_tilde(int p);

/// (beta_check, sign * h_check); sign = -1 only for even p.
std::pair<double, double> special_point(int p, int sign = 1);

/// Field value h >= 0 (even p) or signed (odd p) at which H_{beta,h,p} has two
/// equal global maxima. Empty for even p at beta = beta_tilde.
std::optional<double> critical_curve(int p, double beta);

/// S_p(beta): every h with (beta, h) in the closure of the critical set.
std::vector<double> critical_fields(int p, double beta);

/// T_p(h): every beta >= 0 with (beta, h) in the closure of the critical set, h != 0.
std::vector<double> critical_betas(int p, double h);

/// Half-open box of parameters that print as the given decimal literals: the
/// literal's last digit may come from rounding or truncation. Integer literals
/// are exact.
struct PrintedValue {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};
PrintedValue parse_printed(std::string_view literal);

/// Classification of the most singular structural point (strongly critical,
/// special, critical curve, in that order) that lies inside the printed box,
/// falling back to the exact analysis at the box center.
struct ResolvedPoint {
  double beta = 0.0;
  double h = 0.0;
  bool snapped = false;
  HAnalysis analysis;
};
ResolvedPoint resolve_printed_point(const PrintedValue& beta, const PrintedValue& h, int p,
                                    const Tolerances& tol = {});

}  // namespace pspin
