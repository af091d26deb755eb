#include "pspin_cw/h_analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "pspin_cw/numeric.hpp"

namespace pspin {

namespace {

constexpr double kOne = 1.0;
const double kLeftEdge = std::nextafter(-kOne, 0.0);
const double kRightEdge = std::nextafter(kOne, 0.0);

double falling(int p, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= static_cast<double>(p - i);
  return out;
}

double h_prime(double beta, double h, int p, double x) {
  return beta * p * ipow(x, p - 1) + h - std::atanh(x);
}

double h_second(double beta, int p, double x) {
  return beta * p * (p - 1) * ipow(x, p - 2) - 1.0 / (1.0 - x * x);
}

// H'' (1 - x^2): a polynomial whose sign is the sign of H''.
double curvature_poly(double beta, int p, double x) {
  return beta * p * (p - 1) * ipow(x, p - 2) * (1.0 - x * x) - 1.0;
}

// Intervals on which curvature_poly is monotone.
std::vector<std::pair<double, double>> curvature_monotone_pieces(int p) {
  if (p == 2) return {{-1.0, 0.0}, {0.0, 1.0}};
  const double peak = std::sqrt(static_cast<double>(p - 2) / p);
  if (p % 2 == 1) return {{0.0, peak}, {peak, 1.0}};
  return {{-1.0, -peak}, {-peak, 0.0}, {0.0, peak}, {peak, 1.0}};
}

std::vector<double> curvature_roots(double beta, int p) {
  std::vector<double> roots;
  if (beta == 0.0) return roots;
  const auto g = [&](double x) { return curvature_poly(beta, p, x); };
  for (const auto& [a, b] : curvature_monotone_pieces(p)) {
    const double ga = g(a);
    const double gb = g(b);
    if (ga == 0.0) {
      roots.push_back(a);
    } else if (gb != 0.0 && (ga < 0.0) != (gb < 0.0)) {
      roots.push_back(bisect(g, a, b, 0.0));
    }
    if (gb == 0.0) roots.push_back(b);
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  roots.erase(std::remove_if(roots.begin(), roots.end(), [](double r) { return std::abs(r) >= 1.0; }),
              roots.end());
  return roots;
}

// Root of the monotone H' on [a, b]; the endpoint with the smaller |H'| when
// there is no sign change.
double monotone_root(double beta, double h, int p, double a, double b) {
  const auto f = [&](double x) { return h_prime(beta, h, p, x); };
  const double fa = f(a);
  const double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa < 0.0) == (fb < 0.0)) return std::abs(fa) < std::abs(fb) ? a : b;
  return bisect(f, a, b, 0.0);
}

StationaryPoint make_point(double beta, double h, int p, double x, bool local_max) {
  return StationaryPoint{x, h_value(beta, h, p, x), h_second(beta, p, x), local_max};
}

}  // namespace

std::string_view to_string(PointClass c) {
  switch (c) {
    case PointClass::Regular:
      return "regular";
    case PointClass::Special:
      return "special";
    case PointClass::WeaklyCritical:
      return "weakly-critical";
    case PointClass::StronglyCritical:
      return "strongly-critical";
  }
  return "unknown";
}

bool is_critical(PointClass c) {
  return c == PointClass::WeaklyCritical || c == PointClass::StronglyCritical;
}

double entropy(double x) {
  if (!(std::abs(x) <= 1.0)) throw std::domain_error("entropy: |x| must be <= 1");
  if (std::abs(x) == 1.0) return std::numbers::ln2;
  return x * std::atanh(x) + 0.5 * std::log1p(-x * x);
}

double h_value(double beta, double h, int p, double x) { return beta * ipow(x, p) + h * x - entropy(x); }

std::vector<double> h_derivatives(double beta, double h, int p, double x, int max_order) {
  if (!(std::abs(x) < 1.0)) throw std::domain_error("h_derivatives: |x| must be < 1");
  if (max_order < 0 || max_order > 4) throw std::invalid_argument("h_derivatives: max_order must be in [0,4]");
  const double q = 1.0 - x * x;
  const auto poly = [&](int k) {
    const double c = falling(p, k);
    return c == 0.0 ? 0.0 : beta * c * ipow(x, p - k);
  };
  std::vector<double> out;
  out.push_back(h_value(beta, h, p, x));
  if (max_order >= 1) out.push_back(poly(1) + h - std::atanh(x));
  if (max_order >= 2) out.push_back(poly(2) - 1.0 / q);
  if (max_order >= 3) out.push_back(poly(3) - 2.0 * x / (q * q));
  if (max_order >= 4) out.push_back(poly(4) - (2.0 + 6.0 * x * x) / (q * q * q));
  return out;
}

std::vector<StationaryPoint> stationary_points(double beta, double h, int p) {
  if (p < 2) throw std::invalid_argument("p must be at least 2");
  std::vector<double> edges{kLeftEdge};
  for (const double r : curvature_roots(beta, p)) edges.push_back(r);
  edges.push_back(kRightEdge);

  std::vector<StationaryPoint> out;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i];
    const double b = edges[i + 1];
    const double fa = h_prime(beta, h, p, a);
    const double fb = h_prime(beta, h, p, b);
    const bool sign_change = (fa > 0.0 && fb < 0.0) || (fa < 0.0 && fb > 0.0) || fa == 0.0 || fb == 0.0;
    if (!sign_change) continue;
    const double x = monotone_root(beta, h, p, a, b);
    // H' runs + to - across a maximum.
    const bool local_max = fa > fb;
    if (!out.empty() && std::abs(out.back().x - x) < 1e-12) {
      out.back().local_max = out.back().local_max || local_max;
      continue;
    }
    out.push_back(make_point(beta, h, p, x, local_max));
  }
  return out;
}

std::vector<double> scan_stationary_points(double beta, double h, int p, int grid) {
  if (grid < 2) throw std::invalid_argument("scan grid must have at least 2 points");
  const double lo = -1.0 + 1e-9;
  const double hi = 1.0 - 1e-9;
  const auto f = [&](double x) { return h_prime(beta, h, p, x); };
  std::vector<double> roots;
  double x_prev = lo;
  double f_prev = f(lo);
  for (int i = 1; i < grid; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid - 1);
    const double fx = f(x);
    if (f_prev == 0.0) {
      roots.push_back(x_prev);
    } else if (fx != 0.0 && (f_prev < 0.0) != (fx < 0.0)) {
      roots.push_back(bisect(f, x_prev, x, 0.0));
    }
    x_prev = x;
    f_prev = fx;
  }
  return roots;
}

std::vector<double> mixture_weights(const std::vector<double>& maximizers,
                                    const std::vector<double>& second_derivs) {
  std::vector<double> w(maximizers.size());
  double total = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double m = maximizers[k];
    w[k] = 1.0 / std::sqrt((m * m - 1.0) * second_derivs[k]);
    total += w[k];
  }
  for (double& v : w) v /= total;
  return w;
}

HAnalysis analyze(double beta, double h, int p, const Tolerances& tol) {
  if (!(beta >= 0.0) || !std::isfinite(beta) || !std::isfinite(h)) {
    throw std::invalid_argument("analyze: need finite beta >= 0 and finite h");
  }
  if (p < 2) throw std::invalid_argument("analyze: p must be at least 2");
  HAnalysis out;
  out.beta = beta;
  out.h = h;
  out.p = p;
  out.stationary = stationary_points(beta, h, p);

  double best = -kInf;
  for (const auto& s : out.stationary) {
    if (s.local_max) best = std::max(best, s.value);
  }
  if (best == -kInf) throw NumericalError("analyze: no interior local maximum of H found");
  for (const auto& s : out.stationary) {
    if (s.local_max && s.value >= best - tol.value) {
      out.maximizers.push_back(s.x);
      out.values.push_back(s.value);
      out.second_derivs.push_back(s.second_derivative);
      out.fourth_derivs.push_back(h_derivatives(beta, h, p, s.x, 4)[4]);
    }
  }
  switch (out.maximizers.size()) {
    case 1:
      out.classification =
          std::abs(out.second_derivs[0]) <= tol.curvature ? PointClass::Special : PointClass::Regular;
      break;
    case 2:
      out.classification = PointClass::WeaklyCritical;
      break;
    case 3:
      out.classification = PointClass::StronglyCritical;
      break;
    default:
      throw NumericalError("analyze: found " + std::to_string(out.maximizers.size()) +
                           " global maximizers, at most three are possible");
  }
  if (is_critical(out.classification)) {
    for (const double d2 : out.second_derivs) {
      if (!(d2 < 0.0)) throw NumericalError("analyze: degenerate maximizer at a critical point");
    }
    out.weights = mixture_weights(out.maximizers, out.second_derivs);
  }
  return out;
}

double beta_tilde(int p) {
  if (p < 2) throw std::invalid_argument("beta_tilde: p must be at least 2");
  // True iff H_{beta,0,p} exceeds H(0) = 0 somewhere on (0, 1).
  const auto above = [p](double beta) {
    for (const auto& s : stationary_points(beta, 0.0, p)) {
      if (s.local_max && s.x > 0.0 && s.value > 0.0) return true;
    }
    return false;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (!above(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (above(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

std::pair<double, double> special_point(int p, int sign) {
  if (p < 3) throw std::invalid_argument("special_point: p must be at least 3");
  if (sign != 1 && sign != -1) throw std::invalid_argument("special_point: sign must be +1 or -1");
  if (sign == -1 && p % 2 == 1) {
    throw std::invalid_argument("special_point: odd p has a single special point (sign must be +1)");
  }
  const double pd = p;
  const double beta = std::pow(pd / (pd - 2.0), (pd - 2.0) / 2.0) / (2.0 * (pd - 1.0));
  const double ratio = (pd - 2.0) / pd;
  const double h = std::atanh(std::sqrt(ratio)) - beta * pd * std::pow(ratio, (pd - 1.0) / 2.0);
  return {beta, sign * h};
}

std::optional<double> critical_curve(int p, double beta) {
  if (p < 2) throw std::invalid_argument("critical_curve: p must be at least 2");
  if (p == 2) {
    if (!(beta > 0.5)) throw std::domain_error("critical_curve: p = 2 needs beta > 1/2");
    return 0.0;
  }
  const double beta_check = special_point(p).first;
  if (!(beta > beta_check)) throw std::domain_error("critical_curve: beta must exceed the special beta");
  if (p % 2 == 0) {
    const double bt = beta_tilde(p);
    if (std::abs(beta - bt) <= 1e-12) return std::nullopt;
    if (beta > bt) return 0.0;
  }

  // H'' roots on (0, 1) bound the competing pair of local maxima.
  std::vector<double> roots;
  for (const double r : curvature_roots(beta, p)) {
    if (r > 0.0) roots.push_back(r);
  }
  if (roots.size() != 2) throw NumericalError("critical_curve: expected two inflection points on (0,1)");
  const double r1 = roots[0];
  const double r2 = roots[1];
  double left_edge = kLeftEdge;
  for (const double r : curvature_roots(beta, p)) {
    if (r < r1) left_edge = r;
  }
  const auto spinodal = [&](double r) { return std::atanh(r) - beta * p * ipow(r, p - 1); };
  const auto gap = [&](double h) {
    const double right = monotone_root(beta, h, p, r2, kRightEdge);
    const double left = monotone_root(beta, h, p, left_edge, r1);
    return h_value(beta, h, p, right) - h_value(beta, h, p, left);
  };
  const double h_lo = spinodal(r2);
  const double h_hi = spinodal(r1);
  if (!(gap(h_lo) < 0.0 && gap(h_hi) > 0.0)) throw NumericalError("critical_curve: bracketing failed");
  const double h = bisect(gap, h_lo, h_hi, 0.0);
  if (std::abs(gap(h)) > 1e-11) throw NumericalError("critical_curve: equal-maximum residual too large");
  const auto check = analyze(beta, h, p);
  if (check.maximizers.size() < 2) throw NumericalError("critical_curve: point is not critical");
  return h;
}

std::vector<double> critical_fields(int p, double beta) {
  if (p < 2) throw std::invalid_argument("critical_fields: p must be at least 2");
  if (p == 2) return beta >= 0.5 ? std::vector<double>{0.0} : std::vector<double>{};
  const auto [bc, hc] = special_point(p);
  if (std::abs(beta - bc) <= 1e-12) {
    return p % 2 == 0 ? std::vector<double>{-hc, hc} : std::vector<double>{hc};
  }
  if (beta < bc) return {};
  const auto phi = critical_curve(p, beta);
  if (p % 2 == 1) return {*phi};
  if (!phi || *phi == 0.0) return {0.0};
  return {-*phi, *phi};
}

std::vector<double> critical_betas(int p, double h) {
  if (h == 0.0) throw std::invalid_argument("critical_betas: h must be nonzero");
  if (p < 3) return {};
  const auto [bc, hc] = special_point(p);
  const double target = p % 2 == 0 ? std::abs(h) : h;
  if (target > hc) return {};
  // Next to the special point the two competing maxima nearly merge and the
  // equal-value bracket degenerates, so step away until it resolves.
  double lo = bc;
  double phi_lo = hc;
  for (double offset = 1e-9; offset <= 1e-4; offset *= 10.0) {
    try {
      phi_lo = *critical_curve(p, bc + offset);
      lo = bc + offset;
      break;
    } catch (const NumericalError&) {
    }
  }
  if (lo == bc) throw NumericalError("critical_betas: curve unresolved near the special point");
  if (target >= phi_lo) return {bc};
  const auto f = [&](double beta) { return *critical_curve(p, beta) - target; };
  double hi = p % 2 == 0 ? beta_tilde(p) - 1e-9 : std::max(2.0 * bc, beta_tilde(p));
  if (p % 2 == 0) {
    if (f(hi) > 0.0) return {};  // |h| below curve resolution near beta_tilde
  } else {
    while (f(hi) > 0.0) hi *= 2.0;
  }
  return {bisect(f, lo, hi, 1e-15)};
}

PrintedValue parse_printed(std::string_view literal) {
  PrintedValue out;
  const char* first = literal.data();
  const char* last = literal.data() + literal.size();
  if (!literal.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out.value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(out.value)) {
    throw std::invalid_argument("not a decimal number: '" + std::string(literal) + "'");
  }
  const auto dot = literal.find('.');
  if (dot == std::string_view::npos) {
    out.lower = out.upper = out.value;
    return out;
  }
  auto exp_pos = literal.find_first_of("eE");
  int exponent = 0;
  if (exp_pos != std::string_view::npos) {
    std::from_chars(literal.data() + exp_pos + 1 + (literal[exp_pos + 1] == '+' ? 1 : 0),
                    literal.data() + literal.size(), exponent);
  } else {
    exp_pos = literal.size();
  }
  const auto decimals = static_cast<int>(exp_pos - dot - 1);
  const double unit = std::pow(10.0, exponent - decimals);
  if (out.value > 0.0) {
    out.lower = out.value - 0.5 * unit;
    out.upper = out.value + unit;
  } else if (out.value < 0.0) {
    out.lower = out.value - unit;
    out.upper = out.value + 0.5 * unit;
  } else {
    out.lower = -unit;
    out.upper = unit;
  }
  return out;
}

ResolvedPoint resolve_printed_point(const PrintedValue& beta, const PrintedValue& h, int p,
                                    const Tolerances& tol) {
  const auto inside = [](const PrintedValue& box, double v) { return v >= box.lower && v <= box.upper; };
  const auto snap = [&](double b, double f) {
    return ResolvedPoint{b, f, true, analyze(b, f, p, tol)};
  };
  if (p >= 4 && p % 2 == 0) {
    const double bt = beta_tilde(p);
    if (inside(beta, bt) && inside(h, 0.0)) return snap(bt, 0.0);
  }
  if (p >= 3) {
    for (const int sign : p % 2 == 0 ? std::vector<int>{1, -1} : std::vector<int>{1}) {
      const auto [bc, hc] = special_point(p, sign);
      if (inside(beta, bc) && inside(h, hc)) return snap(bc, hc);
    }
    const auto distance = [](const PrintedValue& box, double v) {
      const double width = box.upper - box.lower;
      if (width == 0.0) return v == box.value ? 0.0 : kInf;
      return std::abs(v - box.value) / width;
    };
    double best = kInf;
    std::pair<double, double> candidate;
    if (beta.value > special_point(p).first) {
      for (const double f : critical_fields(p, beta.value)) {
        if (inside(h, f) && distance(h, f) < best) {
          best = distance(h, f);
          candidate = {beta.value, f};
        }
      }
    }
    if (h.value != 0.0) {
      for (const double b : critical_betas(p, h.value)) {
        if (inside(beta, b) && distance(beta, b) < best) {
          best = distance(beta, b);
          candidate = {b, h.value};
        }
      }
    } else if (p % 2 == 1 && inside(beta, beta_tilde(p)) && distance(beta, beta_tilde(p)) < best) {
      // odd p: the curve meets h = 0 only at the threshold
      best = distance(beta, beta_tilde(p));
      candidate = {beta_tilde(p), 0.0};
    }
    if (best < kInf) return snap(candidate.first, candidate.second);
  }
  return ResolvedPoint{beta.value, h.value, false, analyze(beta.value, h.value, p, tol)};
}

}  // namespace pspin
