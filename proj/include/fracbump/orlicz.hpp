#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fracbump/grid.hpp"

namespace fracbump {

/// coeff · t^p, p >= 1. p == 1 is the linear gauge: usable for averages but
/// not superlinear, so not a Young function in the strict sense.
struct PowerFamily {
  double p;
  double coeff = 1.0;
};

/// t^p · log(e + t)^r. Requires p > 1, or p == 1 with r > 0.
struct PowerLogFamily {
  double p;
  double r;
};

/// e^t - 1.
struct ExpMinusOneFamily {};

/// Piecewise-linear interpolation of monotone samples, starting at (0, 0);
/// extended linearly with the last slope.
struct TabulatedFamily {
  std::vector<double> t;
  std::vector<double> a;
  std::string source;
};

class YoungFunction {
 public:
  using Family = std::variant<PowerFamily, PowerLogFamily, ExpMinusOneFamily, TabulatedFamily>;

  static YoungFunction power(double p, double coeff = 1.0);
  static YoungFunction power_log(double p, double r);
  static YoungFunction exp_minus_one();
  /// Samples must have strictly increasing t >= 0 and nondecreasing a >= 0;
  /// (0, 0) is prepended when missing.
  static YoungFunction tabulated(std::vector<double> t, std::vector<double> a,
                                 std::string source = {});

  double operator()(double t) const;
  /// A^{-1}(s) for s >= 0.
  double inverse(double s) const;
  /// log A(e^u), evaluated without overflowing for large u.
  double log_eval(double u) const;

  const Family& family() const { return family_; }
  /// Canonical config-string form, e.g. `powerlog(p=2, r=1.5)`.
  std::string tag() const;
  /// False for the linear gauge power(p=1).
  bool superlinear() const;

 private:
  explicit YoungFunction(Family f) : family_(std::move(f)) {}
  Family family_;
};

double eval(const YoungFunction& a, double t);
double inverse(const YoungFunction& a, double s);

/// Closed form for power (exact) and powerlog (the equivalent family
/// t^{p'} / log(e+t)^{p' r / p}); numeric Legendre transform otherwise.
YoungFunction complementary(const YoungFunction& a);

/// Numeric Legendre transform sup_{s>0}(st - A(s)) at a single t.
double legendre_transform(const YoungFunction& a, double t);

/// Parses `power(p=2)`, `power(p=2, c=0.25)`, `powerlog(p=2, r=1.5)`, `expm1`, `table(path=...)`.
YoungFunction parse_young(std::string_view spec);

/// Sampled Young-function axioms on a log grid over [1e-3, 1e6].
struct YoungCheck {
  bool zero_at_zero = true;
  bool increasing = true;
  bool convex = true;
  bool doubling_ratio_ok = true;  // A(2t) >= 2A(t)
  bool slope_increasing = true;   // A(t)/t nondecreasing
  bool ok() const {
    return zero_at_zero && increasing && convex && doubling_ratio_ok && slope_increasing;
  }
};
YoungCheck check_young(const YoungFunction& a);

/// Smallest λ > 0 with mean_i A(|v_i| / λ) <= 1, by bracketing and bisection.
template <typename Gauge>
double luxemburg_norm_of(std::span<const double> values, const Gauge& gauge) {
  double vmax = 0.0;
  for (double v : values) vmax = std::fmax(vmax, std::fabs(v));
  if (vmax == 0.0) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(values.size());
  const auto feasible = [&](double lambda) {
    double s = 0.0;
    for (double v : values) s += gauge(std::fabs(v) / lambda);
    return s * inv_n <= 1.0;
  };
  double hi = vmax;
  while (!feasible(hi)) hi *= 2.0;
  double lo = hi * 0.5;
  while (feasible(lo)) {
    hi = lo;
    lo *= 0.5;
    if (lo < vmax * 1e-300) return hi;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

/// ‖f‖_{A,Q} with the normalized counting measure on Q's cells.
double luxemburg_norm(const GridFunction& f, const YoungFunction& a, const CubeRegion& q);

struct HolderCheck {
  double ratio;  // ‖fg‖_C / (‖f‖_A ‖g‖_B)
  double kappa;  // max sampled A^{-1} B^{-1} / C^{-1}
};

/// Inverse-product constant κ = max A^{-1}(t) B^{-1}(t) / C^{-1}(t) over a
/// 64-point log grid on [t_lo, t_hi].
double inverse_product_constant(const YoungFunction& a, const YoungFunction& b,
                                const YoungFunction& c, double t_lo = 1e-4, double t_hi = 1e8);

HolderCheck generalized_holder_check(const GridFunction& f, const GridFunction& g,
                                     const YoungFunction& a, const YoungFunction& b,
                                     const YoungFunction& c, const CubeRegion& q);

enum class BpVerdict { InBp, NotInBp, InBpq, NotInBpq };
std::string to_string(BpVerdict v);

/// Quadrature diagnostics for ∫_1^∞ kernel(t) dt/t in the variable u = log t.
struct BpDiagnostic {
  std::vector<double> upper_limits;      // U_j in u = log t
  std::vector<double> partial_integrals; // ∫_0^{U_j}
  double tail_exponent = 0.0;            // s in kernel ~ u^{-s} at the far end
  double tail_estimate = 0.0;            // U k(U) / (s - 1) when s > 1
  bool convergent = false;
};

struct BpResult {
  BpVerdict verdict;
  bool closed_form;  // verdict from the family's exponents, not from quadrature
  BpDiagnostic diagnostic;
};

/// Kernel A(t)/t^p (q absent) or A(t)^{q/p}/t^q.
BpDiagnostic bp_quadrature(const YoungFunction& a, double p, std::optional<double> q);
BpResult bp_membership(const YoungFunction& a, double p, std::optional<double> q = std::nullopt);

}  // namespace fracbump
