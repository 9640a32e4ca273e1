#include "fracbump/orlicz.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "fracbump/spec_string.hpp"

namespace fracbump {

namespace {

constexpr double kE = 2.718281828459045235;
constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// log(log(e + e^u)) without overflow.
double log_log_e_plus_exp(double u) {
  const double l = u > 1.0 ? u + std::log1p(std::exp(1.0 - u)) : std::log(kE + std::exp(u));
  return std::log(l);
}

double tabulated_eval(const TabulatedFamily& tab, double t) {
  const auto& ts = tab.t;
  const auto& as = tab.a;
  const std::size_t n = ts.size();
  if (t >= ts.back()) {
    const double slope = (as[n - 1] - as[n - 2]) / (ts[n - 1] - ts[n - 2]);
    return as[n - 1] + slope * (t - ts[n - 1]);
  }
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - ts.begin());
  const double w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
  return as[k - 1] + w * (as[k] - as[k - 1]);
}

double tabulated_inverse(const TabulatedFamily& tab, double s) {
  const auto& ts = tab.t;
  const auto& as = tab.a;
  const std::size_t n = ts.size();
  if (s >= as.back()) {
    const double slope = (as[n - 1] - as[n - 2]) / (ts[n - 1] - ts[n - 2]);
    return ts[n - 1] + (s - as[n - 1]) / slope;
  }
  // first node with a >= s; flat stretches resolve to their left end
  const auto it = std::lower_bound(as.begin(), as.end(), s);
  const std::size_t k = static_cast<std::size_t>(it - as.begin());
  if (k == 0 || as[k] == s) return ts[k];
  const double w = (s - as[k - 1]) / (as[k] - as[k - 1]);
  return ts[k - 1] + w * (ts[k] - ts[k - 1]);
}

double bisect_inverse(const YoungFunction& a, double s) {
  double hi = 1.0;
  while (a(hi) < s) hi *= 2.0;
  double lo = 0.0;
  if (hi > 1.0) lo = 0.5 * hi;
  for (int it = 0; it < 400 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (a(mid) < s ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Numeric Legendre transform tabulated on a log grid of t.
YoungFunction tabulate_complement(const YoungFunction& a, double t_max, std::string source) {
  constexpr std::size_t kPoints = 2400;
  const double t_min = 1e-6;
  std::vector<double> ts{0.0};
  std::vector<double> vs{0.0};
  const double ratio = std::pow(t_max / t_min, 1.0 / static_cast<double>(kPoints - 1));
  double t = t_min;
  for (std::size_t k = 0; k < kPoints; ++k, t *= ratio) {
    ts.push_back(t);
    vs.push_back(std::max(legendre_transform(a, t), vs.back()));
  }
  // keep the table strictly convex-compatible: drop the leading flat zeros but one
  std::vector<double> t2{0.0}, v2{0.0};
  for (std::size_t k = 1; k < ts.size(); ++k) {
    if (vs[k] == 0.0 && k + 1 < ts.size() && vs[k + 1] == 0.0) continue;
    t2.push_back(ts[k]);
    v2.push_back(vs[k]);
  }
  return YoungFunction::tabulated(std::move(t2), std::move(v2), std::move(source));
}

std::vector<std::pair<double, double>> load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open table " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    std::string s(body);
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream row(s);
    double t = 0.0, v = 0.0;
    if (!(row >> t >> v)) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw Error(path + ":" + std::to_string(line_no) + ": expected 't,value'");
    }
    rows.emplace_back(t, v);
  }
  return rows;
}

}  // namespace

YoungFunction YoungFunction::power(double p, double coeff) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error("power Young function needs p >= 1");
  if (!(coeff > 0.0)) throw Error("power Young function needs a positive coefficient");
  return YoungFunction(PowerFamily{p, coeff});
}

YoungFunction YoungFunction::power_log(double p, double r) {
  if (!(p >= 1.0) || !std::isfinite(p) || !std::isfinite(r)) {
    throw Error("powerlog Young function needs p >= 1");
  }
  if (p == 1.0 && !(r > 0.0)) throw Error("powerlog with p = 1 needs r > 0");
  return YoungFunction(PowerLogFamily{p, r});
}

YoungFunction YoungFunction::exp_minus_one() { return YoungFunction(ExpMinusOneFamily{}); }

YoungFunction YoungFunction::tabulated(std::vector<double> t, std::vector<double> a,
                                       std::string source) {
  if (t.size() != a.size() || t.empty()) throw Error("tabulated Young function: bad samples");
  if (t.front() > 0.0) {
    t.insert(t.begin(), 0.0);
    a.insert(a.begin(), 0.0);
  }
  if (t.front() != 0.0 || a.front() != 0.0) {
    throw Error("tabulated Young function must start at (0, 0)");
  }
  if (t.size() < 3) throw Error("tabulated Young function needs at least two positive samples");
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (!(t[k] > t[k - 1]) || !(a[k] >= a[k - 1]) || !std::isfinite(a[k])) {
      throw Error("tabulated Young function samples must be monotone");
    }
  }
  if (!(a.back() > a[a.size() - 2])) throw Error("tabulated Young function must end increasing");
  return YoungFunction(TabulatedFamily{std::move(t), std::move(a), std::move(source)});
}

double YoungFunction::operator()(double t) const {
  if (t < 0.0) throw Error("Young function evaluated at negative t");
  return std::visit(
      Overloaded{
          [&](const PowerFamily& f) { return f.coeff * std::pow(t, f.p); },
          [&](const PowerLogFamily& f) { return std::pow(t, f.p) * std::pow(std::log(kE + t), f.r); },
          [&](const ExpMinusOneFamily&) { return std::expm1(t); },
          [&](const TabulatedFamily& f) { return tabulated_eval(f, t); },
      },
      family_);
}

double YoungFunction::inverse(double s) const {
  if (s < 0.0) throw Error("Young inverse evaluated at negative s");
  if (s == 0.0) return 0.0;
  return std::visit(
      Overloaded{
          [&](const PowerFamily& f) { return std::pow(s / f.coeff, 1.0 / f.p); },
          [&](const PowerLogFamily&) { return bisect_inverse(*this, s); },
          [&](const ExpMinusOneFamily&) { return std::log1p(s); },
          [&](const TabulatedFamily& f) { return tabulated_inverse(f, s); },
      },
      family_);
}

double YoungFunction::log_eval(double u) const {
  return std::visit(
      Overloaded{
          [&](const PowerFamily& f) { return std::log(f.coeff) + f.p * u; },
          [&](const PowerLogFamily& f) { return f.p * u + f.r * log_log_e_plus_exp(u); },
          [&](const ExpMinusOneFamily&) {
            if (u > 709.0) return kInf;
            const double t = std::exp(u);
            return t > 40.0 ? t : std::log(std::expm1(t));
          },
          [&](const TabulatedFamily& f) {
            if (u < 700.0) return std::log((*this)(std::exp(u)));
            const std::size_t n = f.t.size();
            const double slope = (f.a[n - 1] - f.a[n - 2]) / (f.t[n - 1] - f.t[n - 2]);
            return u + std::log(slope);
          },
      },
      family_);
}

std::string YoungFunction::tag() const {
  return std::visit(
      Overloaded{
          [](const PowerFamily& f) {
            std::string s = "power(p=" + format_number(f.p);
            if (f.coeff != 1.0) s += ", c=" + format_number(f.coeff);
            return s + ")";
          },
          [](const PowerLogFamily& f) {
            return "powerlog(p=" + format_number(f.p) + ", r=" + format_number(f.r) + ")";
          },
          [](const ExpMinusOneFamily&) { return std::string("expm1"); },
          [](const TabulatedFamily& f) {
            return f.source.empty() ? "table(n=" + std::to_string(f.t.size()) + ")"
                                    : "table(path=" + f.source + ")";
          },
      },
      family_);
}

bool YoungFunction::superlinear() const {
  if (const auto* f = std::get_if<PowerFamily>(&family_)) return f->p > 1.0;
  return true;
}

double eval(const YoungFunction& a, double t) { return a(t); }
double inverse(const YoungFunction& a, double s) { return a.inverse(s); }

double legendre_transform(const YoungFunction& a, double t) {
  if (t <= 0.0) return 0.0;
  // g(s) = st - A(s) is concave with g(0) = 0; bracket the maximiser in [0, hi].
  double hi = 1.0;
  while (a(hi) < hi * t) {
    hi *= 2.0;
    if (hi > 1e300) throw Error("Legendre transform diverges (A grows too slowly)");
  }
  const auto g = [&](double s) { return s * t - a(s); };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0;
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double g1 = g(x1), g2 = g(x2);
  for (int it = 0; it < 300 && hi - lo > 1e-15 * hi; ++it) {
    if (g1 < g2) {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + phi * (hi - lo);
      g2 = g(x2);
    } else {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - phi * (hi - lo);
      g1 = g(x1);
    }
  }
  return std::max({0.0, g1, g2, g(lo), g(hi)});
}

YoungFunction complementary(const YoungFunction& a) {
  return std::visit(
      Overloaded{
          [&](const PowerFamily& f) {
            if (f.p == 1.0) throw Error("the linear gauge has no finite complementary function");
            const double pc = f.p / (f.p - 1.0);
            const double coeff =
                std::pow(f.coeff, 1.0 - pc) * (f.p - 1.0) * std::pow(f.p, -pc);
            return YoungFunction::power(pc, coeff);
          },
          [&](const PowerLogFamily& f) {
            if (f.p == 1.0) {
              // the maximiser for slope t sits near exp(t^{1/r}); stop before it leaves double range
              const double t_max = 0.999 * std::pow(std::log(kE + 1e100), f.r);
              return tabulate_complement(a, t_max, "complement of " + a.tag());
            }
            const double pc = f.p / (f.p - 1.0);
            return YoungFunction::power_log(pc, -pc * f.r / f.p);
          },
          [&](const ExpMinusOneFamily&) {
            return tabulate_complement(a, 1e12, "complement of expm1");
          },
          [&](const TabulatedFamily& f) {
            if (f.t.size() < 64) {
              throw Error("tabulated Young function needs at least 64 samples for a complement");
            }
            const std::size_t n = f.t.size();
            const double slope = (f.a[n - 1] - f.a[n - 2]) / (f.t[n - 1] - f.t[n - 2]);
            // beyond the final slope the transform is infinite
            return tabulate_complement(a, 0.999 * slope, "complement of " + a.tag());
          },
      },
      a.family());
}

YoungFunction parse_young(std::string_view spec) {
  const CallExpr call = parse_call(spec);
  if (!call.positional.empty()) throw Error(call.name + ": unexpected positional argument");
  if (call.name == "power") {
    call.allow_only({"p", "c"});
    return YoungFunction::power(call.number("p"), call.number_or("c", 1.0));
  }
  if (call.name == "powerlog") {
    call.allow_only({"p", "r"});
    return YoungFunction::power_log(call.number("p"), call.number("r"));
  }
  if (call.name == "expm1") {
    call.allow_only({});
    return YoungFunction::exp_minus_one();
  }
  if (call.name == "table") {
    call.allow_only({"path"});
    const std::string& path = call.text("path");
    std::vector<double> t, v;
    for (const auto& [x, y] : load_table(path)) {
      t.push_back(x);
      v.push_back(y);
    }
    return YoungFunction::tabulated(std::move(t), std::move(v), path);
  }
  throw Error("unknown Young function '" + call.name + "'");
}

YoungCheck check_young(const YoungFunction& a) {
  YoungCheck c;
  c.zero_at_zero = a(0.0) == 0.0;
  constexpr int kSamples = 200;
  std::vector<double> ts(kSamples), vs(kSamples);
  for (int k = 0; k < kSamples; ++k) {
    ts[k] = std::pow(10.0, -3.0 + 9.0 * k / (kSamples - 1));
    vs[k] = a(ts[k]);
  }
  constexpr double tol = 1e-9;
  double prev_slope = vs[0] / ts[0];
  for (int k = 1; k < kSamples; ++k) {
    if (vs[k] < vs[k - 1]) c.increasing = false;
    const double chord = (vs[k] - vs[k - 1]) / (ts[k] - ts[k - 1]);
    if (chord < prev_slope * (1.0 - tol) - 1e-300) c.convex = false;
    prev_slope = chord;
    if (vs[k] / ts[k] < vs[k - 1] / ts[k - 1] * (1.0 - tol)) c.slope_increasing = false;
  }
  if (!(vs.back() / ts.back() > vs.front() / ts.front() * (1.0 + tol))) {
    c.slope_increasing = false;
  }
  for (int k = 0; k < kSamples; ++k) {
    if (a(2.0 * ts[k]) < 2.0 * vs[k] * (1.0 - tol)) c.doubling_ratio_ok = false;
  }
  return c;
}

double luxemburg_norm(const GridFunction& f, const YoungFunction& a, const CubeRegion& q) {
  if (!(f.domain() == q.domain())) throw Error("cube lies on a different domain");
  std::vector<double> values;
  values.reserve(q.cell_count());
  q.for_each_cell([&](std::size_t idx) { values.push_back(f[idx]); });
  return luxemburg_norm_of(values, a);
}

double inverse_product_constant(const YoungFunction& a, const YoungFunction& b,
                                const YoungFunction& c, double t_lo, double t_hi) {
  constexpr int kSamples = 64;
  double kappa = 0.0;
  for (int k = 0; k < kSamples; ++k) {
    const double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(k) / (kSamples - 1));
    kappa = std::max(kappa, a.inverse(t) * b.inverse(t) / c.inverse(t));
  }
  return kappa;
}

HolderCheck generalized_holder_check(const GridFunction& f, const GridFunction& g,
                                     const YoungFunction& a, const YoungFunction& b,
                                     const YoungFunction& c, const CubeRegion& q) {
  require_same_domain(f, g);
  const double num = luxemburg_norm(f * g, c, q);
  const double den = luxemburg_norm(f, a, q) * luxemburg_norm(g, b, q);
  HolderCheck out{0.0, inverse_product_constant(a, b, c)};
  if (den == 0.0) {
    if (num > 0.0) throw Error("generalized Hölder check: zero denominator with nonzero product");
    return out;
  }
  out.ratio = num / den;
  return out;
}

std::string to_string(BpVerdict v) {
  switch (v) {
    case BpVerdict::InBp: return "InBp";
    case BpVerdict::NotInBp: return "NotInBp";
    case BpVerdict::InBpq: return "InBpq";
    case BpVerdict::NotInBpq: return "NotInBpq";
  }
  return "?";
}

namespace {

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * std::max(tol, 1e-10 * std::fabs(whole)) ||
      !std::isfinite(delta)) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 16);
}

}  // namespace

BpDiagnostic bp_quadrature(const YoungFunction& a, double p, std::optional<double> q) {
  if (!(p > 1.0)) throw Error("B_p classification needs p > 1");
  if (q && *q < p) throw Error("B_{p,q} classification needs q >= p");
  const double outer = q ? *q / p : 1.0;
  const double rate = q ? *q : p;
  const auto log_kernel = [&](double u) { return outer * a.log_eval(u) - rate * u; };
  // ∫_1^∞ k(t) dt/t = ∫_0^∞ k(e^u) du; octaves in u are integrated in v = log u.
  BpDiagnostic d;
  double total = integrate([&](double u) { return std::exp(log_kernel(u)); }, 0.0, 1.0, 1e-12);
  d.upper_limits.push_back(1.0);
  d.partial_integrals.push_back(total);
  constexpr int kOctaves = 40;
  for (int j = 1; j <= kOctaves && std::isfinite(total); ++j) {
    const double v0 = std::log(std::ldexp(1.0, j - 1));
    const double v1 = std::log(std::ldexp(1.0, j));
    const auto integrand = [&](double v) {
      const double u = std::exp(v);
      return std::exp(log_kernel(u) + v);
    };
    total += integrate(integrand, v0, v1, 1e-12 * std::max(total, 1e-300));
    d.upper_limits.push_back(std::ldexp(1.0, j));
    d.partial_integrals.push_back(total);
  }
  const double u_end = std::ldexp(1.0, kOctaves);
  const double k_end = log_kernel(u_end);
  const double k_half = log_kernel(0.5 * u_end);
  d.tail_exponent = std::isfinite(k_end) && std::isfinite(k_half)
                        ? -(k_end - k_half) / std::log(2.0)
                        : -kInf;
  if (std::isnan(d.tail_exponent)) d.tail_exponent = -kInf;
  d.convergent = std::isfinite(total) && d.tail_exponent > 1.01;
  d.tail_estimate = d.tail_exponent > 1.0 ? std::exp(k_end) * u_end / (d.tail_exponent - 1.0)
                                          : kInf;
  return d;
}

BpResult bp_membership(const YoungFunction& a, double p, std::optional<double> q) {
  BpResult out{BpVerdict::NotInBp, true, bp_quadrature(a, p, q)};
  const double outer = q ? *q / p : 1.0;
  bool in = false;
  const auto close = [](double x, double y) { return std::fabs(x - y) <= 1e-12 * std::fabs(y); };
  if (const auto* f = std::get_if<PowerFamily>(&a.family())) {
    in = f->p < p && !close(f->p, p);
  } else if (const auto* f = std::get_if<PowerLogFamily>(&a.family())) {
    in = close(f->p, p) ? outer * f->r < -1.0 : f->p < p;
  } else if (std::holds_alternative<ExpMinusOneFamily>(a.family())) {
    in = false;
  } else {
    out.closed_form = false;
    in = out.diagnostic.convergent;
  }
  if (q) {
    out.verdict = in ? BpVerdict::InBpq : BpVerdict::NotInBpq;
  } else {
    out.verdict = in ? BpVerdict::InBp : BpVerdict::NotInBp;
  }
  return out;
}

}  // namespace fracbump
