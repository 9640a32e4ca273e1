#include "fracbump/weights.hpp"

#include <cmath>

#include "fracbump/spec_string.hpp"

namespace fracbump {

WeightSpec WeightSpec::constant(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error("const weight needs a positive value");
  return {Kind::Constant, c, {}, {}};
}

WeightSpec WeightSpec::power(double a) {
  if (!std::isfinite(a)) throw Error("power weight needs a finite exponent");
  return {Kind::Power, a, {}, {}};
}

WeightSpec WeightSpec::product(std::vector<WeightSpec> factors) {
  if (factors.empty()) throw Error("product weight needs at least one factor");
  return {Kind::Product, 1.0, std::move(factors), {}};
}

WeightSpec WeightSpec::table(std::string path) { return {Kind::Table, 1.0, {}, std::move(path)}; }

std::string WeightSpec::tag() const {
  switch (kind) {
    case Kind::Constant: return "const(c=" + format_number(value) + ")";
    case Kind::Power: return "power(a=" + format_number(value) + ")";
    case Kind::Table: return "table(path=" + path + ")";
    case Kind::Product: {
      std::string s = "product(";
      for (std::size_t k = 0; k < factors.size(); ++k) s += (k ? ", " : "") + factors[k].tag();
      return s + ")";
    }
  }
  return "?";
}

GridFunction WeightSpec::realize(const Domain& domain) const {
  GridFunction w(domain, 1.0);
  switch (kind) {
    case Kind::Constant: w = GridFunction(domain, value); break;
    case Kind::Power: {
      const double floor = 0.5 * domain.h();
      const double a = value;
      const int dim = domain.dim();
      w = GridFunction::sample(domain, [&](const Point& x) {
        const double r = dim == 2 ? std::hypot(x[0], x[1]) : std::fabs(x[0]);
        return std::pow(std::max(r, floor), a);
      });
      break;
    }
    case Kind::Product:
      for (const auto& f : factors) w *= f.realize(domain);
      break;
    case Kind::Table: w = load_grid_function(path, domain); break;
  }
  require_weight(w, tag().c_str());
  return w;
}

WeightSpec parse_weight(std::string_view spec) {
  const CallExpr call = parse_call(spec);
  if (call.name == "const") {
    call.allow_only({"c"});
    if (!call.positional.empty()) throw Error("const: unexpected positional argument");
    return WeightSpec::constant(call.number_or("c", 1.0));
  }
  if (call.name == "power") {
    call.allow_only({"a"});
    if (!call.positional.empty()) throw Error("power: unexpected positional argument");
    return WeightSpec::power(call.number("a"));
  }
  if (call.name == "table") {
    call.allow_only({"path"});
    return WeightSpec::table(call.text("path"));
  }
  if (call.name == "product") {
    call.allow_only({});
    std::vector<WeightSpec> factors;
    for (const auto& arg : call.positional) factors.push_back(parse_weight(arg));
    return WeightSpec::product(std::move(factors));
  }
  throw Error("unknown weight '" + call.name + "'");
}

namespace {

double power_average(const GridFunction& w, const CubeRegion& q, double e) {
  double s = 0.0;
  q.for_each_cell([&](std::size_t idx) { s += std::pow(w[idx], e); });
  return s / static_cast<double>(q.cell_count());
}

double mean_oscillation(const GridFunction& b, const CubeRegion& q) {
  const double bq = cube_average(b, q);
  double s = 0.0;
  q.for_each_cell([&](std::size_t idx) { s += std::fabs(b[idx] - bq); });
  return s / static_cast<double>(q.cell_count());
}

}  // namespace

BumpReport apq_constant(const GridFunction& w, double p, double q,
                        const std::vector<CubeRegion>& cubes) {
  if (!(p > 1.0 && q > p && std::isfinite(q))) throw Error("A_{p,q} needs 1 < p < q < inf");
  require_weight(w, "A_{p,q} weight");
  const double pc = p / (p - 1.0);
  std::vector<double> v;
  for (const auto& c : cubes) {
    v.push_back(power_average(w, c, q) * std::pow(power_average(w, c, -pc), q / pc));
  }
  return make_report("apq_constant", cubes, std::move(v), {{"p", p}, {"q", q}});
}

BumpReport two_weight_ap_constant(const GridFunction& mu, const GridFunction& nu, double p,
                                  const std::vector<CubeRegion>& cubes) {
  if (!(p > 1.0 && std::isfinite(p))) throw Error("two-weight A_p needs 1 < p < inf");
  require_same_domain(mu, nu);
  require_weight(mu, "mu");
  require_weight(nu, "nu");
  const double pc = p / (p - 1.0);
  std::vector<double> v;
  for (const auto& c : cubes) {
    v.push_back(cube_average(mu, c) * std::pow(power_average(nu, c, 1.0 - pc), p - 1.0));
  }
  return make_report("two_weight_ap_constant", cubes, std::move(v), {{"p", p}});
}

BumpReport doubling_constant(const GridFunction& mu, const std::vector<CubeRegion>& cubes) {
  require_weight(mu, "mu");
  const Domain& d = mu.domain();
  std::vector<CubeRegion> used;
  std::vector<double> v;
  for (const auto& c : cubes) {
    const std::size_t s = c.side();
    if (s % 2 != 0) continue;
    const auto o = c.origin();
    const std::size_t half = s / 2;
    bool fits = o[0] >= half && o[0] + s + half <= d.n_cells();
    if (d.dim() == 2) fits = fits && o[1] >= half && o[1] + s + half <= d.n_cells();
    if (!fits) continue;
    const CubeRegion big(d, {o[0] - half, d.dim() == 2 ? o[1] - half : 0}, 2 * s);
    used.push_back(c);
    v.push_back(cube_integral(mu, big) / cube_integral(mu, c));
  }
  if (used.empty()) throw Error("doubling constant: no cube has its double inside the box");
  return make_report("doubling_constant", std::move(used), std::move(v));
}

BumpReport bmo_norm(const GridFunction& b, const std::vector<CubeRegion>& cubes) {
  std::vector<double> v;
  for (const auto& c : cubes) v.push_back(mean_oscillation(b, c));
  return make_report("bmo_norm", cubes, std::move(v));
}

BumpReport weighted_bmo_norm(const GridFunction& b, const GridFunction& eta,
                             const std::vector<CubeRegion>& cubes) {
  require_same_domain(b, eta);
  require_weight(eta, "eta");
  std::vector<double> v;
  for (const auto& c : cubes) {
    v.push_back(mean_oscillation(b, c) * c.measure() / cube_integral(eta, c));
  }
  return make_report("weighted_bmo_norm", cubes, std::move(v));
}

BumpReport osc_phi_norm(const GridFunction& b, const YoungFunction& phi,
                        const std::vector<CubeRegion>& cubes) {
  if (!phi.superlinear()) throw Error("Osc(Phi) needs a superlinear Young function, got " + phi.tag());
  std::vector<double> v;
  for (const auto& c : cubes) {
    auto vals = cube_values(b, c);
    const double bq = cube_average(b, c);
    for (double& x : vals) x -= bq;
    v.push_back(luxemburg_norm_of(vals, [&](double t) { return phi(t); }));
  }
  return make_report("osc_phi_norm", cubes, std::move(v), {{"phi", phi.tag()}});
}

}  // namespace fracbump
