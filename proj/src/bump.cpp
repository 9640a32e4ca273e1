#include "fracbump/bump.hpp"

#include <cmath>
#include <type_traits>
#include <variant>

namespace fracbump {

void BumpParams::validate(int dim) const {
  if (!(p > 1.0 && q >= p && std::isfinite(q))) throw Error("bump functionals need 1 < p <= q < inf");
  if (!(alpha > 0.0 && alpha < dim)) throw Error("bump functionals need 0 < alpha < dim");
  if (m < 0) throw Error("bump functionals need m >= 0");
}

namespace {

nlohmann::json echo(const BumpParams& prm) {
  return {{"p", prm.p}, {"q", prm.q}, {"alpha", prm.alpha}, {"m", prm.m}};
}

double norm_on(const std::vector<double>& vals, const YoungFunction& a) {
  return luxemburg_norm_of(vals, [&](double t) { return a(t); });
}

// Values of w^{e} (b - b_Q)^m on the cells of q; the b factor is skipped when `with_b` is false.
std::vector<double> factor_values(const GridFunction& w, double e, const GridFunction* b, int m,
                                  const CubeRegion& q) {
  std::vector<double> out;
  out.reserve(q.cell_count());
  const double bq = b ? cube_average(*b, q) : 0.0;
  q.for_each_cell([&](std::size_t idx) {
    double v = std::pow(w[idx], e);
    if (b) v *= std::pow((*b)[idx] - bq, m);
    out.push_back(v);
  });
  return out;
}

void check_inputs(const GridFunction& mu, const GridFunction& nu, const BumpParams& prm) {
  require_same_domain(mu, nu);
  require_weight(mu, "mu");
  require_weight(nu, "nu");
  prm.validate(mu.domain().dim());
}

// Generic two-factor product |Q|^e ‖μ^{1/q} [b]‖_U ‖ν^{-1/p} [b]‖_V.
BumpReport product_report(std::string name, const GridFunction& mu, const GridFunction& nu,
                          const GridFunction* b_on_mu, const GridFunction* b_on_nu,
                          const BumpParams& prm, const YoungFunction& u, const YoungFunction& v,
                          const std::vector<CubeRegion>& cubes, nlohmann::json params) {
  const double e = prm.cube_exponent(mu.domain().dim());
  std::vector<double> vals;
  vals.reserve(cubes.size());
  for (const auto& q : cubes) {
    const double left = norm_on(factor_values(mu, 1.0 / prm.q, b_on_mu, prm.m, q), u);
    const double right = norm_on(factor_values(nu, -1.0 / prm.p, b_on_nu, prm.m, q), v);
    vals.push_back(std::pow(q.measure(), e) * left * right);
  }
  return make_report(std::move(name), cubes, std::move(vals), std::move(params));
}

}  // namespace

BumpReport bump_term_left(const GridFunction& mu, const GridFunction& nu, const GridFunction& b,
                          const BumpParams& prm, const YoungFunction& a, const YoungFunction& bb,
                          const std::vector<CubeRegion>& cubes) {
  check_inputs(mu, nu, prm);
  require_same_domain(mu, b);
  auto params = echo(prm);
  params["A"] = a.tag();
  params["B"] = bb.tag();
  return product_report("bump_term_left", mu, nu, nullptr, &b, prm, a, bb, cubes, params);
}

BumpReport bump_term_right(const GridFunction& mu, const GridFunction& nu, const GridFunction& b,
                           const BumpParams& prm, const YoungFunction& c, const YoungFunction& d,
                           const std::vector<CubeRegion>& cubes) {
  check_inputs(mu, nu, prm);
  require_same_domain(mu, b);
  auto params = echo(prm);
  params["C"] = c.tag();
  params["D"] = d.tag();
  return product_report("bump_term_right", mu, nu, &b, nullptr, prm, c, d, cubes, params);
}

NecessityPair bump_necessity_quantities(const GridFunction& mu, const GridFunction& nu,
                                        const GridFunction& b, const BumpParams& prm,
                                        const std::vector<CubeRegion>& cubes) {
  check_inputs(mu, nu, prm);
  const auto lq = YoungFunction::power(prm.q);
  const auto lp = YoungFunction::power(prm.p_conj());
  auto left = bump_term_left(mu, nu, b, prm, lq, lp, cubes);
  auto right = bump_term_right(mu, nu, b, prm, lq, lp, cubes);
  left.name = "necessity_left";
  right.name = "necessity_right";
  return {std::move(left), std::move(right)};
}

InverseGrowth inverse_growth(const YoungFunction& a) {
  return std::visit(
      [](const auto& f) -> InverseGrowth {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, PowerFamily>) {
          return {1.0 / f.p, 0.0};
        } else if constexpr (std::is_same_v<F, PowerLogFamily>) {
          return {1.0 / f.p, -f.r / f.p};
        } else if constexpr (std::is_same_v<F, ExpMinusOneFamily>) {
          return {0.0, 1.0};
        } else {
          return {1.0, 0.0};  // tables continue linearly
        }
      },
      a.family());
}

Compatibility young_compatibility(const YoungFunction& x, const YoungFunction& phi, int m,
                                  const YoungFunction& b) {
  constexpr int kPoints = 64;
  const double lo = std::log(1e2), hi = std::log(1e8);
  Compatibility c;
  for (int k = 0; k < kPoints; ++k) {
    const double t = std::exp(lo + (hi - lo) * k / (kPoints - 1));
    c.kappa = std::max(c.kappa, x.inverse(t) * std::pow(phi.inverse(t), m) / b.inverse(t));
  }
  const auto gx = inverse_growth(x), gp = inverse_growth(phi), gb = inverse_growth(b);
  c.ratio_growth = {gx.power + m * gp.power - gb.power, gx.log_power + m * gp.log_power - gb.log_power};
  constexpr double kEps = 1e-12;
  const bool grows = c.ratio_growth.power > kEps ||
                     (c.ratio_growth.power > -kEps && c.ratio_growth.log_power > kEps);
  if (grows || !std::isfinite(c.kappa)) {
    throw Error("incompatible Young triple: X=" + x.tag() + ", Phi=" + phi.tag() + ", B=" + b.tag() +
                " (ratio grows like t^" + std::to_string(c.ratio_growth.power) + " (log t)^" +
                std::to_string(c.ratio_growth.log_power) + ")");
  }
  return c;
}

BumpReport bump_osc_reduced(const GridFunction& mu, const GridFunction& nu, const BumpParams& prm,
                            const OscBumps& f, const std::vector<CubeRegion>& cubes) {
  check_inputs(mu, nu, prm);
  const auto kx = young_compatibility(f.x, f.phi, prm.m, f.b);
  const auto ky = young_compatibility(f.y, f.phi, prm.m, f.c);
  const double e = prm.cube_exponent(mu.domain().dim());
  std::vector<double> vals;
  for (const auto& q : cubes) {
    const auto mv = factor_values(mu, 1.0 / prm.q, nullptr, 0, q);
    const auto nv = factor_values(nu, -1.0 / prm.p, nullptr, 0, q);
    vals.push_back(std::pow(q.measure(), e) *
                   (norm_on(mv, f.a) * norm_on(nv, f.x) + norm_on(mv, f.y) * norm_on(nv, f.d)));
  }
  auto params = echo(prm);
  params["A"] = f.a.tag();
  params["B"] = f.b.tag();
  params["C"] = f.c.tag();
  params["D"] = f.d.tag();
  params["X"] = f.x.tag();
  params["Y"] = f.y.tag();
  params["Phi"] = f.phi.tag();
  params["kappa_X"] = kx.kappa;
  params["kappa_Y"] = ky.kappa;
  return make_report("bump_osc_reduced", cubes, std::move(vals), std::move(params));
}

OscBumps log_bumps(const BumpParams& prm, double delta) {
  if (!(delta > 0.0)) throw Error("log bumps need delta > 0");
  const double pc = prm.p_conj(), q = prm.q, m = prm.m;
  const auto b = YoungFunction::power_log(pc, pc - 1.0 + delta);
  const auto c = YoungFunction::power_log(q, q - 1.0 + delta);
  return {c,
          b,
          c,
          b,
          YoungFunction::power_log(pc, (m + 1.0) * pc - 1.0 + delta),
          YoungFunction::power_log(q, (m + 1.0) * q - 1.0 + delta),
          YoungFunction::exp_minus_one()};
}

LogBumpTerms bump_log_terms(const GridFunction& mu, const GridFunction& nu, const BumpParams& prm,
                            double delta, const std::vector<CubeRegion>& cubes) {
  check_inputs(mu, nu, prm);
  const auto f = log_bumps(prm, delta);
  const double pc = prm.p_conj(), q = prm.q;
  auto params = echo(prm);
  params["delta"] = delta;
  const auto product = [&](const char* name, const YoungFunction& u, const YoungFunction& v) {
    auto p = params;
    p["mu_bump"] = u.tag();
    p["nu_bump"] = v.tag();
    return product_report(name, mu, nu, nullptr, nullptr, prm, u, v, cubes, p);
  };
  return {product("log_bump_term1", f.c, f.x),
          product("log_bump_term2", f.y, f.b),
          product("log_bump_prior", YoungFunction::power_log(q, 2.0 * q - 1.0 + delta),
                  YoungFunction::power_log(pc, 2.0 * pc - 1.0 + delta))};
}

BumpReport bump_log_necessity(const GridFunction& mu, const GridFunction& nu, const BumpParams& prm,
                      const std::vector<CubeRegion>& cubes) {
  check_inputs(mu, nu, prm);
  const double pc = prm.p_conj();
  const auto bump = prm.m == 0 ? YoungFunction::power(pc) : YoungFunction::power_log(pc, prm.m * pc);
  auto params = echo(prm);
  params["nu_bump"] = bump.tag();
  return product_report("necessity_loglog", mu, nu, nullptr, nullptr, prm, YoungFunction::power(prm.q),
                        bump, cubes, params);
}

}  // namespace fracbump
