#include "fracbump/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fracbump/dyadic.hpp"
#include "fracbump/operators.hpp"
#include "fracbump/orlicz.hpp"
#include "fracbump/spec_string.hpp"
#include "fracbump/weights.hpp"

namespace fracbump {

namespace {

// Platform-independent uniform draws from a seeded engine.
struct Stream {
  std::mt19937_64 gen;
  Stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    gen.seed(seq);
  }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * static_cast<double>(gen() >> 11) * 0x1.0p-53;
  }
};

// JSON has no infinity; non-finite values are written as the string "inf"
nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf"); }

bool within_factor(double a, double b, double factor) {
  if (a == 0.0 && b == 0.0) return true;
  if (!(a > 0.0 && b > 0.0)) return false;
  const double r = a / b;
  return r <= factor && r >= 1.0 / factor;
}

YoungFunction young_or(const std::string& spec, const YoungFunction& fallback) {
  return spec.empty() ? fallback : parse_young(spec);
}

struct Realized {
  Domain d;
  GridFunction mu, nu, b;
};

Realized realize(const Scenario& s, const Domain& d) {
  return {d, parse_weight(s.mu).realize(d), parse_weight(s.nu).realize(d), realize_symbol(s.b, d)};
}

GridFunction spike(const Domain& d) {
  const std::size_t c = d.n_cells() / 2;
  return (1.0 / d.cell_volume()) * GridFunction::indicator(CubeRegion(d, {c, d.dim() == 2 ? c : 0}, 1));
}

// ---------------------------------------------------------------- sufficiency

struct SufficiencyPass {
  double r_op = 0.0;
  double r_sparse = 0.0;
  double r_spike = 0.0;
  BumpReport left, right;
  nlohmann::json trials = nlohmann::json::array();
};

BumpConstants bump_constants_on(const Scenario& s, const Domain& d) {
  const auto w = realize(s, d);
  const auto prm = s.params();
  prm.validate(d.dim());
  const auto bumps = log_bumps(prm, s.delta);
  const auto cubes = enumerate_cubes(DyadicLattice(d), 1);
  return {bump_term_left(w.mu, w.nu, w.b, prm, young_or(s.young_a, bumps.a), young_or(s.young_b, bumps.b), cubes),
          bump_term_right(w.mu, w.nu, w.b, prm, young_or(s.young_c, bumps.c), young_or(s.young_d, bumps.d), cubes)};
}

SufficiencyPass sufficiency_pass(const Scenario& s, const Domain& d) {
  const auto w = realize(s, d);
  const DyadicLattice lat(d);
  SufficiencyPass out;
  auto bc = bump_constants_on(s, d);
  out.left = std::move(bc.left);
  out.right = std::move(bc.right);
  if (!std::isfinite(out.left.sup) || !std::isfinite(out.right.sup)) {
    throw Error("sufficiency: bump constants are not finite");
  }
  const auto ratio = [&](const GridFunction& f, int trial, nlohmann::json& rec) {
    const double den = lp_norm(f, w.nu, s.p);
    const double num_op = lp_norm(commutator(f, w.b, s.m, s.alpha), w.mu, s.q);
    const auto fam = construct_sparse_family(f.abs(), lat, s.stopping_tau());
    const auto tf = sparse_operator(f, w.b, s.m, s.alpha, fam, false).value +
                    sparse_operator(f, w.b, s.m, s.alpha, fam, true).value;
    const double num_sp = lp_norm(tf, w.mu, s.q);
    rec = {{"trial", trial}, {"norm_f", num(den)}, {"norm_op", num(num_op)},
           {"norm_sparse", num(num_sp)}, {"family_size", fam.size()}, {"eta", fam.eta}};
    if (!std::isfinite(den) || !std::isfinite(num_op) || !std::isfinite(num_sp) || den <= 0.0) {
      throw Error("sufficiency: non-finite norm in trial " + std::to_string(trial) + ": " + rec.dump());
    }
    return std::pair{num_op / den, num_sp / den};
  };
  for (int t = 0; t < s.trials; ++t) {
    nlohmann::json rec;
    const auto [r1, r2] = ratio(smoothed_noise(d, s.seed, static_cast<std::uint64_t>(t)), t, rec);
    out.r_op = std::max(out.r_op, r1);
    out.r_sparse = std::max(out.r_sparse, r2);
    rec["ratio_op"] = r1;
    rec["ratio_sparse"] = r2;
    out.trials.push_back(rec);
  }
  nlohmann::json rec;
  out.r_spike = ratio(spike(d), -1, rec).first;
  return out;
}

// ---------------------------------------------------------------- shared helpers

std::vector<std::size_t> ball_cells(const Domain& d, const Point& c, double r) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const auto x = d.point(k);
    const double dist = d.dim() == 1 ? std::fabs(x[0] - c[0]) : std::hypot(x[0] - c[0], x[1] - c[1]);
    if (dist <= r) out.push_back(k);
  }
  return out;
}

double sum_over(const std::vector<std::size_t>& cells, const std::function<double(std::size_t)>& fn) {
  double s = 0.0;
  for (auto k : cells) s += fn(k);
  return s;
}

}  // namespace

GridFunction smoothed_noise(const Domain& d, std::uint64_t seed, std::uint64_t stream) {
  constexpr std::size_t kBase = 16;
  const Domain base(d.dim(), 0.5 * d.half_width(), kBase);
  Stream rng(seed, stream);
  GridFunction v(base);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = rng.uniform();
  for (int pass = 0; pass < 3; ++pass) {
    for (int axis = 0; axis < d.dim(); ++axis) {
      GridFunction next(base);
      for (std::size_t k = 0; k < v.size(); ++k) {
        const auto ij = base.unflat(k);
        double s = v[k];
        const std::size_t idx = ij[axis];
        auto at = ij;
        if (idx > 0) at[axis] = idx - 1, s += v[base.flat(at[0], at[1])];
        at = ij;
        if (idx + 1 < kBase) at[axis] = idx + 1, s += v[base.flat(at[0], at[1])];
        next[k] = s / 3.0;
      }
      v = std::move(next);
    }
  }
  const double inner = 0.5 * d.half_width();
  return GridFunction::sample(d, [&](const Point& x) {
    for (int a = 0; a < d.dim(); ++a)
      if (std::fabs(x[a]) > inner) return 0.0;
    return interpolate(v, x);
  });
}

Interval llogl_equivalence_interval(double a) {
  if (a == 0.0) return {1.0, 1.0};
  const double spread = std::pow(2.0, std::max(a - 1.0, 0.0)) * (1.0 + std::pow(a / std::numbers::e, a));
  return {1.0 / spread, 1.0};
}

ExperimentResult run_sufficiency(const Scenario& s) {
  ExperimentResult r{"sufficiency", scenario_json(s)};
  const Domain d = s.domain();
  const auto coarse = sufficiency_pass(s, d);
  const auto fine = sufficiency_pass(s, d.refined());
  const double bump_sum = coarse.left.sup + coarse.right.sup;
  r.measured = {{"bump_left", num(coarse.left.sup)},
                {"bump_left_argmax", coarse.left.argmax_cube().label()},
                {"bump_right", num(coarse.right.sup)},
                {"bump_right_argmax", coarse.right.argmax_cube().label()},
                {"ratio_op", num(coarse.r_op)},
                {"ratio_op_refined", num(fine.r_op)},
                {"ratio_sparse", num(coarse.r_sparse)},
                {"ratio_sparse_refined", num(fine.r_sparse)},
                {"ratio_spike", num(coarse.r_spike)},
                {"ratio_to_bump", bump_sum > 0.0 ? num(coarse.r_op / bump_sum) : nlohmann::json(nullptr)},
                {"grid_refined", 2 * s.grid}};
  r.trials = coarse.trials;
  r.checks["bump_constants_finite"] = std::isfinite(bump_sum);
  r.checks["ratio_finite"] = std::isfinite(coarse.r_op) && std::isfinite(coarse.r_sparse);
  r.checks["spike_finite"] = std::isfinite(coarse.r_spike);
  r.checks["stable_op"] = within_factor(fine.r_op, coarse.r_op, s.stability_factor);
  r.checks["stable_sparse"] = within_factor(fine.r_sparse, coarse.r_sparse, s.stability_factor);
  const auto b = realize_symbol(s.b, d);
  if (s.m >= 1 && b.max() == b.min()) {
    r.checks["zero_for_constant_symbol"] = coarse.r_op == 0.0 && fine.r_op == 0.0;
  }
  return r;
}

ExperimentResult run_sparse_necessity(const Scenario& s) {
  ExperimentResult r{"sparse_necessity", scenario_json(s)};
  const Domain d = s.domain();
  const auto w = realize(s, d);
  const auto prm = s.params();
  prm.validate(d.dim());
  const double pc = prm.p_conj();
  const int dim = d.dim();
  const DyadicLattice lat(d);
  const GridFunction sigma = w.nu.pow(1.0 - pc);  // ν^{1-p'} = ν^{-p'/p}

  // family from a weight-dependent generator so that singular weights produce deep cubes; the
  // eighth power sharpens the noise peaks enough to stop below the root
  GridFunction gen = sigma * (smoothed_noise(d, s.seed, 1000).pow(8.0) + 1e-3);
  const auto fam = construct_sparse_family(gen, lat, s.stopping_tau());

  const auto norm_ratio = [&](const GridFunction& f) {
    const double den = lp_norm(f, w.nu, s.p);
    return lp_norm(sparse_operator(f, w.b, s.m, s.alpha, fam, false).value, w.mu, s.q) / den;
  };

  struct Item {
    std::size_t k;
    double integral;  // ∫_Q |b - b_Q|^{mp'} ν^{1-p'}
  };
  std::vector<Item> items;
  std::size_t degenerate = 0;
  double c_op = 0.0;
  for (std::size_t k = 0; k < fam.size(); ++k) {
    const auto q = fam.cube(k);
    const double bq = cube_average(w.b, q);
    double bmin = INFINITY, bmax = -INFINITY;
    q.for_each_cell([&](std::size_t i) { bmin = std::min(bmin, w.b[i]), bmax = std::max(bmax, w.b[i]); });
    if (s.m >= 1 && bmin == bmax) {
      ++degenerate;
      continue;
    }
    GridFunction f(d);
    double integral = 0.0;
    q.for_each_cell([&](std::size_t i) {
      const double dev = std::pow(std::fabs(w.b[i] - bq), s.m * (pc - 1.0));
      f[i] = dev * sigma[i];
      integral += std::pow(std::fabs(w.b[i] - bq), s.m * pc) * sigma[i] * d.cell_volume();
    });
    if (integral <= 0.0) {
      ++degenerate;
      continue;
    }
    items.push_back({k, integral});
    c_op = std::max(c_op, norm_ratio(f));
  }
  for (int t = 0; t < s.trials; ++t) {
    const double ratio = norm_ratio(smoothed_noise(d, s.seed, static_cast<std::uint64_t>(t)));
    r.trials.push_back({{"trial", t}, {"ratio", num(ratio)}});
    c_op = std::max(c_op, ratio);
  }
  double worst = 0.0;
  nlohmann::json per_cube = nlohmann::json::array();
  for (const auto& it : items) {
    const auto q = fam.cube(it.k);
    const double lhs = std::pow(q.measure(), s.alpha / dim - 1.0) * it.integral *
                       std::pow(cube_integral(w.mu, q), 1.0 / s.q);
    const double rhs = c_op * std::pow(it.integral, 1.0 / s.p);
    worst = std::max(worst, lhs / rhs);
    per_cube.push_back({{"cube", q.label()}, {"lhs", num(lhs)}, {"rhs", num(rhs)}});
  }
  r.measured = {{"c_op", num(c_op)},
                {"max_ratio", num(worst)},
                {"cubes_checked", items.size()},
                {"degenerate_skipped", degenerate},
                {"family_size", fam.size()},
                {"eta", fam.eta},
                {"per_cube", per_cube}};
  r.checks["c_op_finite"] = std::isfinite(c_op);
  r.checks["max_ratio_within_tolerance"] = worst <= 1.0 + s.tolerance;
  return r;
}

ExperimentResult run_log_necessity(const Scenario& s) {
  ExperimentResult r{"log_necessity", scenario_json(s)};
  const Domain d = s.domain();
  const auto w = realize(s, d);
  const auto prm = s.params();
  prm.validate(d.dim());
  const double pc = prm.p_conj();
  const DyadicLattice lat(d);
  const auto cubes = enumerate_cubes(lat, 1);

  const auto dbl = doubling_constant(w.mu, cubes);
  if (!(dbl.sup <= s.doubling_limit)) {
    throw Error("mu is not doubling on this grid: doubling constant " + std::to_string(dbl.sup) +
                " at cube " + dbl.argmax_cube().label() + " exceeds the limit " +
                std::to_string(s.doubling_limit));
  }

  const GridFunction sigma = w.nu.pow(1.0 - pc);
  const double a = s.m * pc;
  const auto interval = llogl_equivalence_interval(a);
  const std::vector<double> deltas = {0.25, 0.5, 0.75};
  std::vector<double> kolmogorov(deltas.size(), 0.0);
  double max_gq = 0.0, ll_lo = INFINITY, ll_hi = 0.0;
  GridFunction g_root(d);
  for (const auto& q : cubes) {
    const double sq = cube_average(sigma, q);
    const auto mq = maximal(sigma * GridFunction::indicator(q), 0.0, std::nullopt, cubes);
    double gsum = 0.0;
    std::vector<double> msum(deltas.size(), 0.0);
    q.for_each_cell([&](std::size_t i) {
      const double g = std::max(0.0, std::log(mq[i] / sq));
      gsum += g;
      if (q.side() == d.n_cells()) g_root[i] = g;
      for (std::size_t k = 0; k < deltas.size(); ++k) msum[k] += std::pow(mq[i], deltas[k]);
    });
    const double n = static_cast<double>(q.cell_count());
    max_gq = std::max(max_gq, gsum / n);
    for (std::size_t k = 0; k < deltas.size(); ++k) {
      const double bound = std::pow(sq, deltas[k]) / (1.0 - deltas[k]);
      kolmogorov[k] = std::max(kolmogorov[k], msum[k] / n / bound);
    }
    double explicit_avg = 0.0;
    q.for_each_cell([&](std::size_t i) {
      explicit_avg += sigma[i] * std::pow(std::log(sigma[i] / sq + std::numbers::e), a);
    });
    explicit_avg /= n;
    const double lux = a == 0.0 ? sq : luxemburg_norm(sigma, YoungFunction::power_log(1.0, a), q);
    ll_lo = std::min(ll_lo, lux / explicit_avg);
    ll_hi = std::max(ll_hi, lux / explicit_avg);
  }

  // weak-type constant over a symbol battery normalised to BMO norm one
  std::vector<std::pair<std::string, GridFunction>> battery;
  battery.emplace_back("coord", realize_symbol("coord(axis=0)", d));
  if (s.m >= 1) {
    battery.emplace_back("log", realize_symbol("log", d));
    Point centre{0.0, 0.0};
    GridFunction chi(d);
    for (auto k : ball_cells(d, centre, 0.25 * d.half_width())) chi[k] = 1.0;
    battery.emplace_back("ball_indicator", chi);
    battery.emplace_back("log_maximal", g_root);
  }
  double c_w = 0.0;
  nlohmann::json per_symbol = nlohmann::json::object();
  for (auto& [name, b] : battery) {
    const double norm = bmo_norm(b, cubes).sup;
    if (!(norm > 0.0)) continue;
    b *= 1.0 / norm;
    double best = 0.0;
    for (int t = 0; t < s.trials; ++t) {
      const auto f = smoothed_noise(d, s.seed, static_cast<std::uint64_t>(t));
      best = std::max(best, weak_lq_norm(commutator(f, b, s.m, s.alpha), w.mu, s.q) / lp_norm(f, w.nu, s.p));
    }
    per_symbol[name] = num(best);
    c_w = std::max(c_w, best);
  }

  const auto conclusion = bump_log_necessity(w.mu, w.nu, prm, cubes);
  const Domain fine = d.refined();
  const auto wf = realize(s, fine);
  const auto conclusion_fine = bump_log_necessity(wf.mu, wf.nu, prm, enumerate_cubes(DyadicLattice(fine), 1));

  r.measured = {{"doubling_constant", num(dbl.sup)},
                {"max_log_maximal_average", num(max_gq)},
                {"log_maximal_bound", 1.0},
                {"kolmogorov_max_ratio", {{"0.25", num(kolmogorov[0])}, {"0.5", num(kolmogorov[1])}, {"0.75", num(kolmogorov[2])}}},
                {"llogl_exponent", a},
                {"llogl_ratio_min", num(ll_lo)},
                {"llogl_ratio_max", num(ll_hi)},
                {"llogl_interval", {interval.lo, interval.hi}},
                {"weak_constant", num(c_w)},
                {"weak_constant_by_symbol", per_symbol},
                {"conclusion", num(conclusion.sup)},
                {"conclusion_argmax", conclusion.argmax_cube().label()},
                {"conclusion_refined", num(conclusion_fine.sup)},
                {"conclusion_over_weak_constant", c_w > 0.0 ? num(conclusion.sup / c_w) : nlohmann::json(nullptr)},
                {"cubes", cubes.size()}};
  constexpr double kRound = 1e-12;
  r.checks["log_maximal_bounded"] = max_gq <= 1.0 + kRound;
  r.checks["kolmogorov"] = std::all_of(kolmogorov.begin(), kolmogorov.end(), [](double v) { return v <= 1.0 + kRound; });
  r.checks["llogl_interval"] = ll_lo >= interval.lo * (1.0 - kRound) && ll_hi <= interval.hi * (1.0 + kRound);
  r.checks["weak_constant_finite"] = std::isfinite(c_w) && c_w > 0.0;
  r.checks["conclusion_finite"] = std::isfinite(conclusion.sup);
  r.checks["conclusion_stable"] = within_factor(conclusion_fine.sup, conclusion.sup, s.stability_factor);
  // c fitted once over the built-in instances (observed ratios 0.06 to 0.41) and pinned
  constexpr double kWeakFactor = 1.0;
  r.checks["conclusion_within_weak_constant"] = conclusion.sup <= kWeakFactor * c_w;
  if (s.m == 0) {
    const auto plain = bump_necessity_quantities(w.mu, w.nu, w.b, prm, cubes);
    r.checks["plain_quantity_match"] = std::fabs(plain.left.sup - conclusion.sup) <= 1e-12 * conclusion.sup;
  }
  return r;
}

ExperimentResult run_bloom(const Scenario& s) {
  ExperimentResult r{"bloom", scenario_json(s)};
  const Domain d = s.domain();
  const int dim = d.dim();
  if (s.m < 1) throw Error("bloom: m must be at least 1");
  if (std::fabs(1.0 / s.p - 1.0 / s.q - s.alpha / dim) > 1e-12) {
    throw Error("bloom: needs 1/p - 1/q = alpha/dim");
  }
  s.params().validate(dim);
  const auto lambda_spec = parse_weight(s.lambda);
  const auto mu_spec = parse_weight(s.mu);
  const auto lambda = lambda_spec.realize(d);
  const auto mu = mu_spec.realize(d);
  const auto cubes = enumerate_cubes(DyadicLattice(d), 1);
  const double apq_lambda = apq_constant(lambda, s.p, s.q, cubes).sup;
  const double apq_mu = apq_constant(mu, s.p, s.q, cubes).sup;

  const GridFunction eta = (mu / lambda).pow(1.0 / s.m);

  // exact recovery for power and constant weights
  const auto exponent = [](const WeightSpec& w) -> std::optional<double> {
    if (w.kind == WeightSpec::Kind::Power) return w.value;
    if (w.kind == WeightSpec::Kind::Constant) return 0.0;
    return std::nullopt;
  };
  nlohmann::json recovery = nullptr;
  if (const auto ea = exponent(lambda_spec), ec = exponent(mu_spec); ea && ec) {
    const double scale = std::pow((mu_spec.kind == WeightSpec::Kind::Constant ? mu_spec.value : 1.0) /
                                      (lambda_spec.kind == WeightSpec::Kind::Constant ? lambda_spec.value : 1.0),
                                  1.0 / s.m);
    const GridFunction exact = scale * WeightSpec::power((*ec - *ea) / s.m).realize(d);
    const GridFunction ratio = eta / exact;
    recovery = {{"sup", ratio.max()}, {"inf", ratio.min()}};
    r.checks["eta_recovery"] = ratio.max() / ratio.min() - 1.0 <= 1e-10;
  }

  // separated balls: B = B(y0, r), B~ = B(y0 + A r e1, r)
  Stream rng(s.seed, 2000);
  const double len = 2.0 * d.half_width();
  const std::vector<double> seps = {4.0, 8.0, 16.0, 32.0, 64.0};
  const std::vector<double> shrink = {1.0, 0.75, 0.55, 0.4};
  std::size_t pairs = 0, skipped = 0;
  double worst_derivation = 0.0, worst_reduction = 0.0, worst_stability = 1.0;
  double c_op = 0.0;
  struct Pair {
    double sep, r, lhs, rhs, kernel_min, ball_measure, op, fnorm;
  };
  std::vector<Pair> done;
  for (double sep : seps) {
    for (std::size_t v = 0; v < shrink.size(); ++v) {
      const double rad = 0.9 * len / (sep + 2.0) * shrink[v];
      const double room = len - (sep + 2.0) * rad;
      Point y0{-d.half_width() + rad + rng.uniform(0.0, room), 0.0};
      if (dim == 2) y0[1] = rng.uniform(-d.half_width() + rad, d.half_width() - rad);
      const Point x0{y0[0] + sep * rad, y0[1]};
      const auto bc = ball_cells(d, y0, rad);
      const auto tc = ball_cells(d, x0, rad);
      if (bc.empty() || tc.empty()) {
        ++skipped;
        continue;
      }
      GridFunction f(d), b(d);
      for (auto k : bc) f[k] = v == 0 ? 1.0 : rng.uniform(0.05, 1.0);
      for (auto k : tc) b[k] = eta[k];
      const double vol = d.cell_volume();
      const double ball_measure = static_cast<double>(bc.size()) * vol;
      const double f_avg = sum_over(bc, [&](std::size_t k) { return f[k]; }) / static_cast<double>(bc.size());
      const double lhs = std::pow(vol * sum_over(tc, [&](std::size_t k) {
                                    return std::pow(eta[k], s.m * s.q) * std::pow(lambda[k], s.q);
                                  }), 1.0 / s.q) * f_avg;
      const double fnorm = std::pow(vol * sum_over(bc, [&](std::size_t k) {
                                      return std::pow(f[k] * mu[k], s.p);
                                    }), 1.0 / s.p);
      const double rhs = std::pow(rad, -s.alpha) * fnorm;
      double far = 0.0;
      for (auto i : tc)
        for (auto j : bc) {
          const auto xi = d.point(i), yj = d.point(j);
          far = std::max(far, dim == 1 ? std::fabs(xi[0] - yj[0]) : std::hypot(xi[0] - yj[0], xi[1] - yj[1]));
        }
      const double kernel_min = std::pow(far, s.alpha - dim);
      const GridFunction lq = lambda.pow(s.q);
      const double op = lp_norm(commutator(f, b, s.m, s.alpha), lq, s.q);
      // the kernel lower bound on B~ x B gives lhs |B| K_min <= op
      worst_derivation = std::max(worst_derivation, lhs * ball_measure * kernel_min / op);
      if (v == 0) {
        const double reduced = std::pow(vol * sum_over(tc, [&](std::size_t k) { return std::pow(mu[k], s.q); }), 1.0 / s.q);
        worst_reduction = std::max(worst_reduction, std::fabs(lhs - reduced) / reduced);
      }
      c_op = std::max(c_op, op / fnorm);
      done.push_back({sep, rad, lhs, rhs, kernel_min, ball_measure, op, fnorm});
      ++pairs;
    }
  }
  // c(A) = C_op r^α / (|B| K_min); pinned at the first pair of each separation
  nlohmann::json pair_json = nlohmann::json::array();
  double worst_ratio = 0.0;
  double pinned = 0.0, current_sep = -1.0;
  for (const auto& pr : done) {
    const double c = c_op * std::pow(pr.r, s.alpha) / (pr.ball_measure * pr.kernel_min);
    if (pr.sep != current_sep) current_sep = pr.sep, pinned = c;
    worst_stability = std::max(worst_stability, std::max(c / pinned, pinned / c));
    worst_ratio = std::max(worst_ratio, (pr.lhs / pr.rhs) / c);
    pair_json.push_back({{"separation", pr.sep}, {"radius", pr.r}, {"lhs", num(pr.lhs)}, {"rhs", num(pr.rhs)},
                         {"c", num(c)}, {"c_pinned", num(pinned)}});
  }
  r.trials = pair_json;

  // pointwise bound λ η^m <= c μ, exact for η and broken by η (1 + ε sin)
  const auto pointwise_max = [&](const GridFunction& e) {
    double worst = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) worst = std::max(worst, lambda[k] * std::pow(e[k], s.m) / mu[k]);
    return worst;
  };
  const double canonical = pointwise_max(eta);
  nlohmann::json perturbed = nlohmann::json::object();
  bool discriminates = true;
  std::vector<double> eps = {0.05, 0.1, 0.2, 0.4};
  if (std::find(eps.begin(), eps.end(), s.epsilon) == eps.end()) eps.push_back(s.epsilon);
  std::sort(eps.begin(), eps.end());
  for (double e : eps) {
    const GridFunction wobble = GridFunction::sample(d, [&](const Point& x) {
      return 1.0 + e * std::sin(2.0 * std::numbers::pi * x[0] / d.half_width());
    });
    const double v = pointwise_max(eta * wobble);
    const bool violated = v > 1.0 + s.tolerance;
    perturbed[format_number(e)] = {{"max_ratio", num(v)}, {"violated", violated}};
    if (e >= s.epsilon) discriminates = discriminates && violated;
  }
  if (!s.eta.empty()) {
    const GridFunction user = parse_weight(s.eta).realize(d) / eta;
    r.measured["user_eta_ratio"] = {{"sup", num(user.max())}, {"inf", num(user.min())}};
  }

  r.measured["apq_lambda"] = num(apq_lambda);
  r.measured["apq_mu"] = num(apq_mu);
  r.measured["eta_recovery"] = recovery;
  r.measured["pairs_checked"] = pairs;
  r.measured["pairs_skipped"] = skipped;
  r.measured["operator_constant"] = num(c_op);
  r.measured["derivation_max_ratio"] = num(worst_derivation);
  r.measured["separated_ball_max_ratio"] = num(worst_ratio);
  r.measured["c_stability"] = num(worst_stability);
  r.measured["unit_f_reduction_error"] = num(worst_reduction);
  r.measured["pointwise_canonical"] = num(canonical);
  r.measured["pointwise_perturbed"] = perturbed;
  r.checks["weights_apq_finite"] = std::isfinite(apq_lambda) && std::isfinite(apq_mu);
  r.checks["ball_pairs"] = pairs >= 20;
  r.checks["separated_ball_inequality"] = worst_derivation <= 1.0 + 1e-12 && worst_ratio <= 1.0 + 1e-12;
  r.checks["separated_ball_constant_stable"] = worst_stability <= s.stability_factor;
  r.checks["unit_f_reduction"] = worst_reduction <= 1e-10;
  r.checks["pointwise_exact"] = std::fabs(canonical - 1.0) <= 1e-12;
  r.checks["perturbation_detected"] = discriminates;
  return r;
}

ExperimentResult run_kernel_sep(const Scenario& s) {
  ExperimentResult r{"kernel_sep", scenario_json(s)};
  const int dim = s.dim;
  if (!(s.alpha > 0.0 && s.alpha < dim)) throw Error("kernel_sep: needs 0 < alpha < dim");
  const double rad = s.kernel_r > 0.0 ? s.kernel_r : 0.99 * s.half_width / (256.0 / 2.0 + 1.0);
  double prev = INFINITY, first = 0.0, worst_rate = 1.0;
  bool monotone = true;
  for (double a = 4.0; a <= 256.0; a *= 2.0) {
    const auto k = kernel_oscillation(dim, s.alpha, rad, a, s.kernel_samples, s.half_width);
    const double normalised = k.measured * std::pow(a * rad, dim - s.alpha);
    if (a == 4.0) first = normalised * a;
    monotone = monotone && normalised <= prev * (1.0 + 1e-12);
    prev = normalised;
    const double rate = normalised * a / first;
    worst_rate = std::max(worst_rate, std::max(rate, 1.0 / rate));
    r.trials.push_back({{"A", a}, {"measured", num(k.measured)}, {"normalised", num(normalised)},
                        {"bound", num(k.bound)}, {"center", num(k.center)}});
  }
  r.measured = {{"radius", rad}, {"rate_spread", num(worst_rate)}};
  r.checks["monotone_decay"] = monotone;
  r.checks["rate_within_factor_4"] = worst_rate <= 4.0;
  return r;
}

BumpConstants scenario_bump_constants(const Scenario& s) { return bump_constants_on(s, s.domain()); }

ExperimentResult run_scenario(const Scenario& s) {
  switch (s.kind) {
    case ScenarioKind::Sufficiency: return run_sufficiency(s);
    case ScenarioKind::SparseNecessity: return run_sparse_necessity(s);
    case ScenarioKind::LogNecessity: return run_log_necessity(s);
    case ScenarioKind::Bloom: return run_bloom(s);
    case ScenarioKind::KernelSep: return run_kernel_sep(s);
    case ScenarioKind::VerifyAll: return verify_all(s.seed);
  }
  throw Error("unknown scenario kind");
}

}  // namespace fracbump
