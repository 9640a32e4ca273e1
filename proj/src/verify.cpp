#include <algorithm>
#include <cmath>
#include <random>

#include "fracbump/dyadic.hpp"
#include "fracbump/operators.hpp"
#include "fracbump/orlicz.hpp"
#include "fracbump/testbed.hpp"
#include "fracbump/weights.hpp"

namespace fracbump {

namespace {

std::mt19937_64 engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x5eedu};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& g, double lo = 0.0, double hi = 1.0) {
  return lo + (hi - lo) * static_cast<double>(g() >> 11) * 0x1.0p-53;
}

GridFunction random_grid(const Domain& d, std::mt19937_64& g, double lo, double hi) {
  GridFunction f(d);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = uniform(g, lo, hi);
  return f;
}

double rel(double a, double b) {
  const double s = std::max(std::fabs(a), std::fabs(b));
  return s == 0.0 ? 0.0 : std::fabs(a - b) / s;
}

std::vector<YoungFunction> builtin_families() {
  return {YoungFunction::power(2.0),          YoungFunction::power(3.5),
          YoungFunction::power_log(2.0, 1.0), YoungFunction::power_log(1.5, -0.3),
          YoungFunction::power_log(1.0, 2.0), YoungFunction::exp_minus_one()};
}

// Folds a sub-experiment into a group result under a prefix.
void absorb(ExperimentResult& into, const std::string& prefix, const ExperimentResult& r) {
  into.measured[prefix] = r.measured;
  for (const auto& [name, ok] : r.checks) into.checks[prefix + "." + name] = ok;
}

ExperimentResult orlicz_engine(std::uint64_t seed) {
  ExperimentResult r{"orlicz_engine"};
  auto g = engine(seed, 1);
  double worst_lp = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Domain d = k % 2 == 0 ? Domain(1, 1.0, 64) : Domain(2, 1.0, 16);
    const auto f = random_grid(d, g, -1.0, 1.0);
    const std::size_t side = std::size_t{1} << static_cast<int>(uniform(g, 0.0, 4.0));
    const std::size_t room = d.n_cells() - side;
    const auto pick = [&] { return static_cast<std::size_t>(uniform(g, 0.0, static_cast<double>(room) + 0.999)); };
    const CubeRegion q(d, {pick(), d.dim() == 2 ? pick() : 0}, side);
    const double p = uniform(g, 1.0, 5.0);
    double s = 0.0;
    q.for_each_cell([&](std::size_t i) { s += std::pow(std::fabs(f[i]), p); });
    const double direct = std::pow(s / static_cast<double>(q.cell_count()), 1.0 / p);
    worst_lp = std::max(worst_lp, rel(luxemburg_norm(f, YoungFunction::power(p), q), direct));
  }
  double worst_trip = 0.0;
  std::size_t young_violations = 0;
  for (const auto& a : builtin_families()) {
    for (double t : {1e-3, 0.1, 1.0, 10.0, 700.0}) worst_trip = std::max(worst_trip, rel(a.inverse(a(t)), t));
    const auto c = complementary(a);
    for (int k = 0; k < 10000; ++k) {
      const double s = uniform(g, 0.0, 100.0), t = uniform(g, 0.0, 100.0);
      young_violations += s * t > (a(s) + c(t)) * (1.0 + 1e-12);
    }
  }
  r.measured = {{"luxemburg_vs_lp_max_rel", worst_lp},
                {"round_trip_max_rel", worst_trip},
                {"young_violations", young_violations}};
  r.checks["luxemburg_matches_lp"] = worst_lp <= 1e-9;
  r.checks["inverse_round_trip"] = worst_trip <= 1e-10;
  r.checks["young_inequality"] = young_violations == 0;
  return r;
}

ExperimentResult bp_classifier(std::uint64_t) {
  ExperimentResult r{"bp_classifier"};
  std::size_t cases = 0, disagreements = 0;
  bool expected_ok = true;
  nlohmann::json rows = nlohmann::json::array();
  for (double p : {1.5, 2.0, 3.0}) {
    const double pc = p / (p - 1.0);
    std::vector<std::pair<YoungFunction, bool>> inst = {
        {YoungFunction::power(p - 0.25), true},
        {YoungFunction::power(p), false},
        {YoungFunction::power(p + 0.5), false},
        {YoungFunction::power_log(p, 2.0), false},
        {YoungFunction::exp_minus_one(), false}};
    for (double delta : {0.1, 0.5, 1.0}) inst.emplace_back(YoungFunction::power_log(p, -(1.0 + p * delta / pc)), true);
    // r = -1 sits exactly on the B_p threshold; the q/p > 1 power of the B_{p,q} kernel pushes it inside
    inst.emplace_back(YoungFunction::power_log(p, -1.0), false);
    for (std::size_t k = 0; k < inst.size(); ++k) {
      const auto& [a, expect_p] = inst[k];
      for (std::optional<double> q : {std::optional<double>{}, std::optional<double>{p + 1.0}}) {
        const bool expect = k + 1 == inst.size() ? q.has_value() : expect_p;
        const auto res = bp_membership(a, p, q);
        const bool in = res.verdict == BpVerdict::InBp || res.verdict == BpVerdict::InBpq;
        ++cases;
        disagreements += in != res.diagnostic.convergent;
        expected_ok = expected_ok && in == expect;
        rows.push_back({{"young", a.tag()}, {"p", p}, {"q", q ? nlohmann::json(*q) : nlohmann::json(nullptr)},
                        {"verdict", to_string(res.verdict)}, {"quadrature_convergent", res.diagnostic.convergent}});
      }
    }
  }
  r.trials = rows;
  r.measured = {{"cases", cases}, {"disagreements", disagreements}};
  r.checks["closed_form_matches_quadrature"] = disagreements == 0;
  r.checks["expected_verdicts"] = expected_ok;
  return r;
}

ExperimentResult sparse_families(std::uint64_t seed) {
  ExperimentResult r{"sparse_families"};
  auto g = engine(seed, 3);
  double min_eta = 1.0, min_verified = 1.0;
  std::size_t total_cubes = 0, runs = 0;
  for (int dim : {1, 2}) {
    const Domain d(dim, 1.0, dim == 1 ? 256 : 64);
    const DyadicLattice lat(d);
    const double tau = static_cast<double>(1 << (dim + 1));
    for (int k = 0; k < 100; ++k) {
      // heavy tails: u^{-3/2} has rare large values, so the stopping trees go several levels deep
      GridFunction f = random_grid(d, g, 1e-3, 1.0);
      f = f.pow(-1.5);
      const auto fam = construct_sparse_family(f, lat, tau);
      total_cubes += fam.cubes.size();
      ++runs;
      min_eta = std::min(min_eta, fam.eta);
      min_verified = std::min(min_verified, sparsity_verify(fam));
    }
  }
  // nesting: any two lattice cubes are nested or disjoint; children tile their parent
  bool nested_or_disjoint = true, children_tile = true;
  for (int dim : {1, 2}) {
    for (std::size_t n : {8u, 16u, 32u}) {
      const Domain d(dim, 1.0, n);
      const DyadicLattice lat(d);
      std::vector<CubeAddress> all;
      for (int depth = 0; depth <= lat.max_depth(); ++depth) {
        const std::size_t per = std::size_t{1} << depth;
        for (std::size_t j = 0; j < (dim == 2 ? per : 1); ++j)
          for (std::size_t i = 0; i < per; ++i) all.push_back({depth, i, j});
      }
      std::vector<std::vector<std::size_t>> cells;
      for (const auto& a : all) {
        auto c = lat.cube(a).cells();
        std::sort(c.begin(), c.end());
        cells.push_back(std::move(c));
      }
      for (std::size_t x = 0; x < all.size(); ++x) {
        for (std::size_t y = x + 1; y < all.size(); ++y) {
          std::vector<std::size_t> common;
          std::set_intersection(cells[x].begin(), cells[x].end(), cells[y].begin(), cells[y].end(),
                                std::back_inserter(common));
          const bool ok = common.empty() || common.size() == std::min(cells[x].size(), cells[y].size());
          const bool claim = lat.contains(all[x], all[y]) || lat.contains(all[y], all[x]);
          nested_or_disjoint = nested_or_disjoint && ok && (claim == !common.empty());
        }
        if (all[x].depth < lat.max_depth()) {
          std::vector<std::size_t> u;
          for (const auto& ch : lat.children(all[x])) {
            const auto c = lat.cube(ch).cells();
            u.insert(u.end(), c.begin(), c.end());
          }
          std::sort(u.begin(), u.end());
          children_tile = children_tile && u == cells[x];
        }
      }
    }
  }
  const double mean_size = static_cast<double>(total_cubes) / static_cast<double>(runs);
  r.measured = {{"min_eta", min_eta}, {"min_verified_eta", min_verified}, {"mean_family_size", mean_size}};
  r.checks["families_nontrivial"] = mean_size > 2.0;
  r.checks["eta_at_least_half"] = min_eta >= 0.5 && min_verified >= 0.5;
  r.checks["nested_or_disjoint"] = nested_or_disjoint;
  r.checks["children_tile_parent"] = children_tile;
  return r;
}

ExperimentResult sparse_domination(std::uint64_t seed) {
  ExperimentResult r{"sparse_domination"};
  auto g = engine(seed, 4);
  const Domain d(1, 1.0, 128);
  bool spread_ok = true, none_failed = true;
  for (int m : {0, 1, 2}) {
    std::vector<double> ratios;
    for (int k = 0; k < 100; ++k) {
      GridFunction f = random_grid(d, g, -1.0, 1.0);
      for (std::size_t i = 0; i < f.size(); ++i)
        if (std::fabs(d.point(i)[0]) >= 0.5) f[i] = 0.0;
      const auto b = random_grid(d, g, -1.0, 1.0);
      const auto res = sparse_domination_check(f, b, m, 0.5, 4.0);
      none_failed = none_failed && !res.failed;
      ratios.push_back(res.ratio);
    }
    std::sort(ratios.begin(), ratios.end());
    const double median = ratios[ratios.size() / 2];
    spread_ok = spread_ok && ratios.back() <= 10.0 * median;
    r.measured["m" + std::to_string(m)] = {{"max", ratios.back()}, {"median", median}};
  }
  const Domain small(1, 1.0, 32);
  const auto cubes = enumerate_cubes(DyadicLattice(small), 1);
  double worst = 0.0;
  for (int m : {1, 2, 3})
    for (int k = 0; k < 10; ++k)
      worst = std::max(worst, reduction_inequality_ratio(random_grid(small, g, -1.0, 1.0),
                                                         random_grid(small, g, -2.0, 2.0), m, cubes));
  r.measured["reduction_max_ratio"] = worst;
  r.checks["ratio_spread"] = spread_ok;
  r.checks["bound_never_vanishes_alone"] = none_failed;
  r.checks["pointwise_reduction"] = worst <= 1.0;
  return r;
}

ExperimentResult adjoint_identity(std::uint64_t seed) {
  ExperimentResult r{"adjoint_identity"};
  auto g = engine(seed, 5);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Domain d = k % 2 == 0 ? Domain(1, 1.0, 64) : Domain(2, 1.0, 16);
    const double alpha = uniform(g, 0.1, d.dim() - 0.1);
    worst = std::max(worst, adjoint_defect(random_grid(d, g, -1.0, 1.0), random_grid(d, g, -1.0, 1.0),
                                           random_grid(d, g, -1.0, 1.0), k % 4, alpha));
  }
  r.measured = {{"max_defect", worst}};
  r.checks["defect_below_1e-12"] = worst <= 1e-12;
  return r;
}

ExperimentResult closed_forms(std::uint64_t) {
  ExperimentResult r{"closed_forms"};
  const double exact0 = 2.0 * (std::sqrt(2.0) - 1.0);
  const double exact1 = 2.0 / 3.0 * (std::pow(2.0, 1.5) - 1.0);
  std::vector<double> e0, e1;
  for (std::size_t n : {128u, 256u, 512u}) {
    const Domain d(1, 4.0, n);
    const auto chi = GridFunction::sample(d, [](const Point& x) { return x[0] > 0.0 && x[0] < 1.0 ? 1.0 : 0.0; });
    const auto b = GridFunction::sample(d, [](const Point& x) { return x[0]; });
    e0.push_back(std::fabs(interpolate(fractional_integral(chi, 0.5), {2.0, 0.0}) - exact0));
    e1.push_back(std::fabs(interpolate(commutator(chi, b, 1, 0.5), {2.0, 0.0}) - exact1));
  }
  const auto order = [](const std::vector<double>& e) {
    return std::min(std::log2(e[0] / e[1]), std::log2(e[1] / e[2]));
  };
  r.measured = {{"m0_errors", e0}, {"m1_errors", e1}, {"m0_order", order(e0)}, {"m1_order", order(e1)}};
  r.checks["m0_within_2e-3"] = e0.back() <= 2e-3;
  r.checks["m1_within_2e-3"] = e1.back() <= 2e-3;
  r.checks["m0_order_at_least_1"] = order(e0) >= 1.0;
  r.checks["m1_order_at_least_1"] = order(e1) >= 1.0;
  return r;
}

struct WeightPair {
  const char* name;
  const char* mu;
  const char* nu;
};
const WeightPair kPairs[] = {{"constant", "const(c=1)", "const(c=1)"},
                             {"power", "power(a=0.4)", "power(a=-0.2)"},
                             {"mixed", "product(const(c=2), power(a=0.3))", "const(c=0.5)"}};

Scenario base_scenario(ScenarioKind kind, std::uint64_t seed) {
  Scenario s;
  s.kind = kind;
  s.seed = seed;
  return s;
}

ExperimentResult sufficiency_group(std::uint64_t seed) {
  ExperimentResult r{"sufficiency"};
  for (const auto& w : kPairs) {
    auto s = base_scenario(ScenarioKind::Sufficiency, seed);
    s.mu = parse_weight(w.mu).tag();
    s.nu = parse_weight(w.nu).tag();
    absorb(r, w.name, run_sufficiency(s));
  }
  auto s = base_scenario(ScenarioKind::Sufficiency, seed);
  s.b = "const(c=1)";
  s.m = 2;
  absorb(r, "constant_symbol", run_sufficiency(s));
  return r;
}

ExperimentResult sparse_necessity_group(std::uint64_t seed) {
  ExperimentResult r{"sparse_necessity"};
  for (const auto& w : kPairs) {
    auto s = base_scenario(ScenarioKind::SparseNecessity, seed);
    s.grid = 256;
    s.mu = parse_weight(w.mu).tag();
    s.nu = parse_weight(w.nu).tag();
    absorb(r, w.name, run_sparse_necessity(s));
  }
  return r;
}

ExperimentResult log_necessity_group(std::uint64_t seed) {
  ExperimentResult r{"log_necessity"};
  for (const auto& w : kPairs) {
    for (int m : {1, 2}) {
      auto s = base_scenario(ScenarioKind::LogNecessity, seed);
      s.mu = parse_weight(w.mu).tag();
      s.nu = parse_weight(w.nu).tag();
      s.m = m;
      s.trials = 4;
      absorb(r, std::string(w.name) + "_m" + std::to_string(m), run_log_necessity(s));
    }
  }
  auto s2 = base_scenario(ScenarioKind::LogNecessity, seed);
  s2.dim = 2;
  s2.grid = 16;
  s2.alpha = 0.5;
  s2.mu = "power(a=0.4)";
  s2.nu = "power(a=-0.2)";
  s2.trials = 2;
  absorb(r, "power_2d", run_log_necessity(s2));
  for (int dim : {1, 2}) {
    auto k = base_scenario(ScenarioKind::KernelSep, seed);
    k.dim = dim;
    k.alpha = dim == 1 ? 0.5 : 1.0;
    absorb(r, "kernel_" + std::to_string(dim) + "d", run_kernel_sep(k));
  }
  return r;
}

ExperimentResult log_bump_comparison(std::uint64_t) {
  ExperimentResult r{"log_bump_comparison"};
  std::size_t cubes_total = 0, dominated = 0, strict = 0;
  for (int dim : {1, 2}) {
    const Domain d(dim, 1.0, dim == 1 ? 128 : 16);
    const auto cubes = enumerate_cubes(DyadicLattice(d), 1);
    const BumpParams prm{2.0, 4.0, 0.25 * dim, 1};
    for (const auto& w : kPairs) {
      const auto t = bump_log_terms(parse_weight(w.mu).realize(d), parse_weight(w.nu).realize(d), prm, 0.5, cubes);
      for (std::size_t k = 0; k < cubes.size(); ++k) {
        ++cubes_total;
        const bool dom = t.term1.values[k] <= t.prior.values[k] && t.term2.values[k] <= t.prior.values[k];
        dominated += dom;
        strict += t.term1.values[k] < t.prior.values[k] && t.term2.values[k] < t.prior.values[k];
      }
    }
  }
  r.measured = {{"cubes", cubes_total}, {"dominated", dominated}, {"strict", strict}};
  r.checks["dominated_everywhere"] = dominated == cubes_total;
  r.checks["strict_on_90_percent"] = static_cast<double>(strict) >= 0.9 * static_cast<double>(cubes_total);
  return r;
}

ExperimentResult bloom_group(std::uint64_t seed) {
  ExperimentResult r{"bloom_converse"};
  struct Inst {
    const char* name;
    const char* lambda;
    const char* mu;
    int m;
  };
  const Inst inst[] = {{"equal", "power(a=0.2)", "power(a=0.2)", 1},
                       {"power_m1", "power(a=0.2)", "power(a=0.4)", 1},
                       {"power_m2", "power(a=-0.1)", "power(a=0.3)", 2}};
  for (const auto& in : inst) {
    auto s = base_scenario(ScenarioKind::Bloom, seed);
    s.grid = 512;
    s.lambda = in.lambda;
    s.mu = in.mu;
    s.m = in.m;
    absorb(r, in.name, run_bloom(s));
  }
  return r;
}

using GroupFn = ExperimentResult (*)(std::uint64_t);

const std::vector<std::pair<InvariantGroup, GroupFn>>& registry() {
  static const std::vector<std::pair<InvariantGroup, GroupFn>> g = {
      {{1, "orlicz_engine"}, orlicz_engine},
      {{2, "bp_classifier"}, bp_classifier},
      {{3, "sparse_families"}, sparse_families},
      {{4, "sparse_domination"}, sparse_domination},
      {{5, "adjoint_identity"}, adjoint_identity},
      {{6, "closed_forms"}, closed_forms},
      {{7, "sufficiency"}, sufficiency_group},
      {{8, "sparse_necessity"}, sparse_necessity_group},
      {{9, "log_necessity"}, log_necessity_group},
      {{10, "log_bump_comparison"}, log_bump_comparison},
      {{11, "bloom_converse"}, bloom_group}};
  return g;
}

}  // namespace

const std::vector<InvariantGroup>& invariant_groups() {
  static const std::vector<InvariantGroup> out = [] {
    std::vector<InvariantGroup> v;
    for (const auto& [g, fn] : registry()) v.push_back(g);
    return v;
  }();
  return out;
}

ExperimentResult run_invariant_group(int id, std::uint64_t seed) {
  for (const auto& [g, fn] : registry()) {
    if (g.id != id) continue;
    ExperimentResult r = fn(seed);
    r.kind = g.name;
    r.scenario = {{"group", id}, {"seed", seed}};
    return r;
  }
  throw Error("unknown invariant group " + std::to_string(id));
}

ExperimentResult verify_all(std::uint64_t seed) {
  ExperimentResult r{"verify_all", {{"seed", seed}}};
  for (const auto& g : invariant_groups()) absorb(r, g.name, run_invariant_group(g.id, seed));
  return r;
}

}  // namespace fracbump
