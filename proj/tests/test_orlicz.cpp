#include <cmath>
#include <fstream>

#include "doctest.h"
#include "fracbump/orlicz.hpp"
#include "support.hpp"

using namespace fracbump;
using fracbump::testing::random_function;
using fracbump::testing::rel_diff;

namespace {

constexpr double kE = 2.718281828459045235;

// Brute-force conjugate: dense log scan of s followed by a local refinement scan.
double scan_conjugate(const YoungFunction& a, double t) {
  double best = 0.0, best_s = 0.0;
  for (int k = 0; k <= 20000; ++k) {
    const double s = std::pow(10.0, -6.0 + 14.0 * k / 20000.0);
    const double v = s * t - a(s);
    if (v > best) best = v, best_s = s;
  }
  if (best_s == 0.0) return 0.0;
  for (int k = -2000; k <= 2000; ++k) {
    const double s = best_s * (1.0 + 2e-3 * k / 2000.0);
    best = std::max(best, s * t - a(s));
  }
  return best;
}

std::vector<YoungFunction> builtin_families() {
  return {YoungFunction::power(2.0),         YoungFunction::power(3.5),
          YoungFunction::power_log(2.0, 1.0), YoungFunction::power_log(1.5, -0.3),
          YoungFunction::power_log(1.0, 2.0), YoungFunction::exp_minus_one()};
}

}  // namespace

TEST_CASE("eval") {
  CHECK(YoungFunction::power(2.0)(3.0) == 9.0);
  CHECK(YoungFunction::exp_minus_one()(1.0) == doctest::Approx(1.718281828).epsilon(1e-9));
  // 1^2 · log(e + 1) from a 30-digit evaluation
  CHECK(YoungFunction::power_log(2.0, 1.0)(1.0) ==
        doctest::Approx(1.31326168751822283405).epsilon(1e-14));
  CHECK(YoungFunction::power_log(2.0, 2.0)(1.0) ==
        doctest::Approx(1.72465625990321035584).epsilon(1e-14));
  CHECK_THROWS_AS(YoungFunction::power(2.0)(-1.0), Error);
  CHECK_THROWS_AS(YoungFunction::power(0.5), Error);
  CHECK_THROWS_AS(YoungFunction::power_log(1.0, 0.0), Error);
}

TEST_CASE("inverse") {
  CHECK(YoungFunction::power(2.0).inverse(9.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(std::fabs(YoungFunction::power_log(2.0, 1.0).inverse(1.31326168751822283405) - 1.0) <= 1e-6);

  for (const auto& a : builtin_families()) {
    CAPTURE(a.tag());
    // e^1000 overflows a double, so expm1 stops at 700
    const bool exp_type = a.tag() == "expm1";
    for (double t : {0.1, 1.0, 10.0, exp_type ? 700.0 : 1000.0}) {
      CHECK(rel_diff(a.inverse(a(t)), t) <= 1e-10);
    }
    for (double t = 1e-2; t < 1e2; t *= 1.37) CHECK(rel_diff(a.inverse(a(t)), t) <= 1e-10);
  }
  SUBCASE("tabulated round trip on the strictly increasing part") {
    // the conjugate of e^t - 1 vanishes on [0, 1]
    const auto c = complementary(YoungFunction::exp_minus_one());
    for (double t = 1.5; t < 1e4; t *= 1.37) CHECK(rel_diff(c.inverse(c(t)), t) <= 1e-10);
  }

  SUBCASE("powerlog inverse has the (t / log^r t^{1/p})^{1/p} asymptotics") {
    for (const auto& [p, r] : {std::pair{2.0, 1.0}, {3.0, 4.0}, {1.5, -0.5}}) {
      const auto a = YoungFunction::power_log(p, r);
      for (double t = 1e3; t <= 1e9; t *= 3.0) {
        const double model =
            std::pow(t, 1.0 / p) / std::pow(std::log(kE + std::pow(t, 1.0 / p)), r / p);
        const double ratio = a.inverse(t) / model;
        CHECK(ratio >= 0.5);
        CHECK(ratio <= 2.0);
      }
    }
  }
}

TEST_CASE("complementary") {
  SUBCASE("power(2) conjugates to t^2/4") {
    const auto c = complementary(YoungFunction::power(2.0));
    for (double t : {0.5, 1.0, 7.0}) CHECK(c(t) == doctest::Approx(t * t / 4.0).epsilon(1e-14));
  }
  SUBCASE("power(p) closed form matches the brute-force conjugate") {
    for (double p : {1.5, 3.0, 4.5}) {
      const auto a = YoungFunction::power(p);
      const auto c = complementary(a);
      for (double t : {0.3, 2.0, 11.0}) CHECK(rel_diff(c(t), scan_conjugate(a, t)) <= 1e-6);
    }
  }
  SUBCASE("numeric conjugate of e^t - 1 matches t log t - t + 1") {
    const auto c = complementary(YoungFunction::exp_minus_one());
    CHECK(c(0.5) == 0.0);
    for (double t : {1.5, 10.0, 1e3, 1e6}) {
      const double exact = t * std::log(t) - t + 1.0;
      CHECK(rel_diff(c(t), exact) <= 1e-3);
      CHECK(c(t) >= exact * (1.0 - 1e-12));
    }
  }
  SUBCASE("powerlog(2, 1) equivalent family is within [1/8, 8] of the conjugate") {
    const auto a = YoungFunction::power_log(2.0, 1.0);
    const auto c = complementary(a);
    CHECK(c.tag() == "powerlog(p=2, r=-1)");
    for (double t = 1.0; t <= 1e6; t *= 2.3) {
      const double ratio = c(t) / scan_conjugate(a, t);
      CHECK(ratio >= 0.125);
      CHECK(ratio <= 8.0);
    }
  }
  SUBCASE("Young's inequality on 10^4 pairs for every built-in family") {
    auto gen = fracbump::testing::rng(21);
    for (const auto& a : builtin_families()) {
      CAPTURE(a.tag());
      const auto c = complementary(a);
      int violations = 0;
      for (int k = 0; k < 10000; ++k) {
        const double s = fracbump::testing::uniform(gen, 0.0, 100.0);
        const double t = fracbump::testing::uniform(gen, 0.0, 100.0);
        const double rhs = a(s) + c(t);
        if (s * t > rhs * (1.0 + 1e-12)) ++violations;
      }
      CHECK(violations == 0);
    }
  }
  SUBCASE("small tables and the linear gauge are rejected") {
    CHECK_THROWS_AS(complementary(YoungFunction::power(1.0)), Error);
    std::vector<double> t, v;
    for (int k = 1; k <= 10; ++k) t.push_back(k), v.push_back(k * k);
    CHECK_THROWS_AS(complementary(YoungFunction::tabulated(t, v)), Error);
  }
}

TEST_CASE("young function axioms") {
  for (const auto& a : builtin_families()) {
    CAPTURE(a.tag());
    CHECK(check_young(a).ok());
    CHECK(check_young(complementary(a)).ok());
  }
  CHECK_FALSE(check_young(YoungFunction::power(1.0)).ok());
  CHECK_FALSE(YoungFunction::power(1.0).superlinear());
}

TEST_CASE("luxemburg_norm") {
  auto gen = fracbump::testing::rng(31);
  const Domain d(1, 1.0, 64);
  const CubeRegion q(d, {16, 0}, 32);

  SUBCASE("constants give c / A^{-1}(1)") {
    const GridFunction f(d, 2.5);
    for (const auto& a : builtin_families()) {
      CHECK(rel_diff(luxemburg_norm(f, a, q), 2.5 / a.inverse(1.0)) <= 1e-12);
    }
    CHECK(luxemburg_norm(f, YoungFunction::power(3.0), q) == doctest::Approx(2.5));
  }
  SUBCASE("power(p) collapses to the L^p average") {
    for (int trial = 0; trial < 50; ++trial) {
      const auto f = random_function(d, gen, -3.0, 3.0);
      const double p = 1.0 + 4.0 * fracbump::testing::uniform(gen);
      double s = 0.0;
      q.for_each_cell([&](std::size_t i) { s += std::pow(std::fabs(f[i]), p); });
      const double direct = std::pow(s / static_cast<double>(q.cell_count()), 1.0 / p);
      CHECK(rel_diff(luxemburg_norm(f, YoungFunction::power(p), q), direct) <= 1e-9);
    }
  }
  SUBCASE("two-valued function with powerlog(2, 1) matches a 30-digit root") {
    const Domain d2(1, 1.0, 16);
    GridFunction f(d2, 1.0);
    for (std::size_t k = 8; k < 16; ++k) f[k] = 3.0;
    const double norm = luxemburg_norm(f, YoungFunction::power_log(2.0, 1.0), CubeRegion::whole(d2));
    CHECK(std::fabs(norm - 2.58223352623224619413) <= 1e-8);
  }
  SUBCASE("zero gives zero") {
    CHECK(luxemburg_norm(GridFunction(d), YoungFunction::exp_minus_one(), q) == 0.0);
  }
  SUBCASE("homogeneous and monotone") {
    const auto small = YoungFunction::power_log(2.0, 0.5);
    const auto large = YoungFunction::power_log(2.0, 1.5);
    for (int trial = 0; trial < 20; ++trial) {
      const auto f = random_function(d, gen, -1.0, 1.0);
      const double c = 0.1 + 10.0 * fracbump::testing::uniform(gen);
      const double nf = luxemburg_norm(f, small, q);
      CHECK(rel_diff(luxemburg_norm(c * f, small, q), c * nf) <= 1e-9);
      CHECK(luxemburg_norm(f.abs() + 0.1, small, q) >= nf);
      CHECK(luxemburg_norm(f, large, q) >= nf);
    }
  }
  SUBCASE("power identity under the root-scaled gauge") {
    const auto phi = YoungFunction::exp_minus_one();
    for (int m : {1, 2, 3}) {
      for (int trial = 0; trial < 10; ++trial) {
        const auto g = random_function(d, gen, -2.0, 2.0);
        std::vector<double> gm, gv;
        q.for_each_cell([&](std::size_t i) {
          gv.push_back(g[i]);
          gm.push_back(std::pow(std::fabs(g[i]), m));
        });
        const double lhs = luxemburg_norm_of(gm, [&](double t) { return phi(std::pow(t, 1.0 / m)); });
        const double rhs = std::pow(luxemburg_norm_of(gv, phi), m);
        CHECK(rel_diff(lhs, rhs) <= 1e-9);
      }
    }
  }
}

TEST_CASE("generalized Hölder check") {
  auto gen = fracbump::testing::rng(41);
  const Domain d(1, 1.0, 64);
  const CubeRegion q(d, {0, 0}, 64);
  const auto linear = YoungFunction::power(1.0);

  SUBCASE("constants stay within 2κ") {
    const GridFunction one(d, 1.0);
    const auto a = YoungFunction::power_log(2.0, 1.0);
    const auto b = YoungFunction::power(3.0);
    const auto c = YoungFunction::power_log(1.5, 0.5);
    const auto h = generalized_holder_check(one, one, a, b, c, q);
    CHECK(h.ratio == doctest::Approx(a.inverse(1.0) * b.inverse(1.0) / c.inverse(1.0)));
    CHECK(h.ratio <= 2.0 * h.kappa);
  }
  SUBCASE("Cauchy-Schwarz") {
    const auto p2 = YoungFunction::power(2.0);
    for (int trial = 0; trial < 100; ++trial) {
      const auto h = generalized_holder_check(random_function(d, gen, -1, 1),
                                              random_function(d, gen, -1, 1), p2, p2, linear, q);
      CHECK(h.kappa == doctest::Approx(1.0));
      CHECK(h.ratio <= 1.0 + 1e-12);
    }
  }
  SUBCASE("powerlog(2, 1) against its complementary family") {
    const auto a = YoungFunction::power_log(2.0, 1.0);
    const auto b = complementary(a);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      auto f = random_function(d, gen, 0.0, 1.0).pow(4.0);
      auto g = random_function(d, gen, 0.0, 1.0).pow(4.0);
      const auto h = generalized_holder_check(f, g, a, b, linear, q);
      worst = std::max(worst, h.ratio);
      CHECK(h.ratio <= 2.0 * h.kappa);
    }
    MESSAGE("max Hölder ratio for powerlog(2,1) and its complement: " << worst);
    CHECK(worst <= 2.0);
  }
}

TEST_CASE("bp_membership") {
  const double p = 2.0;
  SUBCASE("power families") {
    CHECK(bp_membership(YoungFunction::power(p - 0.5), p).verdict == BpVerdict::InBp);
    CHECK(bp_membership(YoungFunction::power(p), p).verdict == BpVerdict::NotInBp);
    CHECK(bp_membership(YoungFunction::power(p + 0.5), p).verdict == BpVerdict::NotInBp);
  }
  SUBCASE("log-bumped complement of powerlog(2, 1.5)") {
    const double delta = 0.5;
    const double pc = p / (p - 1.0);
    const auto bbar = YoungFunction::power_log(p, -(1.0 + p * delta / pc));
    CHECK(bp_membership(bbar, p).verdict == BpVerdict::InBp);
    for (double q : {2.0, 3.0, 10.0}) {
      CHECK(bp_membership(bbar, p, q).verdict == BpVerdict::InBpq);
    }
    // and it is the complement of B(t) = t^{p'} log(e+t)^{p'-1+δ}
    const auto b = YoungFunction::power_log(pc, pc - 1.0 + delta);
    CHECK(complementary(b).tag() == bbar.tag());
  }
  SUBCASE("q < p is rejected") {
    CHECK_THROWS_AS(bp_membership(YoungFunction::power(1.5), 2.0, 1.5), Error);
  }
  SUBCASE("closed forms agree with the quadrature diagnostics") {
    const std::vector<YoungFunction> cases{
        YoungFunction::power(1.5),          YoungFunction::power(2.0),
        YoungFunction::power(2.5),          YoungFunction::power_log(2.0, -1.5),
        YoungFunction::power_log(2.0, -1.0), YoungFunction::power_log(2.0, -0.5),
        YoungFunction::power_log(2.0, 3.0),  YoungFunction::power_log(1.5, 3.0),
        YoungFunction::power_log(2.5, -4.0), YoungFunction::exp_minus_one()};
    for (const auto& a : cases) {
      for (std::optional<double> q : {std::optional<double>{}, std::optional<double>{2.0},
                                      std::optional<double>{4.0}}) {
        CAPTURE(a.tag());
        CAPTURE(q.value_or(0.0));
        const auto r = bp_membership(a, p, q);
        const bool in = r.verdict == BpVerdict::InBp || r.verdict == BpVerdict::InBpq;
        CHECK(r.closed_form);
        CHECK(in == r.diagnostic.convergent);
      }
    }
  }
  SUBCASE("tabulated functions are classified by quadrature") {
    std::vector<double> t, v;
    for (int k = 1; k <= 100; ++k) {
      t.push_back(0.1 * k);
      v.push_back(std::pow(0.1 * k, 1.5));
    }
    const auto r = bp_membership(YoungFunction::tabulated(t, v), p);
    CHECK_FALSE(r.closed_form);
    CHECK(r.verdict == BpVerdict::InBp);
    CHECK(r.diagnostic.partial_integrals.size() == r.diagnostic.upper_limits.size());
  }
}

TEST_CASE("parse_young") {
  CHECK(parse_young("power(p=2)").tag() == "power(p=2)");
  CHECK(parse_young(" powerlog( p = 2 , r = 1.5 ) ").tag() == "powerlog(p=2, r=1.5)");
  CHECK(parse_young("expm1").tag() == "expm1");
  CHECK(parse_young("power(p=3, c=0.25)")(2.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(parse_young("powerlog(p=2)"), Error);
  CHECK_THROWS_AS(parse_young("power(p=2, q=3)"), Error);
  CHECK_THROWS_AS(parse_young("cosh"), Error);
  for (const auto& a : builtin_families()) CHECK(parse_young(a.tag()).tag() == a.tag());

  const std::string path = testing::scratch_path("young_table.csv");
  {
    std::ofstream out(path);
    out << "t,value\n";
    for (int k = 1; k <= 80; ++k) out << 0.25 * k << ',' << std::pow(0.25 * k, 2.0) << '\n';
  }
  const auto tab = parse_young("table(path=" + path + ")");
  CHECK(tab(2.0) == doctest::Approx(4.0));
  CHECK(tab.tag() == "table(path=" + path + ")");
  CHECK(check_young(complementary(tab)).ok());
  std::filesystem::remove(path);
}
