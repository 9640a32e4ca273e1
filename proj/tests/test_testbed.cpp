#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fracbump/dyadic.hpp"
#include "fracbump/orlicz.hpp"
#include "fracbump/testbed.hpp"
#include "support.hpp"

using namespace fracbump;
using nlohmann::json;

namespace {

std::string source_path(const std::string& rel) { return std::string(FRACBUMP_SOURCE_DIR) + "/" + rel; }

std::string error_of(const std::string& text) {
  try {
    (void)parse_scenario_text(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

// Numbers compare to a relative tolerance, everything else exactly.
void compare_json(const json& got, const json& want, const std::string& where) {
  if (want.is_number() && got.is_number()) {
    const double a = got.get<double>(), b = want.get<double>();
    INFO(where << ": " << a << " vs " << b);
    CHECK(testing::rel_diff(a, b) <= 1e-9);
    return;
  }
  INFO(where);
  REQUIRE(got.type() == want.type());
  if (want.is_object()) {
    REQUIRE(got.size() == want.size());
    for (auto it = want.begin(); it != want.end(); ++it) {
      REQUIRE(got.contains(it.key()));
      compare_json(got[it.key()], it.value(), where + "." + it.key());
    }
  } else if (want.is_array()) {
    REQUIRE(got.size() == want.size());
    for (std::size_t k = 0; k < want.size(); ++k) compare_json(got[k], want[k], where + "[" + std::to_string(k) + "]");
  } else {
    CHECK(got == want);
  }
}

// Side length from a cube label `depth:i[:j]` on [-L, L]^dim.
double label_measure(const std::string& label, int dim, double half_width) {
  const int depth = std::stoi(label.substr(0, label.find(':')));
  return std::pow(2.0 * half_width / std::ldexp(1.0, depth), dim);
}

}  // namespace

TEST_CASE("scenario defaults parse from an empty config") {
  const Scenario s = parse_scenario_text("# nothing but a comment\n\n");
  CHECK(s == Scenario{});
  CHECK(s.kind == ScenarioKind::Sufficiency);
  CHECK(s.stopping_tau() == 4.0);
  Scenario two;
  two.dim = 2;
  CHECK(two.stopping_tau() == 8.0);
}

TEST_CASE("scenario errors name the key and the line") {
  const auto unknown = error_of("p = 2\n\nbogus_key = 3\n");
  CHECK(unknown.find("line 3") != std::string::npos);
  CHECK(unknown.find("bogus_key") != std::string::npos);

  const auto bad_value = error_of("alpha = x\n");
  CHECK(bad_value.find("line 1") != std::string::npos);
  CHECK(bad_value.find("alpha") != std::string::npos);

  CHECK(error_of("p = 2\np = 3\n").find("duplicate") != std::string::npos);
  CHECK(error_of("just words\n").find("line 1") != std::string::npos);
  CHECK(error_of("kind = nonsense\n").find("nonsense") != std::string::npos);
  CHECK(error_of("mu = power(b=1)\n").find("line 1: mu") != std::string::npos);
  CHECK(error_of("grid = 100\n") != "");
  CHECK(error_of("trials = 0\n") != "");
  CHECK_THROWS_AS(parse_scenario_file("/nonexistent/config.cfg"), Error);
}

TEST_CASE("write then parse reproduces the scenario") {
  Scenario s;
  s.kind = ScenarioKind::Bloom;
  s.dim = 2;
  s.grid = 32;
  s.half_width = 2.5;
  s.p = 1.75;
  s.q = 3.1;
  s.alpha = 0.3;
  s.m = 3;
  s.delta = 0.125;
  s.seed = 123456789012345ULL;
  s.trials = 3;
  s.mu = "power(a=0.4)";
  s.nu = "product(const(c=2), power(a=0.3))";
  s.lambda = "const(c=0.5)";
  s.eta = "power(a=0.1)";
  s.b = "abspow(a=0.5)";
  s.young_a = "powerlog(p=4, r=3.5)";
  s.young_d = "expm1";
  s.tau = 5.0;
  s.stability_factor = 2.0;
  s.tolerance = 0.01;
  s.epsilon = 0.3;
  s.kernel_r = 0.01;
  s.kernel_samples = 5;
  s.doubling_limit = 10.0;
  s.out = "result.json";
  std::ostringstream os;
  write_scenario(os, s);
  const Scenario back = parse_scenario_text(os.str());
  CHECK(back == s);
  std::ostringstream again;
  write_scenario(again, back);
  CHECK(again.str() == os.str());
  CHECK(scenario_json(back)["seed"].get<std::uint64_t>() == s.seed);
}

TEST_CASE("symbol specs canonicalise and realise") {
  CHECK(canonical_symbol("coord()") == "coord(axis=0)");
  CHECK(canonical_symbol("const") == "const(c=1)");
  CHECK_THROWS_AS(canonical_symbol("coord(axis=2)"), Error);
  CHECK_THROWS_AS(canonical_symbol("wave"), Error);
  const Domain d(1, 1.0, 16);
  const auto x = realize_symbol("coord(axis=0)", d);
  const auto lg = realize_symbol("log", d);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(x[i] == d.point(i)[0]);
    CHECK(lg[i] == doctest::Approx(std::log(std::max(std::fabs(d.point(i)[0]), d.h() / 2))));
  }
  CHECK_THROWS_AS(realize_symbol("coord(axis=1)", d), Error);
}

TEST_CASE("smoothed noise is seeded, compactly supported and grid independent") {
  const Domain d(1, 1.0, 64);
  const auto a = smoothed_noise(d, 5, 0), b = smoothed_noise(d, 5, 0), c = smoothed_noise(d, 5, 1);
  bool differs = false;
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(a[i] == b[i]);
    differs = differs || a[i] != c[i];
    if (std::fabs(d.point(i)[0]) >= 0.5) CHECK(a[i] == 0.0);
  }
  CHECK(differs);
  const auto fine = smoothed_noise(d.refined(), 5, 0);
  // the fine grid samples the same continuum function
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto p = d.point(i);
    if (std::fabs(p[0]) < 0.4) CHECK(std::fabs(interpolate(fine, p) - a[i]) < 0.05);
  }
}

TEST_CASE("the L(log L) interval endpoints") {
  const auto zero = llogl_equivalence_interval(0.0);
  CHECK(zero.lo == 1.0);
  CHECK(zero.hi == 1.0);
  const auto two = llogl_equivalence_interval(2.0);
  CHECK(two.lo == doctest::Approx(1.0 / (2.0 * (1.0 + 4.0 / std::exp(2.0)))).epsilon(1e-14));
  CHECK(two.hi == 1.0);
  const auto half = llogl_equivalence_interval(0.5);
  CHECK(half.lo == doctest::Approx(1.0 / (1.0 + std::sqrt(0.5 / std::exp(1.0)))).epsilon(1e-14));

  // random positive samples stay inside the interval
  auto g = testing::rng(31);
  for (double a : {0.5, 1.0, 2.0, 4.0, 6.0}) {
    const auto iv = llogl_equivalence_interval(a);
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<double> v(64);
      for (auto& x : v) x = std::exp(testing::uniform(g, -8.0, 8.0));
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double explicit_avg = 0.0;
      for (double x : v) explicit_avg += x * std::pow(std::log(std::exp(1.0) + x / mean), a);
      explicit_avg /= static_cast<double>(v.size());
      const double lux = luxemburg_norm_of(v, [a](double t) { return t * std::pow(std::log(std::exp(1.0) + t), a); });
      CHECK(lux / explicit_avg >= iv.lo * (1 - 1e-12));
      CHECK(lux / explicit_avg <= iv.hi * (1 + 1e-12));
    }
  }
}

TEST_CASE("sufficiency runs are deterministic") {
  Scenario s;
  s.grid = 64;
  s.trials = 3;
  s.mu = "power(a=0.4)";
  s.nu = "power(a=-0.2)";
  const auto a = run_sufficiency(s).to_json().dump();
  const auto b = run_sufficiency(s).to_json().dump();
  CHECK(a == b);
  s.seed = 2;
  CHECK(run_sufficiency(s).to_json().dump() != a);
}

TEST_CASE("constant symbol gives a zero commutator ratio") {
  for (int m : {1, 2}) {
    Scenario s;
    s.grid = 64;
    s.trials = 2;
    s.m = m;
    s.b = "const(c=3)";
    const auto r = run_sufficiency(s);
    CHECK(r.measured["ratio_op"].get<double>() == 0.0);
    CHECK(r.measured["ratio_op_refined"].get<double>() == 0.0);
    CHECK(r.checks.at("zero_for_constant_symbol"));
    CHECK(r.passed());
  }
}

TEST_CASE("sufficiency result echoes the scenario") {
  Scenario s;
  s.grid = 32;
  s.trials = 1;
  const auto j = run_sufficiency(s).to_json();
  CHECK(j["scenario"] == scenario_json(s));
  CHECK(j["kind"] == "sufficiency");
  CHECK(j.contains("passed"));
}

TEST_CASE("docs sufficiency config matches the recorded golden result") {
  const auto s = parse_scenario_file(source_path("docs/examples/sufficiency.cfg"));
  std::ifstream in(source_path("tests/golden/sufficiency.json"));
  REQUIRE(in.good());
  const json golden = json::parse(in);
  compare_json(run_scenario(s).to_json(), golden, "result");
}

TEST_CASE("sparse necessity with m = 0 and unit weights reduces to a power of |Q|") {
  Scenario s;
  s.kind = ScenarioKind::SparseNecessity;
  s.grid = 128;
  s.m = 0;
  s.p = 2.0;
  s.q = 3.0;
  s.alpha = 0.25;
  s.trials = 2;
  const auto r = run_sparse_necessity(s);
  const double c_op = r.measured["c_op"].get<double>();
  const double e = s.alpha + 1.0 / s.q - 1.0 / s.p;
  const auto& rows = r.measured["per_cube"];
  REQUIRE(rows.size() >= 2);
  for (const auto& row : rows) {
    const double q = label_measure(row["cube"].get<std::string>(), 1, s.half_width);
    const double ratio = row["lhs"].get<double>() / row["rhs"].get<double>();
    CHECK(ratio == doctest::Approx(std::pow(q, e) / c_op).epsilon(1e-12));
    CHECK(ratio <= 1.0 + s.tolerance);
  }
}

TEST_CASE("sparse necessity skips every cube for a constant symbol") {
  Scenario s;
  s.kind = ScenarioKind::SparseNecessity;
  s.grid = 128;
  s.b = "const(c=1)";
  s.trials = 1;
  const auto r = run_sparse_necessity(s);
  CHECK(r.measured["cubes_checked"].get<int>() == 0);
  CHECK(r.measured["degenerate_skipped"] == r.measured["family_size"]);
}

TEST_CASE("log necessity with unit weights matches the scalar Luxemburg root") {
  for (int m : {1, 2}) {
    Scenario s;
    s.kind = ScenarioKind::LogNecessity;
    s.grid = 64;
    s.trials = 2;
    s.m = m;
    const auto r = run_log_necessity(s);
    // exponent α + 1/q - 1/p vanishes, so every cube gives 1/t with t log(e + t)^m = 1
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mid * std::pow(std::log(std::exp(1.0) + mid), m) < 1.0 ? lo : hi) = mid;
    }
    CHECK(r.measured["conclusion"].get<double>() == doctest::Approx(1.0 / lo).epsilon(1e-9));
    CHECK(r.measured["max_log_maximal_average"].get<double>() == 0.0);
    CHECK(r.passed());
  }
}

TEST_CASE("log necessity with m = 0 agrees with the plain two-weight quantity") {
  Scenario s;
  s.kind = ScenarioKind::LogNecessity;
  s.grid = 64;
  s.trials = 2;
  s.m = 0;
  s.mu = "power(a=0.4)";
  s.nu = "power(a=-0.2)";
  const auto r = run_log_necessity(s);
  REQUIRE(r.checks.count("plain_quantity_match") == 1);
  CHECK(r.checks.at("plain_quantity_match"));
}

TEST_CASE("log necessity refuses a weight beyond the doubling limit") {
  Scenario s;
  s.kind = ScenarioKind::LogNecessity;
  s.grid = 64;
  s.mu = "power(a=0.4)";
  s.doubling_limit = 1.5;
  try {
    (void)run_log_necessity(s);
    FAIL("expected a refusal");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("doubling") != std::string::npos);
  }
}

TEST_CASE("bloom with equal weights recovers eta = 1") {
  Scenario s;
  s.kind = ScenarioKind::Bloom;
  s.grid = 256;
  s.lambda = "power(a=0.2)";
  s.mu = "power(a=0.2)";
  const auto r = run_bloom(s);
  CHECK(r.measured["eta_recovery"]["inf"].get<double>() == 1.0);
  CHECK(r.measured["eta_recovery"]["sup"].get<double>() == 1.0);
  CHECK(r.measured["pointwise_canonical"].get<double>() == 1.0);
  CHECK(r.passed());
}

TEST_CASE("bloom enforces the exponent relation") {
  Scenario s;
  s.kind = ScenarioKind::Bloom;
  s.q = 5.0;
  CHECK_THROWS_AS(run_bloom(s), Error);
  s.q = 4.0;
  s.m = 0;
  CHECK_THROWS_AS(run_bloom(s), Error);
}

TEST_CASE("kernel separation decays like 1/A") {
  Scenario s;
  s.kind = ScenarioKind::KernelSep;
  const auto r = run_kernel_sep(s);
  CHECK(r.passed());
}

TEST_CASE("invariant groups are listed in order") {
  const auto& g = invariant_groups();
  REQUIRE(g.size() == 11);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(g[k].id == static_cast<int>(k) + 1);
  CHECK_THROWS_AS(run_invariant_group(12, 1), Error);
}
