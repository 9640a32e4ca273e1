#include <sstream>

#include "doctest.h"
#include "fracbump/operators.hpp"
#include "support.hpp"

using namespace fracbump;
using fracbump::testing::random_function;
using fracbump::testing::rel_diff;

namespace {

const double kSqrt2 = std::sqrt(2.0);

// Literal double sum with std::pow, no kernel table.
GridFunction naive_commutator(const GridFunction& f, const GridFunction& b, int m, double alpha) {
  const Domain& d = f.domain();
  GridFunction out(d);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Point x = d.point(i);
    double s = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (j == i) continue;
      const Point y = d.point(j);
      const double r = std::hypot(x[0] - y[0], x[1] - y[1]);
      s += std::pow(b[i] - b[j], m) * f[j] * std::pow(r, alpha - d.dim()) * d.cell_volume();
    }
    out[i] = s + (m == 0 ? self_cell_integral(d, alpha) * f[i] : 0.0);
  }
  return out;
}

GridFunction unit_interval(const Domain& d) {
  return GridFunction::sample(d, [](const Point& p) { return p[0] > 0.0 && p[0] < 1.0 ? 1.0 : 0.0; });
}

GridFunction identity(const Domain& d) {
  return GridFunction::sample(d, [](const Point& p) { return p[0]; });
}

}  // namespace

TEST_CASE("self-cell integral") {
  const Domain d1(1, 1.0, 16);
  CHECK(self_cell_integral(d1, 0.5) == doctest::Approx(2.0 * std::sqrt(d1.h() / 2) / 0.5).epsilon(1e-15));
  SUBCASE("2D, alpha = 1 has the closed form 8a log(1 + sqrt 2)") {
    const Domain d2(2, 1.0, 8);  // h = 1/4, a = 1/8
    CHECK(self_cell_integral(d2, 1.0) == doctest::Approx(8.0 * 0.125 * std::log(1.0 + kSqrt2)).epsilon(1e-12));
  }
  SUBCASE("2D lies between the inscribed and circumscribed disc integrals") {
    const Domain d2(2, 1.0, 8);
    const double a = d2.h() / 2;
    for (double alpha : {0.1, 0.5, 1.0, 1.5, 1.9}) {
      const double v = self_cell_integral(d2, alpha);
      CHECK(v > 2.0 * M_PI * std::pow(a, alpha) / alpha);
      CHECK(v < 2.0 * M_PI * std::pow(kSqrt2 * a, alpha) / alpha);
    }
  }
  CHECK_THROWS_AS(self_cell_integral(d1, 1.0), Error);
  CHECK_THROWS_AS(self_cell_integral(d1, 0.0), Error);
}

TEST_CASE("fractional_integral") {
  SUBCASE("zero in, zero out") {
    const Domain d(2, 1.0, 8);
    const auto out = fractional_integral(GridFunction(d), 1.0);
    CHECK(out.max_abs() == 0.0);
  }
  SUBCASE("closed form at x = 2 and first-order convergence") {
    const double exact = 2.0 * (kSqrt2 - 1.0);
    std::vector<double> errors;
    for (std::size_t n : {128u, 256u, 512u}) {
      const Domain d(1, 4.0, n);
      const double v = interpolate(fractional_integral(unit_interval(d), 0.5), {2.0, 0.0});
      errors.push_back(std::fabs(v - exact));
    }
    CHECK(errors.back() <= 2e-3);
    CHECK(std::log2(errors[0] / errors[1]) >= 1.0);
    CHECK(std::log2(errors[1] / errors[2]) >= 1.0);
  }
  SUBCASE("even input gives even output") {
    auto gen = fracbump::testing::rng(71);
    for (int dim : {1, 2}) {
      const Domain d(dim, 1.0, dim == 1 ? 64 : 16);
      auto f = random_function(d, gen);
      const std::size_t n = d.n_cells();
      for (std::size_t k = 0; k < f.size(); ++k) {
        const auto [i, j] = d.unflat(k);
        f[d.flat(n - 1 - i, j)] = f[k];
      }
      const auto out = fractional_integral(f, 0.7);
      for (std::size_t k = 0; k < f.size(); ++k) {
        const auto [i, j] = d.unflat(k);
        CHECK(std::fabs(out[k] - out[d.flat(n - 1 - i, j)]) <= 1e-12 * out.max_abs());
      }
    }
  }
  CHECK_THROWS_AS(fractional_integral(GridFunction(Domain(1, 1.0, 8)), 1.0), Error);
}

TEST_CASE("commutator") {
  auto gen = fracbump::testing::rng(73);
  SUBCASE("closed form for b(x) = x, m = 1") {
    const double exact = 2.0 / 3.0 * (std::pow(2.0, 1.5) - 1.0);
    std::vector<double> errors;
    for (std::size_t n : {128u, 256u, 512u}) {
      const Domain d(1, 4.0, n);
      const double v = interpolate(commutator(unit_interval(d), identity(d), 1, 0.5), {2.0, 0.0});
      errors.push_back(std::fabs(v - exact));
    }
    CHECK(errors.back() <= 2e-3);
    CHECK(std::log2(errors[0] / errors[1]) >= 1.0);
  }
  SUBCASE("constant symbols annihilate, m = 0 is the fractional integral bit for bit") {
    const Domain d(1, 1.0, 64);
    const auto f = random_function(d, gen, -1.0, 1.0);
    for (int m : {1, 2, 3}) CHECK(commutator(f, GridFunction(d, 2.5), m, 0.5).max_abs() == 0.0);
    const auto a = commutator(f, random_function(d, gen), 0, 0.5);
    const auto b = fractional_integral(f, 0.5);
    for (std::size_t k = 0; k < f.size(); ++k) CHECK(a[k] == b[k]);
    CHECK_THROWS_AS(commutator(f, f, -1, 0.5), Error);
  }
  SUBCASE("matches the literal double sum") {
    for (int dim : {1, 2}) {
      const Domain d(dim, 1.0, dim == 1 ? 32 : 8);
      const auto f = random_function(d, gen, -1.0, 1.0);
      const auto b = random_function(d, gen, -1.0, 1.0);
      for (int m : {0, 1, 2, 3}) {
        const auto fast = commutator(f, b, m, 0.6);
        const auto slow = naive_commutator(f, b, m, 0.6);
        for (std::size_t k = 0; k < f.size(); ++k) CHECK(std::fabs(fast[k] - slow[k]) <= 1e-12 * slow.max_abs());
      }
    }
  }
  SUBCASE("linearity") {
    const Domain d(1, 1.0, 64);
    const auto f = random_function(d, gen, -1.0, 1.0);
    const auto g = random_function(d, gen, -1.0, 1.0);
    const auto b = random_function(d, gen);
    for (int m : {0, 1, 2}) {
      const auto lhs = commutator(2.0 * f + (-3.0) * g, b, m, 0.5);
      const auto rhs = 2.0 * commutator(f, b, m, 0.5) + (-3.0) * commutator(g, b, m, 0.5);
      for (std::size_t k = 0; k < f.size(); ++k) CHECK(std::fabs(lhs[k] - rhs[k]) <= 1e-12 * rhs.max_abs());
    }
  }
}

TEST_CASE("adjoint_defect stays below 1e-12") {
  auto gen = fracbump::testing::rng(79);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = trial % 5 == 4 ? 2 : 1;
    const Domain d(dim, 1.0, dim == 1 ? 64 : 8);
    const auto f = random_function(d, gen, -1.0, 1.0);
    const auto g = random_function(d, gen, -1.0, 1.0);
    const auto b = random_function(d, gen, -1.0, 1.0);
    const int m = trial % 4;
    CAPTURE(m);
    CHECK(adjoint_defect(f, g, b, m, dim == 1 ? 0.5 : 1.2) <= 1e-12);
  }
}

TEST_CASE("sparse_operator") {
  const Domain d(1, 1.0, 16);
  const DyadicLattice lat(d);
  auto gen = fracbump::testing::rng(83);
  const auto f = random_function(d, gen, -1.0, 1.0);
  const double alpha = 0.5;
  SUBCASE("single cube") {
    const SparseFamily s{lat, {{1, 1, 0}}, {lat.cube({1, 1, 0}).cells()}, 1.0};
    const CubeRegion q0 = lat.cube({1, 1, 0});
    for (bool starred : {false, true}) {
      const auto zero = sparse_operator(f, GridFunction(d, 3.0), 2, alpha, s, starred);
      CHECK(zero.value.max_abs() == 0.0);
      const auto t = sparse_operator(f, random_function(d, gen), 0, alpha, s, starred);
      const double expected = std::pow(q0.measure(), alpha) * cube_average(f.abs(), q0);
      for (std::size_t k = 0; k < d.size(); ++k) {
        if (q0.contains(k)) {
          CHECK(t.value[k] == doctest::Approx(expected).epsilon(1e-14));
          CHECK(t.argmax[k] == 0);
        } else {
          CHECK(t.value[k] == 0.0);
          CHECK(t.argmax[k] == -1);
        }
      }
    }
  }
  SUBCASE("nested pair with b(x) = x and f = 1 against per-cube enumeration") {
    const SparseFamily s{lat, {{0, 0, 0}, {2, 1, 0}}, {{}, {}}, 1.0};
    const GridFunction one(d, 1.0);
    const auto b = identity(d);
    for (bool starred : {false, true}) {
      const auto t = sparse_operator(one, b, 1, alpha, s, starred);
      for (std::size_t k = 0; k < d.size(); ++k) {
        double best = 0.0;
        for (const auto& a : s.cubes) {
          const CubeRegion q = lat.cube(a);
          if (!q.contains(k)) continue;
          // b(x) = x on a cube of length l centred at c: avg|x - c| = l/4
          const double c = q.center()[0];
          const double v = starred ? std::pow(q.side_length(), alpha) * std::fabs(b[k] - c)
                                   : std::pow(q.side_length(), alpha) * q.side_length() / 4.0;
          best = std::max(best, v);
        }
        CHECK(t.value[k] == doctest::Approx(best).epsilon(1e-10));
      }
    }
  }
  SUBCASE("starred equals unstarred for m = 0") {
    const auto s = construct_sparse_family(f, lat, 2.0, 2);
    const auto b = random_function(d, gen);
    const auto u = sparse_operator(f, b, 0, alpha, s, false);
    const auto v = sparse_operator(f, b, 0, alpha, s, true);
    for (std::size_t k = 0; k < d.size(); ++k) CHECK(u.value[k] == v.value[k]);
  }
  SUBCASE("empty family") {
    const SparseFamily s{lat, {}, {}, 1.0};
    CHECK_THROWS_AS(sparse_operator(f, f, 1, alpha, s, false), Error);
  }
}

TEST_CASE("sparse_domination_check") {
  const Domain d(1, 1.0, 128);
  auto gen = fracbump::testing::rng(89);
  const auto inner = [&](GridFunction g) {
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (std::fabs(d.point(k)[0]) >= 0.5) g[k] = 0.0;
    }
    return g;
  };
  SUBCASE("constant symbol gives ratio 0") {
    const auto r = sparse_domination_check(inner(random_function(d, gen)), GridFunction(d, 1.0), 2, 0.5, 4.0);
    CHECK(r.ratio == 0.0);
    CHECK_FALSE(r.failed);
  }
  SUBCASE("indicator of a dyadic cube, m = 0") {
    const auto r = sparse_domination_check(GridFunction::indicator(CubeRegion(d, {48, 0}, 16)),
                                           GridFunction(d), 0, 0.5, 4.0);
    CHECK(std::isfinite(r.ratio));
    CHECK(r.ratio > 0.0);
    CHECK_FALSE(r.failed);
  }
  SUBCASE("random pairs keep the ratio within a factor 10 of the median") {
    for (int m : {1, 2}) {
      std::vector<double> ratios;
      for (int trial = 0; trial < 20; ++trial) {
        const auto r = sparse_domination_check(inner(random_function(d, gen, -1.0, 1.0)),
                                               random_function(d, gen, -1.0, 1.0), m, 0.5, 4.0);
        CHECK_FALSE(r.failed);
        ratios.push_back(r.ratio);
      }
      std::sort(ratios.begin(), ratios.end());
      CHECK(ratios.back() <= 10.0 * ratios[ratios.size() / 2]);
    }
  }
}

TEST_CASE("pointwise reduction inequality holds exhaustively at N = 32") {
  auto gen = fracbump::testing::rng(97);
  for (int dim : {1, 2}) {
    const Domain d(dim, 1.0, 32);
    const auto cubes = enumerate_cubes(DyadicLattice(d), 1);
    for (int m : {1, 2, 3}) {
      const auto f = random_function(d, gen, -1.0, 1.0);
      const auto b = random_function(d, gen, -2.0, 2.0);
      CHECK(reduction_inequality_ratio(f, b, m, cubes) <= 1.0);
    }
  }
}

TEST_CASE("maximal") {
  const Domain d(1, 1.0, 64);
  const auto cubes = enumerate_cubes(DyadicLattice(d), 1);
  SUBCASE("constants") {
    const auto out = maximal(GridFunction(d, 2.0), 0.0, std::nullopt, cubes);
    for (std::size_t k = 0; k < d.size(); ++k) CHECK(out[k] == doctest::Approx(2.0));
  }
  SUBCASE("indicators reach 1 on their cube") {
    const CubeRegion q(d, {16, 0}, 16);
    const auto out = maximal(GridFunction::indicator(q), 0.0, std::nullopt, cubes);
    q.for_each_cell([&](std::size_t k) { CHECK(out[k] >= 1.0); });
  }
  SUBCASE("Orlicz fractional maximal operator has a bounded L^p -> L^q ratio") {
    // 1/p - 1/q = beta with p = 2, beta = 1/4
    const double p = 2.0, q = 4.0, beta = 0.25;
    const auto bbar = complementary(YoungFunction::power_log(2.0, 1.5));
    auto gen = fracbump::testing::rng(101);
    std::vector<double> ratios;
    for (int trial = 0; trial < 50; ++trial) {
      const auto f = random_function(d, gen, -1.0, 1.0);
      ratios.push_back(lp_norm(maximal(f, beta, bbar, cubes), q) / lp_norm(f, p));
    }
    std::sort(ratios.begin(), ratios.end());
    CHECK(std::isfinite(ratios.back()));
    CHECK(ratios.back() <= 2.0 * ratios.front());
  }
  CHECK_THROWS_AS(maximal(GridFunction(d), 1.0, std::nullopt, cubes), Error);
}

TEST_CASE("kernel_oscillation") {
  SUBCASE("centre value at A = 4") {
    const auto k = kernel_oscillation(1, 0.5, 1.0, 4.0, 33, 10.0);
    CHECK(k.center == 0.5);
    CHECK(k.measured <= k.bound * (1.0 + 1e-12));
  }
  SUBCASE("decay like 1/A along A = 4, 8, ..., 256") {
    for (int dim : {1, 2}) {
      const double alpha = dim == 1 ? 0.5 : 1.3;
      double previous = HUGE_VAL;
      for (double a = 4.0; a <= 256.0; a *= 2.0) {
        const auto k = kernel_oscillation(dim, alpha, 1.0, a, 17, 200.0);
        const double scaled = k.measured * std::pow(a, dim - alpha + 1.0);
        CHECK(scaled <= k.c * (1.0 + 1e-12));
        CHECK(scaled >= k.c / 4.0);
        CHECK(scaled < previous);
        CHECK(k.measured <= k.bound * (1.0 + 1e-12));
        previous = scaled;
      }
    }
  }
  SUBCASE("geometry must fit") {
    CHECK_THROWS_AS(kernel_oscillation(1, 0.5, 1.0, 64.0, 9, 10.0), Error);
    CHECK_THROWS_AS(kernel_oscillation(1, 0.5, 1.0, 2.0, 9, 10.0), Error);
  }
}

TEST_CASE("trace csv") {
  const Domain d(1, 1.0, 8);
  std::ostringstream os;
  const std::vector<std::string> labels(8, "0:0");
  write_trace_csv(os, GridFunction(d, 1.5), &labels);
  CHECK(os.str().rfind("index,x,value,cube\n0,-0.875,1.5,0:0\n", 0) == 0);
}
