#include "fracbump/operators.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "fracbump/report.hpp"
#include "fracbump/spec_string.hpp"

namespace fracbump {

namespace {

void require_alpha(const Domain& d, double alpha) {
  if (!(alpha > 0.0 && alpha < d.dim())) {
    throw Error("alpha must lie in (0, " + std::to_string(d.dim()) + "), got " + format_number(alpha));
  }
}

double ipow(double x, int m) {
  double r = 1.0;
  for (int k = 0; k < m; ++k) r *= x;
  return r;
}

GridFunction commutator_impl(const GridFunction& f, const GridFunction* b, int m, double alpha) {
  const Domain& d = f.domain();
  require_alpha(d, alpha);
  const std::size_t n = d.n_cells();
  const std::size_t ny = d.dim() == 2 ? n : 1;
  const double h = d.h();
  const double vol = d.cell_volume();
  const double e = alpha - d.dim();

  // translation-invariant table of h^dim |x_i - x_j|^{α - dim}
  std::vector<double> kernel(n * ny, 0.0);
  for (std::size_t dy = 0; dy < ny; ++dy) {
    for (std::size_t dx = 0; dx < n; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const double r = h * std::hypot(static_cast<double>(dx), static_cast<double>(dy));
      kernel[dy * n + dx] = vol * std::pow(r, e);
    }
  }
  const double diag = self_cell_integral(d, alpha);

  GridFunction out(d);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < n; ++ix) {
      const std::size_t i = iy * n + ix;
      const double bi = b ? (*b)[i] : 0.0;
      double acc = 0.0;
      for (std::size_t jy = 0; jy < ny; ++jy) {
        const std::size_t dy = iy > jy ? iy - jy : jy - iy;
        for (std::size_t jx = 0; jx < n; ++jx) {
          const std::size_t j = jy * n + jx;
          if (j == i) continue;
          const std::size_t dx = ix > jx ? ix - jx : jx - ix;
          double term = kernel[dy * n + dx] * f[j];
          if (m > 0) term *= ipow(bi - (*b)[j], m);
          acc += term;
        }
      }
      out[i] = m == 0 ? acc + diag * f[i] : acc;
    }
  }
  return out;
}

double dot(const GridFunction& a, const GridFunction& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

double self_cell_integral(const Domain& d, double alpha) {
  require_alpha(d, alpha);
  const double a = 0.5 * d.h();
  if (d.dim() == 1) return 2.0 * std::pow(a, alpha) / alpha;
  // composite Simpson for the smooth integral ∫_0^{π/4} cos^{-α}θ dθ
  constexpr int kIntervals = 2000;
  const double step = 0.25 * std::numbers::pi / kIntervals;
  double s = 0.0;
  for (int k = 0; k <= kIntervals; ++k) {
    const double w = (k == 0 || k == kIntervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    s += w * std::pow(std::cos(k * step), -alpha);
  }
  return 8.0 * std::pow(a, alpha) / alpha * s * step / 3.0;
}

GridFunction fractional_integral(const GridFunction& f, double alpha) {
  return commutator_impl(f, nullptr, 0, alpha);
}

GridFunction commutator(const GridFunction& f, const GridFunction& b, int m, double alpha) {
  if (m < 0) throw Error("commutator order m must be >= 0");
  require_same_domain(f, b);
  if (m == 0) return commutator_impl(f, nullptr, 0, alpha);
  return commutator_impl(f, &b, m, alpha);
}

double adjoint_defect(const GridFunction& f, const GridFunction& g, const GridFunction& b, int m,
                      double alpha) {
  require_same_domain(f, g);
  const double lhs = dot(commutator(f, b, m, alpha), g);
  const double rhs = dot(f, commutator(g, b, m, alpha));
  const double norms = std::sqrt(dot(f, f) * dot(g, g));
  if (norms == 0.0) return 0.0;
  return std::fabs(lhs - (m % 2 == 0 ? rhs : -rhs)) / norms;
}

SparseTrace sparse_operator(const GridFunction& f, const GridFunction& b, int m, double alpha,
                            const SparseFamily& s, bool starred) {
  if (s.size() == 0) throw Error("sparse operator over an empty family");
  if (m < 0) throw Error("commutator order m must be >= 0");
  require_same_domain(f, b);
  if (!(f.domain() == s.lattice.domain())) throw Error("sparse family lives on a different grid");
  require_alpha(f.domain(), alpha);
  const int dim = f.domain().dim();
  SparseTrace t{GridFunction(f.domain()), std::vector<int>(f.size(), -1)};
  for (std::size_t k = 0; k < s.size(); ++k) {
    const CubeRegion q = s.cube(k);
    const double scale = std::pow(q.measure(), alpha / dim);
    const double bq = cube_average(b, q);
    double avg_f = 0.0, avg_bf = 0.0;
    q.for_each_cell([&](std::size_t idx) {
      avg_f += std::fabs(f[idx]);
      avg_bf += ipow(std::fabs(b[idx] - bq), m) * std::fabs(f[idx]);
    });
    avg_f /= static_cast<double>(q.cell_count());
    avg_bf /= static_cast<double>(q.cell_count());
    q.for_each_cell([&](std::size_t idx) {
      const double v = starred ? scale * ipow(std::fabs(b[idx] - bq), m) * avg_f : scale * avg_bf;
      if (t.argmax[idx] < 0 || v > t.value[idx]) {
        t.value[idx] = v;
        t.argmax[idx] = static_cast<int>(k);
      }
    });
  }
  return t;
}

DominationResult sparse_domination_check(const GridFunction& f, const GridFunction& b, int m,
                                         double alpha, double tau) {
  require_same_domain(f, b);
  const Domain& d = f.domain();
  const DyadicLattice lat(d);
  const GridFunction abs_f = f.abs();
  const double b_root = cube_average(b, lat.root());

  std::vector<SparseFamily> families;
  families.push_back(construct_sparse_family(abs_f, lat, tau));
  if (m > 0) {
    const GridFunction weighted = abs_f * (b + (-b_root)).abs().pow(m);
    if (weighted.max() > 0.0) families.push_back(construct_sparse_family(weighted, lat, tau));
  }

  DominationResult r{0.0, 0, false, {0, 0}, commutator(f, b, m, alpha).abs(), GridFunction(d)};
  for (std::size_t k = 0; k < families.size(); ++k) {
    r.family_sizes[k] = families[k].size();
    r.bound += sparse_operator(f, b, m, alpha, families[k], false).value;
    r.bound += sparse_operator(f, b, m, alpha, families[k], true).value;
  }
  const double num_max = r.numerator.max();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (r.bound[i] > 0.0) {
      const double q = r.numerator[i] / r.bound[i];
      if (q > r.ratio) {
        r.ratio = q;
        r.argmax_cell = i;
      }
    } else if (r.numerator[i] > 1e-14 * num_max) {
      r.failed = true;
    }
  }
  return r;
}

double reduction_inequality_ratio(const GridFunction& f, const GridFunction& b, int m,
                                  const std::vector<CubeRegion>& cubes) {
  require_same_domain(f, b);
  double worst = 0.0;
  std::vector<double> avg(static_cast<std::size_t>(m) + 1);
  for (const auto& q : cubes) {
    const double bq = cube_average(b, q);
    for (int k = 0; k <= m; ++k) {
      double s = 0.0;
      q.for_each_cell([&](std::size_t idx) { s += ipow(std::fabs(b[idx] - bq), k) * std::fabs(f[idx]); });
      avg[static_cast<std::size_t>(k)] = s / static_cast<double>(q.cell_count());
    }
    q.for_each_cell([&](std::size_t idx) {
      const double a = std::fabs(b[idx] - bq);
      const double rhs = (m + 1.0) * (ipow(a, m) * avg[0] + avg[static_cast<std::size_t>(m)]);
      for (int k = 0; k <= m; ++k) {
        const double lhs = ipow(a, m - k) * avg[static_cast<std::size_t>(k)];
        if (lhs == 0.0) continue;
        worst = std::max(worst, rhs > 0.0 ? lhs / rhs : HUGE_VAL);
      }
    });
  }
  return worst;
}

GridFunction maximal(const GridFunction& f, double beta, const std::optional<YoungFunction>& b,
                     const std::vector<CubeRegion>& cubes) {
  const int dim = f.domain().dim();
  if (!(beta >= 0.0 && beta < dim)) throw Error("maximal operator needs 0 <= beta < dim");
  GridFunction out(f.domain());
  for (const auto& q : cubes) {
    double v = 0.0;
    if (b) {
      v = luxemburg_norm_of(cube_values(f, q), [&](double t) { return (*b)(t); });
    } else {
      q.for_each_cell([&](std::size_t idx) { v += std::fabs(f[idx]); });
      v /= static_cast<double>(q.cell_count());
    }
    v *= std::pow(q.measure(), beta / dim);
    q.for_each_cell([&](std::size_t idx) { out[idx] = std::max(out[idx], v); });
  }
  return out;
}

namespace {

// Sample points of the ball B(c, r) on a `samples`-per-axis lattice through the centre,
// boundary points included.
std::vector<Point> ball_samples(int dim, Point c, double r, int samples) {
  std::vector<Point> out;
  const auto coord = [&](int k) { return -1.0 + 2.0 * k / (samples - 1); };
  if (dim == 1) {
    for (int k = 0; k < samples; ++k) out.push_back({c[0] + r * coord(k), 0.0});
    return out;
  }
  for (int j = 0; j < samples; ++j) {
    for (int k = 0; k < samples; ++k) {
      const double u = coord(k), v = coord(j);
      if (u * u + v * v <= 1.0 + 1e-15) out.push_back({c[0] + r * u, c[1] + r * v});
    }
  }
  // the circle itself
  for (int k = 0; k < 4 * samples; ++k) {
    const double t = 2.0 * std::numbers::pi * k / (4.0 * samples);
    out.push_back({c[0] + r * std::cos(t), c[1] + r * std::sin(t)});
  }
  return out;
}

double measured_oscillation(int dim, double alpha, double r, double a, int samples) {
  const double e = alpha - dim;
  const Point y0{-0.5 * a * r, 0.0};
  const Point x0{0.5 * a * r, 0.0};
  const double k0 = std::pow(a * r, e);
  const auto ys = ball_samples(dim, y0, r, samples);
  const auto xs = ball_samples(dim, x0, r, samples);
  double worst = 0.0;
  for (const auto& x : xs) {
    for (const auto& y : ys) {
      const double dist = std::hypot(x[0] - y[0], x[1] - y[1]);
      worst = std::max(worst, std::fabs(std::pow(dist, e) - k0));
    }
  }
  return worst;
}

}  // namespace

KernelOscillation kernel_oscillation(int dim, double alpha, double r, double a, int samples,
                                     double half_width) {
  if (dim != 1 && dim != 2) throw Error("kernel oscillation: dim must be 1 or 2");
  if (!(alpha > 0.0 && alpha < dim)) throw Error("kernel oscillation: alpha must lie in (0, dim)");
  if (!(a >= 4.0)) throw Error("kernel oscillation: separation A must be >= 4");
  if (!(r > 0.0)) throw Error("kernel oscillation: radius must be positive");
  if (samples < 2) throw Error("kernel oscillation: need at least 2 samples per axis");
  if (0.5 * a * r + r > half_width) {
    throw Error("kernel oscillation: balls of radius " + format_number(r) + " at separation " +
                format_number(a) + "r do not fit in [-" + format_number(half_width) + ", " +
                format_number(half_width) + "]");
  }
  KernelOscillation k;
  const double e = alpha - dim;
  k.measured = measured_oscillation(dim, alpha, r, a, samples);
  k.center = std::pow(a * r, e);
  k.c = measured_oscillation(dim, alpha, r, 4.0, samples) * 4.0 * std::pow(4.0 * r, -e);
  k.bound = k.c / a * std::pow(a * r, e);
  return k;
}

void write_trace_csv(std::ostream& os, const GridFunction& value,
                     const std::vector<std::string>* cube_labels) {
  const Domain& d = value.domain();
  os << (d.dim() == 2 ? "index,x,y,value" : "index,x,value") << (cube_labels ? ",cube\n" : "\n");
  for (std::size_t k = 0; k < value.size(); ++k) {
    const Point p = d.point(k);
    os << k << ',' << format_number(p[0]);
    if (d.dim() == 2) os << ',' << format_number(p[1]);
    os << ',' << format_number(value[k]);
    if (cube_labels) os << ',' << (*cube_labels)[k];
    os << '\n';
  }
}

}  // namespace fracbump
