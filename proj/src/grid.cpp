#include "fracbump/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace fracbump {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

template <typename T>
void write_le(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw Error("binary grid function: truncated input");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

Domain::Domain(int dim, double half_width, std::size_t n_cells)
    : dim_(dim), half_width_(half_width), n_cells_(n_cells) {
  if (dim != 1 && dim != 2) throw Error("domain: dim must be 1 or 2");
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw Error("domain: half-width must be positive");
  }
  if (n_cells < 8 || !is_power_of_two(n_cells)) {
    throw Error("domain: cells per side must be a power of two >= 8");
  }
}

double Domain::cell_volume() const { return dim_ == 1 ? h() : h() * h(); }

std::size_t Domain::size() const { return dim_ == 1 ? n_cells_ : n_cells_ * n_cells_; }

Point Domain::point(std::size_t idx) const {
  const auto [i, j] = unflat(idx);
  return {center(i), dim_ == 2 ? center(j) : 0.0};
}

std::size_t Domain::cell_of(double x) const {
  const double s = std::floor((x + half_width_) / h());
  if (s <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(s), n_cells_ - 1);
}

CubeRegion::CubeRegion(const Domain& domain, std::array<std::size_t, 2> origin,
                       std::size_t side)
    : domain_(domain), origin_(origin), side_(side) {
  if (side == 0) throw Error("degenerate cube");
  if (domain.dim() == 1) origin_[1] = 0;
  const std::size_t n = domain.n_cells();
  if (origin_[0] + side > n || (domain.dim() == 2 && origin_[1] + side > n)) {
    throw Error("cube extends outside the domain");
  }
}

CubeRegion CubeRegion::from_box(const Domain& domain, Point lo, double side_length) {
  const double h = domain.h();
  const auto side = static_cast<std::size_t>(std::llround(side_length / h));
  const auto snap = [&](double x) {
    return static_cast<std::size_t>(std::llround((x + domain.half_width()) / h));
  };
  return CubeRegion(domain, {snap(lo[0]), domain.dim() == 2 ? snap(lo[1]) : 0}, side);
}

CubeRegion CubeRegion::whole(const Domain& domain) {
  return CubeRegion(domain, {0, 0}, domain.n_cells());
}

std::size_t CubeRegion::cell_count() const {
  return domain_.dim() == 1 ? side_ : side_ * side_;
}

bool CubeRegion::contains(std::size_t idx) const {
  const auto [i, j] = domain_.unflat(idx);
  const bool in_x = i >= origin_[0] && i < origin_[0] + side_;
  if (domain_.dim() == 1) return in_x;
  return in_x && j >= origin_[1] && j < origin_[1] + side_;
}

std::vector<std::size_t> CubeRegion::cells() const {
  std::vector<std::size_t> out;
  out.reserve(cell_count());
  for_each_cell([&](std::size_t idx) { out.push_back(idx); });
  return out;
}

Point CubeRegion::center() const {
  const double h = domain_.h();
  const double half = 0.5 * side_length();
  const double x = -domain_.half_width() + static_cast<double>(origin_[0]) * h + half;
  const double y = domain_.dim() == 2
                       ? -domain_.half_width() + static_cast<double>(origin_[1]) * h + half
                       : 0.0;
  return {x, y};
}

std::string CubeRegion::label() const {
  std::ostringstream os;
  const std::size_t n = domain_.n_cells();
  const bool dyadic = is_power_of_two(side_) && origin_[0] % side_ == 0 &&
                      (domain_.dim() == 1 || origin_[1] % side_ == 0);
  if (dyadic) {
    const int depth = std::countr_zero(n / side_);
    os << depth << ':' << origin_[0] / side_;
    if (domain_.dim() == 2) os << ':' << origin_[1] / side_;
  } else {
    os << '@' << origin_[0];
    if (domain_.dim() == 2) os << ',' << origin_[1];
    os << '+' << side_;
  }
  return os.str();
}

GridFunction::GridFunction(const Domain& domain, double value)
    : domain_(domain), values_(domain.size(), value) {}

GridFunction::GridFunction(const Domain& domain, std::vector<double> values)
    : domain_(domain), values_(std::move(values)) {
  if (values_.size() != domain_.size()) throw Error("grid function: size mismatch");
}

GridFunction GridFunction::sample(const Domain& domain,
                                  const std::function<double(const Point&)>& fn) {
  GridFunction g(domain);
  for (std::size_t k = 0; k < g.size(); ++k) g.values_[k] = fn(domain.point(k));
  return g;
}

GridFunction GridFunction::indicator(const CubeRegion& q) {
  GridFunction g(q.domain());
  q.for_each_cell([&](std::size_t idx) { g.values_[idx] = 1.0; });
  return g;
}

GridFunction GridFunction::map(const std::function<double(double)>& fn) const {
  GridFunction g(*this);
  for (double& v : g.values_) v = fn(v);
  return g;
}

GridFunction GridFunction::abs() const {
  GridFunction g(*this);
  for (double& v : g.values_) v = std::fabs(v);
  return g;
}

GridFunction GridFunction::pow(double e) const {
  GridFunction g(*this);
  for (double& v : g.values_) v = std::pow(v, e);
  return g;
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  require_same_domain(*this, o);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  require_same_domain(*this, o);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
  return *this;
}

GridFunction& GridFunction::operator*=(const GridFunction& o) {
  require_same_domain(*this, o);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] *= o.values_[k];
  return *this;
}

GridFunction& GridFunction::operator/=(const GridFunction& o) {
  require_same_domain(*this, o);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] /= o.values_[k];
  return *this;
}

GridFunction& GridFunction::operator+=(double c) {
  for (double& v : values_) v += c;
  return *this;
}

GridFunction& GridFunction::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::fabs(v));
  return m;
}

double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }

double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool GridFunction::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool GridFunction::all_positive() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return v > 0.0 && std::isfinite(v); });
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(GridFunction a, const GridFunction& b) { return a *= b; }
GridFunction operator/(GridFunction a, const GridFunction& b) { return a /= b; }
GridFunction operator*(double c, GridFunction a) { return a *= c; }
GridFunction operator+(GridFunction a, double c) { return a += c; }

void require_same_domain(const GridFunction& a, const GridFunction& b) {
  if (!(a.domain() == b.domain())) throw Error("grid functions live on different domains");
}

void require_weight(const GridFunction& w, const char* what) {
  if (!w.all_positive()) {
    throw Error(std::string(what) + ": weight must be positive and finite everywhere");
  }
}

double cube_average(const GridFunction& f, const CubeRegion& q) {
  if (!(f.domain() == q.domain())) throw Error("cube lies on a different domain");
  double sum = 0.0;
  q.for_each_cell([&](std::size_t idx) { sum += f[idx]; });
  return sum / static_cast<double>(q.cell_count());
}

double cube_integral(const GridFunction& f, const CubeRegion& q) {
  return cube_average(f, q) * q.measure();
}

double integral(const GridFunction& f) {
  const auto v = f.values();
  return std::accumulate(v.begin(), v.end(), 0.0) * f.domain().cell_volume();
}

double interpolate(const GridFunction& f, const Point& x) {
  const Domain& d = f.domain();
  const std::size_t n = d.n_cells();
  std::array<std::size_t, 2> lo{0, 0};
  std::array<double, 2> t{0.0, 0.0};
  for (int axis = 0; axis < d.dim(); ++axis) {
    const double s = (x[axis] + d.half_width()) / d.h() - 0.5;
    if (s <= 0.0) continue;
    if (s >= static_cast<double>(n - 1)) {
      lo[axis] = n - 2;
      t[axis] = 1.0;
      continue;
    }
    lo[axis] = static_cast<std::size_t>(s);
    t[axis] = s - static_cast<double>(lo[axis]);
  }
  const auto at = [&](std::size_t di, std::size_t dj) { return f[d.flat(lo[0] + di, lo[1] + dj)]; };
  const double row0 = (1.0 - t[0]) * at(0, 0) + t[0] * at(1, 0);
  if (d.dim() == 1) return row0;
  const double row1 = (1.0 - t[0]) * at(0, 1) + t[0] * at(1, 1);
  return (1.0 - t[1]) * row0 + t[1] * row1;
}

double lp_norm(const GridFunction& f, const GridFunction& w, double p) {
  if (!(p >= 1.0)) throw Error("lp_norm: p must be >= 1");
  require_same_domain(f, w);
  double sum = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) sum += std::pow(std::fabs(f[k]), p) * w[k];
  return std::pow(sum * f.domain().cell_volume(), 1.0 / p);
}

double lp_norm(const GridFunction& f, double p) {
  return lp_norm(f, GridFunction(f.domain(), 1.0), p);
}

double weak_lq_norm(const GridFunction& f, const GridFunction& w, double q) {
  require_same_domain(f, w);
  if (!(q > 0.0)) throw Error("weak_lq_norm: q must be positive");
  std::vector<std::size_t> order(f.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::fabs(f[a]) > std::fabs(f[b]); });
  const double vol = f.domain().cell_volume();
  double mass = 0.0;
  double best = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    mass += w[order[k]] * vol;
    const double t = std::fabs(f[order[k]]);
    // ties: the level set {|f| >= t} includes every equal sample
    if (k + 1 < order.size() && std::fabs(f[order[k + 1]]) == t) continue;
    best = std::max(best, t * std::pow(mass, 1.0 / q));
  }
  return best;
}

void write_csv(std::ostream& os, const GridFunction& f) {
  const Domain& d = f.domain();
  os << (d.dim() == 1 ? "index,x,value\n" : "index,x,y,value\n");
  os << std::setprecision(17);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const Point p = d.point(k);
    os << k << ',' << p[0];
    if (d.dim() == 2) os << ',' << p[1];
    os << ',' << f[k] << '\n';
  }
}

GridFunction read_csv(std::istream& is, int dim) {
  std::string line;
  if (!std::getline(is, line)) throw Error("csv grid function: empty input");
  std::vector<double> values;
  double x0 = 0.0;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::size_t index = 0;
    double x = 0.0, y = 0.0, v = 0.0;
    row >> index >> x;
    if (dim == 2) row >> y;
    row >> v;
    if (!row || index != values.size()) {
      throw Error("csv grid function: malformed row at line " + std::to_string(line_no));
    }
    if (index == 0) x0 = x;
    values.push_back(v);
  }
  const auto n = static_cast<std::size_t>(
      std::llround(dim == 1 ? static_cast<double>(values.size())
                            : std::sqrt(static_cast<double>(values.size()))));
  const double half_width = -x0 / (1.0 - 1.0 / static_cast<double>(n));
  return GridFunction(Domain(dim, half_width, n), std::move(values));
}

void write_binary(std::ostream& os, const GridFunction& f) {
  write_le<std::int32_t>(os, f.domain().dim());
  write_le<std::int32_t>(os, static_cast<std::int32_t>(f.domain().n_cells()));
  write_le<double>(os, f.domain().half_width());
  for (double v : f.values()) write_le<double>(os, v);
}

GridFunction read_binary(std::istream& is) {
  const auto dim = read_le<std::int32_t>(is);
  const auto n = read_le<std::int32_t>(is);
  const auto half_width = read_le<double>(is);
  if (n <= 0) throw Error("binary grid function: bad header");
  Domain d(dim, half_width, static_cast<std::size_t>(n));
  std::vector<double> values(d.size());
  for (double& v : values) v = read_le<double>(is);
  return GridFunction(d, std::move(values));
}

GridFunction load_grid_function(const std::string& path, const Domain& domain) {
  const bool binary = path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0;
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error("cannot open " + path);
  GridFunction g = binary ? read_binary(in) : read_csv(in, domain.dim());
  const Domain& d = g.domain();
  if (d.dim() != domain.dim() || d.n_cells() != domain.n_cells() ||
      std::fabs(d.half_width() - domain.half_width()) > 1e-9 * domain.half_width()) {
    throw Error(path + ": tabulated function does not match the grid");
  }
  return GridFunction(domain, std::vector<double>(g.values().begin(), g.values().end()));
}

}  // namespace fracbump
