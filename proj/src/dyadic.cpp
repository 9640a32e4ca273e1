#include "fracbump/dyadic.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "fracbump/spec_string.hpp"

namespace fracbump {

DyadicLattice::DyadicLattice(const Domain& domain)
    : domain_(domain), max_depth_(std::countr_zero(domain.n_cells())) {}

bool DyadicLattice::valid(const CubeAddress& a) const {
  if (a.depth < 0 || a.depth > max_depth_) return false;
  const std::size_t per_axis = std::size_t{1} << a.depth;
  if (a.i >= per_axis) return false;
  return domain_.dim() == 2 ? a.j < per_axis : a.j == 0;
}

CubeRegion DyadicLattice::cube(const CubeAddress& a) const {
  if (!valid(a)) throw Error("address outside the lattice: " + format(a));
  const std::size_t side = side_at(a.depth);
  return CubeRegion(domain_, {a.i * side, a.j * side}, side);
}

std::optional<CubeAddress> DyadicLattice::address_of(const CubeRegion& q) const {
  const std::size_t side = q.side();
  if (!std::has_single_bit(side) || side > domain_.n_cells()) return std::nullopt;
  const auto o = q.origin();
  if (o[0] % side != 0 || o[1] % side != 0) return std::nullopt;
  return CubeAddress{std::countr_zero(domain_.n_cells() / side), o[0] / side, o[1] / side};
}

std::vector<CubeAddress> DyadicLattice::children(const CubeAddress& a) const {
  if (a.depth >= max_depth_) return {};
  std::vector<CubeAddress> out;
  const std::size_t jn = domain_.dim() == 2 ? 2 : 1;
  for (std::size_t dj = 0; dj < jn; ++dj) {
    for (std::size_t di = 0; di < 2; ++di) {
      out.push_back({a.depth + 1, 2 * a.i + di, domain_.dim() == 2 ? 2 * a.j + dj : 0});
    }
  }
  return out;
}

std::optional<CubeAddress> DyadicLattice::parent(const CubeAddress& a) const {
  if (a.depth == 0) return std::nullopt;
  return CubeAddress{a.depth - 1, a.i / 2, a.j / 2};
}

bool DyadicLattice::contains(const CubeAddress& outer, const CubeAddress& inner) const {
  if (inner.depth < outer.depth) return false;
  const int shift = inner.depth - outer.depth;
  return (inner.i >> shift) == outer.i && (inner.j >> shift) == outer.j;
}

std::string DyadicLattice::format(const CubeAddress& a) const {
  std::string s = std::to_string(a.depth) + ":" + std::to_string(a.i);
  if (domain_.dim() == 2) s += ":" + std::to_string(a.j);
  return s;
}

CubeAddress DyadicLattice::parse(const std::string& text) const {
  std::vector<long long> parts;
  std::string_view rest = trim(text);
  while (true) {
    const auto colon = rest.find(':');
    const auto piece = rest.substr(0, colon);
    long long v = -1;
    const auto res = std::from_chars(piece.data(), piece.data() + piece.size(), v);
    if (res.ec != std::errc() || res.ptr != piece.data() + piece.size() || v < 0) {
      throw Error("malformed cube address '" + text + "'");
    }
    parts.push_back(v);
    if (colon == std::string_view::npos) break;
    rest = rest.substr(colon + 1);
  }
  if (parts.size() != static_cast<std::size_t>(domain_.dim()) + 1) {
    throw Error("cube address '" + text + "' does not match dimension " +
                std::to_string(domain_.dim()));
  }
  CubeAddress a{static_cast<int>(parts[0]), static_cast<std::size_t>(parts[1]),
                parts.size() > 2 ? static_cast<std::size_t>(parts[2]) : 0};
  if (!valid(a)) throw Error("address outside the lattice: " + text);
  return a;
}

std::vector<CubeRegion> enumerate_cubes(const DyadicLattice& lat, std::size_t min_cells_per_side) {
  if (min_cells_per_side < 1 || !std::has_single_bit(min_cells_per_side)) {
    throw Error("min_cells_per_side must be a power of two");
  }
  std::vector<CubeRegion> out;
  for (int d = 0; d <= lat.max_depth() && lat.side_at(d) >= min_cells_per_side; ++d) {
    const std::size_t per_axis = std::size_t{1} << d;
    const std::size_t jn = lat.domain().dim() == 2 ? per_axis : 1;
    for (std::size_t j = 0; j < jn; ++j) {
      for (std::size_t i = 0; i < per_axis; ++i) out.push_back(lat.cube({d, i, j}));
    }
  }
  return out;
}

namespace {

// Maximal descendants of `a` whose average exceeds `level`.
void stopping_children(const DyadicLattice& lat, const GridFunction& abs_f, const CubeAddress& a,
                       double level, std::size_t min_side, std::vector<CubeAddress>& out) {
  for (const auto& c : lat.children(a)) {
    if (lat.side_at(c.depth) < min_side) continue;
    if (cube_average(abs_f, lat.cube(c)) > level) {
      out.push_back(c);
    } else {
      stopping_children(lat, abs_f, c, level, min_side, out);
    }
  }
}

double certified_eta(const SparseFamily& s) {
  double eta = 1.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    eta = std::min(eta, static_cast<double>(s.certificate[k].size()) /
                            static_cast<double>(s.cube(k).cell_count()));
  }
  return eta;
}

}  // namespace

SparseFamily construct_sparse_family(const GridFunction& f, const DyadicLattice& lat, double tau,
                                     std::size_t min_side) {
  if (!(tau > 1.0)) throw Error("stopping threshold factor must exceed 1");
  if (!(f.domain() == lat.domain())) throw Error("function and lattice live on different grids");
  const GridFunction abs_f = f.abs();
  if (abs_f.max() == 0.0) throw Error("stopping time needs a function that is not identically 0");

  SparseFamily s{lat, {}, {}, 1.0};
  std::vector<CubeAddress> pending{CubeAddress{}};
  while (!pending.empty()) {
    const CubeAddress p = pending.back();
    pending.pop_back();
    const CubeRegion pq = lat.cube(p);
    std::vector<CubeAddress> kids;
    stopping_children(lat, abs_f, p, tau * cube_average(abs_f, pq), min_side, kids);

    std::vector<std::size_t> e;
    pq.for_each_cell([&](std::size_t idx) {
      const auto [ci, cj] = lat.domain().unflat(idx);
      const CubeAddress cell{lat.max_depth(), ci, cj};
      const bool covered = std::any_of(kids.begin(), kids.end(),
                                       [&](const CubeAddress& k) { return lat.contains(k, cell); });
      if (!covered) e.push_back(idx);
    });
    s.cubes.push_back(p);
    s.certificate.push_back(std::move(e));
    pending.insert(pending.end(), kids.rbegin(), kids.rend());
  }

  // canonical order: depth, then index
  std::vector<std::size_t> order(s.cubes.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = s.cubes[a];
    const auto& y = s.cubes[b];
    return std::tie(x.depth, x.j, x.i) < std::tie(y.depth, y.j, y.i);
  });
  SparseFamily sorted{lat, {}, {}, 1.0};
  for (auto k : order) {
    sorted.cubes.push_back(s.cubes[k]);
    sorted.certificate.push_back(std::move(s.certificate[k]));
  }
  sorted.eta = certified_eta(sorted);
  return sorted;
}

double sparsity_verify(const SparseFamily& s) {
  if (s.certificate.size() != s.cubes.size()) throw Error("invalid certificate: size mismatch");
  const Domain& d = s.lattice.domain();
  std::vector<int> owner(d.size(), -1);
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!s.lattice.valid(s.cubes[k])) throw Error("invalid certificate: cube outside the lattice");
    for (std::size_t m = 0; m < k; ++m) {
      if (s.cubes[m] == s.cubes[k]) throw Error("invalid certificate: repeated cube");
    }
    const CubeRegion q = s.cube(k);
    for (std::size_t idx : s.certificate[k]) {
      if (idx >= d.size() || !q.contains(idx)) {
        throw Error("invalid certificate: E_Q not contained in Q for " + q.label());
      }
      if (owner[idx] != -1) {
        throw Error("invalid certificate: cell " + std::to_string(idx) + " claimed twice");
      }
      owner[idx] = static_cast<int>(k);
    }
  }
  const double stored = certified_eta(s);

  // greedy oracle: each cell goes to the smallest family cube containing it
  std::vector<std::size_t> counts(s.size(), 0);
  for (std::size_t idx = 0; idx < d.size(); ++idx) {
    const auto [ci, cj] = d.unflat(idx);
    const CubeAddress cell{s.lattice.max_depth(), ci, cj};
    int best = -1;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s.lattice.contains(s.cubes[k], cell) &&
          (best < 0 || s.cubes[k].depth > s.cubes[static_cast<std::size_t>(best)].depth)) {
        best = static_cast<int>(k);
      }
    }
    if (best >= 0) ++counts[static_cast<std::size_t>(best)];
  }
  double greedy = 1.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    greedy = std::min(greedy, static_cast<double>(counts[k]) /
                                  static_cast<double>(s.cube(k).cell_count()));
  }
  return std::max(stored, greedy);
}

double family_mass_ratio(const GridFunction& f, const SparseFamily& s) {
  const GridFunction abs_f = f.abs();
  double mass = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    mass += cube_average(abs_f, s.cube(k)) * static_cast<double>(s.certificate[k].size()) *
            s.lattice.domain().cell_volume();
  }
  return mass / integral(abs_f);
}

void write_sparse_family(std::ostream& os, const SparseFamily& s) {
  const Domain& d = s.lattice.domain();
  os << "sparse-family v1\n";
  os << "dim " << d.dim() << "\n";
  os << "n_cells " << d.n_cells() << "\n";
  os << "half_width " << format_number(d.half_width()) << "\n";
  os << "eta " << format_number(s.eta) << "\n";
  os << "cubes " << s.size() << "\n";
  for (const auto& a : s.cubes) os << s.lattice.format(a) << "\n";
  os << "certificate\n";
  for (std::size_t k = 0; k < s.size(); ++k) {
    os << s.lattice.format(s.cubes[k]) << ' ' << s.certificate[k].size();
    for (auto idx : s.certificate[k]) os << ' ' << idx;
    os << "\n";
  }
}

namespace {

std::string next_line(std::istream& is, std::size_t& line_no) {
  std::string line;
  while (std::getline(is, line)) {
    ++line_no;
    const auto body = trim(line);
    if (!body.empty() && body[0] != '#') return std::string(body);
  }
  throw Error("sparse family: unexpected end of input after line " + std::to_string(line_no));
}

template <typename T>
T keyed_value(const std::string& line, const std::string& key, std::size_t line_no) {
  std::istringstream row(line);
  std::string k;
  T v{};
  if (!(row >> k >> v) || k != key) {
    throw Error("sparse family line " + std::to_string(line_no) + ": expected '" + key + " <value>'");
  }
  return v;
}

}  // namespace

SparseFamily read_sparse_family(std::istream& is) {
  std::size_t line_no = 0;
  if (next_line(is, line_no) != "sparse-family v1") throw Error("sparse family: bad header");
  const int dim = keyed_value<int>(next_line(is, line_no), "dim", line_no);
  const auto n = keyed_value<std::size_t>(next_line(is, line_no), "n_cells", line_no);
  const double half_width = keyed_value<double>(next_line(is, line_no), "half_width", line_no);
  const double eta = keyed_value<double>(next_line(is, line_no), "eta", line_no);
  const auto count = keyed_value<std::size_t>(next_line(is, line_no), "cubes", line_no);
  SparseFamily s{DyadicLattice(Domain(dim, half_width, n)), {}, {}, eta};
  for (std::size_t k = 0; k < count; ++k) s.cubes.push_back(s.lattice.parse(next_line(is, line_no)));
  if (next_line(is, line_no) != "certificate") {
    throw Error("sparse family line " + std::to_string(line_no) + ": expected 'certificate'");
  }
  s.certificate.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::istringstream row(next_line(is, line_no));
    std::string addr;
    std::size_t m = 0;
    if (!(row >> addr >> m)) {
      throw Error("sparse family line " + std::to_string(line_no) + ": expected '<address> <count>'");
    }
    if (s.lattice.parse(addr) != s.cubes[k]) {
      throw Error("sparse family line " + std::to_string(line_no) + ": certificate out of order");
    }
    s.certificate[k].resize(m);
    for (auto& idx : s.certificate[k]) {
      if (!(row >> idx)) {
        throw Error("sparse family line " + std::to_string(line_no) + ": too few cell indices");
      }
    }
  }
  return s;
}

}  // namespace fracbump
