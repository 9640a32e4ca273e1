#include "fracbump/report.hpp"

#include <cmath>
#include <ostream>
#include <tuple>

#include "fracbump/spec_string.hpp"

namespace fracbump {

namespace {

auto order_key(const CubeRegion& q) {
  const auto o = q.origin();
  // larger cubes first, then by origin; for lattice cubes this is (depth, i, j) order
  return std::make_tuple(~q.side(), o[0] / q.side(), o[1] / q.side(), o[0], o[1]);
}

nlohmann::json number_json(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

}  // namespace

BumpReport make_report(std::string name, std::vector<CubeRegion> cubes, std::vector<double> values,
                       nlohmann::json params) {
  if (cubes.empty()) throw Error(name + ": empty cube list");
  if (cubes.size() != values.size()) throw Error(name + ": cube/value count mismatch");
  BumpReport r{std::move(name), std::move(params), std::move(cubes), std::move(values), 0.0, 0};
  for (std::size_t k = 0; k < r.values.size(); ++k) {
    if (std::isnan(r.values[k])) throw Error(r.name + ": NaN on cube " + r.cubes[k].label());
    const bool better = r.values[k] > r.values[r.argmax];
    const bool tie = r.values[k] == r.values[r.argmax] &&
                     order_key(r.cubes[k]) < order_key(r.cubes[r.argmax]);
    if (better || tie) r.argmax = k;
  }
  r.sup = r.values[r.argmax];
  return r;
}

nlohmann::json BumpReport::to_json() const {
  nlohmann::json per_cube = nlohmann::json::array();
  for (std::size_t k = 0; k < cubes.size(); ++k) {
    per_cube.push_back({{"cube", cubes[k].label()}, {"value", number_json(values[k])}});
  }
  return {{"name", name},
          {"params", params},
          {"sup", number_json(sup)},
          {"argmax_cube", argmax_cube().label()},
          {"per_cube", per_cube}};
}

void BumpReport::write_csv(std::ostream& os) const {
  os << "cube,value\n";
  for (std::size_t k = 0; k < cubes.size(); ++k) {
    os << cubes[k].label() << ',' << format_number(values[k]) << '\n';
  }
}

std::vector<double> cube_values(const GridFunction& f, const CubeRegion& q) {
  std::vector<double> out;
  out.reserve(q.cell_count());
  q.for_each_cell([&](std::size_t idx) { out.push_back(f[idx]); });
  return out;
}

}  // namespace fracbump
