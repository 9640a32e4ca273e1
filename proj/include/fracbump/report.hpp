#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fracbump/grid.hpp"
#include "json.hpp"

namespace fracbump {

/// Per-cube values of a functional together with its supremum and maximiser.
struct BumpReport {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
  std::vector<CubeRegion> cubes;
  std::vector<double> values;
  double sup = 0.0;
  std::size_t argmax = 0;

  const CubeRegion& argmax_cube() const { return cubes.at(argmax); }
  /// {name, params, sup, argmax_cube, per_cube: [{cube, value}]}
  nlohmann::json to_json() const;
  /// Header `cube,value`, one row per cube.
  void write_csv(std::ostream& os) const;
};

/// Builds a report; the maximiser is the first cube in (larger side, origin) order among ties.
/// Throws on an empty cube list or NaN values.
BumpReport make_report(std::string name, std::vector<CubeRegion> cubes, std::vector<double> values,
                       nlohmann::json params = nlohmann::json::object());

/// Values of f on the cells of q, in row-major order.
std::vector<double> cube_values(const GridFunction& f, const CubeRegion& q);

}  // namespace fracbump
