#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <random>

#include "fracbump/grid.hpp"

namespace fracbump::testing {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& gen, double lo = 0.0, double hi = 1.0) {
  return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(gen);
}

inline GridFunction random_function(const Domain& d, std::mt19937_64& gen, double lo = 0.0,
                                    double hi = 1.0) {
  GridFunction f(d);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = uniform(gen, lo, hi);
  return f;
}

// A file path in the system temp directory; the caller removes the file.
inline std::string scratch_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("fracbump_test_" + name)).string();
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return scale == 0.0 ? 0.0 : std::fabs(a - b) / scale;
}

}  // namespace fracbump::testing
