#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fracbump/grid.hpp"
#include "fracbump/orlicz.hpp"
#include "fracbump/report.hpp"

namespace fracbump {

/// Symbolic weight: `const(c=1)`, `power(a=0.5)`, `product(w1, w2, ...)` or `table(path=...)`.
/// Power weights are |x|^a with |x| replaced by max(|x|, h/2).
struct WeightSpec {
  enum class Kind { Constant, Power, Product, Table };
  Kind kind = Kind::Constant;
  double value = 1.0;  // c for Constant, a for Power
  std::vector<WeightSpec> factors;
  std::string path;

  static WeightSpec constant(double c);
  static WeightSpec power(double a);
  static WeightSpec product(std::vector<WeightSpec> factors);
  static WeightSpec table(std::string path);

  std::string tag() const;
  /// Strictly positive, finite samples on the grid.
  GridFunction realize(const Domain& domain) const;
};

WeightSpec parse_weight(std::string_view spec);

/// sup_Q (avg ω^q)(avg ω^{-p'})^{q/p'}; requires 1 < p < q.
BumpReport apq_constant(const GridFunction& w, double p, double q,
                        const std::vector<CubeRegion>& cubes);
/// sup_Q (avg μ)(avg ν^{1-p'})^{p-1}.
BumpReport two_weight_ap_constant(const GridFunction& mu, const GridFunction& nu, double p,
                                  const std::vector<CubeRegion>& cubes);
/// sup of μ(2Q)/μ(Q) over cubes whose concentric double fits in the box. Cubes with an odd
/// number of cells per side have no concentric double on the grid and are skipped.
BumpReport doubling_constant(const GridFunction& mu, const std::vector<CubeRegion>& cubes);
/// sup_Q avg_Q |b - b_Q|.
BumpReport bmo_norm(const GridFunction& b, const std::vector<CubeRegion>& cubes);
/// sup_Q η(Q)^{-1} ∫_Q |b - b_Q|.
BumpReport weighted_bmo_norm(const GridFunction& b, const GridFunction& eta,
                             const std::vector<CubeRegion>& cubes);
/// sup_Q ‖b - b_Q‖_{Φ,Q}; Φ must be superlinear.
BumpReport osc_phi_norm(const GridFunction& b, const YoungFunction& phi,
                        const std::vector<CubeRegion>& cubes);

}  // namespace fracbump
