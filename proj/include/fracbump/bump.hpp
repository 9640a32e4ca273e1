#pragma once

#include <vector>

#include "fracbump/grid.hpp"
#include "fracbump/orlicz.hpp"
#include "fracbump/report.hpp"

namespace fracbump {

/// Exponents shared by every bump functional; requires 1 < p <= q < inf, 0 < alpha < dim, m >= 0.
struct BumpParams {
  double p = 2.0;
  double q = 2.0;
  double alpha = 0.5;
  int m = 1;

  double p_conj() const { return p / (p - 1.0); }
  /// α/dim + 1/q - 1/p.
  double cube_exponent(int dim) const { return alpha / dim + 1.0 / q - 1.0 / p; }
  void validate(int dim) const;
};

/// sup_Q |Q|^{e} ‖μ^{1/q}‖_{A,Q} ‖(b - b_Q)^m ν^{-1/p}‖_{B,Q}.
BumpReport bump_term_left(const GridFunction& mu, const GridFunction& nu, const GridFunction& b,
                          const BumpParams& prm, const YoungFunction& a, const YoungFunction& bb,
                          const std::vector<CubeRegion>& cubes);

/// sup_Q |Q|^{e} ‖(b - b_Q)^m μ^{1/q}‖_{C,Q} ‖ν^{-1/p}‖_{D,Q}.
BumpReport bump_term_right(const GridFunction& mu, const GridFunction& nu, const GridFunction& b,
                           const BumpParams& prm, const YoungFunction& c, const YoungFunction& d,
                           const std::vector<CubeRegion>& cubes);

struct NecessityPair {
  BumpReport left;   // A = t^q, B = t^{p'}
  BumpReport right;  // C = t^q, D = t^{p'}
};
NecessityPair bump_necessity_quantities(const GridFunction& mu, const GridFunction& nu,
                                        const GridFunction& b, const BumpParams& prm,
                                        const std::vector<CubeRegion>& cubes);

/// Growth of A^{-1}(t) as t → ∞, in the form t^{power} (log t)^{log_power}.
struct InverseGrowth {
  double power = 0.0;
  double log_power = 0.0;
};
InverseGrowth inverse_growth(const YoungFunction& a);

/// κ = max X^{-1}(t) Φ^{-1}(t)^m / B^{-1}(t) over 64 log points of [1e2, 1e8], with the
/// asymptotic growth of that ratio.
struct Compatibility {
  double kappa = 0.0;
  InverseGrowth ratio_growth;
};
/// Throws "incompatible Young triple" when the ratio grows without bound, i.e. its growth
/// exponent is positive, or zero with a positive log exponent.
Compatibility young_compatibility(const YoungFunction& x, const YoungFunction& phi, int m,
                                  const YoungFunction& b);

struct OscBumps {
  YoungFunction a, b, c, d, x, y, phi;
};

/// sup_Q |Q|^{e} [‖μ^{1/q}‖_{A,Q}‖ν^{-1/p}‖_{X,Q} + ‖μ^{1/q}‖_{Y,Q}‖ν^{-1/p}‖_{D,Q}] after
/// checking (X, Φ, B) and (Y, Φ, C) for compatibility; both κ are echoed in the params.
BumpReport bump_osc_reduced(const GridFunction& mu, const GridFunction& nu, const BumpParams& prm,
                            const OscBumps& f, const std::vector<CubeRegion>& cubes);

/// The log bumps with Φ = e^t - 1: X = L^{p'}(log L)^{(m+1)p'-1+δ}, Y = L^q(log L)^{(m+1)q-1+δ},
/// B = L^{p'}(log L)^{p'-1+δ}, C = L^q(log L)^{q-1+δ}, and A = C, D = B.
OscBumps log_bumps(const BumpParams& prm, double delta);

struct LogBumpTerms {
  BumpReport term1;   // ‖μ^{1/q}‖ in L^q(log L)^{q-1+δ},      ‖ν^{-1/p}‖ in L^{p'}(log L)^{(m+1)p'-1+δ}
  BumpReport term2;   // ‖μ^{1/q}‖ in L^q(log L)^{(m+1)q-1+δ}, ‖ν^{-1/p}‖ in L^{p'}(log L)^{p'-1+δ}
  BumpReport prior;   // ‖μ^{1/q}‖ in L^q(log L)^{2q-1+δ},      ‖ν^{-1/p}‖ in L^{p'}(log L)^{2p'-1+δ}
};
LogBumpTerms bump_log_terms(const GridFunction& mu, const GridFunction& nu, const BumpParams& prm,
                            double delta, const std::vector<CubeRegion>& cubes);

/// sup_Q |Q|^{e} (avg_Q μ)^{1/q} ‖ν^{-1/p}‖_{L^{p'}(log L)^{mp'},Q}.
BumpReport bump_log_necessity(const GridFunction& mu, const GridFunction& nu, const BumpParams& prm,
                      const std::vector<CubeRegion>& cubes);

}  // namespace fracbump
