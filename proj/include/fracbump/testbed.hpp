#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fracbump/bump.hpp"
#include "fracbump/grid.hpp"
#include "json.hpp"

namespace fracbump {

enum class ScenarioKind { Sufficiency, SparseNecessity, LogNecessity, Bloom, KernelSep, VerifyAll };

std::string to_string(ScenarioKind k);
ScenarioKind parse_kind(const std::string& name);

/// One experiment configuration. Weight, symbol and Young fields hold canonical spec strings;
/// empty Young fields select the log bumps built from `delta`.
struct Scenario {
  ScenarioKind kind = ScenarioKind::Sufficiency;
  int dim = 1;
  std::size_t grid = 128;
  double half_width = 1.0;
  double p = 2.0;
  double q = 4.0;
  double alpha = 0.25;
  int m = 1;
  double delta = 0.5;
  std::uint64_t seed = 1;
  int trials = 8;
  std::string mu = "const(c=1)";
  std::string nu = "const(c=1)";
  std::string lambda = "const(c=1)";
  std::string eta;
  std::string b = "coord(axis=0)";
  std::string young_a;
  std::string young_b;
  std::string young_c;
  std::string young_d;
  double tau = 0.0;  // 0 selects 2^{dim+1}
  double stability_factor = 1.5;
  double tolerance = 0.05;
  double epsilon = 0.2;
  double kernel_r = 0.0;  // 0 selects the largest radius that fits A = 256
  int kernel_samples = 9;
  double doubling_limit = 64.0;
  std::string out;

  bool operator==(const Scenario&) const = default;

  Domain domain() const { return Domain(dim, half_width, grid); }
  BumpParams params() const { return {p, q, alpha, m}; }
  double stopping_tau() const { return tau > 0.0 ? tau : static_cast<double>(1 << (dim + 1)); }
};

/// `key = value` lines; `#` starts a comment. Errors carry the line number, and unknown keys
/// are named.
Scenario parse_scenario(std::istream& is);
Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario_file(const std::string& path);
/// Range checks applied after parsing; call again after editing fields by hand.
void validate_scenario(const Scenario& s);
/// Every key in a fixed order; parse_scenario reads it back to an equal Scenario.
void write_scenario(std::ostream& os, const Scenario& s);
nlohmann::json scenario_json(const Scenario& s);

/// Symbol functions b: `coord(axis=0)`, `const(c=1)`, `log` (log max(|x|, h/2)),
/// `abspow(a=0.5)` (max(|x|, h/2)^a) and `table(path=...)`.
GridFunction realize_symbol(const std::string& spec, const Domain& d);
std::string canonical_symbol(const std::string& spec);

/// Seeded smooth test function: uniform values on a 16^dim grid over the inner half of the box,
/// three passes of a 3-point box filter, then sampled by (bi)linear interpolation. The same
/// (seed, stream) gives the same continuum function on every grid.
GridFunction smoothed_noise(const Domain& d, std::uint64_t seed, std::uint64_t stream);

struct ExperimentResult {
  ExperimentResult() = default;
  explicit ExperimentResult(std::string k, nlohmann::json echo = nlohmann::json::object())
      : kind(std::move(k)), scenario(std::move(echo)) {}

  std::string kind;
  nlohmann::json scenario;
  nlohmann::json measured = nlohmann::json::object();
  nlohmann::json trials = nlohmann::json::array();
  std::map<std::string, bool> checks;

  bool passed() const;
  /// Key-sorted JSON with a `passed` field.
  nlohmann::json to_json() const;
};

void write_result(const ExperimentResult& r, const std::string& path);

/// Operator-norm ratios of the commutator and of the sparse pair T + T* on seeded test
/// functions, next to the bump constants; repeated on the refined grid for stability.
ExperimentResult run_sufficiency(const Scenario& s);

/// The two bump terms over all dyadic cubes, with the scenario's Young functions (log bumps for
/// empty fields).
struct BumpConstants {
  BumpReport left;
  BumpReport right;
};
BumpConstants scenario_bump_constants(const Scenario& s);

/// For each family cube Q, the extremal f = |b - b_Q|^{m(p'-1)} ν^{-p'/p} χ_Q against the
/// measured sparse operator constant.
ExperimentResult run_sparse_necessity(const Scenario& s);

/// The log-maximal test function, Kolmogorov bounds, the L(log L)^a equivalence, the measured
/// weak-type constant and the L^{p'}(log L)^{mp'} necessity quantity.
ExperimentResult run_log_necessity(const Scenario& s);

/// Recovery of η = (μ/λ)^{1/m}, the separated-ball inequality on 20 ball pairs and the
/// pointwise bound with perturbed η.
ExperimentResult run_bloom(const Scenario& s);

/// Kernel oscillation over A = 4, 8, ..., 256.
ExperimentResult run_kernel_sep(const Scenario& s);

/// Invariant groups with fixed instances and pinned tolerances:
///  1 orlicz_engine        Luxemburg vs L^p averages, inverse round trips, Young's inequality
///  2 bp_classifier        closed-form B_p / B_{p,q} verdicts agree with quadrature
///  3 sparse_families      stopping families certify η >= 1/2; lattice nesting at N <= 32
///  4 sparse_domination    ratio spread max <= 10 x median; pointwise reduction inequality
///  5 adjoint_identity     defect <= 1e-12 on 50 instances
///  6 closed_forms         1D α = 1/2 values at x = 2 and first-order convergence
///  7 sufficiency          three weight pairs plus a constant symbol
///  8 sparse_necessity     three weight pairs
///  9 log_necessity        log-maximal bound, Kolmogorov, L(log L) interval, kernel separation
/// 10 log_bump_comparison  log-bump terms below the older product, cube by cube
/// 11 bloom_converse       η recovery, separated balls, pointwise bound and perturbations
struct InvariantGroup {
  int id;
  const char* name;
};
const std::vector<InvariantGroup>& invariant_groups();
ExperimentResult run_invariant_group(int id, std::uint64_t seed);

/// Every invariant group; `checks` keys are `<group>.<check>`.
ExperimentResult verify_all(std::uint64_t seed);

ExperimentResult run_scenario(const Scenario& s);

/// Pinned interval for ‖f‖_{L(log L)^a,Q} divided by avg_Q |f| log(e + |f|/|f|_Q)^a.
struct Interval {
  double lo;
  double hi;
};
Interval llogl_equivalence_interval(double a);

}  // namespace fracbump
