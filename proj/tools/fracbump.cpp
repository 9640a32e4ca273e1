// Command-line front end for the fracbump testbed.
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "fracbump/dyadic.hpp"
#include "fracbump/orlicz.hpp"
#include "fracbump/spec_string.hpp"
#include "fracbump/testbed.hpp"

using namespace fracbump;
using nlohmann::json;

namespace {

enum class Format { Json, Csv };

// Flags shared by every scenario-driven subcommand; set values override the config file.
struct Common {
  std::optional<std::size_t> grid;
  std::optional<int> dim;
  std::optional<double> half_width, alpha, p, q;
  std::optional<int> m, trials;
  std::optional<std::uint64_t> seed;
  std::string out;
  Format format = Format::Json;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--grid", c.grid, "cells per axis (power of two, at least 8)");
  app->add_option("--dim", c.dim, "dimension")->check(CLI::IsMember({1, 2}));
  app->add_option("--half-width", c.half_width, "the box is [-L, L]^dim");
  app->add_option("--alpha", c.alpha, "fractional order");
  app->add_option("--p", c.p, "source exponent");
  app->add_option("--q", c.q, "target exponent");
  app->add_option("--m", c.m, "commutator order");
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--trials", c.trials, "random test functions per run");
  app->add_option("--out", c.out, "output file (default: stdout)");
  app->add_option("--format", c.format, "json or csv")
      ->transform(CLI::CheckedTransformer(std::map<std::string, Format>{{"json", Format::Json}, {"csv", Format::Csv}}));
}

Scenario load(const std::string& path, const Common& c, std::optional<ScenarioKind> kind) {
  Scenario s = path.empty() ? Scenario{} : parse_scenario_file(path);
  if (kind) s.kind = *kind;
  if (c.grid) s.grid = *c.grid;
  if (c.dim) s.dim = *c.dim;
  if (c.half_width) s.half_width = *c.half_width;
  if (c.alpha) s.alpha = *c.alpha;
  if (c.p) s.p = *c.p;
  if (c.q) s.q = *c.q;
  if (c.m) s.m = *c.m;
  if (c.seed) s.seed = *c.seed;
  if (c.trials) s.trials = *c.trials;
  if (!c.out.empty()) s.out = c.out;
  validate_scenario(s);
  return s;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

// `path,value` rows with JSON-pointer paths; strings are quoted when they contain commas.
void flatten_csv(std::ostream& os, const json& j, const std::string& prefix) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten_csv(os, it.value(), prefix + "/" + it.key());
  } else if (j.is_array()) {
    for (std::size_t k = 0; k < j.size(); ++k) flatten_csv(os, j[k], prefix + "/" + std::to_string(k));
  } else {
    std::string v = j.is_string() ? j.get<std::string>() : j.dump();
    if (v.find_first_of(",\"") != std::string::npos) {
      std::string quoted = "\"";
      for (char ch : v) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      v = quoted + "\"";
    }
    os << prefix << ',' << v << '\n';
  }
}

std::string render(const json& j, Format f) {
  if (f == Format::Json) return j.dump(2) + "\n";
  std::ostringstream os;
  os << "path,value\n";
  flatten_csv(os, j, "");
  return os.str();
}

int finish(const ExperimentResult& r, Format f, const std::string& out) {
  emit(out, render(r.to_json(), f));
  if (!r.passed()) {
    for (const auto& [name, ok] : r.checks)
      if (!ok) std::cerr << "check failed: " << name << '\n';
    return 1;
  }
  return 0;
}

std::string young_csv(const std::string& col, const std::vector<double>& xs, const std::vector<double>& ys) {
  std::ostringstream os;
  os << col << ",value\n";
  for (std::size_t k = 0; k < xs.size(); ++k) os << format_number(xs[k]) << ',' << format_number(ys[k]) << '\n';
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-weight bump testbed for commutators of fractional integrals"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fracbump 1.0");

  // ---- young
  auto* young = app.add_subcommand("young", "Young-function utilities")->require_subcommand(1);
  std::string young_spec;
  std::vector<double> points;
  std::string young_out;
  Format young_format = Format::Json;
  const auto young_common = [&](CLI::App* sub) {
    sub->add_option("spec", young_spec, "Young function, e.g. powerlog(p=2, r=1.5)")->required();
    sub->add_option("--out", young_out, "output file (default: stdout)");
    sub->add_option("--format", young_format, "json or csv")
        ->transform(CLI::CheckedTransformer(std::map<std::string, Format>{{"json", Format::Json}, {"csv", Format::Csv}}));
  };
  auto* y_eval = young->add_subcommand("eval", "A(t) at the given points");
  young_common(y_eval);
  y_eval->add_option("--t", points, "evaluation points")->required();
  auto* y_inv = young->add_subcommand("inverse", "A^{-1}(s) at the given points");
  young_common(y_inv);
  y_inv->add_option("--s", points, "values to invert")->required();
  auto* y_comp = young->add_subcommand("complement", "complementary function; values at --t if given");
  young_common(y_comp);
  y_comp->add_option("--t", points, "evaluation points");
  auto* y_bp = young->add_subcommand("bp", "B_p or B_{p,q} membership with quadrature diagnostics");
  young_common(y_bp);
  double bp_p = 2.0;
  std::optional<double> bp_q;
  y_bp->add_option("--p", bp_p, "exponent p > 1")->required();
  y_bp->add_option("--q", bp_q, "second exponent q >= p for B_{p,q}");

  // ---- scenario-driven subcommands
  Common common;
  std::string config;
  const auto scenario_cmd = [&](CLI::App* parent, const std::string& name, const std::string& help) {
    auto* sub = parent->add_subcommand(name, help);
    sub->add_option("config", config, "scenario file (key = value lines)")->required();
    add_common(sub, common);
    return sub;
  };
  auto* bump = scenario_cmd(&app, "bump", "bump constants over all dyadic cubes");
  auto* opnorm = scenario_cmd(&app, "opnorm", "sufficiency experiment: operator-norm ratios and stability");
  auto* necessity = app.add_subcommand("necessity", "necessity experiments")->require_subcommand(1);
  auto* nec_sparse = scenario_cmd(necessity, "sparse", "extremal functions against the sparse operator constant");
  auto* nec_log = scenario_cmd(necessity, "loglog", "log-maximal, Kolmogorov and L(log L) necessity checks");
  nec_log->alias("thm17");
  auto* bloom = scenario_cmd(&app, "bloom", "Bloom-type converse: eta recovery, separated balls, pointwise bound");
  auto* kernel = scenario_cmd(&app, "kernel", "kernel oscillation over separated balls");
  auto* run = scenario_cmd(&app, "run", "run the experiment named by the config's kind");

  // ---- sparse
  auto* sparse = app.add_subcommand("sparse", "sparse-family tools")->require_subcommand(1);
  auto* sp_build = sparse->add_subcommand("build", "stopping-time family of |f|");
  std::string sp_input, sp_family, sp_out;
  int sp_dim = 1;
  std::size_t sp_grid = 128;
  double sp_half = 1.0, sp_tau = 0.0;
  std::uint64_t sp_seed = 1;
  sp_build->add_option("--input", sp_input, "grid function (.csv or .bin); seeded noise when absent");
  sp_build->add_option("--dim", sp_dim, "dimension")->check(CLI::IsMember({1, 2}));
  sp_build->add_option("--grid", sp_grid, "cells per axis for noise input");
  sp_build->add_option("--half-width", sp_half, "box half width for noise input");
  sp_build->add_option("--seed", sp_seed, "noise seed");
  sp_build->add_option("--tau", sp_tau, "stopping factor (default 2^{dim+1})");
  sp_build->add_option("--out", sp_out, "family file (default: stdout)");
  auto* sp_verify = sparse->add_subcommand("verify", "certify the sparseness of a stored family");
  sp_verify->add_option("family", sp_family, "family file")->required();

  // ---- verify-all
  auto* verify = app.add_subcommand("verify-all", "every invariant group; nonzero exit on any failure");
  std::uint64_t verify_seed = 1;
  std::vector<int> groups;
  std::string verify_out;
  Format verify_format = Format::Json;
  verify->add_option("--seed", verify_seed, "master seed");
  verify->add_option("--group", groups, "run only these group ids");
  verify->add_option("--out", verify_out, "output file (default: stdout)");
  verify->add_option("--format", verify_format, "json or csv")
      ->transform(CLI::CheckedTransformer(std::map<std::string, Format>{{"json", Format::Json}, {"csv", Format::Csv}}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (y_eval->parsed() || y_inv->parsed() || y_comp->parsed()) {
      const auto a = parse_young(young_spec);
      json j = {{"young", a.tag()}};
      if (y_comp->parsed()) {
        const auto c = complementary(a);
        j["complement"] = c.tag();
        std::vector<double> values, legendre;
        for (double t : points) {
          values.push_back(eval(c, t));
          legendre.push_back(legendre_transform(a, t));
        }
        j["t"] = points;
        j["value"] = values;
        j["legendre"] = legendre;
        if (young_format == Format::Csv) {
          std::ostringstream os;
          os << "t,value,legendre\n";
          for (std::size_t k = 0; k < points.size(); ++k)
            os << format_number(points[k]) << ',' << format_number(values[k]) << ',' << format_number(legendre[k]) << '\n';
          emit(young_out, os.str());
        } else {
          emit(young_out, j.dump(2) + "\n");
        }
        return 0;
      }
      std::vector<double> values;
      for (double x : points) values.push_back(y_eval->parsed() ? eval(a, x) : inverse(a, x));
      const char* col = y_eval->parsed() ? "t" : "s";
      j[col] = points;
      j["value"] = values;
      emit(young_out, young_format == Format::Json ? j.dump(2) + "\n" : young_csv(col, points, values));
      return 0;
    }
    if (y_bp->parsed()) {
      const auto a = parse_young(young_spec);
      const auto res = bp_membership(a, bp_p, bp_q);
      const auto& dg = res.diagnostic;
      json j = {{"young", a.tag()},
                {"p", bp_p},
                {"q", bp_q ? json(*bp_q) : json(nullptr)},
                {"verdict", to_string(res.verdict)},
                {"closed_form", res.closed_form},
                {"quadrature_convergent", dg.convergent},
                {"tail_exponent", std::isfinite(dg.tail_exponent) ? json(dg.tail_exponent) : json("-inf")},
                {"upper_limits", dg.upper_limits},
                {"partial_integrals", dg.partial_integrals}};
      if (young_format == Format::Csv) {
        std::ostringstream os;
        os << "upper_limit,partial_integral\n";
        for (std::size_t k = 0; k < dg.upper_limits.size(); ++k)
          os << format_number(dg.upper_limits[k]) << ',' << format_number(dg.partial_integrals[k]) << '\n';
        emit(young_out, os.str());
      } else {
        emit(young_out, j.dump(2) + "\n");
      }
      return 0;
    }
    if (bump->parsed()) {
      const auto s = load(config, common, std::nullopt);
      const auto bc = scenario_bump_constants(s);
      if (common.format == Format::Csv) {
        std::ostringstream os;
        os << "term,cube,value\n";
        for (const auto* r : {&bc.left, &bc.right})
          for (std::size_t k = 0; k < r->cubes.size(); ++k)
            os << r->name << ',' << r->cubes[k].label() << ',' << format_number(r->values[k]) << '\n';
        emit(s.out, os.str());
      } else {
        json j = {{"scenario", scenario_json(s)}, {"left", bc.left.to_json()}, {"right", bc.right.to_json()},
                  {"sum", bc.left.sup + bc.right.sup}};
        emit(s.out, j.dump(2) + "\n");
      }
      return 0;
    }
    const std::pair<CLI::App*, std::optional<ScenarioKind>> runners[] = {
        {opnorm, ScenarioKind::Sufficiency}, {nec_sparse, ScenarioKind::SparseNecessity},
        {nec_log, ScenarioKind::LogNecessity}, {bloom, ScenarioKind::Bloom},
        {kernel, ScenarioKind::KernelSep},    {run, std::nullopt}};
    for (const auto& [cmd, kind] : runners) {
      if (!cmd->parsed()) continue;
      const auto s = load(config, common, kind);
      return finish(run_scenario(s), common.format, s.out);
    }
    if (sp_build->parsed()) {
      const GridFunction f = [&] {
        if (sp_input.empty()) return smoothed_noise(Domain(sp_dim, sp_half, sp_grid), sp_seed, 0).pow(8.0);
        const bool binary = sp_input.size() > 4 && sp_input.substr(sp_input.size() - 4) == ".bin";
        std::ifstream in(sp_input, binary ? std::ios::binary : std::ios::in);
        if (!in) throw Error("cannot open " + sp_input);
        return binary ? read_binary(in) : read_csv(in, sp_dim);
      }();
      const double tau = sp_tau > 0.0 ? sp_tau : static_cast<double>(1 << (f.domain().dim() + 1));
      const auto fam = construct_sparse_family(f.abs(), DyadicLattice(f.domain()), tau);
      std::ostringstream os;
      write_sparse_family(os, fam);
      emit(sp_out, os.str());
      std::cerr << "cubes " << fam.size() << ", eta " << format_number(fam.eta) << '\n';
      return 0;
    }
    if (sp_verify->parsed()) {
      std::ifstream in(sp_family);
      if (!in) throw Error("cannot open " + sp_family);
      const auto fam = read_sparse_family(in);
      const double eta = sparsity_verify(fam);
      std::cout << json{{"cubes", fam.size()}, {"eta", eta}}.dump() << '\n';
      return eta > 0.0 ? 0 : 1;
    }
    if (verify->parsed()) {
      ExperimentResult r;
      if (groups.empty()) {
        r = verify_all(verify_seed);
      } else {
        r = ExperimentResult("verify_all", {{"seed", verify_seed}, {"groups", groups}});
        for (int id : groups) {
          const auto g = run_invariant_group(id, verify_seed);
          r.measured[g.kind] = g.measured;
          for (const auto& [name, ok] : g.checks) r.checks[g.kind + "." + name] = ok;
        }
      }
      return finish(r, verify_format, verify_out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
