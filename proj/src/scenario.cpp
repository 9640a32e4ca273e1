#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "fracbump/orlicz.hpp"
#include "fracbump/spec_string.hpp"
#include "fracbump/testbed.hpp"
#include "fracbump/weights.hpp"

namespace fracbump {

namespace {

const std::pair<ScenarioKind, const char*> kKindNames[] = {
    {ScenarioKind::Sufficiency, "sufficiency"}, {ScenarioKind::SparseNecessity, "sparse_necessity"},
    {ScenarioKind::LogNecessity, "log_necessity"}, {ScenarioKind::Bloom, "bloom"},
    {ScenarioKind::KernelSep, "kernel_sep"},     {ScenarioKind::VerifyAll, "verify_all"}};

double to_double(const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw Error("expected a number, got '" + v + "'");
  }
  return out;
}

template <typename Int>
Int to_int(const std::string& v) {
  Int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw Error("expected an integer, got '" + v + "'");
  }
  return out;
}

std::string canonical_young(const std::string& v) { return v.empty() ? v : parse_young(v).tag(); }
std::string canonical_weight(const std::string& v) { return parse_weight(v).tag(); }

// One entry per key: how to read it and how to print it.
struct Field {
  const char* key;
  std::function<void(Scenario&, const std::string&)> read;
  std::function<std::string(const Scenario&)> print;
  bool numeric = false;
};

template <typename T>
Field number_field(const char* key, T Scenario::*member) {
  return {key,
          [member](Scenario& s, const std::string& v) {
            if constexpr (std::is_floating_point_v<T>) {
              s.*member = to_double(v);
            } else {
              s.*member = to_int<T>(v);
            }
          },
          [member](const Scenario& s) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_number(s.*member);
            } else {
              return std::to_string(s.*member);
            }
          },
          true};
}

Field text_field(const char* key, std::string Scenario::*member,
                 std::string (*canon)(const std::string&)) {
  return {key, [member, canon](Scenario& s, const std::string& v) { s.*member = canon(v); },
          [member](const Scenario& s) { return s.*member; }};
}

std::string identity(const std::string& v) { return v; }
std::string canonical_eta(const std::string& v) { return v.empty() ? v : canonical_weight(v); }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      {"kind", [](Scenario& s, const std::string& v) { s.kind = parse_kind(v); },
       [](const Scenario& s) { return to_string(s.kind); }},
      number_field("dim", &Scenario::dim),
      number_field("grid", &Scenario::grid),
      number_field("half_width", &Scenario::half_width),
      number_field("p", &Scenario::p),
      number_field("q", &Scenario::q),
      number_field("alpha", &Scenario::alpha),
      number_field("m", &Scenario::m),
      number_field("delta", &Scenario::delta),
      number_field("seed", &Scenario::seed),
      number_field("trials", &Scenario::trials),
      text_field("mu", &Scenario::mu, canonical_weight),
      text_field("nu", &Scenario::nu, canonical_weight),
      text_field("lambda", &Scenario::lambda, canonical_weight),
      text_field("eta", &Scenario::eta, canonical_eta),
      text_field("b", &Scenario::b, canonical_symbol),
      text_field("young_a", &Scenario::young_a, canonical_young),
      text_field("young_b", &Scenario::young_b, canonical_young),
      text_field("young_c", &Scenario::young_c, canonical_young),
      text_field("young_d", &Scenario::young_d, canonical_young),
      number_field("tau", &Scenario::tau),
      number_field("stability_factor", &Scenario::stability_factor),
      number_field("tolerance", &Scenario::tolerance),
      number_field("epsilon", &Scenario::epsilon),
      number_field("kernel_r", &Scenario::kernel_r),
      number_field("kernel_samples", &Scenario::kernel_samples),
      number_field("doubling_limit", &Scenario::doubling_limit),
      text_field("out", &Scenario::out, identity),
  };
  return f;
}

}  // namespace

void validate_scenario(const Scenario& s) {
  (void)s.domain();
  if (s.trials < 1) throw Error("trials must be at least 1");
  if (!(s.delta > 0.0)) throw Error("delta must be positive");
  if (!(s.stability_factor >= 1.0)) throw Error("stability_factor must be at least 1");
  if (!(s.tolerance >= 0.0)) throw Error("tolerance must be nonnegative");
  if (s.tau != 0.0 && !(s.tau > 1.0)) throw Error("tau must exceed 1 (or be 0 for the default)");
  if (s.kernel_samples < 2) throw Error("kernel_samples must be at least 2");
  if (!(s.kernel_r >= 0.0)) throw Error("kernel_r must be nonnegative");
}

std::string to_string(ScenarioKind k) {
  for (const auto& [kind, name] : kKindNames)
    if (kind == k) return name;
  return "unknown";
}

ScenarioKind parse_kind(const std::string& name) {
  for (const auto& [kind, n] : kKindNames)
    if (name == n) return kind;
  throw Error("unknown scenario kind '" + name + "'");
}

Scenario parse_scenario(std::istream& is) {
  Scenario s;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string_view body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw Error(where + "expected 'key = value'");
    const std::string key(trim(body.substr(0, eq)));
    const std::string value(trim(body.substr(eq + 1)));
    const Field* field = nullptr;
    for (const auto& f : fields())
      if (key == f.key) field = &f;
    if (!field) throw Error(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw Error(where + "duplicate key '" + key + "'");
    try {
      field->read(s, value);
    } catch (const Error& e) {
      throw Error(where + key + ": " + e.what());
    }
  }
  validate_scenario(s);
  return s;
}

Scenario parse_scenario_text(const std::string& text) {
  std::istringstream is(text);
  return parse_scenario(is);
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return parse_scenario(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_scenario(std::ostream& os, const Scenario& s) {
  for (const auto& f : fields()) os << f.key << " = " << f.print(s) << '\n';
}

nlohmann::json scenario_json(const Scenario& s) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : fields()) {
    if (f.numeric) {
      j[f.key] = nlohmann::json::parse(f.print(s));
    } else {
      j[f.key] = f.print(s);
    }
  }
  return j;
}

std::string canonical_symbol(const std::string& spec) {
  const auto c = parse_call(spec);
  if (c.name == "coord") {
    c.allow_only({"axis"});
    const double axis = c.number_or("axis", 0.0);
    if (axis != 0.0 && axis != 1.0) throw Error("coord: axis must be 0 or 1");
    return "coord(axis=" + format_number(axis) + ")";
  }
  if (c.name == "const") {
    c.allow_only({"c"});
    return "const(c=" + format_number(c.number_or("c", 1.0)) + ")";
  }
  if (c.name == "log") {
    c.allow_only({});
    return "log";
  }
  if (c.name == "abspow") {
    c.allow_only({"a"});
    return "abspow(a=" + format_number(c.number("a")) + ")";
  }
  if (c.name == "table") {
    c.allow_only({"path"});
    return "table(path=" + c.text("path") + ")";
  }
  throw Error("unknown symbol '" + c.name + "'");
}

GridFunction realize_symbol(const std::string& spec, const Domain& d) {
  const auto c = parse_call(canonical_symbol(spec));
  const double floor = 0.5 * d.h();
  const auto radius = [&](const Point& x) {
    return std::max(d.dim() == 1 ? std::fabs(x[0]) : std::hypot(x[0], x[1]), floor);
  };
  if (c.name == "coord") {
    const int axis = static_cast<int>(c.number("axis"));
    if (axis >= d.dim()) throw Error("coord: axis exceeds the dimension");
    return GridFunction::sample(d, [axis](const Point& x) { return x[axis]; });
  }
  if (c.name == "const") return GridFunction(d, c.number("c"));
  if (c.name == "log") return GridFunction::sample(d, [&](const Point& x) { return std::log(radius(x)); });
  if (c.name == "abspow") {
    const double a = c.number("a");
    return GridFunction::sample(d, [&](const Point& x) { return std::pow(radius(x), a); });
  }
  return load_grid_function(c.text("path"), d);
}

bool ExperimentResult::passed() const {
  for (const auto& [name, ok] : checks)
    if (!ok) return false;
  return true;
}

nlohmann::json ExperimentResult::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["scenario"] = scenario;
  j["measured"] = measured;
  j["trials"] = trials;
  j["checks"] = checks;
  j["passed"] = passed();
  return j;
}

void write_result(const ExperimentResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << r.to_json().dump(2) << '\n';
  if (!out) throw Error("write failed: " + path);
}

}  // namespace fracbump
