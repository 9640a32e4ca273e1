#include "fracbump/spec_string.hpp"

#include <charconv>
#include <system_error>

#include "fracbump/grid.hpp"

namespace fracbump {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double CallExpr::number(const std::string& key) const {
  const auto it = kwargs.find(key);
  if (it == kwargs.end()) throw Error(name + ": missing parameter '" + key + "'");
  const std::string& s = it->second;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(name + ": parameter '" + key + "' is not a number: " + s);
  }
  return v;
}

double CallExpr::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

const std::string& CallExpr::text(const std::string& key) const {
  const auto it = kwargs.find(key);
  if (it == kwargs.end()) throw Error(name + ": missing parameter '" + key + "'");
  return it->second;
}

void CallExpr::allow_only(std::initializer_list<std::string_view> allowed) const {
  for (const auto& [key, value] : kwargs) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) throw Error(name + ": unknown parameter '" + key + "'");
  }
}

CallExpr parse_call(std::string_view spec) {
  spec = trim(spec);
  CallExpr out;
  const auto open = spec.find('(');
  if (open == std::string_view::npos) {
    out.name = std::string(spec);
    if (out.name.empty()) throw Error("empty function specification");
    return out;
  }
  if (spec.back() != ')') throw Error("unbalanced parentheses in '" + std::string(spec) + "'");
  out.name = std::string(trim(spec.substr(0, open)));
  const std::string_view body = spec.substr(open + 1, spec.size() - open - 2);
  int depth = 0;
  std::size_t start = 0;
  const auto flush = [&](std::size_t end) {
    const auto arg = trim(body.substr(start, end - start));
    if (arg.empty()) return;
    const auto eq = arg.find('=');
    const auto paren = arg.find('(');
    if (eq != std::string_view::npos && (paren == std::string_view::npos || eq < paren)) {
      out.kwargs[std::string(trim(arg.substr(0, eq)))] = std::string(trim(arg.substr(eq + 1)));
    } else {
      out.positional.emplace_back(arg);
    }
  };
  for (std::size_t k = 0; k < body.size(); ++k) {
    if (body[k] == '(') ++depth;
    if (body[k] == ')') --depth;
    if (depth < 0) throw Error("unbalanced parentheses in '" + std::string(spec) + "'");
    if (body[k] == ',' && depth == 0) {
      flush(k);
      start = k + 1;
    }
  }
  if (depth != 0) throw Error("unbalanced parentheses in '" + std::string(spec) + "'");
  flush(body.size());
  return out;
}

}  // namespace fracbump
