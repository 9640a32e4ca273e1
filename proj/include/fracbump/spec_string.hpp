#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fracbump {

/// A parsed `name(key=value, ..., nested(...))` expression.
struct CallExpr {
  std::string name;
  std::map<std::string, std::string> kwargs;
  std::vector<std::string> positional;  // raw text of nested arguments

  bool has(const std::string& key) const { return kwargs.count(key) != 0; }
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  const std::string& text(const std::string& key) const;
  /// Throws naming the first keyword outside `allowed`.
  void allow_only(std::initializer_list<std::string_view> allowed) const;
};

CallExpr parse_call(std::string_view spec);

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

std::string_view trim(std::string_view s);

}  // namespace fracbump
