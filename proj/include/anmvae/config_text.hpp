#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace anmvae {

/// Sectioned `key = value` text:
///
///   # comment
///   [section]
///   key = value
///
/// Keys are unique per section. Values are taken verbatim (trimmed).
class ConfigText {
 public:
  using Section = std::map<std::string, std::string>;

  static ConfigText parse(std::string_view text);
  static ConfigText load(const std::string& path);

  std::string to_string() const;

  bool has_section(const std::string& name) const { return sections_.contains(name); }
  const Section& section(const std::string& name) const;
  Section& section(const std::string& name);
  std::vector<std::string> section_names() const;

  void set(const std::string& section, const std::string& key, std::string value);
  std::optional<std::string> get(const std::string& section, const std::string& key) const;

  /// Throws ConfigError if `section` holds a key outside `allowed`.
  void require_known_keys(const std::string& section,
                          std::initializer_list<std::string_view> allowed) const;
  /// Throws ConfigError for sections outside `allowed`.
  void require_known_sections(std::initializer_list<std::string_view> allowed) const;

 private:
  std::map<std::string, Section> sections_;
  std::vector<std::string> order_;
};

/// Typed value parsing; all throw ConfigError naming `what` on bad input.
/// Reals accept constant expressions such as `2*pi`.
double parse_real(std::string_view text, std::string_view what);
std::uint64_t parse_uint(std::string_view text, std::string_view what);
bool parse_bool(std::string_view text, std::string_view what);
/// Shortest text that reads back to the same double.
std::string format_real(double v);

}  // namespace anmvae
