#include "anmvae/config_text.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "anmvae/errors.hpp"
#include "anmvae/mechanism/parser.hpp"

namespace anmvae {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

ConfigText ConfigText::parse(std::string_view text) {
  ConfigText out;
  std::string current;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      }
      current = trim(std::string_view(line).substr(1, line.size() - 2));
      if (out.sections_.contains(current)) {
        throw ConfigError("line " + std::to_string(line_no) + ": duplicate section [" + current + "]");
      }
      out.sections_[current];
      out.order_.push_back(current);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    if (current.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": key outside of any section");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    auto& sec = out.sections_[current];
    if (sec.contains(key)) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    sec[key] = value;
  }
  return out;
}

ConfigText ConfigText::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ConfigText::to_string() const {
  std::string out;
  for (const std::string& name : order_) {
    if (!out.empty()) {
      out += '\n';
    }
    out += "[" + name + "]\n";
    for (const auto& [k, v] : sections_.at(name)) {
      out += k + " = " + v + "\n";
    }
  }
  return out;
}

const ConfigText::Section& ConfigText::section(const std::string& name) const {
  static const Section kEmpty;
  const auto it = sections_.find(name);
  return it == sections_.end() ? kEmpty : it->second;
}

ConfigText::Section& ConfigText::section(const std::string& name) {
  if (!sections_.contains(name)) {
    order_.push_back(name);
  }
  return sections_[name];
}

std::vector<std::string> ConfigText::section_names() const { return order_; }

void ConfigText::set(const std::string& section, const std::string& key, std::string value) {
  if (!sections_.contains(section)) {
    order_.push_back(section);
  }
  sections_[section][key] = std::move(value);
}

std::optional<std::string> ConfigText::get(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) {
    return std::nullopt;
  }
  const auto k = s->second.find(key);
  if (k == s->second.end()) {
    return std::nullopt;
  }
  return k->second;
}

void ConfigText::require_known_keys(const std::string& section,
                                    std::initializer_list<std::string_view> allowed) const {
  for (const auto& [key, value] : this->section(section)) {
    bool ok = false;
    for (std::string_view a : allowed) {
      ok = ok || key == a;
    }
    if (!ok) {
      throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
    }
  }
}

void ConfigText::require_known_sections(std::initializer_list<std::string_view> allowed) const {
  for (const std::string& name : order_) {
    bool ok = false;
    for (std::string_view a : allowed) {
      ok = ok || name == a;
    }
    if (!ok) {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
}

double parse_real(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec == std::errc() && ptr == text.data() + text.size()) {
    if (!std::isfinite(value)) {
      throw ConfigError(std::string(what) + ": value must be finite");
    }
    return value;
  }
  try {
    const mech::Dual d = mech::parse(text).eval_dual(0.0);
    if (d.deriv != 0.0 || !std::isfinite(d.value)) {
      throw ConfigError(std::string(what) + ": expected a constant, got '" + std::string(text) + "'");
    }
    return d.value;
  } catch (const ParseError& e) {
    throw ConfigError(std::string(what) + ": not a number: '" + std::string(text) + "' (" +
                      e.what() + ")");
  } catch (const NumericalDomainError& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

std::uint64_t parse_uint(std::string_view text, std::string_view what) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(what) + ": expected a non-negative integer, got '" +
                      std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view text, std::string_view what) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") {
    return true;
  }
  if (text == "false" || text == "0" || text == "no" || text == "off") {
    return false;
  }
  throw ConfigError(std::string(what) + ": expected true/false, got '" + std::string(text) + "'");
}

std::string format_real(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace anmvae
