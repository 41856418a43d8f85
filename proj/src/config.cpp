#include "afcomb/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

namespace afc {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool valid_key(const std::string& k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

std::string interval(const KeySpec& k) {
  const std::string lo = k.lo ? fmt::format("{:g}", *k.lo) : "-inf";
  const std::string hi = k.hi ? fmt::format("{:g}", *k.hi) : "inf";
  return fmt::format("{}{},{}{}", k.lo && !k.lo_open ? '[' : '(', lo, hi, k.hi && !k.hi_open ? ']' : ')');
}

bool in_range(const KeySpec& k, double v) {
  if (k.lo && (k.lo_open ? !(v > *k.lo) : !(v >= *k.lo))) return false;
  if (k.hi && (k.hi_open ? !(v < *k.hi) : !(v <= *k.hi))) return false;
  return true;
}

}  // namespace

Config Config::parse(std::string_view text, std::string source) {
  Config c;
  c.source_ = std::move(source);
  std::vector<std::string> errors;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      errors.push_back(fmt::format("{}:{}: expected `key = value`", c.source_, lineno));
      continue;
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!valid_key(key)) {
      errors.push_back(fmt::format("{}:{}: invalid key '{}'", c.source_, lineno, key));
      continue;
    }
    if (c.values_.count(key)) {
      errors.push_back(fmt::format("{}:{}: duplicate key '{}' (first set on line {})", c.source_, lineno, key,
                                   c.lines_[key]));
      continue;
    }
    c.values_[key] = value;
    c.lines_[key] = lineno;
  }
  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) msg += e + "\n";
    msg.pop_back();
    throw ConfigError(msg);
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

const std::string& Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
  return it->second;
}

int Config::line(const std::string& key) const {
  const auto it = lines_.find(key);
  return it == lines_.end() ? 0 : it->second;
}

void Config::set(const std::string& key, std::string value) {
  values_[key] = std::move(value);
  lines_.erase(key);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const std::string item = trim(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

double parse_real(std::string_view s) {
  const std::string t = trim(s);
  if (t == "inf" || t == "+inf") return INFINITY;
  if (t == "-inf") return -INFINITY;
  if (t.empty()) throw ConfigError("empty number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || std::isnan(v)) {
    throw ConfigError("'" + t + "' is not a number");
  }
  return v;
}

std::int64_t parse_int(std::string_view s) {
  const std::string t = trim(s);
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec == std::errc() && p == t.data() + t.size()) return v;
  // Accept integral values written in scientific notation, e.g. 1e5.
  double d = 0.0;
  try {
    d = parse_real(t);
  } catch (const ConfigError&) {
    throw ConfigError("'" + t + "' is not an integer");
  }
  if (!std::isfinite(d) || d != std::floor(d) || std::abs(d) > 9e15) throw ConfigError("'" + t + "' is not an integer");
  return static_cast<std::int64_t>(d);
}

Validation check(const Config& cfg, const std::vector<KeySpec>& schema, Params* out) {
  Validation v;
  for (const auto& [key, value] : cfg.values()) {
    const bool known = std::any_of(schema.begin(), schema.end(), [&](const KeySpec& k) { return k.name == key; });
    if (!known) v.errors.push_back(fmt::format("unknown key '{}' (line {})", key, cfg.line(key)));
  }
  for (const auto& k : schema) {
    std::string value;
    if (cfg.has(k.name)) {
      value = cfg.raw(k.name);
    } else if (k.required) {
      v.errors.push_back(fmt::format("missing required key '{}'", k.name));
      continue;
    } else if (k.fallback.empty()) {
      continue;
    } else {
      value = k.fallback;
      if (k.warn_if_missing) v.warnings.push_back(fmt::format("'{}' not set; using default {}", k.name, value));
    }
    const std::string sym = k.symbol.empty() ? k.name : k.symbol;
    auto range_error = [&](double x) {
      v.errors.push_back(fmt::format("{} = {}: {} out of {}", k.name, fmt::format("{:g}", x), sym, interval(k)));
    };
    try {
      switch (k.type) {
        case KeyType::integer: {
          const auto x = parse_int(value);
          if (!in_range(k, static_cast<double>(x))) range_error(static_cast<double>(x));
          break;
        }
        case KeyType::real: {
          const double x = parse_real(value);
          if (!in_range(k, x)) range_error(x);
          break;
        }
        case KeyType::real_list:
          for (const auto& item : split_list(value)) {
            const double x = parse_real(item);
            if (!in_range(k, x)) range_error(x);
          }
          break;
        case KeyType::int_list:
          for (const auto& item : split_list(value)) {
            const auto x = parse_int(item);
            if (!in_range(k, static_cast<double>(x))) range_error(static_cast<double>(x));
          }
          break;
        case KeyType::boolean:
          if (value != "true" && value != "false") throw ConfigError("expected true or false, got '" + value + "'");
          break;
        case KeyType::text:
        case KeyType::text_list: {
          const auto items = k.type == KeyType::text ? std::vector<std::string>{value} : split_list(value);
          for (const auto& item : items) {
            if (!k.choices.empty() && std::find(k.choices.begin(), k.choices.end(), item) == k.choices.end()) {
              std::string allowed;
              for (const auto& c : k.choices) allowed += (allowed.empty() ? "" : ", ") + c;
              throw ConfigError(fmt::format("'{}' is not one of {}", item, allowed));
            }
          }
          break;
        }
      }
    } catch (const ConfigError& e) {
      v.errors.push_back(fmt::format("{}: {}", k.name, e.what()));
      continue;
    }
    if (out) out->put(k.name, value);
  }
  return v;
}

const std::string& Params::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("parameter '" + key + "' is not set");
  return it->second;
}

double Params::real(const std::string& key) const { return parse_real(get(key)); }
std::int64_t Params::integer(const std::string& key) const { return parse_int(get(key)); }
const std::string& Params::text(const std::string& key) const { return get(key); }
bool Params::boolean(const std::string& key) const { return get(key) == "true"; }

std::vector<double> Params::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : split_list(get(key))) out.push_back(parse_real(s));
  return out;
}

std::vector<std::int64_t> Params::integers(const std::string& key) const {
  std::vector<std::int64_t> out;
  for (const auto& s : split_list(get(key))) out.push_back(parse_int(s));
  return out;
}

std::vector<std::string> Params::texts(const std::string& key) const { return split_list(get(key)); }

}  // namespace afc
