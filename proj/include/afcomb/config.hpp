#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace afc {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Flat `key = value` document; `#` starts a comment. Keys are unique.
class Config {
 public:
  static Config parse(std::string_view text, std::string source = "<config>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& raw(const std::string& key) const;
  int line(const std::string& key) const;
  void set(const std::string& key, std::string value);
  const std::map<std::string, std::string>& values() const { return values_; }
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
};

enum class KeyType { integer, real, text, real_list, int_list, text_list, boolean };

struct KeySpec {
  std::string name;
  KeyType type = KeyType::real;
  std::string fallback;  // default; empty with `required` unset means optional
  bool required = false;
  bool warn_if_missing = false;
  std::optional<double> lo;
  std::optional<double> hi;
  bool lo_open = false;
  bool hi_open = false;
  std::vector<std::string> choices;  // text / text_list
  std::string symbol;                // used in range messages
  std::string help;
};

struct Validation {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

// Parsed values of a validated config.
class Params {
 public:
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  double real(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<std::int64_t> integers(const std::string& key) const;
  std::vector<std::string> texts(const std::string& key) const;

  void put(const std::string& key, std::string value) { values_[key] = std::move(value); }

 private:
  const std::string& get(const std::string& key) const;
  std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(std::string_view s);
double parse_real(std::string_view s);
std::int64_t parse_int(std::string_view s);

// Checks `cfg` against `schema`: unknown keys, types, ranges, choices.
// Defaults are filled into `out` when provided.
Validation check(const Config& cfg, const std::vector<KeySpec>& schema, Params* out = nullptr);

}  // namespace afc
