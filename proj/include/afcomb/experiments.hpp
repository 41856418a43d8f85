#pragma once

#include "afcomb/config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace afc {

using Cell = std::variant<double, std::int64_t, std::string>;

// One CSV file worth of results.
struct Table {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  std::size_t col(const std::string& column) const;
  double num(std::size_t row, const std::string& column) const;
  const std::string& str(std::size_t row, const std::string& column) const;
  std::vector<double> column(const std::string& column) const;
  void add(std::vector<Cell> row);
};

// Header line then one line per row; numbers as {:.9g}; LF endings.
std::string to_csv(const Table& t);
std::filesystem::path write_csv(const Table& t, const std::filesystem::path& dir);

struct ExperimentResult {
  std::string experiment;
  std::vector<Table> tables;
  std::vector<std::string> warnings;

  const Table& table(const std::string& name) const;
};

struct RunOptions {
  std::optional<std::int64_t> runs;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;  // 0: AFCOMB_THREADS or hardware concurrency
};

const std::vector<std::string>& experiment_ids();
// Keys accepted by an experiment, including the shared `experiment`, `runs`, `seed`.
const std::vector<KeySpec>& experiment_schema(const std::string& id);

// Schema check of a whole config document (dispatches on `experiment`).
Validation validate_config(const Config& cfg, Params* out = nullptr);

// Validates, then runs. Throws ConfigError listing every validation error.
ExperimentResult run_experiment(Config cfg, const RunOptions& opts = {});

struct Preset {
  std::string name;
  std::string text;
};

// Configurations shipped with the tool (presets/*.cfg).
const std::vector<Preset>& presets();
const Preset& preset(const std::string& name);

}  // namespace afc
