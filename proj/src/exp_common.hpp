#pragma once

// Shared pieces of the experiment implementations; not installed.

#include "afcomb/combo2.hpp"
#include "afcomb/ensemble.hpp"
#include "afcomb/experiments.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace afc::detail {

using Runner = ExperimentResult (*)(const Params&, const RunOptions&);

struct ExperimentDef {
  std::string id;
  std::string summary;
  std::vector<KeySpec> keys;  // experiment-specific keys
  bool simulated = true;      // accepts `runs`
  Runner run = nullptr;
};

// Fluent KeySpec builder.
class K {
 public:
  K(std::string name, KeyType type, std::string fallback) {
    s_.name = std::move(name);
    s_.type = type;
    s_.fallback = std::move(fallback);
  }
  K& gt(double v) { s_.lo = v; s_.lo_open = true; return *this; }
  K& ge(double v) { s_.lo = v; s_.lo_open = false; return *this; }
  K& lt(double v) { s_.hi = v; s_.hi_open = true; return *this; }
  K& le(double v) { s_.hi = v; s_.hi_open = false; return *this; }
  K& sym(std::string v) { s_.symbol = std::move(v); return *this; }
  K& one_of(std::vector<std::string> v) { s_.choices = std::move(v); return *this; }
  K& help(std::string v) { s_.help = std::move(v); return *this; }
  operator KeySpec() const { return s_; }

 private:
  KeySpec s_;
};

inline K real(std::string name, std::string fallback) { return K(std::move(name), KeyType::real, std::move(fallback)); }
inline K integer(std::string name, std::string fallback) {
  return K(std::move(name), KeyType::integer, std::move(fallback));
}
inline K text(std::string name, std::string fallback) { return K(std::move(name), KeyType::text, std::move(fallback)); }
inline K reals(std::string name, std::string fallback) {
  return K(std::move(name), KeyType::real_list, std::move(fallback));
}
inline K integers(std::string name, std::string fallback) {
  return K(std::move(name), KeyType::int_list, std::move(fallback));
}
inline K texts(std::string name, std::string fallback) {
  return K(std::move(name), KeyType::text_list, std::move(fallback));
}
inline K boolean(std::string name, std::string fallback) {
  return K(std::move(name), KeyType::boolean, std::move(fallback));
}

// mixer, mu_a, eta, a_plus, activation, mixer_eps with the given defaults.
std::vector<KeySpec> mixer_keys(const std::string& rule, const std::string& mu_a);
MixerConfig mixer_from(const Params& p);
Activation parse_activation(const std::string& name);

std::vector<double> logspace(double lo, double hi, std::size_t n);

EnsembleConfig ensemble_from(const Params& p, const RunOptions& opts, std::int64_t horizon, std::int64_t stride,
                             std::int64_t window_start);

inline double db(double power) { return to_db(power); }

// "0.25" -> "0.25", used in column labels.
std::string label(double v);

void append(std::vector<KeySpec>& dst, const std::vector<KeySpec>& src);

ExperimentDef steady_nsd_def();
ExperimentDef affine_gain_def();
ExperimentDef lms_rls_tracking_def();
ExperimentDef theory_tables_def();
ExperimentDef convergence_def();
ExperimentDef pn_robustness_def();
ExperimentDef transfer_def();
ExperimentDef lowcost_def();
ExperimentDef sparse_def();
ExperimentDef echo_def();

const std::vector<Preset>& embedded_presets();

}  // namespace afc::detail
