#include "afcomb/experiments.hpp"

#include "exp_common.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <mutex>

namespace afc {

namespace detail {

std::vector<KeySpec> mixer_keys(const std::string& rule, const std::string& mu_a) {
  return {
      text("mixer", rule).one_of({"aff-lms", "aff-pn-lms", "cvx-lms", "cvx-pn-lms"}).help("mixing rule"),
      real("mu_a", mu_a).gt(0).sym("μ_a").help("mixer step size (mu_a, or mu_lambda for affine rules)"),
      real("eta", "0.9").ge(0).lt(1).sym("η").help("power estimate forgetting"),
      real("a_plus", "4").gt(0).sym("a⁺").help("saturation of the auxiliary parameter"),
      text("activation", "default").one_of({"default", "sigmoid", "scaled-sigmoid"}),
      real("mixer_eps", "1e-8").gt(0).sym("ε"),
  };
}

Activation parse_activation(const std::string& name) {
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "scaled-sigmoid") return Activation::scaled_sigmoid;
  throw ConfigError("unknown activation '" + name + "'");
}

MixerConfig mixer_from(const Params& p) {
  MixerConfig m;
  m.rule = parse_mix_rule(p.text("mixer"));
  if (p.text("activation") != "default") m.activation = parse_activation(p.text("activation"));
  m.step = p.real("mu_a");
  m.eta = p.real("eta");
  m.a_plus = p.real("a_plus");
  m.eps = p.real("mixer_eps");
  return m;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return out;
}

EnsembleConfig ensemble_from(const Params& p, const RunOptions& opts, std::int64_t horizon, std::int64_t stride,
                             std::int64_t window_start) {
  EnsembleConfig e;
  e.runs = p.integer("runs");
  e.seed = static_cast<std::uint64_t>(p.integer("seed"));
  e.horizon = horizon;
  e.record_stride = stride;
  e.window_start = window_start;
  e.threads = opts.threads;
  return e;
}

std::string label(double v) { return fmt::format("{:g}", v); }

void append(std::vector<KeySpec>& dst, const std::vector<KeySpec>& src) { dst.insert(dst.end(), src.begin(), src.end()); }

namespace {

const std::vector<ExperimentDef>& registry() {
  static const std::vector<ExperimentDef> defs = {
      steady_nsd_def(),   affine_gain_def(), lms_rls_tracking_def(), convergence_def(), pn_robustness_def(),
      transfer_def(),     lowcost_def(),     sparse_def(),           echo_def(),        theory_tables_def(),
  };
  return defs;
}

const ExperimentDef& find_def(const std::string& id) {
  for (const auto& d : registry()) {
    if (d.id == id) return d;
  }
  std::string known;
  for (const auto& d : registry()) known += (known.empty() ? "" : ", ") + d.id;
  throw ConfigError("unknown experiment '" + id + "' (known: " + known + ")");
}

}  // namespace

}  // namespace detail

std::size_t Table::col(const std::string& column) const {
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) throw std::out_of_range("table " + name + " has no column '" + column + "'");
  return static_cast<std::size_t>(it - header.begin());
}

double Table::num(std::size_t row, const std::string& column) const {
  const Cell& c = rows.at(row).at(col(column));
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  throw std::invalid_argument("column '" + column + "' is not numeric");
}

const std::string& Table::str(std::size_t row, const std::string& column) const {
  return std::get<std::string>(rows.at(row).at(col(column)));
}

std::vector<double> Table::column(const std::string& column) const {
  std::vector<double> out;
  for (std::size_t r = 0; r < rows.size(); ++r) out.push_back(num(r, column));
  return out;
}

void Table::add(std::vector<Cell> row) {
  if (row.size() != header.size()) {
    throw std::logic_error(fmt::format("table {}: row has {} cells, header has {}", name, row.size(), header.size()));
  }
  rows.push_back(std::move(row));
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              out += fmt::format("{:.9g}", v);
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
              out += fmt::format("{}", v);
            } else {
              out += v;
            }
          },
          row[i]);
    }
    out += '\n';
  }
  return out;
}

std::filesystem::path write_csv(const Table& t, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto path = dir / (t.name + ".csv");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_csv(t);
  if (!out) throw std::runtime_error("write failed for " + path.string());
  return path;
}

const Table& ExperimentResult::table(const std::string& name) const {
  for (const auto& t : tables) {
    if (t.name == name) return t;
  }
  throw std::out_of_range("experiment " + experiment + " produced no table '" + name + "'");
}

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& d : detail::registry()) v.push_back(d.id);
    return v;
  }();
  return ids;
}

const std::vector<KeySpec>& experiment_schema(const std::string& id) {
  static std::map<std::string, std::vector<KeySpec>> cache;
  static std::mutex mu;
  std::lock_guard lock(mu);
  auto it = cache.find(id);
  if (it != cache.end()) return it->second;
  const auto& def = detail::find_def(id);
  std::vector<KeySpec> keys;
  keys.push_back(detail::text("experiment", "").one_of(experiment_ids()));
  keys.back().required = true;
  keys.push_back(detail::integer("seed", "1").ge(0).help("master seed"));
  if (def.simulated) {
    KeySpec runs = detail::integer("runs", "100").ge(1).help("independent realizations");
    runs.warn_if_missing = true;
    keys.push_back(runs);
  }
  detail::append(keys, def.keys);
  return cache.emplace(id, std::move(keys)).first->second;
}

Validation validate_config(const Config& cfg, Params* out) {
  if (!cfg.has("experiment")) {
    Validation v;
    v.errors.push_back("missing required key 'experiment'");
    return v;
  }
  const std::string& id = cfg.raw("experiment");
  if (std::find(experiment_ids().begin(), experiment_ids().end(), id) == experiment_ids().end()) {
    Validation v;
    v.errors.push_back("unknown experiment '" + id + "'");
    return v;
  }
  return check(cfg, experiment_schema(id), out);
}

ExperimentResult run_experiment(Config cfg, const RunOptions& opts) {
  if (opts.runs && cfg.has("experiment")) {
    const auto& ids = experiment_ids();
    const std::string& id = cfg.raw("experiment");
    if (std::find(ids.begin(), ids.end(), id) != ids.end() && detail::find_def(id).simulated) {
      cfg.set("runs", std::to_string(*opts.runs));
    }
  }
  if (opts.seed) cfg.set("seed", std::to_string(*opts.seed));
  Params p;
  const Validation v = validate_config(cfg, &p);
  if (!v.ok()) {
    std::string msg = cfg.source() + ": invalid configuration";
    for (const auto& e : v.errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  const auto& def = detail::find_def(p.text("experiment"));
  ExperimentResult r = def.run(p, opts);
  r.experiment = def.id;
  r.warnings.insert(r.warnings.begin(), v.warnings.begin(), v.warnings.end());
  return r;
}

const std::vector<Preset>& presets() { return detail::embedded_presets(); }

const Preset& preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace afc
