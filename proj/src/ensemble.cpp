#include "afcomb/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fmt/format.h>
#include <thread>

namespace afc {

std::size_t EnsembleMetrics::index(const std::string& column) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw std::out_of_range("no column '" + column + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

Eigen::Ref<const Vector> EnsembleMetrics::series(const std::string& column) const {
  return mean.col(static_cast<Eigen::Index>(index(column)));
}

double EnsembleMetrics::steady(const std::string& column) const {
  return window_mean[static_cast<Eigen::Index>(index(column))];
}

unsigned default_threads() {
  if (const char* env = std::getenv("AFCOMB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::uint64_t run_seed(std::uint64_t master, std::int64_t run) {
  return mix_seed(master, static_cast<std::uint64_t>(run));
}

namespace {

struct RunResult {
  Matrix records;
  Vector window;
  std::exception_ptr error;
  bool diverged = false;
};

RunResult execute(const TrialFactory& factory, const EnsembleConfig& cfg, std::int64_t run, std::size_t records,
                  std::int64_t window_start) {
  RunResult r;
  try {
    auto trial = factory(run_seed(cfg.seed, run));
    const auto cols = static_cast<Eigen::Index>(trial->columns().size());
    r.records = Matrix::Zero(static_cast<Eigen::Index>(records), cols);
    r.window = Vector::Zero(cols);
    std::vector<double> row(static_cast<std::size_t>(cols), 0.0);
    for (std::int64_t n = 0; n < cfg.horizon; ++n) {
      const bool on_grid = n % cfg.record_stride == 0;
      const bool in_window = n >= window_start;
      trial->step(n, row, on_grid || in_window);
      if (on_grid) {
        for (Eigen::Index c = 0; c < cols; ++c) r.records(n / cfg.record_stride, c) = row[static_cast<std::size_t>(c)];
      }
      if (in_window) {
        for (Eigen::Index c = 0; c < cols; ++c) r.window[c] += row[static_cast<std::size_t>(c)];
      }
    }
    r.window /= static_cast<double>(cfg.horizon - window_start);
    for (Eigen::Index i = 0; i < r.records.size(); ++i) {
      if (!std::isfinite(r.records.data()[i])) throw DivergenceError("non-finite metric");
    }
  } catch (const DivergenceError&) {
    r.diverged = true;
    r.error = std::current_exception();
  } catch (...) {
    r.error = std::current_exception();
  }
  return r;
}

}  // namespace

EnsembleMetrics run_trials(const TrialFactory& factory, const EnsembleConfig& cfg) {
  if (cfg.runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (cfg.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (cfg.record_stride < 1) throw std::invalid_argument("record stride must be >= 1");
  const std::int64_t window_start = cfg.window_start < 0 ? cfg.horizon - std::max<std::int64_t>(1, cfg.horizon / 10)
                                                          : cfg.window_start;
  if (window_start >= cfg.horizon) throw std::invalid_argument("steady-state window lies outside the horizon");

  const auto records = static_cast<std::size_t>((cfg.horizon - 1) / cfg.record_stride + 1);
  EnsembleMetrics m;
  m.window_start = window_start;
  m.columns = factory(run_seed(cfg.seed, 0))->columns();
  const auto cols = static_cast<Eigen::Index>(m.columns.size());
  m.mean = Matrix::Zero(static_cast<Eigen::Index>(records), cols);
  m.window_mean = Vector::Zero(cols);
  for (std::size_t i = 0; i < records; ++i) m.record_n.push_back(static_cast<std::int64_t>(i) * cfg.record_stride);
  std::vector<Vector> per_run;

  const unsigned threads = static_cast<unsigned>(
      std::min<std::int64_t>(cfg.threads == 0 ? default_threads() : cfg.threads, cfg.runs));
  const std::int64_t batch = threads == 1 ? 1 : 4 * static_cast<std::int64_t>(threads);

  auto merge = [&](RunResult& r, std::int64_t run) {
    if (r.error) {
      if (!r.diverged || cfg.divergence == DivergencePolicy::fail) {
        try {
          std::rethrow_exception(r.error);
        } catch (const DivergenceError& e) {
          throw DivergenceError(fmt::format("run {} diverged: {}", run, e.what()));
        }
      }
      ++m.diverged;
      return;
    }
    if (r.records.cols() != cols) throw std::logic_error("trials disagree on their columns");
    m.mean += r.records;
    m.window_mean += r.window;
    per_run.push_back(std::move(r.window));
    ++m.runs;
  };

  for (std::int64_t first = 0; first < cfg.runs; first += batch) {
    const std::int64_t count = std::min(batch, cfg.runs - first);
    std::vector<RunResult> results(static_cast<std::size_t>(count));
    if (threads == 1) {
      results[0] = execute(factory, cfg, first, records, window_start);
    } else {
      std::atomic<std::int64_t> next{0};
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
          for (std::int64_t i = next++; i < count; i = next++) {
            results[static_cast<std::size_t>(i)] = execute(factory, cfg, first + i, records, window_start);
          }
        });
      }
      for (auto& th : pool) th.join();
    }
    for (std::int64_t i = 0; i < count; ++i) merge(results[static_cast<std::size_t>(i)], first + i);
  }

  if (m.runs == 0) throw DivergenceError("every run diverged");
  m.mean /= static_cast<double>(m.runs);
  m.window_mean /= static_cast<double>(m.runs);
  m.run_window.resize(m.runs, cols);
  for (std::int64_t i = 0; i < m.runs; ++i) m.run_window.row(i) = per_run[static_cast<std::size_t>(i)].transpose();
  return m;
}

namespace {

class GraphTrial : public Trial {
 public:
  GraphTrial(const Scenario& sc, std::uint64_t seed, std::unique_ptr<FilterGraph> graph)
      : source_(sc, seed), graph_(std::move(graph)) {}

  const std::vector<std::string>& columns() const override { return graph_->columns(); }
  void step(std::int64_t, std::span<double> row, bool record) override { graph_->step(source_.next(), row, record); }

 private:
  SignalSource source_;
  std::unique_ptr<FilterGraph> graph_;
};

}  // namespace

EnsembleMetrics run_ensemble(const Scenario& sc, const GraphFactory& factory, const EnsembleConfig& cfg) {
  validate(sc);
  return run_trials(
      [&](std::uint64_t seed) -> std::unique_ptr<Trial> {
        // The graph gets its own stream so its randomness never aliases the signal's.
        return std::make_unique<GraphTrial>(sc, seed, factory(mix_seed(seed, 0x67726170ULL)));
      },
      cfg);
}

PairBankGraph::PairBankGraph(std::vector<std::string> component_labels, std::vector<FilterState> components,
                             std::vector<MixerSpec> mixers, bool with_msd)
    : filters_(std::move(components)), specs_(std::move(mixers)), with_msd_(with_msd) {
  if (component_labels.size() != filters_.size()) throw std::invalid_argument("one label per component");
  if (filters_.size() < 2) throw std::invalid_argument("pair bank needs at least two components");
  for (const auto& label : component_labels) {
    columns_.push_back("ea2_" + label);
    if (with_msd_) columns_.push_back("msd_" + label);
  }
  columns_.push_back("ea12");
  for (const auto& spec : specs_) {
    if (spec.first >= filters_.size() || spec.second >= filters_.size()) {
      throw std::out_of_range("mixer references a missing component");
    }
    mixers_.push_back(make_mixer(spec.config));
    columns_.push_back("ea2_" + spec.label);
    columns_.push_back("lambda_" + spec.label);
    if (with_msd_) columns_.push_back("msd_" + spec.label);
  }
  y_.resize(filters_.size());
}

void PairBankGraph::step(const Sample& s, std::span<double> row, bool record) {
  const auto u = s.u();
  std::size_t c = 0;
  if (record) {
    for (std::size_t k = 0; k < filters_.size(); ++k) {
      const FilterState& f = filters_[k];
      const double ea = s.clean - predict(f, u.head(f.w.size()));
      row[c++] = ea * ea;
      if (with_msd_) row[c++] = (s.w_o->head(f.w.size()) - f.w).squaredNorm();
    }
    const double ea1 = s.clean - predict(filters_[0], u.head(filters_[0].w.size()));
    const double ea2 = s.clean - predict(filters_[1], u.head(filters_[1].w.size()));
    row[c++] = ea1 * ea2;
    if (with_msd_) {
      // Combined weights from the a priori component weights.
      for (std::size_t i = 0; i < specs_.size(); ++i) {
        const Vector w = combine_weights(mixers_[i].lambda, filters_[specs_[i].first].w, filters_[specs_[i].second].w);
        row[c + 3 * i + 2] = (s.w_o->head(w.size()) - w).squaredNorm();
      }
    }
  }
  for (std::size_t k = 0; k < filters_.size(); ++k) {
    y_[k] = adapt(filters_[k], u.head(filters_[k].w.size()), s.d).y;
  }
  const std::size_t stride = with_msd_ ? 3 : 2;
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    MixerState& m = mixers_[i];
    const double y1 = y_[specs_[i].first];
    const double y2 = y_[specs_[i].second];
    const double y = combine_outputs(m.lambda, y1, y2);
    if (record) {
      const double ea = s.clean - y;
      row[c + stride * i] = ea * ea;
      row[c + stride * i + 1] = m.lambda;
    }
    mixer_step(m, s.d - y, y1, y2);
  }
}

TransferGraph::TransferGraph(FilterState fast, FilterState slow, const MixerConfig& mixer, TransferPolicy policy)
    : columns_{"ea2_1", "ea2_2", "ea2", "ea12", "lambda"}, combo_(std::move(fast), std::move(slow), mixer, policy) {}

void TransferGraph::step(const Sample& s, std::span<double> row, bool record) {
  const ComboStep r = combo_.step(s.u(), s.d);
  if (record) {
    const double ea1 = s.clean - r.y1;
    const double ea2 = s.clean - r.y2;
    const double ea = s.clean - r.y;
    row[0] = ea1 * ea1;
    row[1] = ea2 * ea2;
    row[2] = ea * ea;
    row[3] = ea1 * ea2;
    row[4] = r.lambda;
  }
}

void GraphBundle::add(std::string name, std::unique_ptr<FilterGraph> graph) {
  offsets_.push_back(columns_.size());
  for (const auto& c : graph->columns()) columns_.push_back(name + ":" + c);
  parts_.push_back(std::move(graph));
}

void GraphBundle::step(const Sample& s, std::span<double> row, bool record) {
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    parts_[i]->step(s, row.subspan(offsets_[i], parts_[i]->columns().size()), record);
  }
}

std::vector<double> erle(std::span<const double> d, std::span<const double> e, std::span<const double> e0,
                         std::size_t window) {
  if (d.size() != e.size() || d.size() != e0.size()) throw DimensionError("ERLE series lengths differ");
  if (window == 0) throw std::invalid_argument("ERLE window must be >= 1");
  std::vector<double> out(d.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    num += (d[i] - e0[i]) * (d[i] - e0[i]);
    den += (e[i] - e0[i]) * (e[i] - e0[i]);
    if (i >= window) {
      num -= (d[i - window] - e0[i - window]) * (d[i - window] - e0[i - window]);
      den -= (e[i - window] - e0[i - window]) * (e[i - window] - e0[i - window]);
    }
    // Running sums can drift below zero by rounding; recompute small windows exactly.
    if (den <= 1e-300 || num <= 0.0) {
      const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
      num = 0.0;
      den = 0.0;
      for (std::size_t j = lo; j <= i; ++j) {
        num += (d[j] - e0[j]) * (d[j] - e0[j]);
        den += (e[j] - e0[j]) * (e[j] - e0[j]);
      }
    }
    out[i] = den > 0.0 ? to_db(num / den) : kInfiniteErle;
  }
  return out;
}

double erle_total(std::span<const double> d, std::span<const double> e, std::span<const double> e0) {
  if (d.size() != e.size() || d.size() != e0.size()) throw DimensionError("ERLE series lengths differ");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    num += (d[i] - e0[i]) * (d[i] - e0[i]);
    den += (e[i] - e0[i]) * (e[i] - e0[i]);
  }
  return den > 0.0 ? to_db(num / den) : kInfiniteErle;
}

std::vector<double> moving_average(std::span<const double> x, std::size_t window) {
  if (window == 0) throw std::invalid_argument("moving-average window must be >= 1");
  const std::size_t half = window / 2;
  std::vector<double> prefix(x.size() + 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) prefix[i + 1] = prefix[i] + x[i];
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(x.size(), i + half + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

std::int64_t first_at_or_below(std::span<const double> x, double level, std::size_t from) {
  for (std::size_t i = from; i < x.size(); ++i) {
    if (x[i] <= level) return static_cast<std::int64_t>(i);
  }
  return -1;
}

}  // namespace afc
