#pragma once

#include "afcomb/combination.hpp"
#include "afcomb/combo2.hpp"
#include "afcomb/filters.hpp"
#include "afcomb/scenario.hpp"
#include "afcomb/transfer.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace afc {

// One independent realization that emits a row of named quantities per sample.
class Trial {
 public:
  virtual ~Trial() = default;
  virtual const std::vector<std::string>& columns() const = 0;
  // Advances one sample. `row` only has to be filled when `record` is set.
  virtual void step(std::int64_t n, std::span<double> row, bool record) = 0;
};

using TrialFactory = std::function<std::unique_ptr<Trial>(std::uint64_t run_seed)>;

// A filter arrangement fed by a SignalSource.
class FilterGraph {
 public:
  virtual ~FilterGraph() = default;
  virtual const std::vector<std::string>& columns() const = 0;
  virtual void step(const Sample& s, std::span<double> row, bool record) = 0;
};

using GraphFactory = std::function<std::unique_ptr<FilterGraph>(std::uint64_t run_seed)>;

enum class DivergencePolicy { fail, exclude };

struct EnsembleConfig {
  std::int64_t runs = 100;
  std::uint64_t seed = 1;
  std::int64_t horizon = 0;
  std::int64_t record_stride = 1;
  // Steady-state window [window_start, horizon). Negative: final 10%.
  std::int64_t window_start = -1;
  DivergencePolicy divergence = DivergencePolicy::fail;
  // 0: AFCOMB_THREADS or the hardware concurrency.
  unsigned threads = 0;
};

// Per-iteration ensemble means (rows at n = 0, stride, 2*stride, ...) and
// steady-state window means. Runs are merged in run-index order, so results
// do not depend on the thread count.
struct EnsembleMetrics {
  std::vector<std::string> columns;
  std::vector<std::int64_t> record_n;
  Matrix mean;            // records x columns
  Vector window_mean;     // columns
  Matrix run_window;      // completed runs x columns, window mean per run
  std::int64_t runs = 0;  // completed runs
  std::int64_t diverged = 0;
  std::int64_t window_start = 0;

  std::size_t index(const std::string& column) const;
  Eigen::Ref<const Vector> series(const std::string& column) const;
  double steady(const std::string& column) const;
};

unsigned default_threads();

EnsembleMetrics run_trials(const TrialFactory& factory, const EnsembleConfig& cfg);
EnsembleMetrics run_ensemble(const Scenario& sc, const GraphFactory& factory, const EnsembleConfig& cfg);

// Run seed of realization `run` for a master seed.
std::uint64_t run_seed(std::uint64_t master, std::int64_t run);

// Components adapted once per sample, with any number of two-filter mixers
// reading their outputs. Columns: ea2_<c> and msd_<c> per component,
// ea12 (cross term of components 0 and 1), ea2_<m>, lambda_<m>, msd_<m> per
// mixer. MSD columns are only computed when `with_msd` is set.
class PairBankGraph : public FilterGraph {
 public:
  struct MixerSpec {
    std::string label;
    std::size_t first = 0;
    std::size_t second = 1;
    MixerConfig config;
  };

  PairBankGraph(std::vector<std::string> component_labels, std::vector<FilterState> components,
                std::vector<MixerSpec> mixers, bool with_msd = false);

  const std::vector<std::string>& columns() const override { return columns_; }
  void step(const Sample& s, std::span<double> row, bool record) override;

  const std::vector<FilterState>& components() const { return filters_; }
  const MixerState& mixer(std::size_t i) const { return mixers_[i]; }

 private:
  std::vector<std::string> columns_;
  std::vector<FilterState> filters_;
  std::vector<MixerSpec> specs_;
  std::vector<MixerState> mixers_;
  std::vector<double> y_;
  bool with_msd_;
};

// Single two-filter combination with an optional transfer policy. Columns:
// ea2_1, ea2_2, ea2, ea12, lambda.
class TransferGraph : public FilterGraph {
 public:
  TransferGraph(FilterState fast, FilterState slow, const MixerConfig& mixer, TransferPolicy policy);
  const std::vector<std::string>& columns() const override { return columns_; }
  void step(const Sample& s, std::span<double> row, bool record) override;

  const TwoFilterCombination& combination() const { return combo_; }

 private:
  std::vector<std::string> columns_;
  TwoFilterCombination combo_;
};

// Several independent graphs fed by the same samples; columns are prefixed
// with "<name>:".
class GraphBundle : public FilterGraph {
 public:
  void add(std::string name, std::unique_ptr<FilterGraph> graph);
  const std::vector<std::string>& columns() const override { return columns_; }
  void step(const Sample& s, std::span<double> row, bool record) override;

 private:
  std::vector<std::unique_ptr<FilterGraph>> parts_;
  std::vector<std::size_t> offsets_;
  std::vector<std::string> columns_;
};

// ---- series helpers --------------------------------------------------------

inline constexpr double kInfiniteErle = std::numeric_limits<double>::infinity();

// Sliding-window ERLE in dB over windows ending at each sample; windows with
// zero residual power give +infinity.
std::vector<double> erle(std::span<const double> d, std::span<const double> e, std::span<const double> e0,
                         std::size_t window);
// ERLE of a whole block of samples.
double erle_total(std::span<const double> d, std::span<const double> e, std::span<const double> e0);

// Centered moving average; the window shrinks at the edges.
std::vector<double> moving_average(std::span<const double> x, std::size_t window);

// First index i >= from with x[i] <= level; -1 if never.
std::int64_t first_at_or_below(std::span<const double> x, double level, std::size_t from = 0);

}  // namespace afc
