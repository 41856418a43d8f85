#pragma once

#include "afcomb/combination.hpp"
#include "afcomb/combo2.hpp"
#include "afcomb/filters.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace afc {

struct BlockShrinkConfig {
  std::size_t blocks = 1;
  MixerConfig mixer{MixRule::cvx_pn_lms, Activation::scaled_sigmoid, 0.5};
  // All shrinkage factors held at 1: the filter behaves as its base.
  bool pinned = false;
};

// Half-open coefficient ranges of Q blocks; the last block absorbs the remainder.
std::vector<std::pair<std::size_t, std::size_t>> block_bounds(std::size_t taps, std::size_t blocks);

// Block-wise biased filter: the base filter output is split into per-block
// partial outputs y_q, each scaled by a shrinkage factor lambda_q in [0, 1].
// Each lambda_q is a convex combination of y_q against a virtual filter whose
// output is always zero.
class BlockShrinkFilter {
 public:
  BlockShrinkFilter(FilterState base, const BlockShrinkConfig& cfg);

  // y = sum_q lambda_q y_q; partial outputs written to `partials` when given.
  double output(ConstVectorRef u, std::vector<double>* partials = nullptr) const;

  // The base adapts on its own unbiased error d - sum_q y_q; the shrinkage
  // mixers step on the biased error d - y.
  StepResult step(ConstVectorRef u, double d);

  const FilterState& base() const { return base_; }
  FilterState& base() { return base_; }
  const MixerState& mixer(std::size_t q) const { return mixers_.at(q); }
  MixerState& mixer(std::size_t q) { return mixers_.at(q); }
  std::size_t blocks() const { return bounds_.size(); }
  const std::vector<std::pair<std::size_t, std::size_t>>& bounds() const { return bounds_; }
  // Base weights scaled block-wise by lambda_q.
  Vector effective_weights() const;

 private:
  FilterState base_;
  std::vector<std::pair<std::size_t, std::size_t>> bounds_;
  std::vector<MixerState> mixers_;
  std::vector<double> partials_;
  bool pinned_;
};

// NLMS and zero-attracting NLMS sharing one mixer.
TwoFilterCombination make_za_combination(std::size_t taps, double mu, double rho, const MixerConfig& mixer,
                                         double eps = kDefaultNlmsEps);

}  // namespace afc
