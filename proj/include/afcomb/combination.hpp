#pragma once

#include "afcomb/combo2.hpp"
#include "afcomb/filters.hpp"
#include "afcomb/transfer.hpp"

#include <cstdint>

namespace afc {

struct ComboStep {
  double y1 = 0.0;
  double y2 = 0.0;
  double y = 0.0;
  double e = 0.0;
  double lambda = 0.0;  // value used to form y (before the mixer update)
  bool transferred = false;
};

// Two component filters, one mixer and an optional communication policy.
// Per sample: both components adapt on their own errors, then the mixer steps
// on the combined error, then the transfer policy sees the updated lambda.
class TwoFilterCombination {
 public:
  TwoFilterCombination(FilterState fast, FilterState slow, const MixerConfig& mixer,
                       TransferPolicy transfer = {});

  ComboStep step(ConstVectorRef u, double d);

  const FilterState& filter1() const { return f1_; }
  const FilterState& filter2() const { return f2_; }
  FilterState& filter1() { return f1_; }
  FilterState& filter2() { return f2_; }
  const MixerState& mixer() const { return mixer_; }
  MixerState& mixer() { return mixer_; }
  Vector combined_weights() const;
  std::int64_t samples() const { return n_; }
  std::int64_t transfer_events() const { return transfers_; }

 private:
  FilterState f1_;
  FilterState f2_;
  MixerState mixer_;
  TransferPolicy transfer_;
  std::int64_t n_ = 0;
  std::int64_t transfers_ = 0;
};

}  // namespace afc
