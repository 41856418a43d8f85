#include "afcomb/combination.hpp"

namespace afc {

TwoFilterCombination::TwoFilterCombination(FilterState fast, FilterState slow, const MixerConfig& mixer,
                                           TransferPolicy transfer)
    : f1_(std::move(fast)), f2_(std::move(slow)), mixer_(make_mixer(mixer)), transfer_(transfer) {
  validate(transfer_);
  if (transfer_.kind != TransferKind::none && f1_.size() != f2_.size()) {
    throw DimensionError("weight transfer requires equal-length components");
  }
}

ComboStep TwoFilterCombination::step(ConstVectorRef u, double d) {
  if (u.size() < f1_.w.size() || u.size() < f2_.w.size()) {
    throw DimensionError("regressor shorter than a component filter");
  }
  ComboStep s;
  s.lambda = mixer_.lambda;
  const StepResult r1 = adapt(f1_, u.head(f1_.w.size()), d);
  const StepResult r2 = adapt(f2_, u.head(f2_.w.size()), d);
  s.y1 = r1.y;
  s.y2 = r2.y;
  s.y = combine_outputs(s.lambda, s.y1, s.y2);
  s.e = d - s.y;
  mixer_step(mixer_, s.e, s.y1, s.y2);
  s.transferred = maybe_transfer(transfer_, n_, mixer_.lambda, f1_.w, f2_.w);
  if (s.transferred) ++transfers_;
  ++n_;
  return s;
}

Vector TwoFilterCombination::combined_weights() const { return combine_weights(mixer_.lambda, f1_.w, f2_.w); }

}  // namespace afc
