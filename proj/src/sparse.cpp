#include "afcomb/sparse.hpp"

#include <stdexcept>

namespace afc {

std::vector<std::pair<std::size_t, std::size_t>> block_bounds(std::size_t taps, std::size_t blocks) {
  if (blocks == 0 || blocks > taps) throw std::invalid_argument("block count must lie in [1, M]");
  const std::size_t len = taps / blocks;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t q = 0; q < blocks; ++q) out.emplace_back(q * len, q + 1 == blocks ? taps : (q + 1) * len);
  return out;
}

BlockShrinkFilter::BlockShrinkFilter(FilterState base, const BlockShrinkConfig& cfg)
    : base_(std::move(base)), bounds_(block_bounds(base_.size(), cfg.blocks)), pinned_(cfg.pinned) {
  if (!is_convex(cfg.mixer.rule)) throw std::invalid_argument("shrinkage factors need a convex mixing rule");
  mixers_.assign(bounds_.size(), make_mixer(cfg.mixer));
  if (pinned_) {
    for (auto& m : mixers_) set_lambda(m, 1.0);
  }
  partials_.resize(bounds_.size());
}

double BlockShrinkFilter::output(ConstVectorRef u, std::vector<double>* partials) const {
  if (u.size() != base_.w.size()) throw DimensionError("block filter: regressor length mismatch");
  double y = 0.0;
  for (std::size_t q = 0; q < bounds_.size(); ++q) {
    const auto [lo, hi] = bounds_[q];
    const auto len = static_cast<Eigen::Index>(hi - lo);
    const double yq = u.segment(static_cast<Eigen::Index>(lo), len).dot(base_.w.segment(static_cast<Eigen::Index>(lo), len));
    if (partials) (*partials)[q] = yq;
    y += mixers_[q].lambda * yq;
  }
  return y;
}

StepResult BlockShrinkFilter::step(ConstVectorRef u, double d) {
  StepResult r;
  r.y = output(u, &partials_);
  r.e = d - r.y;
  adapt(base_, u, d);
  if (!pinned_) {
    for (std::size_t q = 0; q < bounds_.size(); ++q) mixer_step(mixers_[q], r.e, partials_[q], 0.0);
  }
  return r;
}

Vector BlockShrinkFilter::effective_weights() const {
  Vector w = base_.w;
  for (std::size_t q = 0; q < bounds_.size(); ++q) {
    const auto [lo, hi] = bounds_[q];
    w.segment(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo)) *= mixers_[q].lambda;
  }
  return w;
}

TwoFilterCombination make_za_combination(std::size_t taps, double mu, double rho, const MixerConfig& mixer,
                                         double eps) {
  return TwoFilterCombination(make_nlms(taps, mu, eps), make_za_nlms(taps, mu, rho, eps), mixer);
}

}  // namespace afc
