#include "afcomb/combo_multi.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace afc {

std::size_t HierarchicalCombiner::add_leaf(std::size_t component) {
  nodes_.emplace_back(Leaf{component});
  ++leaves_;
  max_component_ = std::max(max_component_, component);
  return nodes_.size() - 1;
}

std::size_t HierarchicalCombiner::add_internal(std::size_t left, std::size_t right, const MixerConfig& cfg) {
  const std::size_t id = nodes_.size();
  if (left >= id || right >= id || left == right) {
    throw std::invalid_argument("hierarchy children must be distinct, previously added nodes");
  }
  nodes_.emplace_back(Internal{left, right, make_mixer(cfg)});
  return id;
}

HierarchicalCombiner HierarchicalCombiner::balanced(std::size_t leaves, const MixerConfig& cfg) {
  if (leaves < 2) throw std::invalid_argument("a hierarchy needs at least two leaves");
  HierarchicalCombiner tree;
  std::vector<std::size_t> layer;
  for (std::size_t k = 0; k < leaves; ++k) layer.push_back(tree.add_leaf(k));
  while (layer.size() > 1) {
    std::vector<std::size_t> next;
    for (std::size_t i = 0; i + 1 < layer.size(); i += 2) {
      next.push_back(tree.add_internal(layer[i], layer[i + 1], cfg));
    }
    if (layer.size() % 2 == 1) next.push_back(layer.back());
    layer = std::move(next);
  }
  return tree;
}

std::vector<double> HierarchicalCombiner::node_outputs(std::span<const double> y) const {
  if (nodes_.empty()) throw std::logic_error("empty hierarchy");
  if (y.size() <= max_component_) {
    throw DimensionError("missing component output: got " + std::to_string(y.size()) + ", need " +
                         std::to_string(max_component_ + 1));
  }
  // Children always precede their parent, so index order is a valid post-order.
  std::vector<double> out(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (const auto* leaf = std::get_if<Leaf>(&nodes_[i])) {
      out[i] = y[leaf->component];
    } else {
      const auto& node = std::get<Internal>(nodes_[i]);
      out[i] = combine_outputs(node.mixer.lambda, out[node.left], out[node.right]);
    }
  }
  return out;
}

double HierarchicalCombiner::output(std::span<const double> y) const { return node_outputs(y).back(); }

void HierarchicalCombiner::adapt(double d, std::span<const double> y) {
  const std::vector<double> out = node_outputs(y);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (auto* node = std::get_if<Internal>(&nodes_[i])) {
      mixer_step(node->mixer, d - out[i], out[node->left], out[node->right]);
    }
  }
}

MixerState& HierarchicalCombiner::mixer(std::size_t node) {
  auto* internal = std::get_if<Internal>(&nodes_.at(node));
  if (internal == nullptr) throw std::invalid_argument("node is a leaf");
  return internal->mixer;
}

const MixerState& HierarchicalCombiner::mixer(std::size_t node) const {
  const auto* internal = std::get_if<Internal>(&nodes_.at(node));
  if (internal == nullptr) throw std::invalid_argument("node is a leaf");
  return internal->mixer;
}

Vector softmax(ConstVectorRef a) {
  const double shift = a.maxCoeff();
  Vector ex = (a.array() - shift).exp().matrix();
  return ex / ex.sum();
}

SoftmaxMixerState make_softmax_mixer(std::size_t components, const SoftmaxMixerConfig& cfg) {
  if (components < 2) throw std::invalid_argument("softmax combination needs K >= 2");
  if (!(cfg.step > 0.0)) throw std::invalid_argument("softmax step must be > 0");
  SoftmaxMixerState s;
  s.cfg = cfg;
  s.a = Vector::Zero(static_cast<Eigen::Index>(components));
  s.lambda = softmax(s.a);
  return s;
}

double softmax_output(const SoftmaxMixerState& s, std::span<const double> y) {
  if (y.size() != static_cast<std::size_t>(s.lambda.size())) throw DimensionError("softmax: output count mismatch");
  double out = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) out += s.lambda[static_cast<Eigen::Index>(k)] * y[k];
  return out;
}

void softmax_adapt(SoftmaxMixerState& s, double d, std::span<const double> y) {
  const double out = softmax_output(s, y);
  const double e = d - out;
  double step = s.cfg.step;
  if (s.cfg.power_normalized) {
    double spread = 0.0;
    for (double yk : y) spread += (yk - out) * (yk - out);
    spread /= static_cast<double>(y.size());
    s.p = s.cfg.eta * s.p + (1.0 - s.cfg.eta) * spread;
    step /= s.cfg.eps + s.p;
  }
  for (std::size_t k = 0; k < y.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    double a = s.a[i] + step * e * s.lambda[i] * (y[k] - out);
    if (s.cfg.clamp) a = std::clamp(a, -s.cfg.a_plus, s.cfg.a_plus);
    s.a[i] = a;
  }
  if (!s.a.allFinite()) throw DivergenceError("softmax auxiliary parameters diverged");
  s.lambda = softmax(s.a);
}

AffineLayerState make_affine_layer(std::size_t components, double step, double eta, double eps) {
  if (components < 2) throw std::invalid_argument("affine layer needs K >= 2");
  if (!(step > 0.0)) throw std::invalid_argument("affine layer step must be > 0");
  if (!(eta >= 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in [0, 1)");
  AffineLayerState s;
  s.lambda = Vector::Constant(static_cast<Eigen::Index>(components - 1), 1.0 / static_cast<double>(components));
  s.step = step;
  s.eta = eta;
  s.eps = eps;
  return s;
}

double affine_layer_output(const AffineLayerState& s, std::span<const double> y) {
  const std::size_t k_last = static_cast<std::size_t>(s.lambda.size());
  if (y.size() != k_last + 1) throw DimensionError("affine layer: output count mismatch");
  // y_K + sum_k lambda_k (y_k - y_K); for K = 2 this is combine_outputs.
  double out = y[k_last];
  for (std::size_t k = 0; k < k_last; ++k) out += s.lambda[static_cast<Eigen::Index>(k)] * (y[k] - y[k_last]);
  return out;
}

void affine_layer_step(AffineLayerState& s, double d, std::span<const double> y) {
  const double out = affine_layer_output(s, y);
  const double e = d - out;
  const std::size_t k_last = static_cast<std::size_t>(s.lambda.size());
  double spread = 0.0;
  for (std::size_t k = 0; k < k_last; ++k) {
    const double diff = y[k] - y[k_last];
    spread += diff * diff;
  }
  s.p = s.eta * s.p + (1.0 - s.eta) * (spread / static_cast<double>(k_last));
  const double gain = s.step / (s.eps + s.p);
  for (std::size_t k = 0; k < k_last; ++k) {
    s.lambda[static_cast<Eigen::Index>(k)] += gain * e * (y[k] - y[k_last]);
  }
  if (!s.lambda.allFinite()) throw DivergenceError("affine layer weights diverged");
}

}  // namespace afc
