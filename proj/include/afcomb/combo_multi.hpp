#pragma once

#include "afcomb/combo2.hpp"
#include "afcomb/types.hpp"

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace afc {

// Binary tree of two-filter mixers. Each internal node mixes the outputs of
// its two subtrees and adapts on its own local combined error.
class HierarchicalCombiner {
 public:
  struct Leaf {
    std::size_t component = 0;
  };
  struct Internal {
    std::size_t left = 0;
    std::size_t right = 0;
    MixerState mixer;
  };
  using Node = std::variant<Leaf, Internal>;

  std::size_t add_leaf(std::size_t component);
  std::size_t add_internal(std::size_t left, std::size_t right, const MixerConfig& cfg);

  // Pairs leaves (0,1), (2,3), ... then pairs the results, layer by layer.
  // The four-leaf tree is lambda21 { lambda11 (y1, y2) } , { lambda12 (y3, y4) }.
  static HierarchicalCombiner balanced(std::size_t leaves, const MixerConfig& cfg);

  double output(std::span<const double> component_outputs) const;
  // Local output of every node, index-aligned with nodes().
  std::vector<double> node_outputs(std::span<const double> component_outputs) const;
  void adapt(double d, std::span<const double> component_outputs);

  std::size_t root() const { return nodes_.size() - 1; }
  std::size_t leaf_count() const { return leaves_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  MixerState& mixer(std::size_t node);
  const MixerState& mixer(std::size_t node) const;

 private:
  std::vector<Node> nodes_;
  std::size_t leaves_ = 0;
  std::size_t max_component_ = 0;
};

// One-layer convex combination of K filters through a softmax activation.
struct SoftmaxMixerConfig {
  double step = 1.0;  // mu_a
  bool clamp = true;
  double a_plus = kDefaultAPlus;
  bool power_normalized = false;
  double eta = kDefaultEta;
  double eps = kDefaultMixerEps;
};

struct SoftmaxMixerState {
  Vector a;
  Vector lambda;
  SoftmaxMixerConfig cfg;
  double p = 0.0;
};

Vector softmax(ConstVectorRef a);
SoftmaxMixerState make_softmax_mixer(std::size_t components, const SoftmaxMixerConfig& cfg);
double softmax_output(const SoftmaxMixerState& s, std::span<const double> y);
// a_k += mu_a e lambda_k (y_k - y), the exact stochastic gradient of e^2 through softmax.
void softmax_adapt(SoftmaxMixerState& s, double d, std::span<const double> y);

// One-layer affine combination: K-1 free weights, the last one is 1 - sum.
struct AffineLayerState {
  Vector lambda;  // K - 1 entries
  double step = 0.5;
  double eta = kDefaultEta;
  double eps = kDefaultMixerEps;
  double p = 0.0;
};

AffineLayerState make_affine_layer(std::size_t components, double step, double eta = kDefaultEta,
                                   double eps = kDefaultMixerEps);
double affine_layer_output(const AffineLayerState& s, std::span<const double> y);
void affine_layer_step(AffineLayerState& s, double d, std::span<const double> y);

}  // namespace afc
