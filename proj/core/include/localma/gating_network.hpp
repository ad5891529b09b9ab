#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "localma/losses.hpp"
#include "localma/model.hpp"

namespace localma {

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

// Feed-forward map from covariates to M logits: ReLU hidden layers followed by
// an affine output layer. The softmax of the (clamped) logits gives the
// per-input model weights.
struct GatingNetwork {
  std::vector<DenseLayer> layers;
  double logit_clamp = 30.0;
  /// Forces the last logit to zero, leaving M - 1 free logits.
  bool pin_last_logit = false;

  /// Layer widths [p, hidden..., M].
  std::vector<int> dims() const;
  Eigen::Index input_dim() const { return layers.front().weights.cols(); }
  Eigen::Index num_models() const { return layers.back().weights.rows(); }
  Eigen::Index parameter_count() const;
  /// Throws BadDims if layer shapes do not chain, NonFiniteValue on NaN/Inf.
  void check() const;
};

/// Gradient with the same layer shapes as the network it was taken from.
struct Gradient {
  std::vector<DenseLayer> layers;
};

/// He-normal weights (sd sqrt(2 / fan_in)) and zero biases; deterministic in seed.
/// dims must list at least [p, hidden, M] with every entry >= 1, else BadDims.
GatingNetwork init_network(const std::vector<int>& dims, std::uint64_t seed,
                           double logit_clamp = 30.0, bool pin_last_logit = false);

/// Numerically stable softmax (max-subtracted).
Eigen::VectorXd softmax(const Eigen::VectorXd& v);

/// Clamped pre-softmax outputs at x.
Eigen::VectorXd logits(const GatingNetwork& network, const Eigen::VectorXd& x);
/// softmax(logits(network, x)).
Eigen::VectorXd weights_at(const GatingNetwork& network, const Eigen::VectorXd& x);

/// Clamped logits for every row of `covariates` (n x p), returned n x M.
Eigen::MatrixXd logits_batch(const GatingNetwork& network, const Eigen::MatrixXd& covariates);
/// Weight rows for every row of `covariates`.
WeightMatrix weight_matrix(const GatingNetwork& network, const Eigen::MatrixXd& covariates);

struct LossAndGradient {
  double loss = 0.0;
  Gradient gradient;
};

/// Mean loss of the locally weighted prediction over the dataset, and its exact
/// gradient with respect to every layer's weights and bias. Logits outside the
/// clamp (and a pinned last logit) contribute zero gradient.
/// Throws DimensionMismatch on shape disagreement and NonFiniteLoss on overflow.
LossAndGradient loss_and_gradient(const GatingNetwork& network, const Dataset& dataset,
                                  const LossSpec& loss);
/// Loss only; same value as loss_and_gradient().loss.
double empirical_loss(const GatingNetwork& network, const Dataset& dataset, const LossSpec& loss);

struct AdamState {
  std::vector<DenseLayer> first_moment;
  std::vector<DenseLayer> second_moment;
  std::int64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam step, in place. Empty moments are initialised to zero
/// on the first call. Throws ShapeMismatch if gradient/state shapes disagree.
void adam_update(GatingNetwork& network, const Gradient& gradient, AdamState& state,
                 double learning_rate);

/// Sum of squared parameters over all layers.
double squared_norm(const GatingNetwork& network);

struct TrainResult {
  GatingNetwork network;  // lowest-objective iterate
  /// Training objective (empirical loss plus weight-decay penalty) at each of
  /// the iterations + 1 visited iterates.
  std::vector<double> objective_trace;
  double initial_objective = 0.0;
  double best_objective = 0.0;
  int best_iteration = 0;
  /// Empirical loss (no penalty) of the returned network.
  double best_loss = 0.0;
};

/// Full-batch Adam on the empirical loss plus (weight_decay / 2) ||theta||^2,
/// starting from init_network(config.seed). Returns the iterate with the lowest
/// recorded objective.
TrainResult train(const Dataset& dataset, const TrainConfig& config);

}  // namespace localma
