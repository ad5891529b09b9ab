#include "localma/gating_network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "localma/errors.hpp"
#include "localma/rng.hpp"

namespace localma {

std::vector<int> GatingNetwork::dims() const {
  std::vector<int> out;
  if (layers.empty()) return out;
  out.push_back(static_cast<int>(layers.front().weights.cols()));
  for (const auto& layer : layers) out.push_back(static_cast<int>(layer.weights.rows()));
  return out;
}

Eigen::Index GatingNetwork::parameter_count() const {
  Eigen::Index count = 0;
  for (const auto& layer : layers) count += layer.weights.size() + layer.bias.size();
  return count;
}

void GatingNetwork::check() const {
  if (layers.size() < 2) throw Error(ErrorCode::BadDims, "network needs a hidden layer");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.weights.rows() < 1 || layer.weights.cols() < 1 ||
        layer.bias.size() != layer.weights.rows()) {
      throw Error(ErrorCode::BadDims, "layer " + std::to_string(l) + " has inconsistent shape");
    }
    if (l > 0 && layer.weights.cols() != layers[l - 1].weights.rows()) {
      throw Error(ErrorCode::BadDims, "layer " + std::to_string(l) + " does not chain");
    }
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
      throw Error(ErrorCode::NonFiniteValue, "layer " + std::to_string(l) + " is not finite");
    }
  }
  if (!(logit_clamp > 0.0)) throw Error(ErrorCode::InvalidConfig, "logit_clamp must be > 0");
}

GatingNetwork init_network(const std::vector<int>& dims, std::uint64_t seed, double logit_clamp,
                           bool pin_last_logit) {
  if (dims.size() < 3) {
    throw Error(ErrorCode::BadDims, "dims needs at least [p, hidden, M], got " +
                                        std::to_string(dims.size()) + " entries");
  }
  for (int d : dims) {
    if (d < 1) throw Error(ErrorCode::BadDims, "dims entries must be positive");
  }
  GatingNetwork net;
  net.logit_clamp = logit_clamp;
  net.pin_last_logit = pin_last_logit;
  CounterRng rng(seed, 0x1417);
  NormalSampler normal;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const double sd = std::sqrt(2.0 / fan_in);
    DenseLayer layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.weights(r, c) = sd * normal(rng);
    }
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& v) {
  const double top = v.maxCoeff();
  Eigen::VectorXd e = (v.array() - top).exp().matrix();
  return e / e.sum();
}

namespace {

// Activations for a batch, stored column-per-observation.
struct Forward {
  std::vector<Eigen::MatrixXd> pre;   // hidden pre-activations, one per hidden layer
  std::vector<Eigen::MatrixXd> act;   // act[0] = inputs, act[l] = relu(pre[l - 1])
  Eigen::MatrixXd raw;                // M x n raw outputs
  Eigen::MatrixXd logits;             // M x n clamped (and pinned) outputs
};

Forward forward(const GatingNetwork& net, const Eigen::MatrixXd& covariates) {
  if (covariates.cols() != net.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(net.input_dim()) + " covariates, got " +
                    std::to_string(covariates.cols()));
  }
  Forward f;
  const std::size_t hidden = net.layers.size() - 1;
  f.pre.reserve(hidden);
  f.act.reserve(hidden + 1);
  f.act.push_back(covariates.transpose());
  for (std::size_t l = 0; l < hidden; ++l) {
    const auto& layer = net.layers[l];
    f.pre.push_back((layer.weights * f.act.back()).colwise() + layer.bias);
    f.act.push_back(f.pre.back().cwiseMax(0.0));
  }
  const auto& out = net.layers.back();
  f.raw = (out.weights * f.act.back()).colwise() + out.bias;
  if (net.pin_last_logit) f.raw.row(f.raw.rows() - 1).setZero();
  f.logits = f.raw.cwiseMax(-net.logit_clamp).cwiseMin(net.logit_clamp);
  return f;
}

// Column-wise softmax of an M x n logit matrix.
Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd w(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.cols(); ++i) {
    const double top = logits.col(i).maxCoeff();
    w.col(i) = (logits.col(i).array() - top).exp().matrix();
    w.col(i) /= w.col(i).sum();
  }
  return w;
}

void check_compatible(const GatingNetwork& net, const Dataset& d) {
  if (net.input_dim() != d.p() || net.num_models() != d.M()) {
    throw Error(ErrorCode::DimensionMismatch,
                "network maps " + std::to_string(net.input_dim()) + " -> " +
                    std::to_string(net.num_models()) + " but data has p = " +
                    std::to_string(d.p()) + ", M = " + std::to_string(d.M()));
  }
}

// Mean loss over the batch; if dlogits is non-null, also fills dL/dlogits (M x n).
double batch_loss(const Eigen::MatrixXd& weights, const Dataset& d, const LossSpec& loss,
                  Eigen::MatrixXd* dlogits) {
  const Eigen::Index n = d.n();
  const Eigen::Index M = d.M();
  const Eigen::Index K = d.K();
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::VectorXd combined(K), deriv(K), y(K), dweight(M);
  const auto Ks = static_cast<std::size_t>(K);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    combined.setZero();
    for (Eigen::Index m = 0; m < M; ++m) {
      for (Eigen::Index k = 0; k < K; ++k) combined[k] += weights(m, i) * d.predictions(i, m * K + k);
    }
    y = d.responses.row(i).transpose();
    total += detail::loss_kernel(loss, {y.data(), Ks}, {combined.data(), Ks}, {deriv.data(), Ks});
    if (dlogits == nullptr) continue;
    // dL/dw_m, then through the softmax Jacobian w_m (delta_mj - w_j).
    for (Eigen::Index m = 0; m < M; ++m) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < K; ++k) acc += deriv[k] * d.predictions(i, m * K + k);
      dweight[m] = acc * inv_n;
    }
    const double mean_dweight = weights.col(i).dot(dweight);
    for (Eigen::Index j = 0; j < M; ++j) {
      (*dlogits)(j, i) = weights(j, i) * (dweight[j] - mean_dweight);
    }
  }
  const double value = total * inv_n;
  if (!std::isfinite(value)) throw Error(ErrorCode::NonFiniteLoss, "empirical loss overflowed");
  return value;
}

}  // namespace

Eigen::VectorXd logits(const GatingNetwork& network, const Eigen::VectorXd& x) {
  if (x.size() != network.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(network.input_dim()) + " covariates, got " +
                    std::to_string(x.size()));
  }
  return forward(network, x.transpose()).logits.col(0);
}

Eigen::VectorXd weights_at(const GatingNetwork& network, const Eigen::VectorXd& x) {
  return softmax(logits(network, x));
}

Eigen::MatrixXd logits_batch(const GatingNetwork& network, const Eigen::MatrixXd& covariates) {
  return forward(network, covariates).logits.transpose();
}

WeightMatrix weight_matrix(const GatingNetwork& network, const Eigen::MatrixXd& covariates) {
  return WeightMatrix(softmax_columns(forward(network, covariates).logits).transpose());
}

double empirical_loss(const GatingNetwork& network, const Dataset& dataset, const LossSpec& loss) {
  check_compatible(network, dataset);
  const Forward f = forward(network, dataset.covariates);
  return batch_loss(softmax_columns(f.logits), dataset, loss, nullptr);
}

LossAndGradient loss_and_gradient(const GatingNetwork& network, const Dataset& dataset,
                                  const LossSpec& loss) {
  check_compatible(network, dataset);
  const Forward f = forward(network, dataset.covariates);
  const Eigen::MatrixXd weights = softmax_columns(f.logits);

  Eigen::MatrixXd delta(network.num_models(), dataset.n());
  LossAndGradient out;
  out.loss = batch_loss(weights, dataset, loss, &delta);

  // Zero gradient where the clamp is active or the last logit is pinned.
  const double bound = network.logit_clamp;
  delta = delta.cwiseProduct(
      f.raw.unaryExpr([bound](double v) { return (v > -bound && v < bound) ? 1.0 : 0.0; }));
  if (network.pin_last_logit) delta.row(delta.rows() - 1).setZero();

  const std::size_t depth = network.layers.size();
  out.gradient.layers.resize(depth);
  for (std::size_t l = depth; l-- > 0;) {
    auto& g = out.gradient.layers[l];
    g.weights = delta * f.act[l].transpose();
    g.bias = delta.rowwise().sum();
    if (l == 0) break;
    delta = (network.layers[l].weights.transpose() * delta)
                .cwiseProduct(f.pre[l - 1].unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
  }
  return out;
}

namespace {

bool same_shape(const std::vector<DenseLayer>& a, const std::vector<DenseLayer>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (a[l].weights.rows() != b[l].weights.rows() || a[l].weights.cols() != b[l].weights.cols() ||
        a[l].bias.size() != b[l].bias.size()) {
      return false;
    }
  }
  return true;
}

std::vector<DenseLayer> zeros_like(const std::vector<DenseLayer>& layers) {
  std::vector<DenseLayer> out;
  out.reserve(layers.size());
  for (const auto& layer : layers) {
    out.push_back({Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()),
                   Eigen::VectorXd::Zero(layer.bias.size())});
  }
  return out;
}

template <typename Param, typename Grad, typename Moment>
void adam_step(Param& param, const Grad& grad, Moment& m, Moment& v, const AdamState& s,
               double lr, double c1, double c2) {
  m = s.beta1 * m + (1.0 - s.beta1) * grad;
  v = s.beta2 * v + (1.0 - s.beta2) * grad.cwiseProduct(grad);
  param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + s.epsilon);
}

}  // namespace

void adam_update(GatingNetwork& network, const Gradient& gradient, AdamState& state,
                 double learning_rate) {
  if (!same_shape(network.layers, gradient.layers)) {
    throw Error(ErrorCode::ShapeMismatch, "gradient does not match network shape");
  }
  if (state.first_moment.empty() && state.second_moment.empty()) {
    state.first_moment = zeros_like(network.layers);
    state.second_moment = zeros_like(network.layers);
  }
  if (!same_shape(network.layers, state.first_moment) ||
      !same_shape(network.layers, state.second_moment)) {
    throw Error(ErrorCode::ShapeMismatch, "optimizer state does not match network shape");
  }
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t l = 0; l < network.layers.size(); ++l) {
    adam_step(network.layers[l].weights, gradient.layers[l].weights,
              state.first_moment[l].weights, state.second_moment[l].weights, state,
              learning_rate, c1, c2);
    adam_step(network.layers[l].bias, gradient.layers[l].bias, state.first_moment[l].bias,
              state.second_moment[l].bias, state, learning_rate, c1, c2);
  }
}

double squared_norm(const GatingNetwork& network) {
  double total = 0.0;
  for (const auto& layer : network.layers) {
    total += layer.weights.squaredNorm() + layer.bias.squaredNorm();
  }
  return total;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config) {
  config.validate();
  require_valid(dataset);
  std::vector<int> dims{static_cast<int>(dataset.p())};
  dims.insert(dims.end(), config.hidden_widths.begin(), config.hidden_widths.end());
  dims.push_back(static_cast<int>(dataset.M()));

  GatingNetwork net = init_network(dims, config.seed, config.logit_clamp, config.pin_last_logit);
  AdamState state;
  TrainResult result;
  result.objective_trace.reserve(static_cast<std::size_t>(config.iterations) + 1);
  result.best_objective = std::numeric_limits<double>::infinity();
  const double decay = config.weight_decay;

  auto record = [&](int it, double loss) {
    const double objective = loss + 0.5 * decay * squared_norm(net);
    result.objective_trace.push_back(objective);
    if (it == 0) result.initial_objective = objective;
    if (objective < result.best_objective) {
      result.best_objective = objective;
      result.best_loss = loss;
      result.best_iteration = it;
      result.network = net;
    }
  };

  for (int it = 0; it < config.iterations; ++it) {
    LossAndGradient lg = loss_and_gradient(net, dataset, config.loss);
    record(it, lg.loss);
    if (decay > 0.0) {
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        lg.gradient.layers[l].weights += decay * net.layers[l].weights;
        lg.gradient.layers[l].bias += decay * net.layers[l].bias;
      }
    }
    adam_update(net, lg.gradient, state, config.learning_rate);
  }
  record(config.iterations, empirical_loss(net, dataset, config.loss));
  return result;
}

}  // namespace localma
