#include "localma/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "localma/errors.hpp"

namespace localma {

GlobalWeights::GlobalWeights(Eigen::VectorXd w) : w_(std::move(w)) {
  if (!is_on_simplex(w_, kSimplexTolerance)) {
    throw Error(ErrorCode::NotOnSimplex, "global weights are not on the simplex");
  }
}

GlobalWeights GlobalWeights::uniform(Eigen::Index M) {
  return GlobalWeights(Eigen::VectorXd::Constant(M, 1.0 / static_cast<double>(M)));
}

namespace {

void require_rows(const Eigen::MatrixXd& preds, Eigen::Index M) {
  if (preds.rows() != M) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(M) +
                                                  " prediction rows, got " +
                                                  std::to_string(preds.rows()));
  }
}

}  // namespace

Eigen::VectorXd localma_predict(const GatingNetwork& network, const Eigen::VectorXd& x,
                                const Eigen::MatrixXd& preds) {
  require_rows(preds, network.num_models());
  return preds.transpose() * weights_at(network, x);
}

Eigen::VectorXd ewma_predict(const Eigen::MatrixXd& preds) {
  if (preds.rows() < 1) throw Error(ErrorCode::DimensionMismatch, "need at least one model");
  return preds.colwise().mean().transpose();
}

Eigen::VectorXd globalma_predict(const GlobalWeights& w, const Eigen::MatrixXd& preds) {
  require_rows(preds, w.size());
  return preds.transpose() * w.vector();
}

Eigen::MatrixXd combine(const Dataset& dataset, const Eigen::MatrixXd& weights) {
  const Eigen::Index M = dataset.M();
  const Eigen::Index K = dataset.K();
  if (weights.rows() != dataset.n() || weights.cols() != M) {
    throw Error(ErrorCode::DimensionMismatch, "weight matrix shape does not match dataset");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dataset.n(), K);
  for (Eigen::Index m = 0; m < M; ++m) {
    out.array() += dataset.predictions.middleCols(m * K, K).array().colwise() * weights.col(m).array();
  }
  return out;
}

Eigen::MatrixXd localma_predict(const GatingNetwork& network, const Dataset& dataset) {
  if (network.num_models() != dataset.M()) {
    throw Error(ErrorCode::DimensionMismatch, "network and dataset disagree on M");
  }
  return combine(dataset, weight_matrix(network, dataset.covariates).matrix());
}

Eigen::MatrixXd globalma_predict(const GlobalWeights& w, const Dataset& dataset) {
  if (w.size() != dataset.M()) {
    throw Error(ErrorCode::DimensionMismatch, "weights and dataset disagree on M");
  }
  return combine(dataset, Eigen::VectorXd::Ones(dataset.n()) * w.vector().transpose());
}

Eigen::MatrixXd ewma_predict(const Dataset& dataset) {
  return globalma_predict(GlobalWeights::uniform(dataset.M()), dataset);
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index M = v.size();
  if (M == 0) return v;
  std::vector<double> sorted(v.data(), v.data() + M);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // Largest rho with sorted[rho] - (cumsum[rho] - 1) / (rho + 1) > 0.
  double cumulative = 0.0;
  double tau = 0.0;
  for (Eigen::Index j = 0; j < M; ++j) {
    cumulative += sorted[static_cast<std::size_t>(j)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0) tau = candidate;
  }
  return (v.array() - tau).cwiseMax(0.0).matrix();
}

namespace {

// Shared pass for objective and gradient; gradient may be null.
double global_pass(const Dataset& d, const LossSpec& loss, const Eigen::VectorXd& w,
                   Eigen::VectorXd* gradient) {
  const Eigen::Index M = d.M();
  const Eigen::Index K = d.K();
  if (w.size() != M) throw Error(ErrorCode::DimensionMismatch, "weight length differs from M");
  const auto Ks = static_cast<std::size_t>(K);
  const Eigen::MatrixXd combined = combine(d, Eigen::VectorXd::Ones(d.n()) * w.transpose());
  Eigen::VectorXd y(K), yhat(K), deriv(K);
  if (gradient != nullptr) gradient->setZero(M);
  double total = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    y = d.responses.row(i).transpose();
    yhat = combined.row(i).transpose();
    total += detail::loss_kernel(loss, {y.data(), Ks}, {yhat.data(), Ks}, {deriv.data(), Ks});
    if (gradient == nullptr) continue;
    for (Eigen::Index m = 0; m < M; ++m) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < K; ++k) acc += deriv[k] * d.predictions(i, m * K + k);
      (*gradient)[m] += acc;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(d.n());
  if (gradient != nullptr) *gradient *= inv_n;
  const double value = total * inv_n;
  if (!std::isfinite(value)) throw Error(ErrorCode::NonFiniteLoss, "global objective overflowed");
  return value;
}

}  // namespace

double global_objective(const Dataset& dataset, const LossSpec& loss, const Eigen::VectorXd& w) {
  return global_pass(dataset, loss, w, nullptr);
}

Eigen::VectorXd global_objective_gradient(const Dataset& dataset, const LossSpec& loss,
                                          const Eigen::VectorXd& w) {
  Eigen::VectorXd g;
  global_pass(dataset, loss, w, &g);
  return g;
}

GlobalFit fit_global_weights(const Dataset& dataset, const LossSpec& loss, int max_iters,
                             double tol) {
  if (max_iters < 1) throw Error(ErrorCode::InvalidConfig, "max_iters must be >= 1");
  require_valid(dataset);
  constexpr double kArmijo = 1e-4;
  constexpr double kMinStep = 1e-30;

  const Eigen::Index M = dataset.M();
  Eigen::VectorXd w = Eigen::VectorXd::Constant(M, 1.0 / static_cast<double>(M));
  GlobalFit fit;
  double f = global_objective(dataset, loss, w);
  fit.start_objective = f;
  if (M == 1) {
    fit.weights = GlobalWeights(w);
    fit.objective = f;
    fit.converged = true;
    return fit;
  }

  Eigen::VectorXd g(M);
  for (fit.iterations = 0; fit.iterations < max_iters;) {
    f = global_pass(dataset, loss, w, &g);
    ++fit.iterations;
    double step = 1.0;
    Eigen::VectorXd candidate = w;
    double f_candidate = f;
    bool accepted = false;
    while (step >= kMinStep) {
      candidate = project_to_simplex(w - step * g);
      f_candidate = global_objective(dataset, loss, candidate);
      if (f_candidate <= f + kArmijo * g.dot(candidate - w)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      fit.converged = true;
      break;
    }
    const double move = (candidate - w).cwiseAbs().maxCoeff();
    w = candidate;
    f = f_candidate;
    if (move < tol) {
      fit.converged = true;
      break;
    }
  }
  // Exact renormalisation; projection output is on the simplex up to rounding.
  w = w.cwiseMax(0.0);
  w /= w.sum();
  fit.objective = global_objective(dataset, loss, w);
  if (fit.objective > fit.start_objective) {
    w.setConstant(1.0 / static_cast<double>(M));
    fit.objective = fit.start_objective;
  }
  fit.weights = GlobalWeights(w);
  return fit;
}

}  // namespace localma
