#include "localma/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "localma/rng.hpp"

namespace localma {

std::string_view to_string(Task task) noexcept {
  return task == Task::Regression ? "regression" : "classification";
}

Task parse_task(std::string_view name) {
  if (name == "regression") return Task::Regression;
  if (name == "classification") return Task::Classification;
  throw Error(ErrorCode::InvalidConfig, "unknown task '" + std::string(name) + "'");
}

bool is_on_simplex(const Eigen::Ref<const Eigen::VectorXd>& v, double tol) {
  if (v.size() == 0) return false;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] < -tol) return false;
  }
  return std::abs(v.sum() - 1.0) <= tol;
}

bool is_one_hot(const Eigen::Ref<const Eigen::VectorXd>& v) {
  int ones = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] == 1.0) {
      ++ones;
    } else if (v[i] != 0.0) {
      return false;
    }
  }
  return ones == 1;
}

Eigen::MatrixXd Dataset::model_outputs(Eigen::Index i) const {
  Eigen::MatrixXd out(M(), K());
  for (Eigen::Index m = 0; m < M(); ++m) {
    for (Eigen::Index k = 0; k < K(); ++k) out(m, k) = prediction(i, m, k);
  }
  return out;
}

namespace {

ValidationResult failure(ErrorCode code, std::string message, Eigen::Index index = -1) {
  return ValidationResult{false, code, std::move(message), index};
}

// First row of `mat` holding a NaN/Inf, or -1.
Eigen::Index first_non_finite_row(const Eigen::MatrixXd& mat) {
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    if (!mat.row(i).allFinite()) return i;
  }
  return -1;
}

}  // namespace

ValidationResult validate(const Dataset& d) {
  const Eigen::Index n = d.covariates.rows();
  if (d.responses.rows() != n || d.predictions.rows() != n) {
    return failure(ErrorCode::DimensionMismatch,
                   "row counts differ: covariates " + std::to_string(n) + ", responses " +
                       std::to_string(d.responses.rows()) + ", predictions " +
                       std::to_string(d.predictions.rows()));
  }
  if (d.num_models < 1) return failure(ErrorCode::DimensionMismatch, "need at least one model");
  if (d.responses.cols() < 1) {
    return failure(ErrorCode::DimensionMismatch, "responses need at least one column");
  }
  if (d.task == Task::Regression && d.responses.cols() != 1) {
    return failure(ErrorCode::DimensionMismatch, "regression responses must have K = 1");
  }
  if (d.task == Task::Classification && d.responses.cols() < 2) {
    return failure(ErrorCode::DimensionMismatch, "classification needs K >= 2");
  }
  if (d.predictions.cols() != d.num_models * d.responses.cols()) {
    return failure(ErrorCode::DimensionMismatch,
                   "predictions have " + std::to_string(d.predictions.cols()) +
                       " columns, expected M*K = " +
                       std::to_string(d.num_models * d.responses.cols()));
  }
  if (auto i = first_non_finite_row(d.covariates); i >= 0) {
    return failure(ErrorCode::NonFiniteValue, "non-finite covariate", i);
  }
  if (auto i = first_non_finite_row(d.responses); i >= 0) {
    return failure(ErrorCode::NonFiniteValue, "non-finite response", i);
  }
  if (auto i = first_non_finite_row(d.predictions); i >= 0) {
    return failure(ErrorCode::NonFiniteValue, "non-finite prediction", i);
  }
  if (d.task == Task::Classification) {
    const Eigen::Index K = d.K();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index m = 0; m < d.M(); ++m) {
        if (!is_on_simplex(d.predictions.row(i).segment(m * K, K).transpose(),
                           kSimplexTolerance)) {
          return failure(ErrorCode::NotOnSimplex,
                         "prediction of model " + std::to_string(m) + " is not on the simplex",
                         i);
        }
      }
      if (!is_one_hot(d.responses.row(i).transpose())) {
        return failure(ErrorCode::NotOneHot, "response is not one-hot", i);
      }
    }
  }
  return {};
}

void require_valid(const Dataset& dataset) {
  const ValidationResult result = validate(dataset);
  if (!result.ok) {
    std::string message = result.message;
    if (result.index >= 0) message += " at row " + std::to_string(result.index);
    throw Error(result.code, message);
  }
}

Dataset subset(const Dataset& d, const std::vector<Eigen::Index>& indices) {
  Dataset out;
  out.task = d.task;
  out.num_models = d.num_models;
  const auto rows = static_cast<Eigen::Index>(indices.size());
  out.covariates.resize(rows, d.covariates.cols());
  out.responses.resize(rows, d.responses.cols());
  out.predictions.resize(rows, d.predictions.cols());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index i = indices[static_cast<std::size_t>(r)];
    if (i < 0 || i >= d.n()) throw Error(ErrorCode::DimensionMismatch, "row index out of range");
    out.covariates.row(r) = d.covariates.row(i);
    out.responses.row(r) = d.responses.row(i);
    out.predictions.row(r) = d.predictions.row(i);
  }
  return out;
}

Dataset concatenate(const Dataset& a, const Dataset& b) {
  if (a.task != b.task || a.p() != b.p() || a.M() != b.M() || a.K() != b.K()) {
    throw Error(ErrorCode::DimensionMismatch, "cannot concatenate datasets of different shape");
  }
  Dataset out;
  out.task = a.task;
  out.num_models = a.num_models;
  out.covariates.resize(a.n() + b.n(), a.p());
  out.covariates << a.covariates, b.covariates;
  out.responses.resize(a.n() + b.n(), a.K());
  out.responses << a.responses, b.responses;
  out.predictions.resize(a.n() + b.n(), a.predictions.cols());
  out.predictions << a.predictions, b.predictions;
  return out;
}

Split train_test_split(const Dataset& dataset, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "test_fraction must lie in (0, 1)");
  }
  const Eigen::Index n = dataset.n();
  const auto n_test = static_cast<Eigen::Index>(std::llround(test_fraction * static_cast<double>(n)));
  if (n < 2 || n_test < 1 || n_test >= n) {
    throw Error(ErrorCode::EmptySplit, "split of " + std::to_string(n) + " rows at fraction " +
                                           std::to_string(test_fraction) + " leaves a side empty");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  CounterRng rng(seed, 0x5711);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  Split split;
  split.test_indices.assign(order.begin(), order.begin() + n_test);
  split.train_indices.assign(order.begin() + n_test, order.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());
  std::sort(split.train_indices.begin(), split.train_indices.end());
  split.train = subset(dataset, split.train_indices);
  split.test = subset(dataset, split.test_indices);
  return split;
}

WeightMatrix::WeightMatrix(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
  for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
    if (!weights_.row(i).allFinite()) {
      throw Error(ErrorCode::NonFiniteValue, "weight row " + std::to_string(i) + " is not finite");
    }
    if (!is_on_simplex(weights_.row(i).transpose(), kSimplexTolerance)) {
      throw Error(ErrorCode::NotOnSimplex,
                  "weight row " + std::to_string(i) + " is not on the simplex");
    }
  }
}

void TrainConfig::validate() const {
  if (hidden_widths.empty()) throw Error(ErrorCode::InvalidConfig, "hidden_widths is empty");
  for (int w : hidden_widths) {
    if (w < 1) throw Error(ErrorCode::InvalidConfig, "hidden widths must be positive");
  }
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning_rate must be > 0");
  if (iterations < 1) throw Error(ErrorCode::InvalidConfig, "iterations must be >= 1");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw Error(ErrorCode::InvalidConfig, "weight_decay must be finite and >= 0");
  }
  if (!(logit_clamp > 0.0)) throw Error(ErrorCode::InvalidConfig, "logit_clamp must be > 0");
  loss.validate();
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& covariates) {
  Standardizer s;
  const auto n = static_cast<double>(covariates.rows());
  s.mean = covariates.colwise().mean().transpose();
  s.scale.resize(covariates.cols());
  for (Eigen::Index j = 0; j < covariates.cols(); ++j) {
    const double var = (covariates.col(j).array() - s.mean[j]).square().sum() / std::max(n - 1.0, 1.0);
    s.scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& covariates) const {
  if (empty()) return covariates;
  if (covariates.cols() != mean.size()) {
    throw Error(ErrorCode::DimensionMismatch, "standardizer fitted on a different p");
  }
  return (covariates.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& x) const {
  if (empty()) return x;
  if (x.size() != mean.size()) {
    throw Error(ErrorCode::DimensionMismatch, "standardizer fitted on a different p");
  }
  return ((x - mean).array() / scale.array()).matrix();
}

}  // namespace localma
