#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace localma {

enum class LossKind { Squared, CrossEntropy };

std::string_view to_string(LossKind kind) noexcept;
/// Parses "squared" or "cross_entropy"; throws InvalidConfig otherwise.
LossKind parse_loss_kind(std::string_view name);

struct LossSpec {
  LossKind kind = LossKind::Squared;
  /// Lower bound applied to probabilities inside the logarithm (cross-entropy only).
  double probability_floor = 1e-12;

  /// Throws InvalidConfig unless probability_floor lies in (0, 1e-3].
  void validate() const;
};

struct LossValue {
  double value = 0.0;
  Eigen::VectorXd derivative;  // d value / d prediction
};

/// (y - yhat)^2 and its derivative 2 (yhat - y). Both vectors must have length 1.
LossValue squared(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

/// -sum_k y_k log(max(p_k, floor)); derivative -y_k / max(p_k, floor), zero where
/// the floor binds. Checks that y is one-hot and p lies on the simplex.
LossValue cross_entropy(const Eigen::VectorXd& y, const Eigen::VectorXd& p, double floor);

/// Dispatches on spec.kind with the same contracts as squared() / cross_entropy().
LossValue evaluate(const LossSpec& spec, const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

namespace detail {

// Unchecked kernel used inside the training loop, where inputs were validated
// up front. Writes d value / d yhat into `derivative` and returns the value.
inline double loss_kernel(const LossSpec& spec, std::span<const double> y,
                          std::span<const double> yhat, std::span<double> derivative) {
  double value = 0.0;
  if (spec.kind == LossKind::Squared) {
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double r = yhat[k] - y[k];
      value += r * r;
      derivative[k] = 2.0 * r;
    }
    return value;
  }
  for (std::size_t k = 0; k < y.size(); ++k) {
    derivative[k] = 0.0;
    if (y[k] == 0.0) continue;
    if (yhat[k] > spec.probability_floor) {
      value -= y[k] * std::log(yhat[k]);
      derivative[k] = -y[k] / yhat[k];
    } else {
      value -= y[k] * std::log(spec.probability_floor);
    }
  }
  return value;
}

}  // namespace detail

}  // namespace localma
