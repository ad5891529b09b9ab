#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "localma/errors.hpp"
#include "localma/losses.hpp"

namespace localma {

/// Tolerance used for every "row lies on the simplex" check.
inline constexpr double kSimplexTolerance = 1e-9;

enum class Task { Regression, Classification };

std::string_view to_string(Task task) noexcept;
Task parse_task(std::string_view name);

bool is_on_simplex(const Eigen::Ref<const Eigen::VectorXd>& v, double tol);
bool is_one_hot(const Eigen::Ref<const Eigen::VectorXd>& v);

// Observations plus the outputs of M fixed predictors at every observation.
//
// Predictions are stored flat as an n x (M*K) matrix: column m*K + k holds
// predictor m's output for response component k. K is 1 for regression and
// the number of classes for classification (responses then hold one-hot rows).
struct Dataset {
  Task task = Task::Regression;
  Eigen::MatrixXd covariates;   // n x p
  Eigen::MatrixXd responses;    // n x K
  Eigen::MatrixXd predictions;  // n x (M*K)
  Eigen::Index num_models = 0;

  Eigen::Index n() const { return covariates.rows(); }
  Eigen::Index p() const { return covariates.cols(); }
  Eigen::Index M() const { return num_models; }
  Eigen::Index K() const { return responses.cols(); }

  double prediction(Eigen::Index i, Eigen::Index m, Eigen::Index k) const {
    return predictions(i, m * K() + k);
  }
  /// Predictor outputs at observation i as an M x K matrix.
  Eigen::MatrixXd model_outputs(Eigen::Index i) const;
};

struct ValidationResult {
  bool ok = true;
  ErrorCode code = ErrorCode::DimensionMismatch;
  std::string message;
  Eigen::Index index = -1;  // offending row, -1 when not row-specific

  explicit operator bool() const { return ok; }
};

/// Checks shapes, finiteness, and (for classification) simplex predictions and
/// one-hot responses. Reports the first violation found.
ValidationResult validate(const Dataset& dataset);
/// Throws Error carrying the first violation reported by validate().
void require_valid(const Dataset& dataset);

/// Rows `indices` of the dataset, in the given order.
Dataset subset(const Dataset& dataset, const std::vector<Eigen::Index>& indices);
/// Stacks b below a. Throws DimensionMismatch when p, M, K or task differ.
Dataset concatenate(const Dataset& a, const Dataset& b);

struct Split {
  Dataset train;
  Dataset test;
  std::vector<Eigen::Index> train_indices;
  std::vector<Eigen::Index> test_indices;
};

/// Random partition with round(test_fraction * n) rows on the test side. Each
/// side keeps the original row order. Throws EmptySplit if a side is empty.
Split train_test_split(const Dataset& dataset, double test_fraction, std::uint64_t seed);

// n x M row-stochastic matrix of per-input model weights.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  /// Throws NonFiniteValue / NotOnSimplex if any row is not a probability vector.
  explicit WeightMatrix(Eigen::MatrixXd weights);

  Eigen::Index rows() const { return weights_.rows(); }
  Eigen::Index cols() const { return weights_.cols(); }
  const Eigen::MatrixXd& matrix() const { return weights_; }
  double operator()(Eigen::Index i, Eigen::Index m) const { return weights_(i, m); }

 private:
  Eigen::MatrixXd weights_;
};

struct TrainConfig {
  std::vector<int> hidden_widths{16};
  double learning_rate = 0.01;
  int iterations = 800;
  /// Coefficient of the (weight_decay / 2) * ||theta||^2 penalty added to the
  /// empirical loss during training (all weights and biases).
  double weight_decay = 0.05;
  std::uint64_t seed = 0;
  double logit_clamp = 30.0;
  bool pin_last_logit = false;
  LossSpec loss{};

  void validate() const;
};

// Column-wise z-scoring fitted on training covariates.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& covariates);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& covariates) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  bool empty() const { return mean.size() == 0; }
};

}  // namespace localma
