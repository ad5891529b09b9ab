#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "localma/model.hpp"

namespace localma {

struct MetricReport {
  std::string name;
  double value = 0.0;
  std::optional<double> std_error;
  Eigen::Index n_eval = 0;
};

/// Mean squared difference. Throws LengthMismatch on unequal lengths.
double mse(const Eigen::VectorXd& targets, const Eigen::VectorXd& predictions);

/// Mean over rows of the L1 distance between weight rows; lies in [0, 2].
double c1_weight_distance(const WeightMatrix& estimated, const WeightMatrix& truth);

/// Fraction of rows whose argmax (lowest index on ties) equals the label.
double accuracy(const std::vector<int>& labels, const Eigen::MatrixXd& probabilities);

/// Index of the largest entry, lowest index on ties.
Eigen::Index argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& row);

}  // namespace localma
