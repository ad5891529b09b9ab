#include "localma/metrics.hpp"

#include <string>

#include "localma/errors.hpp"

namespace localma {

double mse(const Eigen::VectorXd& targets, const Eigen::VectorXd& predictions) {
  if (targets.size() != predictions.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(targets.size()) + " targets vs " +
                                               std::to_string(predictions.size()) +
                                               " predictions");
  }
  if (targets.size() == 0) throw Error(ErrorCode::LengthMismatch, "mse of empty arrays");
  return (targets - predictions).squaredNorm() / static_cast<double>(targets.size());
}

double c1_weight_distance(const WeightMatrix& estimated, const WeightMatrix& truth) {
  if (estimated.rows() != truth.rows() || estimated.cols() != truth.cols() ||
      estimated.rows() == 0) {
    throw Error(ErrorCode::ShapeMismatch, "weight matrices differ in shape");
  }
  const double total = (estimated.matrix() - truth.matrix()).cwiseAbs().sum();
  return total / static_cast<double>(estimated.rows());
}

Eigen::Index argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& row) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < row.size(); ++k) {
    if (row[k] > row[best]) best = k;
  }
  return best;
}

double accuracy(const std::vector<int>& labels, const Eigen::MatrixXd& probabilities) {
  if (static_cast<Eigen::Index>(labels.size()) != probabilities.rows() || labels.empty()) {
    throw Error(ErrorCode::LengthMismatch, "labels and probability rows differ in count");
  }
  const Eigen::Index K = probabilities.cols();
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < probabilities.rows(); ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= K) {
      throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(label) + " at row " +
                                                  std::to_string(i) + " outside [0, " +
                                                  std::to_string(K) + ")");
    }
    if (argmax_lowest(probabilities.row(i).transpose()) == label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(probabilities.rows());
}

}  // namespace localma
