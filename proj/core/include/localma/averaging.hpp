#pragma once

#include <Eigen/Core>

#include "localma/gating_network.hpp"
#include "localma/losses.hpp"
#include "localma/model.hpp"

namespace localma {

// Constant weight vector on the M-simplex.
class GlobalWeights {
 public:
  GlobalWeights() = default;
  /// Throws NotOnSimplex unless w is a probability vector.
  explicit GlobalWeights(Eigen::VectorXd w);
  static GlobalWeights uniform(Eigen::Index M);

  const Eigen::VectorXd& vector() const { return w_; }
  Eigen::Index size() const { return w_.size(); }
  double operator[](Eigen::Index m) const { return w_[m]; }

 private:
  Eigen::VectorXd w_;
};

/// Locally weighted prediction at x. preds is M x K (one row per model).
Eigen::VectorXd localma_predict(const GatingNetwork& network, const Eigen::VectorXd& x,
                                const Eigen::MatrixXd& preds);
/// Unweighted mean of the rows of preds.
Eigen::VectorXd ewma_predict(const Eigen::MatrixXd& preds);
/// sum_m w_m preds.row(m).
Eigen::VectorXd globalma_predict(const GlobalWeights& w, const Eigen::MatrixXd& preds);

/// Combined predictions (n x K) for every observation under per-row weights.
Eigen::MatrixXd combine(const Dataset& dataset, const Eigen::MatrixXd& weights);
Eigen::MatrixXd localma_predict(const GatingNetwork& network, const Dataset& dataset);
Eigen::MatrixXd globalma_predict(const GlobalWeights& w, const Dataset& dataset);
Eigen::MatrixXd ewma_predict(const Dataset& dataset);

/// Euclidean projection onto {u : u >= 0, sum u = 1} by sort-and-threshold.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

/// Mean loss of the constant-weight combination.
double global_objective(const Dataset& dataset, const LossSpec& loss, const Eigen::VectorXd& w);
/// Gradient of global_objective with respect to w.
Eigen::VectorXd global_objective_gradient(const Dataset& dataset, const LossSpec& loss,
                                          const Eigen::VectorXd& w);

struct GlobalFit {
  GlobalWeights weights;
  double objective = 0.0;
  double start_objective = 0.0;  // at the uniform vector
  int iterations = 0;
  bool converged = false;
};

/// Minimises global_objective over the simplex by projected gradient descent
/// from the uniform vector. Each iteration backtracks (halving from step 1.0)
/// until the Armijo condition with constant 1e-4 holds; stops once an iteration
/// moves w by less than tol in the max-norm, or after max_iters iterations.
GlobalFit fit_global_weights(const Dataset& dataset, const LossSpec& loss, int max_iters = 10000,
                             double tol = 1e-10);

}  // namespace localma
