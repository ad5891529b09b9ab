#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "localma/model.hpp"

namespace localma {

enum class Scenario { Motivating, S1, S2, S3, Scenario2 };

std::string_view to_string(Scenario scenario) noexcept;
Scenario parse_scenario(std::string_view name);
bool has_truth_weights(Scenario scenario) noexcept;

struct ScenarioSpec {
  Scenario scenario = Scenario::S1;
  int n_train = 100;
  int n_test = 5000;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;

  /// Spec with the scenario's default noise level (0.5 for the cubic example, 1 otherwise).
  static ScenarioSpec make(Scenario scenario, int n_train, std::uint64_t seed);

  int p() const noexcept { return scenario == Scenario::Motivating ? 1 : 5; }
  int M() const noexcept { return scenario == Scenario::Motivating ? 2 : 3; }
  void validate() const;
};

/// The three fixed predictors evaluated at a 5-dimensional x.
Eigen::Vector3d ptm_bank(const Eigen::VectorXd& x);

/// Coefficient vectors theta_1, theta_2 (rows) of the logistic S1 weight law.
Eigen::Matrix<double, 2, 5> s1_theta();

/// True weights at x for settings S1-S3. Throws InvalidConfig for other scenarios.
Eigen::Vector3d true_weights(Scenario setting, const Eigen::VectorXd& x);

/// Regression function of the misspecified scenario (not a mixture of the bank).
double scenario2_truth(const Eigen::VectorXd& x);

// One simulated world. The test set carries noiseless regression-function
// values as responses.
struct SimWorld {
  Dataset train;
  Dataset test;
  std::optional<WeightMatrix> test_truth_weights;
};

/// Weighted-bank worlds (S1, S2, S3): Y = sum_m w0_m(X) f_m(X) + noise, X ~ N(0, I_5).
SimWorld gen_scenario1(const ScenarioSpec& spec);
/// Misspecified world: Y = scenario2_truth(X) + noise.
SimWorld gen_scenario2(const ScenarioSpec& spec);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double operator()(double x) const { return intercept + slope * x; }
};

/// Closed-form simple least squares.
LinearFit fit_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct MotivatingWorld {
  Dataset train;
  Dataset test;
  LinearFit company1;  // fitted on x in [-2, -0.5]
  LinearFit company2;  // fitted on x in [0.5, 2]
};

inline constexpr int kCompanySampleSize = 1000;

/// Cubic example: f0(x) = x^3 on [-2, 2], two linear predictors each fitted on
/// 1000 observations from one end of the interval (uniform on that end).
MotivatingWorld gen_motivating(const ScenarioSpec& spec);
MotivatingWorld gen_motivating(std::uint64_t seed);

/// Dispatches to the generator for spec.scenario.
SimWorld generate(const ScenarioSpec& spec);

/// points x p covariate grid sweeping column `covariate` over [lo, hi] with all
/// other covariates held at 0.
Eigen::MatrixXd sweep_grid(Eigen::Index p, Eigen::Index covariate, double lo, double hi,
                           int points);

}  // namespace localma
