#include "localma/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "localma/errors.hpp"
#include "localma/rng.hpp"

namespace localma {

std::string_view to_string(Scenario scenario) noexcept {
  switch (scenario) {
    case Scenario::Motivating: return "motivating";
    case Scenario::S1: return "s1";
    case Scenario::S2: return "s2";
    case Scenario::S3: return "s3";
    case Scenario::Scenario2: return "scenario2";
  }
  return "unknown";
}

Scenario parse_scenario(std::string_view name) {
  if (name == "motivating") return Scenario::Motivating;
  if (name == "s1") return Scenario::S1;
  if (name == "s2") return Scenario::S2;
  if (name == "s3") return Scenario::S3;
  if (name == "scenario2") return Scenario::Scenario2;
  throw Error(ErrorCode::InvalidConfig, "unknown scenario '" + std::string(name) + "'");
}

bool has_truth_weights(Scenario scenario) noexcept {
  return scenario == Scenario::S1 || scenario == Scenario::S2 || scenario == Scenario::S3;
}

ScenarioSpec ScenarioSpec::make(Scenario scenario, int n_train, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.scenario = scenario;
  spec.n_train = n_train;
  spec.seed = seed;
  spec.noise_sd = scenario == Scenario::Motivating ? 0.5 : 1.0;
  return spec;
}

void ScenarioSpec::validate() const {
  if (n_train < 1) throw Error(ErrorCode::InvalidConfig, "n_train must be positive");
  if (n_test < 1) throw Error(ErrorCode::InvalidConfig, "n_test must be positive");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw Error(ErrorCode::InvalidConfig, "noise_sd must be finite and nonnegative");
  }
}

namespace {

void require_length(const Eigen::VectorXd& x, Eigen::Index p) {
  if (x.size() != p) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(p) + " covariates, got " + std::to_string(x.size()));
  }
}

// Stream ids within one world.
constexpr std::uint64_t kTrainCovariates = 1;
constexpr std::uint64_t kTrainNoise = 2;
constexpr std::uint64_t kTestCovariates = 3;
constexpr std::uint64_t kCompany1 = 4;
constexpr std::uint64_t kCompany2 = 5;

Eigen::MatrixXd normal_matrix(CounterRng rng, Eigen::Index rows, Eigen::Index cols) {
  NormalSampler normal;
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  }
  return out;
}

Eigen::VectorXd noise_vector(CounterRng rng, Eigen::Index n, double sd) {
  NormalSampler normal;
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = sd * normal(rng);
  return out;
}

Dataset bank_dataset(const Eigen::MatrixXd& X, const Eigen::VectorXd& responses) {
  Dataset d;
  d.task = Task::Regression;
  d.num_models = 3;
  d.covariates = X;
  d.responses = responses;
  d.predictions.resize(X.rows(), 3);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    d.predictions.row(i) = ptm_bank(X.row(i).transpose()).transpose();
  }
  return d;
}

double cubic(double x) { return x * x * x; }

}  // namespace

Eigen::Vector3d ptm_bank(const Eigen::VectorXd& x) {
  require_length(x, 5);
  const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3], x5 = x[4];
  return {3.0 * x1 * x1 + 2.0 * std::sin(x2) + 2.0 * x3 - x4 + 0.5 * x5,
          -2.0 * x1 + x2 - 1.5 * x3 + std::cos(x4) + 2.0 * x5 * x5,
          3.0 * x1 * x1 + 2.0 * std::sin(x2) - 2.0 * x3 + x4 * x5};
}

Eigen::Matrix<double, 2, 5> s1_theta() {
  Eigen::Matrix<double, 2, 5> theta;
  for (int m = 1; m <= 2; ++m) {
    for (int j = 1; j <= 5; ++j) {
      const double sign = ((m + j) % 2 == 0) ? 1.0 : -1.0;
      theta(m - 1, j - 1) = sign * std::sqrt(2.0 * m) / (static_cast<double>(j) * j);
    }
  }
  return theta;
}

Eigen::Vector3d true_weights(Scenario setting, const Eigen::VectorXd& x) {
  require_length(x, 5);
  switch (setting) {
    case Scenario::S1: {
      const Eigen::Vector2d scores = s1_theta() * x;
      // exp(theta_m' x) / (1 + sum_j exp(theta_j' x)), evaluated against the
      // largest exponent (including the implicit 0 for model 3).
      const double top = std::max({scores[0], scores[1], 0.0});
      const Eigen::Vector3d e{std::exp(scores[0] - top), std::exp(scores[1] - top),
                              std::exp(-top)};
      return e / e.sum();
    }
    case Scenario::S2:
      return Eigen::Vector3d::Constant(1.0 / 3.0);
    case Scenario::S3: {
      const Eigen::Vector3d e{std::exp(-1.0), std::exp(-2.0), std::exp(-3.0)};
      return e / e.sum();
    }
    default:
      throw Error(ErrorCode::InvalidConfig,
                  "scenario " + std::string(to_string(setting)) + " has no true weights");
  }
}

double scenario2_truth(const Eigen::VectorXd& x) {
  require_length(x, 5);
  return 3.0 * x[0] * x[0] + 2.0 * std::sin(x[1]) - 2.0 * x[2] + std::cos(x[3]) +
         2.0 * x[4] * x[4];
}

SimWorld gen_scenario1(const ScenarioSpec& spec) {
  spec.validate();
  if (!has_truth_weights(spec.scenario)) {
    throw Error(ErrorCode::InvalidConfig, "gen_scenario1 needs setting s1, s2 or s3");
  }
  const CounterRng root(spec.seed);
  auto mixture = [&](const Eigen::MatrixXd& X, Eigen::MatrixXd& weights) {
    Eigen::VectorXd f0(X.rows());
    weights.resize(X.rows(), 3);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const Eigen::VectorXd x = X.row(i).transpose();
      const Eigen::Vector3d w = true_weights(spec.scenario, x);
      weights.row(i) = w.transpose();
      f0[i] = w.dot(ptm_bank(x));
    }
    return f0;
  };

  const Eigen::MatrixXd X_train = normal_matrix(root.split(kTrainCovariates), spec.n_train, 5);
  const Eigen::MatrixXd X_test = normal_matrix(root.split(kTestCovariates), spec.n_test, 5);
  Eigen::MatrixXd train_weights, test_weights;
  const Eigen::VectorXd y_train =
      mixture(X_train, train_weights) + noise_vector(root.split(kTrainNoise), spec.n_train, spec.noise_sd);
  const Eigen::VectorXd f0_test = mixture(X_test, test_weights);

  SimWorld world;
  world.train = bank_dataset(X_train, y_train);
  world.test = bank_dataset(X_test, f0_test);
  world.test_truth_weights = WeightMatrix(std::move(test_weights));
  return world;
}

SimWorld gen_scenario2(const ScenarioSpec& spec) {
  spec.validate();
  if (spec.scenario != Scenario::Scenario2) {
    throw Error(ErrorCode::InvalidConfig, "gen_scenario2 needs scenario2");
  }
  const CounterRng root(spec.seed);
  auto truth = [](const Eigen::MatrixXd& X) {
    Eigen::VectorXd f0(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) f0[i] = scenario2_truth(X.row(i).transpose());
    return f0;
  };
  const Eigen::MatrixXd X_train = normal_matrix(root.split(kTrainCovariates), spec.n_train, 5);
  const Eigen::MatrixXd X_test = normal_matrix(root.split(kTestCovariates), spec.n_test, 5);
  SimWorld world;
  world.train = bank_dataset(
      X_train, truth(X_train) + noise_vector(root.split(kTrainNoise), spec.n_train, spec.noise_sd));
  world.test = bank_dataset(X_test, truth(X_test));
  return world;
}

LinearFit fit_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::LengthMismatch, "line fit needs two or more paired values");
  }
  const double mx = x.mean();
  const double my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  if (!(sxx > 0.0)) throw Error(ErrorCode::InvalidConfig, "line fit needs spread in x");
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

MotivatingWorld gen_motivating(const ScenarioSpec& spec) {
  spec.validate();
  if (spec.scenario != Scenario::Motivating) {
    throw Error(ErrorCode::InvalidConfig, "gen_motivating needs the motivating scenario");
  }
  const CounterRng root(spec.seed);
  auto company = [&](std::uint64_t stream, double lo, double hi) {
    CounterRng rng = root.split(stream);
    NormalSampler normal;
    Eigen::VectorXd x(kCompanySampleSize), y(kCompanySampleSize);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x[i] = rng.uniform(lo, hi);
      y[i] = cubic(x[i]) + spec.noise_sd * normal(rng);
    }
    return fit_line(x, y);
  };
  auto uniform_inputs = [&](std::uint64_t stream, Eigen::Index n) {
    CounterRng rng = root.split(stream);
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.uniform(-2.0, 2.0);
    return x;
  };

  MotivatingWorld world;
  world.company1 = company(kCompany1, -2.0, -0.5);
  world.company2 = company(kCompany2, 0.5, 2.0);
  auto make = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    Dataset d;
    d.task = Task::Regression;
    d.num_models = 2;
    d.covariates = x;
    d.responses = y;
    d.predictions.resize(x.size(), 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      d.predictions(i, 0) = world.company1(x[i]);
      d.predictions(i, 1) = world.company2(x[i]);
    }
    return d;
  };
  const Eigen::VectorXd x_train = uniform_inputs(kTrainCovariates, spec.n_train);
  const Eigen::VectorXd x_test = uniform_inputs(kTestCovariates, spec.n_test);
  const Eigen::VectorXd y_train =
      x_train.unaryExpr(&cubic) + noise_vector(root.split(kTrainNoise), spec.n_train, spec.noise_sd);
  world.train = make(x_train, y_train);
  world.test = make(x_test, x_test.unaryExpr(&cubic));
  return world;
}

MotivatingWorld gen_motivating(std::uint64_t seed) {
  return gen_motivating(ScenarioSpec::make(Scenario::Motivating, 200, seed));
}

SimWorld generate(const ScenarioSpec& spec) {
  switch (spec.scenario) {
    case Scenario::Motivating: {
      MotivatingWorld m = gen_motivating(spec);
      return SimWorld{std::move(m.train), std::move(m.test), std::nullopt};
    }
    case Scenario::Scenario2:
      return gen_scenario2(spec);
    default:
      return gen_scenario1(spec);
  }
}

Eigen::MatrixXd sweep_grid(Eigen::Index p, Eigen::Index covariate, double lo, double hi,
                           int points) {
  if (covariate < 0 || covariate >= p) {
    throw Error(ErrorCode::DimensionMismatch, "covariate index outside [0, p)");
  }
  if (points < 2 || !(hi > lo)) {
    throw Error(ErrorCode::InvalidConfig, "grid needs >= 2 points and hi > lo");
  }
  Eigen::MatrixXd grid = Eigen::MatrixXd::Zero(points, p);
  for (int i = 0; i < points; ++i) {
    grid(i, covariate) = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

}  // namespace localma
