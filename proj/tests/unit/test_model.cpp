#include "doctest.h"
#include "localma/errors.hpp"
#include "localma/model.hpp"
#include "localma/rng.hpp"
#include "oracles.hpp"

using namespace localma;

namespace {

Dataset tiny_regression() {
  Dataset d;
  d.task = Task::Regression;
  d.num_models = 2;
  d.covariates = Eigen::MatrixXd{{0.5}, {-1.0}};
  d.responses = Eigen::MatrixXd{{1.0}, {2.0}};
  d.predictions = Eigen::MatrixXd{{0.9, 1.2}, {2.5, 1.5}};
  return d;
}

Dataset tiny_classification() {
  Dataset d;
  d.task = Task::Classification;
  d.num_models = 1;
  d.covariates = Eigen::MatrixXd{{0.0}, {1.0}};
  d.responses = Eigen::MatrixXd{{1.0, 0.0}, {0.0, 1.0}};
  d.predictions = Eigen::MatrixXd{{0.3, 0.7}, {0.5, 0.5}};
  return d;
}

}  // namespace

TEST_CASE("validate accepts a well-formed regression dataset") {
  const auto result = validate(tiny_regression());
  CHECK(result.ok);
  CHECK_NOTHROW(require_valid(tiny_regression()));
}

TEST_CASE("validate reports the first violated invariant") {
  SUBCASE("row counts differ") {
    Dataset d = tiny_regression();
    d.covariates = Eigen::MatrixXd::Zero(3, 1);
    const auto r = validate(d);
    CHECK_FALSE(r.ok);
    CHECK(r.code == ErrorCode::DimensionMismatch);
  }
  SUBCASE("prediction columns disagree with M*K") {
    Dataset d = tiny_regression();
    d.num_models = 3;
    CHECK(validate(d).code == ErrorCode::DimensionMismatch);
  }
  SUBCASE("non-finite entry names its row") {
    Dataset d = tiny_regression();
    d.predictions(1, 0) = std::nan("");
    const auto r = validate(d);
    CHECK(r.code == ErrorCode::NonFiniteValue);
    CHECK(r.index == 1);
  }
  SUBCASE("prediction row off the simplex") {
    Dataset d = tiny_classification();
    d.predictions.row(0) << 0.7, 0.7;
    const auto r = validate(d);
    CHECK(r.code == ErrorCode::NotOnSimplex);
    CHECK(r.index == 0);
    CHECK_THROWS_AS(require_valid(d), Error);
  }
  SUBCASE("response not one-hot") {
    Dataset d = tiny_classification();
    d.responses.row(1) << 0.5, 0.5;
    const auto r = validate(d);
    CHECK(r.code == ErrorCode::NotOneHot);
    CHECK(r.index == 1);
  }
  SUBCASE("regression with K != 1") {
    Dataset d = tiny_classification();
    d.task = Task::Regression;
    CHECK(validate(d).code == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("train_test_split partitions rows deterministically") {
  CounterRng rng(11);
  const Dataset d = oracle::random_regression(rng, 10, 2, 2);

  const Split a = train_test_split(d, 0.5, 42);
  const Split b = train_test_split(d, 0.5, 42);
  CHECK(a.train.n() == 5);
  CHECK(a.test.n() == 5);
  CHECK(a.train_indices == b.train_indices);
  CHECK(a.test_indices == b.test_indices);

  std::vector<Eigen::Index> all = a.train_indices;
  all.insert(all.end(), a.test_indices.begin(), a.test_indices.end());
  std::sort(all.begin(), all.end());
  for (Eigen::Index i = 0; i < 10; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);

  const Split c = train_test_split(d, 0.5, 43);
  CHECK(c.test_indices != a.test_indices);
}

TEST_CASE("train_test_split rejects degenerate splits") {
  CounterRng rng(3);
  const Dataset one = oracle::random_regression(rng, 1, 1, 1);
  CHECK_THROWS_WITH_AS(train_test_split(one, 0.5, 1), doctest::Contains("EmptySplit"), Error);
  const Dataset ten = oracle::random_regression(rng, 10, 1, 1);
  CHECK_THROWS_AS(train_test_split(ten, 0.01, 1), Error);
  CHECK_THROWS_AS(train_test_split(ten, 1.0, 1), Error);
}

TEST_CASE("split then concatenate preserves validity and rows") {
  CounterRng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(30));
    const Dataset d = trial % 2 == 0 ? oracle::random_regression(rng, n, 3, 2)
                                     : oracle::random_classification(rng, n, 2, 3, 3);
    REQUIRE(validate(d).ok);
    const double fraction = 0.2 + 0.6 * rng.uniform();
    Split s;
    try {
      s = train_test_split(d, fraction, static_cast<std::uint64_t>(trial));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptySplit);
      continue;
    }
    const Dataset joined = concatenate(s.train, s.test);
    CHECK(validate(joined).ok);
    CHECK(joined.n() == d.n());
    std::vector<Eigen::Index> order = s.train_indices;
    order.insert(order.end(), s.test_indices.begin(), s.test_indices.end());
    CHECK(joined.covariates.isApprox(subset(d, order).covariates, 0.0));
  }
}

TEST_CASE("WeightMatrix enforces row-stochastic rows") {
  CHECK_NOTHROW(WeightMatrix(Eigen::MatrixXd{{0.25, 0.75}, {1.0, 0.0}}));
  CHECK_THROWS_AS(WeightMatrix(Eigen::MatrixXd{{0.5, 0.6}}), Error);
  CHECK_THROWS_AS(WeightMatrix(Eigen::MatrixXd{{1.5, -0.5}}), Error);
  CHECK_THROWS_AS(WeightMatrix(Eigen::MatrixXd{{std::nan(""), 1.0}}), Error);
}

TEST_CASE("TrainConfig defaults and validation") {
  TrainConfig c;
  CHECK(c.hidden_widths == std::vector<int>{16});
  CHECK(c.learning_rate == 0.01);
  CHECK(c.iterations == 800);
  CHECK(c.logit_clamp == 30.0);
  CHECK_FALSE(c.pin_last_logit);
  CHECK_NOTHROW(c.validate());
  c.hidden_widths.clear();
  CHECK_THROWS_AS(c.validate(), Error);
  c = TrainConfig{};
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TrainConfig{};
  c.iterations = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("Standardizer z-scores columns with training statistics") {
  const Eigen::MatrixXd X{{1.0, 10.0}, {3.0, 10.0}, {5.0, 10.0}};
  const Standardizer s = Standardizer::fit(X);
  CHECK(s.mean[0] == doctest::Approx(3.0));
  CHECK(s.scale[0] == doctest::Approx(2.0));
  CHECK(s.scale[1] == 1.0);  // constant column left unscaled
  const Eigen::MatrixXd Z = s.apply(X);
  CHECK(Z(0, 0) == doctest::Approx(-1.0));
  CHECK(Z(2, 0) == doctest::Approx(1.0));
  CHECK(Z(1, 1) == 0.0);
}
