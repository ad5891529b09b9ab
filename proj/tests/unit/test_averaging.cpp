#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "localma/averaging.hpp"
#include "localma/errors.hpp"
#include "localma/rng.hpp"
#include "oracles.hpp"

using namespace localma;

namespace {

GatingNetwork zero_network(const std::vector<int>& dims) {
  GatingNetwork net = init_network(dims, 0);
  for (auto& layer : net.layers) {
    layer.weights.setZero();
    layer.bias.setZero();
  }
  return net;
}

double dist2(const Eigen::VectorXd& a, const std::vector<double>& b) {
  double s = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += (a[i] - b[static_cast<std::size_t>(i)]) * (a[i] - b[static_cast<std::size_t>(i)]);
  return s;
}

}  // namespace

TEST_CASE("localma_predict examples") {
  const Eigen::MatrixXd preds = Eigen::Vector3d(1, 2, 3);
  CHECK(localma_predict(zero_network({1, 2, 3}), Eigen::VectorXd::Zero(1), preds)[0] ==
        doctest::Approx(2.0));

  GatingNetwork pinned = zero_network({1, 2, 2});
  pinned.pin_last_logit = true;
  pinned.layers[1].bias[0] = 30.0;  // weight on model 1 is 1 - e^-30
  CHECK(localma_predict(pinned, Eigen::VectorXd::Zero(1), Eigen::Vector2d(5, -7))[0] ==
        doctest::Approx(5.0).epsilon(1e-10));

  GatingNetwork quarter = zero_network({1, 2, 2});
  quarter.pin_last_logit = true;
  quarter.layers[1].bias[0] = std::log(3.0);
  CHECK(localma_predict(quarter, Eigen::VectorXd::Zero(1), Eigen::Vector2d(4, 0))[0] ==
        doctest::Approx(3.0));
}

TEST_CASE("ewma_predict examples") {
  CHECK(ewma_predict(Eigen::MatrixXd(Eigen::Vector3d(1, 2, 3)))[0] == doctest::Approx(2.0));
  const Eigen::MatrixXd same{{0.2, 0.8}, {0.2, 0.8}};
  CHECK(ewma_predict(same).isApprox(Eigen::Vector2d(0.2, 0.8)));
  const Eigen::VectorXd mixed = ewma_predict(Eigen::MatrixXd{{1, 0}, {0, 1}});
  CHECK(mixed.isApprox(Eigen::Vector2d(0.5, 0.5)));
  CHECK(is_on_simplex(mixed, kSimplexTolerance));
}

TEST_CASE("globalma_predict examples") {
  const Eigen::MatrixXd preds = Eigen::Vector3d(1, 2, 3);
  CHECK(globalma_predict(GlobalWeights::uniform(3), preds)[0] == doctest::Approx(2.0));
  CHECK(globalma_predict(GlobalWeights(Eigen::Vector3d(1, 0, 0)), Eigen::MatrixXd{{4, 5}, {1, 1}, {2, 2}}) ==
        Eigen::Vector2d(4, 5));
  CHECK(globalma_predict(GlobalWeights(Eigen::Vector2d(0.6, 0.4)), Eigen::MatrixXd(Eigen::Vector2d(10, 0)))[0] ==
        doctest::Approx(6.0));
  CHECK_THROWS_AS(GlobalWeights(Eigen::Vector2d(0.6, 0.6)), Error);
}

TEST_CASE("batch predictions stay in the convex hull of the PTMs") {
  CounterRng rng(12);
  const GatingNetwork net = oracle::random_network(rng, {3, 6, 3}, 2.0);
  const Dataset d = oracle::random_regression(rng, 50, 3, 3);
  const Eigen::MatrixXd y = localma_predict(net, d);
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const auto row = d.predictions.row(i);
    CHECK(y(i, 0) >= row.minCoeff() - 1e-12);
    CHECK(y(i, 0) <= row.maxCoeff() + 1e-12);
  }
  const Dataset c = oracle::random_classification(rng, 30, 3, 3, 4);
  const Eigen::MatrixXd p = localma_predict(net, c);
  for (Eigen::Index i = 0; i < c.n(); ++i) CHECK(is_on_simplex(p.row(i).transpose(), kSimplexTolerance));
}

TEST_CASE("project_to_simplex examples") {
  CHECK(project_to_simplex(Eigen::Vector3d(0.2, 0.3, 0.5)).isApprox(Eigen::Vector3d(0.2, 0.3, 0.5)));
  CHECK(project_to_simplex(Eigen::Vector2d(2, 0)).isApprox(Eigen::Vector2d(1, 0)));
  const Eigen::VectorXd u = project_to_simplex(Eigen::Vector3d(0.7, 0.6, 0.5));
  CHECK(u[0] == doctest::Approx(0.7 - 0.8 / 3.0));
  CHECK(u[1] == doctest::Approx(0.6 - 0.8 / 3.0));
  CHECK(u[2] == doctest::Approx(0.5 - 0.8 / 3.0));

  // Grid oracle for the same vector.
  const auto best = oracle::simplex_grid_min(3, 0.001, [](const std::vector<double>& w) {
    return dist2(Eigen::Vector3d(0.7, 0.6, 0.5), w);
  });
  CHECK(dist2(Eigen::Vector3d(0.7, 0.6, 0.5), {u[0], u[1], u[2]}) <= best.value + 1e-12);
}

TEST_CASE("project_to_simplex properties") {
  CounterRng rng(33);
  NormalSampler normal;
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index M = 2 + static_cast<Eigen::Index>(rng.below(5));
    Eigen::VectorXd v(M);
    for (Eigen::Index j = 0; j < M; ++j) v[j] = 3 * normal(rng);
    const Eigen::VectorXd u = project_to_simplex(v);
    CHECK(is_on_simplex(u, 1e-12));
    CHECK((project_to_simplex(u) - u).cwiseAbs().maxCoeff() <= 1e-12);

    std::vector<Eigen::Index> perm(static_cast<std::size_t>(M));
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    Eigen::VectorXd pv(M);
    for (Eigen::Index j = 0; j < M; ++j) pv[j] = v[perm[static_cast<std::size_t>(j)]];
    const Eigen::VectorXd pu = project_to_simplex(pv);
    for (Eigen::Index j = 0; j < M; ++j) CHECK(std::abs(pu[j] - u[perm[static_cast<std::size_t>(j)]]) <= 1e-12);

    // Variational inequality: <v - u, z - u> <= 0 for simplex vertices z.
    for (Eigen::Index z = 0; z < M; ++z) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(M);
      e[z] = 1;
      CHECK((v - u).dot(e - u) <= 1e-10);
    }
  }
}

TEST_CASE("fit_global_weights examples") {
  CounterRng rng(44);
  SUBCASE("single model") {
    const Dataset d = oracle::random_regression(rng, 10, 1, 1);
    const GlobalFit fit = fit_global_weights(d, LossSpec{});
    CHECK(fit.weights.size() == 1);
    CHECK(fit.weights[0] == 1.0);
  }
  SUBCASE("noiseless exact model") {
    Dataset d = oracle::random_regression(rng, 40, 1, 2);
    d.predictions.col(0) = d.responses.col(0);
    const GlobalFit fit = fit_global_weights(d, LossSpec{});
    CHECK(std::abs(fit.weights[0] - 1.0) <= 1e-4);
    CHECK(std::abs(fit.weights[1]) <= 1e-4);
  }
  SUBCASE("random M=2 against the 1-D grid") {
    for (int t = 0; t < 10; ++t) {
      const Dataset d = oracle::random_regression(rng, 50, 1, 2);
      const GlobalFit fit = fit_global_weights(d, LossSpec{});
      const auto grid = oracle::simplex_grid_min(2, 0.001, [&](const std::vector<double>& w) {
        return oracle::constant_weight_objective(d, LossSpec{}, w);
      });
      const double at_fit = oracle::constant_weight_objective(
          d, LossSpec{}, {fit.weights[0], fit.weights[1]});
      CHECK(at_fit <= grid.value + 1e-6);
      CHECK(fit.objective == doctest::Approx(at_fit).epsilon(1e-10));
    }
  }
}

TEST_CASE("fit_global_weights first-order optimality and feasibility") {
  CounterRng rng(55);
  for (int t = 0; t < 30; ++t) {
    const bool ce = t % 3 == 0;
    const Dataset d = ce ? oracle::random_classification(rng, 40, 1, 3, 3)
                         : oracle::random_regression(rng, 40, 1, 3);
    const LossSpec loss{ce ? LossKind::CrossEntropy : LossKind::Squared, 1e-12};
    const GlobalFit fit = fit_global_weights(d, loss);
    const Eigen::VectorXd& w = fit.weights.vector();
    CHECK(is_on_simplex(w, 1e-12));
    CHECK(fit.objective <= fit.start_objective + 1e-12);
    const Eigen::VectorXd g = global_objective_gradient(d, loss, w);
    const double gw = g.dot(w);
    for (Eigen::Index z = 0; z < w.size(); ++z) CHECK(g[z] - gw >= -1e-6);
    CHECK(global_objective(d, loss, w) ==
          doctest::Approx(oracle::constant_weight_objective(d, loss, {w[0], w[1], w[2]})).epsilon(1e-12));
  }
}

TEST_CASE("EWMA equals GlobalMA with uniform weights") {
  CounterRng rng(66);
  const Dataset d = oracle::random_classification(rng, 20, 2, 4, 3);
  const Eigen::MatrixXd a = ewma_predict(d);
  const Eigen::MatrixXd b = globalma_predict(GlobalWeights::uniform(4), d);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("combine rejects mismatched weights") {
  CounterRng rng(1);
  const Dataset d = oracle::random_regression(rng, 5, 1, 2);
  CHECK_THROWS_AS(combine(d, Eigen::MatrixXd::Constant(4, 2, 0.5)), Error);
}
