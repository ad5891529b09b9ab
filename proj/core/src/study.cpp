#include "localma/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "localma/averaging.hpp"
#include "localma/errors.hpp"
#include "localma/gating_network.hpp"
#include "localma/metrics.hpp"
#include "localma/rng.hpp"

namespace localma {

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::LocalMA: return "localma";
    case Method::GW: return "gw";
    case Method::EWMA: return "ewma";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "localma") return Method::LocalMA;
  if (name == "gw") return Method::GW;
  if (name == "ewma") return Method::EWMA;
  throw Error(ErrorCode::InvalidConfig, "unknown method '" + std::string(name) + "'");
}

bool ReplicationResult::has(Method method, std::string_view metric) const {
  return std::any_of(metrics.begin(), metrics.end(), [&](const MetricValue& v) {
    return v.method == method && v.metric == metric;
  });
}

double ReplicationResult::get(Method method, std::string_view metric) const {
  for (const auto& v : metrics) {
    if (v.method == method && v.metric == metric) return v.value;
  }
  throw Error(ErrorCode::InvalidConfig, "no metric " + std::string(metric) + " for " +
                                            std::string(to_string(method)));
}

std::uint64_t replication_seed(std::uint64_t master_seed, int rep_index) noexcept {
  return mix_seed(master_seed, static_cast<std::uint64_t>(rep_index));
}

namespace {

// Mean weight on `model` over test rows whose single covariate lies in [lo, hi].
double region_weight(const Dataset& test, const WeightMatrix& weights, Eigen::Index model,
                     double lo, double hi) {
  double total = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < test.n(); ++i) {
    const double x = test.covariates(i, 0);
    if (x >= lo && x <= hi) {
      total += weights(i, model);
      ++count;
    }
  }
  return count > 0 ? total / count : std::nan("");
}

}  // namespace

ReplicationResult run_replication(const ScenarioSpec& spec, const TrainConfig& train_config,
                                  int rep_index) {
  train_config.validate();
  ScenarioSpec world_spec = spec;
  world_spec.seed = replication_seed(spec.seed, rep_index);
  const SimWorld world = generate(world_spec);

  TrainConfig config = train_config;
  config.seed = mix_seed(train_config.seed, world_spec.seed);
  const TrainResult trained = train(world.train, config);
  const GlobalFit gw = fit_global_weights(world.train, config.loss);
  const GlobalWeights uniform = GlobalWeights::uniform(world.train.M());

  const Dataset& test = world.test;
  const Eigen::VectorXd target = test.responses.col(0);
  const WeightMatrix local_weights = weight_matrix(trained.network, test.covariates);

  ReplicationResult row;
  row.scenario = spec.scenario;
  row.n_train = spec.n_train;
  row.rep_index = rep_index;
  row.world_seed = world_spec.seed;
  row.gw_train_objective = gw.objective;
  row.ewma_train_objective = global_objective(world.train, config.loss, uniform.vector());

  row.metrics.push_back({Method::LocalMA, "mse", mse(target, combine(test, local_weights.matrix()).col(0))});
  row.metrics.push_back({Method::GW, "mse", mse(target, globalma_predict(gw.weights, test).col(0))});
  row.metrics.push_back({Method::EWMA, "mse", mse(target, ewma_predict(test).col(0))});

  if (world.test_truth_weights) {
    const WeightMatrix& truth = *world.test_truth_weights;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(test.n());
    row.metrics.push_back({Method::LocalMA, "c1", c1_weight_distance(local_weights, truth)});
    row.metrics.push_back({Method::GW, "c1",
                           c1_weight_distance(WeightMatrix(ones * gw.weights.vector().transpose()), truth)});
    row.metrics.push_back({Method::EWMA, "c1",
                           c1_weight_distance(WeightMatrix(ones * uniform.vector().transpose()), truth)});
  }
  if (spec.scenario == Scenario::Motivating) {
    row.metrics.push_back({Method::LocalMA, "weight_left", region_weight(test, local_weights, 0, -2.0, -1.0)});
    row.metrics.push_back({Method::LocalMA, "weight_right", region_weight(test, local_weights, 1, 1.0, 2.0)});
  }
  return row;
}

std::vector<StudyCell> aggregate(const std::vector<ReplicationResult>& rows) {
  // Keyed by (first appearance of (scenario, n)), then metric order within a row.
  using Key = std::tuple<Scenario, int, Method, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<double>> values;
  for (const auto& row : rows) {
    for (const auto& v : row.metrics) {
      Key key{row.scenario, row.n_train, v.method, v.metric};
      auto [it, inserted] = values.try_emplace(key);
      if (inserted) order.push_back(key);
      it->second.push_back(v.value);
    }
  }
  std::vector<StudyCell> cells;
  cells.reserve(order.size());
  for (const auto& key : order) {
    const auto& xs = values.at(key);
    const auto reps = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= reps;
    double se = 0.0;
    if (xs.size() > 1) {
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      se = std::sqrt(ss / (reps - 1.0)) / std::sqrt(reps);
    }
    const auto& [scenario, n, method, metric] = key;
    cells.push_back({scenario, n, method, metric, mean, se, static_cast<int>(xs.size())});
  }
  return cells;
}

const StudyCell* StudyReport::find(Scenario scenario, int n_train, Method method,
                                   std::string_view metric) const {
  for (const auto& cell : cells) {
    if (cell.scenario == scenario && cell.n_train == n_train && cell.method == method &&
        cell.metric == metric) {
      return &cell;
    }
  }
  return nullptr;
}

StudyReport run_study(const std::vector<ScenarioSpec>& specs, const TrainConfig& train_config,
                      int reps, int workers) {
  if (reps < 1) throw Error(ErrorCode::InvalidConfig, "reps must be >= 1");
  train_config.validate();
  for (const auto& spec : specs) spec.validate();

  const std::size_t total = specs.size() * static_cast<std::size_t>(reps);
  std::vector<ReplicationResult> rows(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (std::size_t task = next++; task < total; task = next++) {
      const std::size_t spec_index = task / static_cast<std::size_t>(reps);
      const int rep = static_cast<int>(task % static_cast<std::size_t>(reps));
      try {
        rows[task] = run_replication(specs[spec_index], train_config, rep);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = total;
      }
    }
  };

  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(total)));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  StudyReport report;
  report.cells = aggregate(rows);
  report.replications = std::move(rows);
  return report;
}

}  // namespace localma
