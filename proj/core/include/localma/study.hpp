#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "localma/model.hpp"
#include "localma/scenarios.hpp"

namespace localma {

enum class Method { LocalMA, GW, EWMA };

std::string_view to_string(Method method) noexcept;
Method parse_method(std::string_view name);

struct MetricValue {
  Method method;
  std::string metric;
  double value;
};

// Metrics from one simulated world.
struct ReplicationResult {
  Scenario scenario = Scenario::S1;
  int n_train = 0;
  int rep_index = 0;
  std::uint64_t world_seed = 0;
  std::vector<MetricValue> metrics;
  /// Training-set objectives of the two constant-weight estimators.
  double gw_train_objective = 0.0;
  double ewma_train_objective = 0.0;

  /// Value of (method, metric); throws InvalidConfig if absent.
  double get(Method method, std::string_view metric) const;
  bool has(Method method, std::string_view metric) const;
};

/// Seed of replication rep_index under master_seed.
std::uint64_t replication_seed(std::uint64_t master_seed, int rep_index) noexcept;

/// Generates the world for (spec.seed, rep_index), trains the gating network,
/// fits global weights and evaluates LocalMA / GW / EWMA on the test set.
/// Metrics: "mse" for every method; "c1" for every method when the scenario has
/// true weights; for the cubic example, LocalMA "weight_left" (mean weight on
/// model 1 over test x in [-2, -1]) and "weight_right" (model 2 over [1, 2]).
ReplicationResult run_replication(const ScenarioSpec& spec, const TrainConfig& train_config,
                                  int rep_index);

struct StudyCell {
  Scenario scenario;
  int n_train;
  Method method;
  std::string metric;
  double mean;
  double std_error;  // sample sd / sqrt(reps); 0 when reps == 1
  int reps;
};

struct StudyReport {
  std::vector<StudyCell> cells;
  /// Replication rows, grouped by spec in input order, then by rep_index.
  std::vector<ReplicationResult> replications;

  const StudyCell* find(Scenario scenario, int n_train, Method method,
                        std::string_view metric) const;
};

/// Runs `reps` replications for every spec on `workers` threads. The report is
/// independent of the worker count.
StudyReport run_study(const std::vector<ScenarioSpec>& specs, const TrainConfig& train_config,
                      int reps, int workers);

/// Aggregates replication rows into per-(scenario, n, method, metric) cells.
std::vector<StudyCell> aggregate(const std::vector<ReplicationResult>& rows);

}  // namespace localma
