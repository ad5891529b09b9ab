// localma: command-line front end for localized model averaging.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "localma/averaging.hpp"
#include "localma/csv_io.hpp"
#include "localma/errors.hpp"
#include "localma/gating_network.hpp"
#include "localma/metrics.hpp"
#include "localma/model_io.hpp"
#include "localma/report_io.hpp"
#include "localma/scenarios.hpp"
#include "localma/study.hpp"

namespace fs = std::filesystem;
using namespace localma;

namespace {

struct LayoutArgs {
  std::string task = "regression";
  int p = 0;
  int m = 0;
  int k = 1;

  CsvLayout layout() const { return CsvLayout{parse_task(task), p, m, k}; }
};

void add_layout_flags(CLI::App* cmd, LayoutArgs& args, bool required) {
  cmd->add_option("--task", args.task, "regression or classification")
      ->check(CLI::IsMember({"regression", "classification"}));
  auto* p = cmd->add_option("--p", args.p, "number of covariate columns")->check(CLI::PositiveNumber);
  auto* m = cmd->add_option("--m", args.m, "number of models")->check(CLI::PositiveNumber);
  cmd->add_option("--k", args.k, "number of classes (classification)")->check(CLI::PositiveNumber);
  if (required) {
    p->required();
    m->required();
  }
}

CsvLayout layout_from_model(const StoredModel& model) {
  const auto dims = model.network.dims();
  return CsvLayout{model.meta.task, dims.front(), dims.back(),
                   model.meta.task == Task::Regression ? 1 : model.meta.num_classes};
}

Dataset load_for_model(const fs::path& data, const StoredModel& model) {
  Dataset d = load_csv(data, layout_from_model(model));
  if (model.meta.standardizer) d.covariates = model.meta.standardizer->apply(d.covariates);
  return d;
}

std::vector<std::string> prediction_header(const Dataset& d) {
  if (d.task == Task::Regression) return {"yhat"};
  std::vector<std::string> cols;
  for (Eigen::Index k = 1; k <= d.K(); ++k) cols.push_back("p_c" + std::to_string(k));
  return cols;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string scenario;
  std::vector<int> n;
  int reps = 50;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out;
  std::string manifest;
  std::string per_rep;
  bool full_paper_scale = false;
  int n_test = 5000;
  std::vector<int> hidden{16};
  double lr = 0.01;
  int iters = 800;
  double weight_decay = TrainConfig{}.weight_decay;
  std::uint64_t train_seed = 0;
};

void run_simulate(const SimulateArgs& a, bool reps_given) {
  const Scenario scenario = parse_scenario(a.scenario);
  std::vector<int> sizes = a.n;
  if (sizes.empty()) {
    sizes = scenario == Scenario::Motivating ? std::vector<int>{200}
                                             : std::vector<int>{100, 300, 600, 900};
  }
  int reps = a.reps;
  int n_test = a.n_test;
  if (a.full_paper_scale) {
    if (!reps_given) reps = 500;
    n_test = 5000;
  }
  std::vector<ScenarioSpec> specs;
  for (int n : sizes) {
    ScenarioSpec spec = ScenarioSpec::make(scenario, n, a.seed);
    spec.n_test = n_test;
    specs.push_back(spec);
  }
  TrainConfig config;
  config.hidden_widths = a.hidden;
  config.learning_rate = a.lr;
  config.iterations = a.iters;
  config.weight_decay = a.weight_decay;
  config.seed = a.train_seed;

  const StudyReport report = run_study(specs, config, reps, a.workers);
  save_report(a.out, report);

  RunManifest manifest{specs, config, reps, a.workers, a.full_paper_scale, a.out};
  save_manifest(a.manifest.empty() ? fs::path(a.out + ".manifest.json") : fs::path(a.manifest),
                manifest);
  if (!a.per_rep.empty()) {
    std::ofstream rows(a.per_rep, std::ios::binary);
    if (!rows) throw Error(ErrorCode::IoError, "cannot write " + a.per_rep);
    write_replications(rows, report);
  }
  std::cout << "wrote " << report.cells.size() << " report rows to " << a.out << '\n';
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  LayoutArgs layout;
  std::string loss = "squared";
  std::vector<int> hidden{16};
  double lr = 0.01;
  int iters = 800;
  std::uint64_t seed = 0;
  double weight_decay = TrainConfig{}.weight_decay;
  double logit_clamp = 30.0;
  bool pin_last_logit = false;
  bool standardize = false;
  std::string model;
};

void run_train(const TrainArgs& a) {
  Dataset data = load_csv(a.data, a.layout.layout());
  ModelMeta meta;
  if (a.standardize) {
    meta.standardizer = Standardizer::fit(data.covariates);
    data.covariates = meta.standardizer->apply(data.covariates);
  }
  TrainConfig config;
  config.hidden_widths = a.hidden;
  config.learning_rate = a.lr;
  config.iterations = a.iters;
  config.seed = a.seed;
  config.weight_decay = a.weight_decay;
  config.logit_clamp = a.logit_clamp;
  config.pin_last_logit = a.pin_last_logit;
  config.loss.kind = parse_loss_kind(a.loss);

  const TrainResult result = train(data, config);
  meta.loss = config.loss.kind;
  meta.task = data.task;
  meta.num_classes = static_cast<int>(data.K());
  meta.seed = config.seed;
  meta.iterations = config.iterations;
  meta.final_loss = result.best_loss;
  save_model(a.model, result.network, meta);
  std::cout << "trained on " << data.n() << " rows; loss " << format_double(result.best_loss)
            << " (iteration " << result.best_iteration << "); model written to " << a.model
            << '\n';
}

// ---------------------------------------------------------------- predict / weights

void run_predict(const std::string& model_path, const std::string& data_path,
                 const std::string& out) {
  const StoredModel model = load_model(model_path);
  const Dataset data = load_for_model(data_path, model);
  save_table(out, prediction_header(data), localma_predict(model.network, data));
}

void run_weights(const std::string& model_path, const std::string& data_path,
                 const std::string& out) {
  const StoredModel model = load_model(model_path);
  const Dataset data = load_for_model(data_path, model);
  const WeightMatrix w = weight_matrix(model.network, data.covariates);
  save_table(out, weight_header(static_cast<int>(w.cols())), w.matrix());
}

// ---------------------------------------------------------------- weight-curve

struct CurveArgs {
  std::string model;
  int covariate = 1;
  double grid_min = -3.0;
  double grid_max = 3.0;
  int points = 201;
  std::string truth;
  std::string out;
};

void run_weight_curve(const CurveArgs& a) {
  const StoredModel model = load_model(a.model);
  const Eigen::Index p = model.network.input_dim();
  const Eigen::Index column = a.covariate - 1;
  const Eigen::MatrixXd grid = sweep_grid(p, column, a.grid_min, a.grid_max, a.points);
  const Eigen::MatrixXd inputs =
      model.meta.standardizer ? model.meta.standardizer->apply(grid) : grid;
  const WeightMatrix w = weight_matrix(model.network, inputs);
  const Eigen::Index M = w.cols();

  std::vector<std::string> header{"x" + std::to_string(a.covariate)};
  for (const auto& h : weight_header(static_cast<int>(M))) header.push_back(h);
  Eigen::MatrixXd table(grid.rows(), 1 + M);
  table.col(0) = grid.col(column);
  table.rightCols(M) = w.matrix();

  if (!a.truth.empty()) {
    const Scenario setting = parse_scenario(a.truth);
    if (!has_truth_weights(setting) || p != 5 || M != 3) {
      throw Error(ErrorCode::InvalidConfig, "--truth needs s1, s2 or s3 and a 5 -> 3 model");
    }
    Eigen::MatrixXd with_truth(grid.rows(), 1 + 2 * M);
    with_truth << table, Eigen::MatrixXd::Zero(grid.rows(), M);
    for (Eigen::Index i = 0; i < grid.rows(); ++i) {
      with_truth.block(i, 1 + M, 1, M) = true_weights(setting, grid.row(i).transpose()).transpose();
    }
    for (Eigen::Index m = 1; m <= M; ++m) header.push_back("w0_" + std::to_string(m));
    table = std::move(with_truth);
  }
  save_table(a.out, header, table);
}

// ---------------------------------------------------------------- evaluate / gw-fit

struct EvaluateArgs {
  std::string method;
  std::string data;
  LayoutArgs layout;
  std::string model;
  std::string gw_weights;
  std::string truth_weights;
  std::string out;
};

void run_evaluate(const EvaluateArgs& a) {
  const Method method = parse_method(a.method);
  Dataset data;
  Eigen::MatrixXd weights;
  if (method == Method::LocalMA) {
    if (a.model.empty()) throw Error(ErrorCode::InvalidConfig, "--method localma needs --model");
    const StoredModel model = load_model(a.model);
    data = load_for_model(a.data, model);
    weights = weight_matrix(model.network, data.covariates).matrix();
  } else {
    if (a.layout.p < 1 || a.layout.m < 1) {
      throw Error(ErrorCode::InvalidConfig, "--method " + a.method + " needs --p and --m");
    }
    data = load_csv(a.data, a.layout.layout());
    GlobalWeights w = GlobalWeights::uniform(data.M());
    if (method == Method::GW) {
      if (a.gw_weights.empty()) throw Error(ErrorCode::InvalidConfig, "--method gw needs --gw-weights");
      const Eigen::MatrixXd table = load_table(a.gw_weights, weight_header(static_cast<int>(data.M())));
      if (table.rows() != 1) throw Error(ErrorCode::LayoutMismatch, "global weight file needs one row");
      w = GlobalWeights(table.row(0).transpose());
    }
    weights = Eigen::VectorXd::Ones(data.n()) * w.vector().transpose();
  }

  const Eigen::MatrixXd combined = combine(data, weights);
  std::vector<std::pair<std::string, double>> rows;
  if (data.task == Task::Regression) {
    rows.emplace_back("mse", mse(data.responses.col(0), combined.col(0)));
  } else {
    std::vector<int> labels(static_cast<std::size_t>(data.n()));
    double ce = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      Eigen::Index label = 0;
      data.responses.row(i).maxCoeff(&label);
      labels[static_cast<std::size_t>(i)] = static_cast<int>(label);
      ce += cross_entropy(data.responses.row(i).transpose(), combined.row(i).transpose(), 1e-12).value;
    }
    rows.emplace_back("accuracy", accuracy(labels, combined));
    rows.emplace_back("cross_entropy", ce / static_cast<double>(data.n()));
  }
  if (!a.truth_weights.empty()) {
    const WeightMatrix truth(load_table(a.truth_weights, weight_header(static_cast<int>(data.M()))));
    rows.emplace_back("c1", c1_weight_distance(WeightMatrix(weights), truth));
  }

  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + a.out);
  out << "method,metric,value,n_eval\n";
  for (const auto& [metric, value] : rows) {
    out << a.method << ',' << metric << ',' << format_double(value) << ',' << data.n() << '\n';
    std::cout << a.method << ' ' << metric << ' ' << format_double(value) << '\n';
  }
}

struct GwFitArgs {
  std::string data;
  LayoutArgs layout;
  std::string loss = "squared";
  int max_iters = 10000;
  double tol = 1e-10;
  std::string out;
};

void run_gw_fit(const GwFitArgs& a) {
  const Dataset data = load_csv(a.data, a.layout.layout());
  LossSpec loss;
  loss.kind = parse_loss_kind(a.loss);
  const GlobalFit fit = fit_global_weights(data, loss, a.max_iters, a.tol);
  save_table(a.out, weight_header(static_cast<int>(data.M())), fit.weights.vector().transpose());
  std::cout << "global weights:";
  for (Eigen::Index m = 0; m < fit.weights.size(); ++m) std::cout << ' ' << format_double(fit.weights[m]);
  std::cout << "\nobjective " << format_double(fit.objective) << " after " << fit.iterations
            << " iterations" << (fit.converged ? "" : " (not converged)") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localized model averaging: train input-dependent weights over fixed predictors "
               "and run simulation studies."};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::simple);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a replication study and write a report CSV");
  simulate->add_option("--scenario", sim.scenario, "motivating | s1 | s2 | s3 | scenario2")
      ->required()
      ->check(CLI::IsMember({"motivating", "s1", "s2", "s3", "scenario2"}));
  simulate->add_option("--n", sim.n, "training sizes (comma separated)")->delimiter(',');
  auto* reps_opt = simulate->add_option("--reps", sim.reps, "replications per cell")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "master seed");
  simulate->add_option("--workers", sim.workers, "worker threads")->check(CLI::PositiveNumber);
  simulate->add_option("--out", sim.out, "report CSV path")->required();
  simulate->add_option("--manifest", sim.manifest, "manifest path (default OUT.manifest.json)");
  simulate->add_option("--per-rep", sim.per_rep, "also write per-replication metrics here");
  simulate->add_flag("--full-paper-scale", sim.full_paper_scale, "500 replications, n_test = 5000");
  simulate->add_option("--n-test", sim.n_test, "test-set size")->check(CLI::PositiveNumber);
  simulate->add_option("--hidden", sim.hidden, "hidden widths")->delimiter(',');
  simulate->add_option("--lr", sim.lr, "Adam learning rate");
  simulate->add_option("--iters", sim.iters, "Adam iterations");
  simulate->add_option("--weight-decay", sim.weight_decay, "L2 penalty coefficient");
  simulate->add_option("--train-seed", sim.train_seed, "seed mixed into network initialisation");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a gating network on a prediction CSV");
  train_cmd->add_option("--data", tr.data, "prediction CSV")->required()->check(CLI::ExistingFile);
  add_layout_flags(train_cmd, tr.layout, true);
  train_cmd->add_option("--loss", tr.loss, "squared | cross_entropy")
      ->check(CLI::IsMember({"squared", "cross_entropy"}));
  train_cmd->add_option("--hidden", tr.hidden, "hidden widths")->delimiter(',');
  train_cmd->add_option("--lr", tr.lr, "Adam learning rate");
  train_cmd->add_option("--iters", tr.iters, "Adam iterations");
  train_cmd->add_option("--seed", tr.seed, "initialisation seed");
  train_cmd->add_option("--weight-decay", tr.weight_decay, "L2 penalty coefficient");
  train_cmd->add_option("--logit-clamp", tr.logit_clamp, "bound on |logit|");
  train_cmd->add_flag("--pin-last-logit", tr.pin_last_logit, "fix the last logit at 0");
  train_cmd->add_flag("--standardize", tr.standardize, "z-score covariates using training statistics");
  train_cmd->add_option("--model", tr.model, "output model file")->required();

  std::string model_path, data_path, out_path;
  auto* predict = app.add_subcommand("predict", "Per-row locally weighted predictions");
  predict->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  predict->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  predict->add_option("--out", out_path)->required();

  auto* weights = app.add_subcommand("weights", "Per-row model weights");
  weights->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  weights->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  weights->add_option("--out", out_path)->required();

  CurveArgs curve;
  auto* curve_cmd = app.add_subcommand("weight-curve", "Sweep one covariate (others at 0)");
  curve_cmd->add_option("--model", curve.model)->required()->check(CLI::ExistingFile);
  curve_cmd->add_option("--covariate", curve.covariate, "1-based covariate index")->required()->check(CLI::PositiveNumber);
  curve_cmd->add_option("--grid-min", curve.grid_min);
  curve_cmd->add_option("--grid-max", curve.grid_max);
  curve_cmd->add_option("--points", curve.points);
  curve_cmd->add_option("--truth", curve.truth, "append true weights of s1 | s2 | s3");
  curve_cmd->add_option("--out", curve.out)->required();

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score LocalMA, GW or EWMA on a prediction CSV");
  evaluate->add_option("--method", ev.method)->required()->check(CLI::IsMember({"localma", "gw", "ewma"}));
  evaluate->add_option("--data", ev.data)->required()->check(CLI::ExistingFile);
  add_layout_flags(evaluate, ev.layout, false);
  evaluate->add_option("--model", ev.model, "model file (localma)")->check(CLI::ExistingFile);
  evaluate->add_option("--gw-weights", ev.gw_weights, "output of gw-fit (gw)")->check(CLI::ExistingFile);
  evaluate->add_option("--truth-weights", ev.truth_weights, "n x M weights CSV for C1")->check(CLI::ExistingFile);
  evaluate->add_option("--out", ev.out)->required();

  GwFitArgs gw;
  auto* gw_cmd = app.add_subcommand("gw-fit", "Fit constant simplex weights by projected gradient");
  gw_cmd->add_option("--data", gw.data)->required()->check(CLI::ExistingFile);
  add_layout_flags(gw_cmd, gw.layout, true);
  gw_cmd->add_option("--loss", gw.loss)->check(CLI::IsMember({"squared", "cross_entropy"}));
  gw_cmd->add_option("--max-iters", gw.max_iters)->check(CLI::PositiveNumber);
  gw_cmd->add_option("--tol", gw.tol);
  gw_cmd->add_option("--out", gw.out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) run_simulate(sim, reps_opt->count() > 0);
    if (*train_cmd) run_train(tr);
    if (*predict) run_predict(model_path, data_path, out_path);
    if (*weights) run_weights(model_path, data_path, out_path);
    if (*curve_cmd) run_weight_curve(curve);
    if (*evaluate) run_evaluate(ev);
    if (*gw_cmd) run_gw_fit(gw);
  } catch (const std::exception& e) {
    std::cerr << "localma: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
