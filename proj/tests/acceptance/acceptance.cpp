// Acceptance runner: prints one PASS/FAIL line per criterion, exits nonzero on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "localma/averaging.hpp"
#include "localma/gating_network.hpp"
#include "localma/model_io.hpp"
#include "localma/study.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace localma;

namespace {

constexpr int kReps = 50;
constexpr int kTestSize = 5000;
constexpr std::uint64_t kMasterSeed = 1;
const std::vector<int> kSizes{100, 300, 600, 900};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::vector<ScenarioSpec> grid(Scenario s, const std::vector<int>& sizes) {
  std::vector<ScenarioSpec> specs;
  for (int n : sizes) {
    ScenarioSpec spec = ScenarioSpec::make(s, n, kMasterSeed);
    spec.n_test = kTestSize;
    specs.push_back(spec);
  }
  return specs;
}

double mean_of(const StudyReport& r, Scenario s, int n, Method m, const char* metric) {
  const StudyCell* cell = r.find(s, n, m, metric);
  return cell ? cell->mean : std::nan("");
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

std::string series(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "/" : "") + fmt(v[i], 3);
  return s;
}

bool in_band(double v, double lo, double hi) { return v >= lo && v <= hi; }

// Criteria 1-3 share one study over S1-S3.
Outcome criterion1(const StudyReport& r) {
  Outcome o;
  std::vector<double> local;
  for (int n : kSizes) local.push_back(mean_of(r, Scenario::S1, n, Method::LocalMA, "mse"));
  const double gw = mean_of(r, Scenario::S1, 900, Method::GW, "mse");
  const double ew = mean_of(r, Scenario::S1, 900, Method::EWMA, "mse");
  o.require(local.back() <= 0.10, "LocalMA n=900 <= 0.10");
  o.require(in_band(gw, 5.0, 7.0), "GW in [5.0, 7.0]");
  o.require(in_band(ew, 5.2, 7.0), "EWMA in [5.2, 7.0]");
  o.require(strictly_decreasing(local), "LocalMA strictly decreasing in n");
  o.detail << "S1 LocalMA mse " << series(local) << "; GW " << fmt(gw) << "; EWMA " << fmt(ew);
  return o;
}

Outcome criterion2(const StudyReport& r) {
  Outcome o;
  for (Scenario s : {Scenario::S2, Scenario::S3}) {
    const double gw = mean_of(r, s, 900, Method::GW, "mse");
    const double ew = mean_of(r, s, 900, Method::EWMA, "mse");
    const double lm = mean_of(r, s, 900, Method::LocalMA, "mse");
    const std::string name(to_string(s));
    o.require(gw <= 0.01, name + " GW <= 0.01");
    o.require(lm <= 0.10, name + " LocalMA <= 0.10");
    if (s == Scenario::S2) {
      o.require(std::abs(ew) <= 1e-9, "S2 EWMA = 0 within 1e-9");
    } else {
      o.require(in_band(ew, 1.9, 2.3), "S3 EWMA in [1.9, 2.3]");
    }
    o.detail << name << " n=900 LocalMA " << fmt(lm) << " GW " << fmt(gw) << " EWMA " << fmt(ew) << "; ";
  }
  return o;
}

Outcome criterion3(const StudyReport& r) {
  Outcome o;
  for (Scenario s : {Scenario::S1, Scenario::S2, Scenario::S3}) {
    std::vector<double> c1;
    for (int n : kSizes) c1.push_back(mean_of(r, s, n, Method::LocalMA, "c1"));
    const std::string name(to_string(s));
    o.require(strictly_decreasing(c1), name + " C1 decreasing in n");
    o.detail << name << " C1 " << series(c1) << "; ";
    if (s == Scenario::S1) o.require(c1.back() <= 0.12, "S1 n=900 C1 <= 0.12");
    if (s == Scenario::S2) o.require(in_band(c1.front(), 0.14, 0.28), "S2 n=100 C1 in [0.14, 0.28]");
  }
  return o;
}

Outcome criterion4() {
  Outcome o;
  const StudyReport r = run_study(grid(Scenario::Scenario2, {900}), TrainConfig{}, kReps, workers());
  const double lm = mean_of(r, Scenario::Scenario2, 900, Method::LocalMA, "mse");
  const double gw = mean_of(r, Scenario::Scenario2, 900, Method::GW, "mse");
  const double ew = mean_of(r, Scenario::Scenario2, 900, Method::EWMA, "mse");
  int ordered = 0;
  for (const auto& rep : r.replications) {
    const double a = rep.get(Method::LocalMA, "mse"), b = rep.get(Method::GW, "mse"),
                 c = rep.get(Method::EWMA, "mse");
    if (a < b && b < c) ++ordered;
  }
  const double frac = static_cast<double>(ordered) / static_cast<double>(r.replications.size());
  o.require(in_band(lm, 3.2, 4.5), "LocalMA in [3.2, 4.5]");
  o.require(in_band(gw, 12.5, 15.5), "GW in [12.5, 15.5]");
  o.require(in_band(ew, 14.5, 17.5), "EWMA in [14.5, 17.5]");
  o.require(frac >= 0.9, "LocalMA < GW < EWMA in >= 90% of reps");
  o.detail << "LocalMA " << fmt(lm) << " GW " << fmt(gw) << " EWMA " << fmt(ew) << "; ordered in "
           << ordered << "/" << r.replications.size();
  return o;
}

Outcome criterion5() {
  Outcome o;
  const StudyReport r = run_study(grid(Scenario::Motivating, {200}), TrainConfig{}, kReps, workers());
  const double left = mean_of(r, Scenario::Motivating, 200, Method::LocalMA, "weight_left");
  const double right = mean_of(r, Scenario::Motivating, 200, Method::LocalMA, "weight_right");
  int wins = 0;
  for (const auto& rep : r.replications) {
    if (rep.get(Method::LocalMA, "mse") < rep.get(Method::EWMA, "mse")) ++wins;
  }
  o.require(left >= 0.8, "mean company-1 weight on [-2,-1] >= 0.8");
  o.require(right >= 0.8, "mean company-2 weight on [1,2] >= 0.8");
  o.require(wins >= 45, "LocalMA beats EWMA in >= 45 of 50");
  o.detail << "weight left " << fmt(left) << " right " << fmt(right) << "; LocalMA < EWMA in " << wins
           << "/" << r.replications.size();
  return o;
}

Outcome criterion6() {
  Outcome o;
  CounterRng rng(606);
  int triples = 0;
  int max_params = 0;
  double worst = 0;
  for (int t = 0; t < 120; ++t) {
    const int p = 1 + static_cast<int>(rng.below(5));
    const int M = 2 + static_cast<int>(rng.below(3));
    std::vector<int> dims{p};
    const int depth = 1 + static_cast<int>(rng.below(2));
    for (int l = 0; l < depth; ++l) dims.push_back(2 + static_cast<int>(rng.below(11)));
    dims.push_back(M);
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.below(8));
    const bool ce = t % 2 == 1;
    const Dataset d = ce ? oracle::random_classification(rng, n, p, M, 2 + static_cast<Eigen::Index>(rng.below(3)))
                         : oracle::random_regression(rng, n, p, M);
    GatingNetwork net = oracle::random_network(rng, dims);
    net.pin_last_logit = t % 7 == 0;
    if (net.parameter_count() > 500) continue;
    max_params = std::max(max_params, static_cast<int>(net.parameter_count()));
    const LossSpec loss{ce ? LossKind::CrossEntropy : LossKind::Squared, 1e-12};
    const auto analytic = oracle::flatten(loss_and_gradient(net, d, loss).gradient.layers);
    const auto numeric = oracle::finite_difference_gradient(net, d, loss);
    for (std::size_t j = 0; j < analytic.size(); ++j) {
      worst = std::max(worst, oracle::relative_error(analytic[j], numeric[j]));
    }
    ++triples;
  }
  o.require(triples >= 100, ">= 100 triples");
  o.require(worst <= 1e-4, "componentwise relative error <= 1e-4");
  o.detail << triples << " triples (max " << max_params << " params), worst relative error " << fmt(worst, 3);
  return o;
}

Outcome criterion7() {
  Outcome o;
  CounterRng rng(707);
  const LossSpec loss{};
  double worst2 = -1e300, worst3 = -1e300, worst_proj = -1e300;
  for (int t = 0; t < 50; ++t) {
    const Dataset d = oracle::random_regression(rng, 20 + static_cast<Eigen::Index>(rng.below(80)), 1, 2);
    const GlobalFit fit = fit_global_weights(d, loss);
    const auto best = oracle::simplex_grid_min(2, 0.001, [&](const std::vector<double>& w) {
      return oracle::constant_weight_objective(d, loss, w);
    });
    const double gap = oracle::constant_weight_objective(d, loss, {fit.weights[0], fit.weights[1]}) - best.value;
    worst2 = std::max(worst2, gap);
  }
  for (int t = 0; t < 20; ++t) {
    const Dataset d = oracle::random_regression(rng, 20 + static_cast<Eigen::Index>(rng.below(80)), 1, 3);
    const GlobalFit fit = fit_global_weights(d, loss);
    const auto best = oracle::simplex_grid_min(3, 0.005, [&](const std::vector<double>& w) {
      return oracle::constant_weight_objective(d, loss, w);
    });
    const double gap =
        oracle::constant_weight_objective(d, loss, {fit.weights[0], fit.weights[1], fit.weights[2]}) - best.value;
    worst3 = std::max(worst3, gap);
  }
  NormalSampler normal;
  for (int t = 0; t < 100; ++t) {
    const int M = 2 + t % 2;
    Eigen::VectorXd v(M);
    for (int j = 0; j < M; ++j) v[j] = 1.5 * normal(rng);
    const Eigen::VectorXd u = project_to_simplex(v);
    auto dist = [&](const std::vector<double>& w) {
      double s = 0;
      for (int j = 0; j < M; ++j) s += (v[j] - w[static_cast<std::size_t>(j)]) * (v[j] - w[static_cast<std::size_t>(j)]);
      return s;
    };
    const auto best = oracle::simplex_grid_min(M, 0.001, dist);
    std::vector<double> uv(u.data(), u.data() + u.size());
    worst_proj = std::max(worst_proj, dist(uv) - best.value);
  }
  o.require(worst2 <= 1e-6, "M=2 PGD within 1e-6 of the grid minimum");
  o.require(worst3 <= 1e-5, "M=3 PGD within 1e-5 of the grid minimum");
  o.require(worst_proj <= 1e-6, "projection within 1e-6 of the grid minimum");
  o.detail << "worst gaps (PGD - grid): M=2 " << fmt(worst2, 3) << ", M=3 " << fmt(worst3, 3) << ", projection "
           << fmt(worst_proj, 3);
  return o;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome criterion8() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "localma_acceptance";
  fs::create_directories(dir);
#ifdef LOCALMA_CLI_PATH
  const std::string base = std::string(LOCALMA_CLI_PATH) +
                           " simulate --scenario s1 --n 100,300 --reps 8 --seed 42 --n-test 1000";
  const std::string a = (dir / "w1.csv").string(), b = (dir / "w8.csv").string();
  const int ra = std::system((base + " --workers 1 --out " + a + " > /dev/null").c_str());
  const int rb = std::system((base + " --workers 8 --out " + b + " > /dev/null").c_str());
  o.require(ra == 0 && rb == 0, "simulate exits 0");
  const std::string sa = slurp(a), sb = slurp(b);
  o.require(!sa.empty() && sa == sb, "reports byte-identical for workers 1 and 8");
  o.detail << "simulate reports " << (sa == sb ? "identical" : "differ") << " (" << sa.size() << " bytes); ";
#else
  o.require(false, "CLI not built");
#endif
  const SimWorld world = generate(ScenarioSpec::make(Scenario::S1, 200, 9));
  TrainConfig cfg;
  cfg.iterations = 100;
  const TrainResult trained = train(world.train, cfg);
  ModelMeta meta;
  meta.iterations = cfg.iterations;
  meta.final_loss = trained.best_loss;
  save_model(dir / "model.json", trained.network, meta);
  const StoredModel back = load_model(dir / "model.json");
  bool same = back.network.layers.size() == trained.network.layers.size();
  for (std::size_t l = 0; same && l < back.network.layers.size(); ++l) {
    same = back.network.layers[l].weights == trained.network.layers[l].weights &&
           back.network.layers[l].bias == trained.network.layers[l].bias;
  }
  const WeightMatrix w1 = weight_matrix(trained.network, world.test.covariates);
  const WeightMatrix w2 = weight_matrix(back.network, world.test.covariates);
  same = same && w1.matrix() == w2.matrix();
  o.require(same, "model save/load bitwise");
  o.detail << "model round-trip " << (same ? "bitwise" : "differs");
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  int failures = 0;
  auto report = [&](int id, const char* title, const std::function<Outcome()>& check) {
    const auto start = clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s criterion %d (%s): %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.str().c_str(),
                secs);
    std::fflush(stdout);
  };

  StudyReport scenario1;
  const auto start = clock::now();
  std::vector<ScenarioSpec> specs;
  for (Scenario s : {Scenario::S1, Scenario::S2, Scenario::S3}) {
    for (const auto& spec : grid(s, kSizes)) specs.push_back(spec);
  }
  scenario1 = run_study(specs, TrainConfig{}, kReps, workers());
  std::printf("scenario 1 study: %d reps x %zu cells in %.1fs\n", kReps, specs.size(),
              std::chrono::duration<double>(clock::now() - start).count());

  report(1, "S1 MSE", [&] { return criterion1(scenario1); });
  report(2, "S2/S3 MSE", [&] { return criterion2(scenario1); });
  report(3, "C1 weight consistency", [&] { return criterion3(scenario1); });
  report(4, "Scenario 2 MSE", criterion4);
  report(5, "motivating example", criterion5);
  report(6, "gradient oracle", criterion6);
  report(7, "GW and projection oracle", criterion7);
  report(8, "determinism", criterion8);

  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
