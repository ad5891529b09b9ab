#include "localma/report_io.hpp"

#include <fstream>

#include "json.hpp"
#include "localma/csv_io.hpp"
#include "localma/errors.hpp"

#ifndef LOCALMA_VERSION_STRING
#define LOCALMA_VERSION_STRING "unknown"
#endif

namespace localma {

std::string version() { return LOCALMA_VERSION_STRING; }

void write_report(std::ostream& out, const StudyReport& report) {
  out << "scenario,n,method,metric,mean,stderr,reps,note\n";
  for (const auto& cell : report.cells) {
    out << to_string(cell.scenario) << ',' << cell.n_train << ',' << to_string(cell.method) << ','
        << cell.metric << ',' << format_double(cell.mean) << ',' << format_double(cell.std_error)
        << ',' << cell.reps << ',' << (cell.reps == 1 ? "single_rep" : "") << '\n';
  }
}

void save_report(const std::filesystem::path& path, const StudyReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_report(out, report);
}

void write_replications(std::ostream& out, const StudyReport& report) {
  out << "scenario,n,rep,world_seed,method,metric,value\n";
  for (const auto& row : report.replications) {
    for (const auto& v : row.metrics) {
      out << to_string(row.scenario) << ',' << row.n_train << ',' << row.rep_index << ','
          << row.world_seed << ',' << to_string(v.method) << ',' << v.metric << ','
          << format_double(v.value) << '\n';
    }
  }
}

void write_manifest(std::ostream& out, const RunManifest& manifest) {
  using nlohmann::json;
  json specs = json::array();
  for (const auto& spec : manifest.specs) {
    specs.push_back({{"scenario", std::string(to_string(spec.scenario))},
                     {"n_train", spec.n_train},
                     {"n_test", spec.n_test},
                     {"noise_sd", spec.noise_sd},
                     {"p", spec.p()},
                     {"M", spec.M()},
                     {"master_seed", spec.seed}});
  }
  const TrainConfig& tc = manifest.train_config;
  json doc{{"tool", "localma"},
           {"version", version()},
           {"specs", std::move(specs)},
           {"reps", manifest.reps},
           {"workers", manifest.workers},
           {"full_paper_scale", manifest.full_paper_scale},
           {"report", manifest.report_path},
           {"seed_derivation", "world_seed = mix_seed(master_seed, rep_index); "
                               "init_seed = mix_seed(train.seed, world_seed)"},
           {"train",
            {{"hidden_widths", tc.hidden_widths},
             {"learning_rate", tc.learning_rate},
             {"iterations", tc.iterations},
             {"seed", tc.seed},
             {"logit_clamp", tc.logit_clamp},
             {"pin_last_logit", tc.pin_last_logit},
             {"loss", std::string(to_string(tc.loss.kind))},
             {"probability_floor", tc.loss.probability_floor},
             {"optimizer", {{"name", "adam"}, {"beta1", 0.9}, {"beta2", 0.999}, {"epsilon", 1e-8}}},
             {"selection", "best_iterate"}}},
           {"global_weights", {{"solver", "projected_gradient"}, {"max_iters", 10000}, {"tol", 1e-10}}}};
  out << doc.dump(2) << '\n';
}

void save_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_manifest(out, manifest);
}

}  // namespace localma
