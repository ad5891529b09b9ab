#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "localma/model.hpp"
#include "localma/scenarios.hpp"
#include "localma/study.hpp"

namespace localma {

/// Library version string.
std::string version();

/// CSV with columns scenario,n,method,metric,mean,stderr,reps,note. `note` is
/// "single_rep" when the standard error is degenerate (reps == 1).
void write_report(std::ostream& out, const StudyReport& report);
void save_report(const std::filesystem::path& path, const StudyReport& report);

/// Per-replication rows: scenario,n,rep,world_seed,method,metric,value.
void write_replications(std::ostream& out, const StudyReport& report);

struct RunManifest {
  std::vector<ScenarioSpec> specs;
  TrainConfig train_config;
  int reps = 0;
  int workers = 1;
  bool full_paper_scale = false;
  std::string report_path;
};

/// JSON document recording every input that determines the report.
void write_manifest(std::ostream& out, const RunManifest& manifest);
void save_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace localma
