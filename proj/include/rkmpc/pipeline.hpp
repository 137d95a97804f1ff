#pragma once

#include <string>
#include <vector>

#include "rkmpc/config.hpp"
#include "rkmpc/control.hpp"
#include "rkmpc/plants.hpp"
#include "rkmpc/uncertainty.hpp"

namespace rkmpc::pipeline {

/// Offline step 1: collect the fit and validation datasets (disjoint seeds).
/// Returns the two file paths written under out_dir.
std::pair<std::string, std::string> cmd_collect(const PipelineConfig& cfg,
                                                const std::string& out_dir);

/// Offline step 2: fit the lifted model and gate on the stabilizability /
/// observability check (bypassed by force, recorded in the artifact).
std::string cmd_identify(const PipelineConfig& cfg, const std::string& dataset_path,
                         const std::string& out_dir, bool force = false);

/// Offline step 3: residual extraction and the grow-and-validate loop.
std::string cmd_validate(const PipelineConfig& cfg, const std::string& model_path,
                         const std::string& dataset_path, const std::string& out_dir);

/// Offline steps 4-5: gain, terminal cost, tube and terminal sets.
std::string cmd_design(const PipelineConfig& cfg, const std::string& model_path,
                       const std::string& sets_path, const std::string& out_dir);

struct RunSummary {
  std::string plant, disturbance, controller;
  uint64_t seed = 0;
  double J = 0.0;
  double tube_ok_fraction = 0.0;
  int infeasible_steps = 0;
  int steps = 0;
  bool aborted = false;
  std::string trace_file;
};

/// Online loop over the simulation matrix; optionally also the KMPC baseline
/// with matched weights. Writes trace CSVs and a summary JSON; returns the
/// summary path.
std::string cmd_simulate(const PipelineConfig& cfg, const std::string& controller_path,
                         const std::string& out_dir, bool baseline_kmpc = false,
                         bool dump_qp = false);

/// Aggregates summary files into a cost-comparison table (markdown + CSV).
std::string cmd_report(const std::vector<std::string>& summary_paths,
                       const std::string& out_dir);

/// In-process convenience used by tests: the full chain on one config.
struct PipelineArtifacts {
  std::string dataset_fit, dataset_validate, model, sets, controller, summary, report;
};
PipelineArtifacts run_full_pipeline(const PipelineConfig& cfg, const std::string& out_dir,
                                    bool baseline_kmpc = false);

plants::Controller make_tube_adapter(control::TubeController& ctrl);
plants::Controller make_kmpc_adapter(control::KmpcController& ctrl);

}  // namespace rkmpc::pipeline
