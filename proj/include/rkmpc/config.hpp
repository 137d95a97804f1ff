#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "rkmpc/control.hpp"
#include "rkmpc/plants.hpp"
#include "rkmpc/types.hpp"

namespace rkmpc::pipeline {

struct DictionarySpec {
  std::string kind = "thinplate";
  int n_psi = 4;
  uint64_t seed = 7;
  bool includes_state = true;
  int degree = 0;                 // polynomial kind
  std::vector<Vec> centers;       // explicit centers override the seed draw
};

struct CollectSpec {
  std::string policy = "udr";  // "udr" (restart-per-sample) | "udr_rollout"
  int M_fit = 50000;
  int M_validate = 10000;
  uint64_t seed_fit = 101;
  uint64_t seed_validate = 202;
  double u_scale = 0.2;  // rollout excitation as a fraction of U
  int traj_len = 200;    // rollout segment length
  plants::DisturbanceSpec disturbance;
};

struct FitSpec {
  double alpha = 1e-6;
  double beta = 1e-8;
  bool lipschitz = true;
  double alpha_s = 1e-3;
  double alpha_u = 1e-3;
  double alpha_w = 1e-3;
  int pair_budget = 50000;
  double L_dw = 0.0;
};

struct UncertaintySpec {
  double G_bar = 0.05;
  double delta_r = 0.01;
  double gamma_w = 1.1;
  double gamma_v = 1.1;
  double growth = 1.1;
};

struct DesignSpec {
  std::string mode = "lifted";
  Mat Q;        // n x n, used for trajectory costs and the KMPC baseline
  Mat Q_tilde;  // n_psi x n_psi
  Mat R;
  int N = 10;
  double rpi_alpha_max = 0.05;
  int rpi_k_max = 200;
  double margin_X = 0.7;
  double margin_U = 0.5;
  int reach_cap = 60;
};

struct SimulationSpec {
  int steps = 400;
  Vec x0;
  std::vector<uint64_t> seeds = {1};
  std::vector<plants::DisturbanceSpec> disturbances;
  Mat kmpc_Q_N;  // defaults to Q when empty
};

struct PipelineConfig {
  std::string plant = "van_der_pol";
  double T_override = 0.0;  // 0 keeps the plant default
  DictionarySpec dictionary;
  CollectSpec collect;
  FitSpec fit;
  UncertaintySpec uncertainty;
  DesignSpec design;
  SimulationSpec simulation;
};

nlohmann::json to_json(const PipelineConfig& c);
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::string& path);
void save_config(const PipelineConfig& c, const std::string& path);
std::string config_hash(const PipelineConfig& c);

/// Paper-matched defaults for the three benchmarks.
PipelineConfig default_config(const std::string& plant_name);

plants::Plant make_plant(const PipelineConfig& c);
lifting::Dictionary make_dictionary(const PipelineConfig& c);
control::DesignOptions make_design_options(const PipelineConfig& c,
                                           const edmd::LiftedModel& model);

}  // namespace rkmpc::pipeline
