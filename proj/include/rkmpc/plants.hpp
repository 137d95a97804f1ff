#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rkmpc/edmd.hpp"
#include "rkmpc/geometry.hpp"
#include "rkmpc/types.hpp"

namespace rkmpc::plants {

/// Continuous-time benchmark plant xdot = f_c(x, u) + w_o, sampled with
/// period T under zero-order-hold inputs.
struct Plant {
  std::string name;
  int state_dim = 0;
  int input_dim = 0;
  std::function<Vec(const Vec&, const Vec&)> f_c;
  geometry::HPolytope X, U;
  double T = 0.01;
};

/// Benchmarks: "van_der_pol", "inverted_pendulum", "nonaffine".
Plant make_plant(const std::string& name);
std::vector<std::string> plant_names();

enum class DisturbanceKind { none, sinusoidal, udr, stepwise };

std::string to_string(DisturbanceKind k);
DisturbanceKind disturbance_kind_from_string(const std::string& s);

/// Additive disturbance generator. Sinusoidal is continuous in t; udr draws a
/// fresh uniform level every step; stepwise holds a uniform level for `dwell`
/// steps. All components share the scalar level, so ||w||_inf <= amplitude.
struct DisturbanceSpec {
  DisturbanceKind kind = DisturbanceKind::none;
  double amplitude = 0.0;
  double omega = 0.0;  // rad/s, sinusoidal
  uint64_t seed = 0;
  int dwell = 50;

  Vec value(int dim, double t, int step_index) const;
};

/// Classical RK4 over [t, t + plant.T] with u held constant and the
/// disturbance evaluated at stage times.
Vec rk4_step(const Plant& plant, const Vec& x, const Vec& u,
             const std::function<Vec(double)>& w_fn, double t);

/// Restart-per-sample data collection: x ~ U(X), u ~ U(U) i.i.d. per tuple,
/// one integration step each; the recorded w_hat is the integrated
/// disturbance increment, so x+ = f_T(x, u) + w_hat holds exactly.
edmd::Dataset collect_data(const Plant& plant, int M, uint64_t seed,
                           const DisturbanceSpec& disturbance,
                           const std::string& tag = "fit");

/// Trajectory-rollout variant of the UDR policy: segments evolve under
/// u_k ~ U(u_scale * U) and restart from a fresh uniform state when they
/// leave X or reach traj_len steps. This realizes the ergodic sampling
/// alternative and concentrates tuples where the dynamics actually dwell.
edmd::Dataset collect_data_rollout(const Plant& plant, int M, uint64_t seed,
                                   const DisturbanceSpec& disturbance,
                                   double u_scale = 0.2, int traj_len = 200,
                                   const std::string& tag = "fit");

struct StepRecord {
  double t = 0.0;
  Vec x, s, x_hat, s_hat, u, u_hat, w_o;
  double stage_cost = 0.0;
  std::string qp_status;
  bool tube_ok = false;
  double v_opt = 0.0;
  double nominal_stage = 0.0;
};

struct SimulationTrace {
  std::vector<StepRecord> steps;
  double J = 0.0;  // sum ||x_k||_Q^2 + ||u_k||_R^2 over the run
  std::string label;
  bool aborted = false;  // integrator divergence

  void save_csv(const std::string& path, const std::string& provenance = "") const;
};

/// Controller interface for the closed loop.
struct ControlDecision {
  Vec u, u_hat, s_hat, s, x_hat;
  std::string qp_status = "optimal";
  bool tube_ok = true;
  double v_opt = 0.0;
  double nominal_stage = 0.0;
};
using Controller = std::function<ControlDecision(const Vec& x)>;

SimulationTrace simulate_closed_loop(const Plant& plant, const Controller& controller,
                                     const Vec& x0, int steps,
                                     const DisturbanceSpec& disturbance,
                                     const Mat& cost_Q, const Mat& cost_R);

}  // namespace rkmpc::plants
