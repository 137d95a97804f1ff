#include "rkmpc/config.hpp"

#include <nlohmann/json.hpp>
#include <numbers>

#include "rkmpc/serialization.hpp"

namespace rkmpc::pipeline {

using nlohmann::json;
namespace ser = rkmpc::serialization;

namespace {

json to_json(const plants::DisturbanceSpec& d) {
  return json{{"kind", plants::to_string(d.kind)},
              {"amplitude", d.amplitude},
              {"omega", d.omega},
              {"seed", d.seed},
              {"dwell", d.dwell}};
}

plants::DisturbanceSpec disturbance_from_json(const json& j) {
  plants::DisturbanceSpec d;
  d.kind = plants::disturbance_kind_from_string(j.at("kind").get<std::string>());
  d.amplitude = j.value("amplitude", 0.0);
  d.omega = j.value("omega", 0.0);
  d.seed = j.value("seed", uint64_t{0});
  d.dwell = j.value("dwell", 50);
  return d;
}

}  // namespace

json to_json(const PipelineConfig& c) {
  json centers = json::array();
  for (const Vec& v : c.dictionary.centers) centers.push_back(ser::to_json(v));
  json dists = json::array();
  for (const auto& d : c.simulation.disturbances) dists.push_back(to_json(d));
  return json{
      {"plant", {{"name", c.plant}, {"T", c.T_override}}},
      {"dictionary",
       {{"kind", c.dictionary.kind},
        {"n_psi", c.dictionary.n_psi},
        {"seed", c.dictionary.seed},
        {"includes_state", c.dictionary.includes_state},
        {"degree", c.dictionary.degree},
        {"centers", centers}}},
      {"collect",
       {{"policy", c.collect.policy},
        {"M_fit", c.collect.M_fit},
        {"M_validate", c.collect.M_validate},
        {"seed_fit", c.collect.seed_fit},
        {"seed_validate", c.collect.seed_validate},
        {"u_scale", c.collect.u_scale},
        {"traj_len", c.collect.traj_len},
        {"disturbance", to_json(c.collect.disturbance)}}},
      {"fit",
       {{"alpha", c.fit.alpha},
        {"beta", c.fit.beta},
        {"lipschitz", c.fit.lipschitz},
        {"alpha_s", c.fit.alpha_s},
        {"alpha_u", c.fit.alpha_u},
        {"alpha_w", c.fit.alpha_w},
        {"pair_budget", c.fit.pair_budget},
        {"L_dw", c.fit.L_dw}}},
      {"uncertainty",
       {{"G_bar", c.uncertainty.G_bar},
        {"delta_r", c.uncertainty.delta_r},
        {"gamma_w", c.uncertainty.gamma_w},
        {"gamma_v", c.uncertainty.gamma_v},
        {"growth", c.uncertainty.growth}}},
      {"design",
       {{"mode", c.design.mode},
        {"Q", ser::to_json(c.design.Q)},
        {"Q_tilde", ser::to_json(c.design.Q_tilde)},
        {"R", ser::to_json(c.design.R)},
        {"N", c.design.N},
        {"rpi_alpha_max", c.design.rpi_alpha_max},
        {"rpi_k_max", c.design.rpi_k_max},
        {"margin_X", c.design.margin_X},
        {"margin_U", c.design.margin_U},
        {"reach_cap", c.design.reach_cap}}},
      {"simulation",
       {{"steps", c.simulation.steps},
        {"x0", ser::to_json(c.simulation.x0)},
        {"seeds", c.simulation.seeds},
        {"disturbances", dists},
        {"kmpc_Q_N", ser::to_json(c.simulation.kmpc_Q_N)}}}};
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  c.plant = j.at("plant").at("name").get<std::string>();
  c.T_override = j.at("plant").value("T", 0.0);
  const auto& d = j.at("dictionary");
  c.dictionary.kind = d.at("kind").get<std::string>();
  c.dictionary.n_psi = d.at("n_psi").get<int>();
  c.dictionary.seed = d.at("seed").get<uint64_t>();
  c.dictionary.includes_state = d.value("includes_state", true);
  c.dictionary.degree = d.value("degree", 0);
  if (d.contains("centers"))
    for (const auto& v : d.at("centers")) c.dictionary.centers.push_back(ser::vec_from_json(v));
  const auto& co = j.at("collect");
  c.collect.policy = co.value("policy", "udr");
  c.collect.M_fit = co.at("M_fit").get<int>();
  c.collect.M_validate = co.at("M_validate").get<int>();
  c.collect.seed_fit = co.at("seed_fit").get<uint64_t>();
  c.collect.seed_validate = co.at("seed_validate").get<uint64_t>();
  c.collect.u_scale = co.value("u_scale", 0.2);
  c.collect.traj_len = co.value("traj_len", 200);
  c.collect.disturbance = disturbance_from_json(co.at("disturbance"));
  const auto& f = j.at("fit");
  c.fit.alpha = f.at("alpha").get<double>();
  c.fit.beta = f.at("beta").get<double>();
  c.fit.lipschitz = f.value("lipschitz", true);
  c.fit.alpha_s = f.value("alpha_s", 1e-3);
  c.fit.alpha_u = f.value("alpha_u", 1e-3);
  c.fit.alpha_w = f.value("alpha_w", 1e-3);
  c.fit.pair_budget = f.value("pair_budget", 50000);
  c.fit.L_dw = f.value("L_dw", 0.0);
  const auto& u = j.at("uncertainty");
  c.uncertainty.G_bar = u.at("G_bar").get<double>();
  c.uncertainty.delta_r = u.at("delta_r").get<double>();
  c.uncertainty.gamma_w = u.value("gamma_w", 1.1);
  c.uncertainty.gamma_v = u.value("gamma_v", 1.1);
  c.uncertainty.growth = u.value("growth", 1.1);
  const auto& de = j.at("design");
  c.design.mode = de.at("mode").get<std::string>();
  c.design.Q = ser::mat_from_json(de.at("Q"));
  c.design.Q_tilde = ser::mat_from_json(de.at("Q_tilde"));
  c.design.R = ser::mat_from_json(de.at("R"));
  c.design.N = de.at("N").get<int>();
  c.design.rpi_alpha_max = de.value("rpi_alpha_max", 0.05);
  c.design.rpi_k_max = de.value("rpi_k_max", 200);
  c.design.margin_X = de.value("margin_X", 0.7);
  c.design.margin_U = de.value("margin_U", 0.5);
  c.design.reach_cap = de.value("reach_cap", 60);
  const auto& s = j.at("simulation");
  c.simulation.steps = s.at("steps").get<int>();
  c.simulation.x0 = ser::vec_from_json(s.at("x0"));
  c.simulation.seeds = s.at("seeds").get<std::vector<uint64_t>>();
  for (const auto& dd : s.at("disturbances"))
    c.simulation.disturbances.push_back(disturbance_from_json(dd));
  c.simulation.kmpc_Q_N = ser::mat_from_json(s.value("kmpc_Q_N", json::array()));
  return c;
}

PipelineConfig load_config(const std::string& path) {
  return config_from_json(ser::read_json_file(path));
}

void save_config(const PipelineConfig& c, const std::string& path) {
  ser::write_json_file(path, to_json(c));
}

std::string config_hash(const PipelineConfig& c) {
  return ser::hash_string(to_json(c).dump());
}

PipelineConfig default_config(const std::string& plant_name) {
  PipelineConfig c;
  c.plant = plant_name;
  const double pi = std::numbers::pi;
  if (plant_name == "van_der_pol") {
    c.collect.policy = "udr_rollout";
    c.collect.u_scale = 0.2;
    c.dictionary.kind = "thinplate";
    c.dictionary.n_psi = 4;
    c.dictionary.centers = {(Vec(2) << 0.381, -0.341).finished(),
                            (Vec(2) << 0.267, -0.889).finished()};
    c.collect.disturbance = {plants::DisturbanceKind::udr, 0.4, 10.0 * pi, 11, 50};
    c.design.Q = (Mat(2, 2) << 1, 0, 0, 1).finished();
    c.design.Q_tilde = Vec((Vec(4) << 1, 1, 0.1, 0.1).finished()).asDiagonal();
    c.design.R = Mat::Constant(1, 1, 0.1);
    c.design.N = 10;
    c.simulation.x0 = (Vec(2) << 1.5, -1.5).finished();
    c.simulation.disturbances = {
        {plants::DisturbanceKind::none, 0.0, 0.0, 0, 50},
        {plants::DisturbanceKind::sinusoidal, 0.4, 10.0 * pi, 0, 50},
        {plants::DisturbanceKind::udr, 0.4, 0.0, 1, 50},
        {plants::DisturbanceKind::stepwise, 0.4, 0.0, 2, 50}};
  } else if (plant_name == "inverted_pendulum") {
    c.dictionary.kind = "gaussian";
    c.dictionary.n_psi = 5;
    c.dictionary.centers = {(Vec(2) << -0.644, -1.09).finished(),
                            (Vec(2) << -0.99, 0.76).finished(),
                            (Vec(2) << -0.26, -1.48).finished()};
    c.collect.disturbance = {plants::DisturbanceKind::udr, 2.0, 10.0 * pi, 11, 50};
    c.design.Q = (Mat(2, 2) << 1, 0, 0, 1).finished();
    c.design.Q_tilde = Mat::Identity(5, 5);
    c.design.R = Mat::Constant(1, 1, 0.1);
    c.design.N = 10;
    c.simulation.x0 = (Vec(2) << 0.2, 1.0).finished();
    c.simulation.disturbances = {
        {plants::DisturbanceKind::none, 0.0, 0.0, 0, 50},
        {plants::DisturbanceKind::sinusoidal, 2.0, 10.0 * pi, 0, 50},
        {plants::DisturbanceKind::udr, 2.0, 0.0, 1, 50},
        {plants::DisturbanceKind::stepwise, 2.0, 0.0, 2, 50}};
  } else if (plant_name == "nonaffine") {
    c.collect.policy = "udr_rollout";
    c.collect.u_scale = 0.2;
    c.design.margin_U = 0.15;
    c.dictionary.kind = "polyharmonic";
    c.dictionary.n_psi = 5;
    c.dictionary.seed = 23;  // centers drawn at this seed
    c.collect.disturbance = {plants::DisturbanceKind::udr, 1.0, 10.0 * pi, 11, 50};
    c.design.Q = (Mat(2, 2) << 1, 0, 0, 1).finished();
    c.design.Q_tilde = Mat::Identity(5, 5);
    c.design.R = Mat::Constant(1, 1, 0.1);
    c.design.N = 30;
    c.simulation.x0 = (Vec(2) << 0.6, -1.2).finished();
    c.simulation.disturbances = {
        {plants::DisturbanceKind::none, 0.0, 0.0, 0, 50},
        {plants::DisturbanceKind::sinusoidal, 1.0, 10.0 * pi, 0, 50},
        {plants::DisturbanceKind::udr, 1.0, 0.0, 1, 50},
        {plants::DisturbanceKind::stepwise, 1.0, 0.0, 2, 50}};
  } else {
    throw Error("default_config: unknown plant '" + plant_name + "'");
  }
  c.simulation.seeds.clear();
  for (uint64_t s = 1; s <= 20; ++s) c.simulation.seeds.push_back(s);
  return c;
}

plants::Plant make_plant(const PipelineConfig& c) {
  plants::Plant p = plants::make_plant(c.plant);
  if (c.T_override > 0.0) p.T = c.T_override;
  return p;
}

lifting::Dictionary make_dictionary(const PipelineConfig& c) {
  const plants::Plant p = make_plant(c);
  const auto kind = lifting::kernel_kind_from_string(c.dictionary.kind);
  if (kind == lifting::KernelKind::polynomial) {
    require(c.dictionary.degree >= 1, "config: polynomial dictionary needs a degree");
    return lifting::build_polynomial_dictionary(p.state_dim, c.dictionary.degree,
                                                c.dictionary.includes_state);
  }
  const int n_centers =
      c.dictionary.n_psi - (c.dictionary.includes_state ? p.state_dim : 0);
  require(n_centers >= 0, "config: n_psi smaller than the state block");
  if (!c.dictionary.centers.empty()) {
    require(static_cast<int>(c.dictionary.centers.size()) == n_centers,
            "config: explicit centers must match n_psi");
    lifting::Dictionary d = lifting::build_dictionary(kind, c.dictionary.centers,
                                                      p.state_dim,
                                                      c.dictionary.includes_state);
    d.seed = c.dictionary.seed;
    return d;
  }
  if (n_centers == 0)
    return lifting::build_dictionary(kind, {}, p.state_dim, c.dictionary.includes_state);
  return lifting::random_dictionary(kind, n_centers, p.X, c.dictionary.seed,
                                    c.dictionary.includes_state);
}

control::DesignOptions make_design_options(const PipelineConfig& c,
                                           const edmd::LiftedModel& model) {
  control::DesignOptions opt;
  opt.mode = control::cost_mode_from_string(c.design.mode);
  opt.Q = c.design.Q;
  opt.Q_tilde = c.design.Q_tilde;
  opt.R = c.design.R;
  opt.N = c.design.N;
  opt.rpi_alpha_max = c.design.rpi_alpha_max;
  opt.rpi_k_max = c.design.rpi_k_max;
  opt.margin_X = c.design.margin_X;
  opt.margin_U = c.design.margin_U;
  opt.reach_cap = c.design.reach_cap;
  if (opt.mode == control::CostMode::lifted &&
      opt.Q_tilde.rows() != model.lifted_dim()) {
    throw AssumptionError("config: Q_tilde dimension does not match n_psi");
  }
  return opt;
}

}  // namespace rkmpc::pipeline
