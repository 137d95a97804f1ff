#include "rkmpc/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "rkmpc/serialization.hpp"

namespace rkmpc::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
namespace ser = rkmpc::serialization;

namespace {

std::string path_join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

}  // namespace

std::pair<std::string, std::string> cmd_collect(const PipelineConfig& cfg,
                                                const std::string& out_dir) {
  require(cfg.collect.M_fit >= 1 && cfg.collect.M_validate >= 1,
          "collect: M must be >= 1");
  ensure_dir(out_dir);
  const plants::Plant plant = make_plant(cfg);
  const std::string chash = "config=" + config_hash(cfg);

  const bool rollout = cfg.collect.policy == "udr_rollout";
  require(rollout || cfg.collect.policy == "udr",
          "collect: unknown policy '" + cfg.collect.policy + "'");
  auto grab = [&](int M, uint64_t seed, const std::string& tag) {
    return rollout ? plants::collect_data_rollout(plant, M, seed,
                                                  cfg.collect.disturbance,
                                                  cfg.collect.u_scale,
                                                  cfg.collect.traj_len, tag)
                   : plants::collect_data(plant, M, seed, cfg.collect.disturbance, tag);
  };
  edmd::Dataset fit = grab(cfg.collect.M_fit, cfg.collect.seed_fit, "fit");
  const std::string fit_path = path_join(out_dir, "dataset_fit.csv");
  fit.save_csv(fit_path, chash);

  edmd::Dataset val = grab(cfg.collect.M_validate, cfg.collect.seed_validate, "validate");
  const std::string val_path = path_join(out_dir, "dataset_validate.csv");
  val.save_csv(val_path, chash);
  return {fit_path, val_path};
}

std::string cmd_identify(const PipelineConfig& cfg, const std::string& dataset_path,
                         const std::string& out_dir, bool force) {
  ensure_dir(out_dir);
  edmd::Dataset ds = edmd::Dataset::load_csv(dataset_path);
  require(ds.tag == "fit", "identify: expected a dataset tagged 'fit', got '" +
                               ds.tag + "'");
  const lifting::Dictionary dict = make_dictionary(cfg);
  edmd::LiftedModel model =
      edmd::fit_model(ds, dict, cfg.fit.alpha, cfg.fit.beta, cfg.fit.lipschitz,
                      cfg.fit.alpha_s, cfg.fit.alpha_u, cfg.fit.alpha_w,
                      cfg.fit.pair_budget, cfg.fit.L_dw);
  const edmd::ModelCheckReport check = edmd::check_model(model);
  if (!check.pass() && !force) {
    throw AssumptionError(
        "identify: model fails the stabilizability/observability check (" +
        check.detail + "); re-run with --force to emit it anyway");
  }
  json j = ser::to_json(model);
  j["check"] = {{"stabilizable", check.stabilizable},
                {"observable", check.observable},
                {"spectral_radius", check.spectral_radius},
                {"psi0_norm", check.psi0_norm},
                {"forced", !check.pass() && force}};
  j["provenance"] = {{"config", config_hash(cfg)},
                     {"dataset", ser::hash_file(dataset_path)}};
  const std::string out = path_join(out_dir, "model.json");
  ser::write_json_file(out, j);
  return out;
}

std::string cmd_validate(const PipelineConfig& cfg, const std::string& model_path,
                         const std::string& dataset_path, const std::string& out_dir) {
  ensure_dir(out_dir);
  const json mj = ser::read_json_file(model_path);
  edmd::LiftedModel model = ser::model_from_json(mj);
  edmd::Dataset ds = edmd::Dataset::load_csv(dataset_path);
  require(ds.tag != model.meta.dataset_tag || ds.seed != model.meta.dataset_seed,
          "validate: the validation dataset must be disjoint from the fit dataset "
          "(split tags match)");
  uncertainty::Residuals res = uncertainty::residuals(model, ds);
  uncertainty::EstimatedSets sets = uncertainty::estimate_sets(
      res, cfg.uncertainty.G_bar, cfg.uncertainty.delta_r, cfg.uncertainty.gamma_w,
      cfg.uncertainty.gamma_v, cfg.uncertainty.growth);
  json j{{"W_bar", ser::to_json(sets.W_bar)},
         {"V", ser::to_json(sets.V)},
         {"report", ser::to_json(sets.report)},
         {"grow_iterations", sets.grow_iterations},
         {"provenance",
          {{"config", config_hash(cfg)},
           {"model", ser::hash_file(model_path)},
           {"dataset", ser::hash_file(dataset_path)}}}};
  const std::string out = path_join(out_dir, "sets.json");
  ser::write_json_file(out, j);
  return out;
}

std::string cmd_design(const PipelineConfig& cfg, const std::string& model_path,
                       const std::string& sets_path, const std::string& out_dir) {
  ensure_dir(out_dir);
  edmd::LiftedModel model = ser::model_from_json(ser::read_json_file(model_path));
  const json sj = ser::read_json_file(sets_path);
  const geometry::Zonotope W_bar = ser::zonotope_from_json(sj.at("W_bar"));
  const geometry::Zonotope V = ser::zonotope_from_json(sj.at("V"));
  const plants::Plant plant = make_plant(cfg);
  control::DesignOptions opt = make_design_options(cfg, model);
  control::TubeController ctrl =
      control::design_controller(model, W_bar, V, plant.X, plant.U, opt);
  json j = ser::to_json(ctrl);
  j["provenance"] = {{"config", config_hash(cfg)},
                     {"model", ser::hash_file(model_path)},
                     {"sets", ser::hash_file(sets_path)}};
  const std::string out = path_join(out_dir, "controller.json");
  ser::write_json_file(out, j);
  return out;
}

plants::Controller make_tube_adapter(control::TubeController& ctrl) {
  return [&ctrl](const Vec& x) {
    control::StepResult r = control::step(ctrl, x);
    plants::ControlDecision d;
    d.u = r.u;
    d.u_hat = r.u_hat;
    d.s_hat = r.s_hat;
    d.s = r.s;
    d.x_hat = ctrl.model.C * r.s_hat;
    d.qp_status = qp::to_string(r.qp_status);
    d.tube_ok = r.tube_ok;
    d.v_opt = r.optimal_cost;
    d.nominal_stage = r.nominal_stage;
    return d;
  };
}

plants::Controller make_kmpc_adapter(control::KmpcController& ctrl) {
  return [&ctrl](const Vec& x) {
    control::KmpcStepResult r = control::kmpc_step(ctrl, x);
    plants::ControlDecision d;
    d.u = r.u;
    d.u_hat = r.u;
    d.s = lifting::lift(ctrl.model.dictionary, x);
    d.s_hat = d.s;
    d.x_hat = ctrl.model.C * d.s;
    d.qp_status = qp::to_string(r.qp_status);
    d.tube_ok = true;  // the baseline has no tube
    return d;
  };
}

std::string cmd_simulate(const PipelineConfig& cfg, const std::string& controller_path,
                         const std::string& out_dir, bool baseline_kmpc, bool dump_qp) {
  ensure_dir(out_dir);
  const json cj = ser::read_json_file(controller_path);
  const plants::Plant plant = make_plant(cfg);
  const std::string chash = config_hash(cfg);
  const Mat cost_Q = cfg.design.Q;
  const Mat cost_R = cfg.design.R;
  const Mat Q_N = cfg.simulation.kmpc_Q_N.size() > 0 ? cfg.simulation.kmpc_Q_N
                                                     : cfg.design.Q;

  json runs = json::array();
  for (const auto& dist0 : cfg.simulation.disturbances) {
    for (uint64_t seed : cfg.simulation.seeds) {
      plants::DisturbanceSpec dist = dist0;
      dist.seed = seed;
      const std::string dist_name = plants::to_string(dist.kind);

      // fresh controller per run: the warm-start cache is run-local state
      control::TubeController ctrl = ser::controller_from_json(cj);
      ctrl.options.qp.max_iter = 200000;
      RunSummary rs;
      rs.plant = cfg.plant;
      rs.disturbance = dist_name;
      rs.controller = "r-kmpc";
      rs.seed = seed;
      std::ostringstream name;
      name << "trace_rkmpc_" << dist_name << "_seed" << seed << ".csv";
      try {
        plants::SimulationTrace tr = plants::simulate_closed_loop(
            plant, make_tube_adapter(ctrl), cfg.simulation.x0, cfg.simulation.steps,
            dist, cost_Q, cost_R);
        tr.label = "r-kmpc/" + cfg.plant + "/" + dist_name;
        rs.J = tr.J;
        rs.steps = static_cast<int>(tr.steps.size());
        rs.aborted = tr.aborted;
        int ok = 0;
        for (const auto& s : tr.steps) ok += s.tube_ok ? 1 : 0;
        rs.tube_ok_fraction = tr.steps.empty() ? 1.0 : double(ok) / tr.steps.size();
        rs.trace_file = name.str();
        tr.save_csv(path_join(out_dir, name.str()), "config=" + chash);
      } catch (const InfeasibilityError& e) {
        if (dump_qp) {
          const Vec s = lifting::lift(ctrl.model.dictionary, cfg.simulation.x0);
          ser::write_json_file(path_join(out_dir, "failed_qp.json"),
                               ser::to_json(ctrl.condensed.problem(s)));
        }
        throw;
      }
      runs.push_back({{"plant", rs.plant},
                      {"disturbance", rs.disturbance},
                      {"controller", rs.controller},
                      {"seed", rs.seed},
                      {"J", rs.J},
                      {"tube_ok_fraction", rs.tube_ok_fraction},
                      {"infeasible_steps", rs.infeasible_steps},
                      {"steps", rs.steps},
                      {"aborted", rs.aborted},
                      {"trace_file", rs.trace_file}});

      if (baseline_kmpc) {
        edmd::LiftedModel model = ser::model_from_json(cj.at("model"));
        control::KmpcController km = control::design_kmpc(
            model, cfg.design.N, cost_Q, cost_R, Q_N, plant.X, plant.U);
        std::ostringstream bname;
        bname << "trace_kmpc_" << dist_name << "_seed" << seed << ".csv";
        plants::SimulationTrace tr = plants::simulate_closed_loop(
            plant, make_kmpc_adapter(km), cfg.simulation.x0, cfg.simulation.steps,
            dist, cost_Q, cost_R);
        tr.label = "kmpc/" + cfg.plant + "/" + dist_name;
        int infeas = 0;
        for (const auto& s : tr.steps)
          infeas += (s.qp_status != "optimal") ? 1 : 0;
        tr.save_csv(path_join(out_dir, bname.str()), "config=" + chash);
        runs.push_back({{"plant", cfg.plant},
                        {"disturbance", dist_name},
                        {"controller", "kmpc"},
                        {"seed", seed},
                        {"J", tr.J},
                        {"tube_ok_fraction", 1.0},
                        {"infeasible_steps", infeas},
                        {"steps", static_cast<int>(tr.steps.size())},
                        {"aborted", tr.aborted},
                        {"trace_file", bname.str()}});
      }
    }
  }
  json j{{"runs", runs},
         {"provenance",
          {{"config", chash}, {"controller", ser::hash_file(controller_path)}}}};
  const std::string out = path_join(out_dir, "summary.json");
  ser::write_json_file(out, j);
  return out;
}

std::string cmd_report(const std::vector<std::string>& summary_paths,
                       const std::string& out_dir) {
  ensure_dir(out_dir);
  struct Cell {
    double J_sum = 0.0;
    int count = 0;
  };
  std::map<std::string, std::map<std::string, std::map<std::string, Cell>>> table;
  json upstream = json::array();
  for (const auto& path : summary_paths) {
    const json j = ser::read_json_file(path);
    upstream.push_back(ser::hash_file(path));
    for (const auto& run : j.at("runs")) {
      Cell& cell = table[run.at("plant").get<std::string>()]
                        [run.at("disturbance").get<std::string>()]
                        [run.at("controller").get<std::string>()];
      cell.J_sum += run.at("J").get<double>();
      cell.count += 1;
    }
  }

  std::ostringstream md;
  std::ostringstream csv;
  md << "# Cumulative cost comparison\n\n";
  csv << "plant,disturbance,controller,J_mean,J_total,runs\n";
  for (const auto& [plant, dists] : table) {
    md << "## " << plant << "\n\n";
    md << "| disturbance | J(r-KMPC) | J(KMPC) |\n|---|---|---|\n";
    for (const auto& [dist, ctrls] : dists) {
      auto fmt = [&](const char* key) -> std::string {
        auto it = ctrls.find(key);
        if (it == ctrls.end() || it->second.count == 0) return "--";
        std::ostringstream v;
        v << it->second.J_sum / it->second.count;
        return v.str();
      };
      md << "| " << dist << " | " << fmt("r-kmpc") << " | " << fmt("kmpc") << " |\n";
      for (const auto& [ctrl, cell] : ctrls)
        csv << plant << "," << dist << "," << ctrl << ","
            << cell.J_sum / std::max(1, cell.count) << "," << cell.J_sum << ","
            << cell.count << "\n";
    }
    md << "\n";
  }

  const std::string md_path = path_join(out_dir, "report.md");
  std::ofstream mdf(md_path);
  if (!mdf) throw IoError("cannot open for writing: " + md_path);
  mdf << md.str();
  const std::string csv_path = path_join(out_dir, "report.csv");
  std::ofstream csvf(csv_path);
  if (!csvf) throw IoError("cannot open for writing: " + csv_path);
  csvf << csv.str();
  return md_path;
}

PipelineArtifacts run_full_pipeline(const PipelineConfig& cfg, const std::string& out_dir,
                                    bool baseline_kmpc) {
  PipelineArtifacts a;
  auto [fit, val] = cmd_collect(cfg, out_dir);
  a.dataset_fit = fit;
  a.dataset_validate = val;
  a.model = cmd_identify(cfg, fit, out_dir);
  a.sets = cmd_validate(cfg, a.model, val, out_dir);
  a.controller = cmd_design(cfg, a.model, a.sets, out_dir);
  a.summary = cmd_simulate(cfg, a.controller, out_dir, baseline_kmpc);
  a.report = cmd_report({a.summary}, out_dir);
  return a;
}

}  // namespace rkmpc::pipeline
