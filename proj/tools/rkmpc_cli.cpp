// Pipeline driver: collect -> identify -> validate -> design -> simulate -> report.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "rkmpc/pipeline.hpp"
#include "rkmpc/serialization.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{"robust tube-based Koopman MPC pipeline"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", dataset_path, model_path, sets_path,
              controller_path, plant = "van_der_pol";
  std::vector<std::string> summary_paths;
  bool force = false, dump_qp = false;
  std::string baseline;
  int64_t seed_override = -1;

  auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
    if (needs_config)
      cmd->add_option("--config", config_path, "pipeline config JSON")->required();
    cmd->add_option("--out-dir", out_dir, "output directory");
    cmd->add_option("--seed-override", seed_override,
                    "replace every configured seed with this value");
  };

  auto* c_init = app.add_subcommand("init-config", "write a default config for a plant");
  c_init->add_option("--plant", plant, "van_der_pol | inverted_pendulum | nonaffine");
  c_init->add_option("--out-dir", out_dir, "output directory");

  auto* c_collect = app.add_subcommand("collect", "collect fit/validation datasets");
  add_common(c_collect);

  auto* c_identify = app.add_subcommand("identify", "fit the lifted model");
  add_common(c_identify);
  c_identify->add_option("--dataset", dataset_path, "fit dataset CSV")->required();
  c_identify->add_flag("--force", force, "emit the model even if the check fails");

  auto* c_validate = app.add_subcommand("validate", "estimate and validate W_bar, V");
  add_common(c_validate);
  c_validate->add_option("--model", model_path, "model JSON")->required();
  c_validate->add_option("--dataset", dataset_path, "validation dataset CSV")->required();

  auto* c_design = app.add_subcommand("design", "offline controller design");
  add_common(c_design);
  c_design->add_option("--model", model_path, "model JSON")->required();
  c_design->add_option("--sets", sets_path, "sets JSON")->required();

  auto* c_simulate = app.add_subcommand("simulate", "closed-loop simulation matrix");
  add_common(c_simulate);
  c_simulate->add_option("--controller", controller_path, "controller JSON")->required();
  c_simulate->add_option("--baseline", baseline, "also run a baseline: kmpc");
  c_simulate->add_flag("--dump-qp", dump_qp, "dump the failing QP on infeasibility");

  auto* c_report = app.add_subcommand("report", "aggregate summaries into cost tables");
  c_report->add_option("--summary", summary_paths, "summary JSON files");
  c_report->add_option("--out-dir", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  auto load = [&]() {
    rkmpc::pipeline::PipelineConfig cfg = rkmpc::pipeline::load_config(config_path);
    if (seed_override >= 0) {
      const auto s = static_cast<uint64_t>(seed_override);
      cfg.collect.seed_fit = s;
      cfg.collect.seed_validate = s + 1;
      cfg.collect.disturbance.seed = s + 2;
      cfg.dictionary.seed = s + 3;
      cfg.simulation.seeds = {s};
    }
    return cfg;
  };

  if (*c_init) {
    const auto cfg = rkmpc::pipeline::default_config(plant);
    const std::string path = out_dir + "/" + plant + ".json";
    rkmpc::pipeline::save_config(cfg, path);
    std::printf("wrote %s\n", path.c_str());
  } else if (*c_collect) {
    auto [fit, val] = rkmpc::pipeline::cmd_collect(load(), out_dir);
    std::printf("wrote %s\nwrote %s\n", fit.c_str(), val.c_str());
  } else if (*c_identify) {
    const std::string out = rkmpc::pipeline::cmd_identify(load(), dataset_path, out_dir, force);
    std::printf("wrote %s\n", out.c_str());
  } else if (*c_validate) {
    const std::string out =
        rkmpc::pipeline::cmd_validate(load(), model_path, dataset_path, out_dir);
    std::printf("wrote %s\n", out.c_str());
  } else if (*c_design) {
    const std::string out = rkmpc::pipeline::cmd_design(load(), model_path, sets_path, out_dir);
    const auto j = rkmpc::serialization::read_json_file(out);
    std::printf("wrote %s\n", out.c_str());
    std::printf("tube kind: %s, rho_E: %s\n",
                j.at("sets").at("tube_kind").get<std::string>().c_str(),
                j.at("rho_E").is_null() ? "n/a" : j.at("rho_E").dump().c_str());
  } else if (*c_simulate) {
    if (!baseline.empty() && baseline != "kmpc")
      throw rkmpc::Error("unknown baseline: " + baseline);
    const std::string out = rkmpc::pipeline::cmd_simulate(load(), controller_path,
                                                          out_dir, baseline == "kmpc",
                                                          dump_qp);
    std::printf("wrote %s\n", out.c_str());
  } else if (*c_report) {
    const std::string out = rkmpc::pipeline::cmd_report(summary_paths, out_dir);
    std::printf("wrote %s\n", out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const rkmpc::InfeasibilityError& e) {
    std::fprintf(stderr, "infeasibility: %s\n", e.what());
    return 3;
  } catch (const rkmpc::AssumptionError& e) {
    std::fprintf(stderr, "assumption failure: %s\n", e.what());
    return 2;
  } catch (const rkmpc::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
