#include "rkmpc/serialization.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace rkmpc::serialization {

json to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Mat mat_from_json(const json& j) {
  const int r = static_cast<int>(j.size());
  if (r == 0) return Mat(0, 0);
  const int c = static_cast<int>(j.at(0).size());
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < c; ++k) m(i, k) = j.at(i).at(k).get<double>();
  return m;
}

Vec vec_from_json(const json& j) {
  Vec v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

json to_json(const geometry::Zonotope& z) {
  json gens = json::array();
  for (int g = 0; g < z.num_generators(); ++g)
    gens.push_back(to_json(Vec(z.generators.col(g))));
  return json{{"kind", "zonotope"}, {"center", to_json(z.center)}, {"generators", gens}};
}

geometry::Zonotope zonotope_from_json(const json& j) {
  require(j.at("kind") == "zonotope", "zonotope_from_json: wrong kind");
  const Vec c = vec_from_json(j.at("center"));
  const auto& gens = j.at("generators");
  Mat G(c.size(), static_cast<int>(gens.size()));
  for (int g = 0; g < G.cols(); ++g) G.col(g) = vec_from_json(gens.at(g));
  return geometry::Zonotope(c, G);
}

json to_json(const geometry::HPolytope& p) {
  return json{{"kind", "hpolytope"}, {"A", to_json(p.A)}, {"b", to_json(p.b)}};
}

geometry::HPolytope hpolytope_from_json(const json& j) {
  require(j.at("kind") == "hpolytope", "hpolytope_from_json: wrong kind");
  return geometry::HPolytope(mat_from_json(j.at("A")), vec_from_json(j.at("b")));
}

json to_json(const lifting::Dictionary& d) {
  json centers = json::array();
  for (const Vec& c : d.centers) centers.push_back(to_json(c));
  return json{{"kind", lifting::to_string(d.kind)},
              {"state_dim", d.state_dim},
              {"includes_state", d.includes_state},
              {"centers", centers},
              {"poly_exponents", d.poly_exponents},
              {"offsets", to_json(d.offsets)},
              {"seed", d.seed}};
}

lifting::Dictionary dictionary_from_json(const json& j) {
  const auto kind = lifting::kernel_kind_from_string(j.at("kind").get<std::string>());
  const int n = j.at("state_dim").get<int>();
  const bool inc = j.at("includes_state").get<bool>();
  lifting::Dictionary d;
  if (kind == lifting::KernelKind::polynomial) {
    d.kind = kind;
    d.state_dim = n;
    d.includes_state = inc;
    d.poly_exponents = j.at("poly_exponents").get<std::vector<std::vector<int>>>();
    d.offsets = Vec::Zero(static_cast<int>(d.poly_exponents.size()));
  } else {
    std::vector<Vec> centers;
    for (const auto& c : j.at("centers")) centers.push_back(vec_from_json(c));
    d = lifting::build_dictionary(kind, centers, n, inc);
  }
  d.seed = j.at("seed").get<uint64_t>();
  return d;
}

json to_json(const edmd::LiftedModel& m) {
  json j{{"A", to_json(m.A)},
         {"B", to_json(m.B)},
         {"C", to_json(m.C)},
         {"D", to_json(m.D)},
         {"dictionary", to_json(m.dictionary)},
         {"meta",
          {{"alpha", m.meta.alpha},
           {"beta", m.meta.beta},
           {"sample_count", m.meta.sample_count},
           {"residual_rms", m.meta.residual_rms},
           {"output_residual_rms", m.meta.output_residual_rms},
           {"dataset_tag", m.meta.dataset_tag},
           {"dataset_seed", m.meta.dataset_seed}}}};
  if (m.lipschitz) {
    j["lipschitz"] = {{"L_s", m.lipschitz->L_s},
                      {"L_u", m.lipschitz->L_u},
                      {"L_dw", m.lipschitz->L_dw},
                      {"L_what", m.lipschitz->L_what}};
  } else {
    j["lipschitz"] = nullptr;
  }
  return j;
}

edmd::LiftedModel model_from_json(const json& j) {
  edmd::LiftedModel m;
  m.A = mat_from_json(j.at("A"));
  m.B = mat_from_json(j.at("B"));
  m.C = mat_from_json(j.at("C"));
  m.D = mat_from_json(j.at("D"));
  m.dictionary = dictionary_from_json(j.at("dictionary"));
  const auto& meta = j.at("meta");
  m.meta.alpha = meta.at("alpha").get<double>();
  m.meta.beta = meta.at("beta").get<double>();
  m.meta.sample_count = meta.at("sample_count").get<int>();
  m.meta.residual_rms = meta.at("residual_rms").get<double>();
  m.meta.output_residual_rms = meta.at("output_residual_rms").get<double>();
  m.meta.dataset_tag = meta.at("dataset_tag").get<std::string>();
  m.meta.dataset_seed = meta.at("dataset_seed").get<uint64_t>();
  if (!j.at("lipschitz").is_null()) {
    edmd::LipschitzEstimates le;
    le.L_s = j.at("lipschitz").at("L_s").get<double>();
    le.L_u = j.at("lipschitz").at("L_u").get<double>();
    le.L_dw = j.at("lipschitz").at("L_dw").get<double>();
    le.L_what = j.at("lipschitz").at("L_what").get<double>();
    m.lipschitz = le;
  }
  return m;
}

json to_json(const uncertainty::ValidationReport& r) {
  return json{{"empirical_risk_w", r.empirical_risk_w},
              {"empirical_risk_v", r.empirical_risk_v},
              {"epsilon", r.epsilon},
              {"passed_w", r.passed_w},
              {"passed_v", r.passed_v},
              {"L", r.L},
              {"delta_r", r.delta_r},
              {"G_bar_w", r.G_bar_w},
              {"G_bar_v", r.G_bar_v},
              {"gamma_w", r.gamma_w},
              {"gamma_v", r.gamma_v}};
}

uncertainty::ValidationReport validation_report_from_json(const json& j) {
  uncertainty::ValidationReport r;
  r.empirical_risk_w = j.at("empirical_risk_w").get<double>();
  r.empirical_risk_v = j.at("empirical_risk_v").get<double>();
  r.epsilon = j.at("epsilon").get<double>();
  r.passed_w = j.at("passed_w").get<bool>();
  r.passed_v = j.at("passed_v").get<bool>();
  r.L = j.at("L").get<int>();
  r.delta_r = j.at("delta_r").get<double>();
  r.G_bar_w = j.at("G_bar_w").get<double>();
  r.G_bar_v = j.at("G_bar_v").get<double>();
  r.gamma_w = j.at("gamma_w").get<double>();
  r.gamma_v = j.at("gamma_v").get<double>();
  return r;
}

json to_json(const qp::QpProblem& p) {
  return json{{"H", to_json(p.H)},
              {"f", to_json(p.f)},
              {"A_in", to_json(p.A_in)},
              {"b_in", to_json(p.b_in)}};
}

qp::QpProblem qp_problem_from_json(const json& j) {
  return qp::QpProblem(mat_from_json(j.at("H")), vec_from_json(j.at("f")),
                       mat_from_json(j.at("A_in")), vec_from_json(j.at("b_in")));
}

json to_json(const control::TubeController& c) {
  return json{{"model", to_json(c.model)},
              {"K", to_json(c.K)},
              {"P", to_json(c.P)},
              {"sets",
               {{"Z_s", to_json(c.sets.tubes.state_tube)},
                {"Z_x", to_json(c.sets.tubes.output_tube)},
                {"S", to_json(c.sets.S)},
                {"U_hat", to_json(c.sets.U_hat)},
                {"S_f", to_json(c.sets.S_f)},
                {"tube_hrep", to_json(c.sets.tube_hrep)},
                {"tube_kind", c.sets.tube_kind},
                {"rpi_certificate_slack", c.sets.rpi_certificate_slack}}},
              {"N", c.options.N},
              {"weights",
               {{"mode", control::to_string(c.options.mode)},
                {"Q", to_json(c.options.Q)},
                {"Q_tilde", to_json(c.options.Q_tilde)},
                {"R", to_json(c.options.R)}}},
              {"rpi_alpha_max", c.options.rpi_alpha_max},
              {"rpi_k_max", c.options.rpi_k_max},
              {"lyapunov_residual", c.lyapunov_residual},
              {"rho_E", c.rho_E}};
}

control::TubeController controller_from_json(const json& j) {
  control::TubeController c;
  c.model = model_from_json(j.at("model"));
  c.K = mat_from_json(j.at("K"));
  c.P = mat_from_json(j.at("P"));
  const auto& s = j.at("sets");
  c.sets.tubes.state_tube = zonotope_from_json(s.at("Z_s"));
  c.sets.tubes.output_tube = zonotope_from_json(s.at("Z_x"));
  c.sets.S = hpolytope_from_json(s.at("S"));
  c.sets.U_hat = hpolytope_from_json(s.at("U_hat"));
  c.sets.S_f = hpolytope_from_json(s.at("S_f"));
  c.sets.tube_hrep = hpolytope_from_json(s.at("tube_hrep"));
  c.sets.tube_kind = s.at("tube_kind").get<std::string>();
  c.sets.rpi_certificate_slack = s.at("rpi_certificate_slack").get<double>();
  c.options.N = j.at("N").get<int>();
  c.options.mode = control::cost_mode_from_string(j.at("weights").at("mode").get<std::string>());
  c.options.Q = mat_from_json(j.at("weights").at("Q"));
  c.options.Q_tilde = mat_from_json(j.at("weights").at("Q_tilde"));
  c.options.R = mat_from_json(j.at("weights").at("R"));
  c.options.rpi_alpha_max = j.at("rpi_alpha_max").get<double>();
  c.options.rpi_k_max = j.at("rpi_k_max").get<int>();
  c.lyapunov_residual = j.at("lyapunov_residual").get<double>();
  c.rho_E = j.at("rho_E").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                    : j.at("rho_E").get<double>();
  // rebuild the condensed problem and solver
  const Mat Qs = control::stage_matrix(c.model, c.options);
  c.condensed = qp::condense(c.model.A, c.model.B, c.options.N, Qs, c.options.R, c.P,
                             c.sets.S, c.sets.U_hat, c.sets.S_f, c.sets.tube_hrep);
  c.solver = std::make_shared<qp::AdmmSolver>(c.condensed.H, c.condensed.A_in,
                                              c.options.qp);
  return c;
}

std::string hash_string(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("hash_file: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return hash_string(buf.str());
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  try {
    return json::parse(in);
  } catch (const std::exception& e) {
    throw IoError("JSON parse error in " + path + ": " + e.what());
  }
}

}  // namespace rkmpc::serialization
