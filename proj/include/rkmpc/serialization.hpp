#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "rkmpc/control.hpp"
#include "rkmpc/edmd.hpp"
#include "rkmpc/geometry.hpp"
#include "rkmpc/lifting.hpp"
#include "rkmpc/qp.hpp"
#include "rkmpc/uncertainty.hpp"

namespace rkmpc::serialization {

using json = nlohmann::json;

json to_json(const Mat& m);
json to_json(const Vec& v);
Mat mat_from_json(const json& j);
Vec vec_from_json(const json& j);

/// {"kind":"zonotope","center":[...],"generators":[[...]]}
json to_json(const geometry::Zonotope& z);
geometry::Zonotope zonotope_from_json(const json& j);

/// {"kind":"hpolytope","A":[[...]],"b":[...]}
json to_json(const geometry::HPolytope& p);
geometry::HPolytope hpolytope_from_json(const json& j);

json to_json(const lifting::Dictionary& d);
lifting::Dictionary dictionary_from_json(const json& j);

json to_json(const edmd::LiftedModel& m);
edmd::LiftedModel model_from_json(const json& j);

json to_json(const uncertainty::ValidationReport& r);
uncertainty::ValidationReport validation_report_from_json(const json& j);

json to_json(const qp::QpProblem& p);
qp::QpProblem qp_problem_from_json(const json& j);

json to_json(const control::TubeController& c);
control::TubeController controller_from_json(const json& j);

/// FNV-1a 64-bit hex digest; used for the provenance chain.
std::string hash_string(const std::string& bytes);
std::string hash_file(const std::string& path);

void write_json_file(const std::string& path, const json& j);
json read_json_file(const std::string& path);

}  // namespace rkmpc::serialization
