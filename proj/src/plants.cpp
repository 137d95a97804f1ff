#include "rkmpc/plants.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "rkmpc/kernels.hpp"
#include "rkmpc/rng.hpp"

namespace rkmpc::plants {

namespace {
constexpr double kGravity = 9.81;
}

Plant make_plant(const std::string& name) {
  Plant p;
  p.name = name;
  if (name == "van_der_pol") {
    p.state_dim = 2;
    p.input_dim = 1;
    p.T = 0.01;
    p.f_c = [](const Vec& x, const Vec& u) {
      Vec dx(2);
      dx(0) = x(1);
      dx(1) = 2.0 * x(1) - 10.0 * x(0) * x(0) * x(1) - 0.8 * x(0) - u(0);
      return dx;
    };
    p.X = geometry::HPolytope::symmetric_box((Vec(2) << 2.5, 2.5).finished());
    p.U = geometry::HPolytope::symmetric_box((Vec(1) << 10.0).finished());
  } else if (name == "inverted_pendulum") {
    p.state_dim = 2;
    p.input_dim = 1;
    p.T = 0.005;
    p.f_c = [](const Vec& x, const Vec& u) {
      Vec dx(2);
      dx(0) = x(1);
      dx(1) = 4.0 * kGravity * std::sin(x(0)) - 3.0 * u(0) * std::cos(x(0));
      return dx;
    };
    p.X = geometry::HPolytope::symmetric_box((Vec(2) << 1.0, 2.0).finished());
    p.U = geometry::HPolytope::symmetric_box((Vec(1) << 20.0).finished());
  } else if (name == "nonaffine") {
    p.state_dim = 2;
    p.input_dim = 1;
    p.T = 0.005;
    p.f_c = [](const Vec& x, const Vec& u) {
      Vec dx(2);
      dx(0) = x(1);
      dx(1) = x(0) * x(0) + 0.15 * u(0) * u(0) * u(0) +
              0.1 * (1.0 + x(1) * x(1)) * u(0) + std::sin(0.1 * u(0));
      return dx;
    };
    p.X = geometry::HPolytope::symmetric_box((Vec(2) << 2.5, 2.5).finished());
    p.U = geometry::HPolytope::symmetric_box((Vec(1) << 25.0).finished());
  } else {
    throw Error("make_plant: unknown plant '" + name + "'");
  }
  return p;
}

std::vector<std::string> plant_names() {
  return {"van_der_pol", "inverted_pendulum", "nonaffine"};
}

std::string to_string(DisturbanceKind k) {
  switch (k) {
    case DisturbanceKind::none: return "none";
    case DisturbanceKind::sinusoidal: return "sinusoidal";
    case DisturbanceKind::udr: return "udr";
    case DisturbanceKind::stepwise: return "stepwise";
  }
  return "?";
}

DisturbanceKind disturbance_kind_from_string(const std::string& s) {
  if (s == "none") return DisturbanceKind::none;
  if (s == "sinusoidal") return DisturbanceKind::sinusoidal;
  if (s == "udr") return DisturbanceKind::udr;
  if (s == "stepwise") return DisturbanceKind::stepwise;
  throw Error("unknown disturbance kind: " + s);
}

Vec DisturbanceSpec::value(int dim, double t, int step_index) const {
  switch (kind) {
    case DisturbanceKind::none:
      return Vec::Zero(dim);
    case DisturbanceKind::sinusoidal:
      return Vec::Constant(dim, amplitude * std::sin(omega * t));
    case DisturbanceKind::udr: {
      auto gen = detail::stream_rng(seed, static_cast<uint64_t>(step_index));
      return Vec::Constant(dim, detail::uniform(gen, -amplitude, amplitude));
    }
    case DisturbanceKind::stepwise: {
      auto gen = detail::stream_rng(seed, static_cast<uint64_t>(step_index / std::max(1, dwell)));
      return Vec::Constant(dim, detail::uniform(gen, -amplitude, amplitude));
    }
  }
  return Vec::Zero(dim);
}

Vec rk4_step(const Plant& plant, const Vec& x, const Vec& u,
             const std::function<Vec(double)>& w_fn, double t) {
  require(x.allFinite() && u.allFinite(), "rk4_step: non-finite input");
  const double h = plant.T;
  const Vec k1 = plant.f_c(x, u) + w_fn(t);
  const Vec k2 = plant.f_c(x + 0.5 * h * k1, u) + w_fn(t + 0.5 * h);
  const Vec k3 = plant.f_c(x + 0.5 * h * k2, u) + w_fn(t + 0.5 * h);
  const Vec k4 = plant.f_c(x + h * k3, u) + w_fn(t + h);
  Vec xn = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!xn.allFinite())
    throw NumericalError("rk4_step: state diverged (non-finite successor)");
  return xn;
}

namespace {

Vec box_bounds(const geometry::HPolytope& P, bool upper) {
  const int d = P.dim();
  Vec out(d);
  for (int i = 0; i < d; ++i) {
    Vec e = Vec::Zero(d);
    e(i) = 1.0;
    auto h = geometry::support(P, upper ? e : Vec(-e));
    require(h.has_value(), "collect_data: constraint set must be bounded");
    out(i) = upper ? *h : -*h;
  }
  return out;
}

}  // namespace

edmd::Dataset collect_data(const Plant& plant, int M, uint64_t seed,
                           const DisturbanceSpec& disturbance, const std::string& tag) {
  require(M >= 1, "collect_data: M must be >= 1");
  edmd::Dataset ds;
  ds.tag = tag;
  ds.seed = seed;
  ds.plant = plant.name;
  const int n = plant.state_dim, m = plant.input_dim;
  ds.X.resize(n, M);
  ds.U.resize(m, M);
  ds.W.resize(n, M);
  ds.Xp.resize(n, M);
  const Vec xlo = box_bounds(plant.X, false), xhi = box_bounds(plant.X, true);
  const Vec ulo = box_bounds(plant.U, false), uhi = box_bounds(plant.U, true);
  auto zero_w = [n](double) { return Vec::Zero(n); };

  kernels::for_each_index(M, [&](int i) {
    auto gen = detail::stream_rng(seed, static_cast<uint64_t>(i));
    Vec x(n), u(m);
    for (int k = 0; k < n; ++k) x(k) = detail::uniform(gen, xlo(k), xhi(k));
    for (int k = 0; k < m; ++k) u(k) = detail::uniform(gen, ulo(k), uhi(k));
    const double t = i * plant.T;
    auto w_fn = [&](double tt) { return disturbance.value(n, tt, i); };
    const Vec xp = rk4_step(plant, x, u, w_fn, t);
    const Vec xp_clean = rk4_step(plant, x, u, zero_w, t);
    ds.X.col(i) = x;
    ds.U.col(i) = u;
    ds.W.col(i) = xp - xp_clean;  // integrated disturbance increment
    ds.Xp.col(i) = xp;
  });
  return ds;
}


edmd::Dataset collect_data_rollout(const Plant& plant, int M, uint64_t seed,
                                   const DisturbanceSpec& disturbance, double u_scale,
                                   int traj_len, const std::string& tag) {
  require(M >= 1, "collect_data_rollout: M must be >= 1");
  require(u_scale > 0.0 && u_scale <= 1.0, "collect_data_rollout: u_scale in (0,1]");
  require(traj_len >= 1, "collect_data_rollout: traj_len must be >= 1");
  edmd::Dataset ds;
  ds.tag = tag;
  ds.seed = seed;
  ds.plant = plant.name;
  const int n = plant.state_dim, m = plant.input_dim;
  ds.X.resize(n, M);
  ds.U.resize(m, M);
  ds.W.resize(n, M);
  ds.Xp.resize(n, M);
  const Vec xlo = box_bounds(plant.X, false), xhi = box_bounds(plant.X, true);
  const Vec ulo = u_scale * box_bounds(plant.U, false);
  const Vec uhi = u_scale * box_bounds(plant.U, true);
  auto zero_w = [n](double) { return Vec::Zero(n); };

  int i = 0;
  uint64_t traj = 0;
  while (i < M) {
    auto gen = detail::stream_rng(seed, 1000003 + traj++);
    Vec x(n);
    for (int k = 0; k < n; ++k) x(k) = detail::uniform(gen, xlo(k), xhi(k));
    for (int t = 0; t < traj_len && i < M; ++t) {
      Vec u(m);
      for (int k = 0; k < m; ++k) u(k) = detail::uniform(gen, ulo(k), uhi(k));
      auto w_fn = [&](double tt) { return disturbance.value(n, tt, i); };
      Vec xp, xp_clean;
      try {
        xp = rk4_step(plant, x, u, w_fn, t * plant.T);
        xp_clean = rk4_step(plant, x, u, zero_w, t * plant.T);
      } catch (const NumericalError&) {
        break;  // diverged segment: restart
      }
      if (!geometry::contains(plant.X, xp)) break;  // left X: restart
      ds.X.col(i) = x;
      ds.U.col(i) = u;
      ds.W.col(i) = xp - xp_clean;
      ds.Xp.col(i) = xp;
      ++i;
      x = xp;
    }
  }
  return ds;
}

void SimulationTrace::save_csv(const std::string& path,
                               const std::string& provenance) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# rkmpc trace label=" << label << " J=" << J
      << " aborted=" << (aborted ? 1 : 0);
  if (!provenance.empty()) out << " " << provenance;
  out << "\n";
  if (steps.empty()) return;
  const int n = static_cast<int>(steps.front().x.size());
  const int m = static_cast<int>(steps.front().u.size());
  const int np = static_cast<int>(steps.front().s.size());
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",x_" << i;
  for (int i = 1; i <= np; ++i) out << ",s_" << i;
  for (int i = 1; i <= n; ++i) out << ",xhat_" << i;
  for (int i = 1; i <= np; ++i) out << ",shat_" << i;
  for (int i = 1; i <= m; ++i) out << ",u_" << i;
  for (int i = 1; i <= m; ++i) out << ",uhat_" << i;
  for (int i = 1; i <= n; ++i) out << ",w_" << i;
  out << ",stage_cost,qp_status,tube_ok,v_opt\n";
  char buf[64];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << "," << buf;
  };
  for (const auto& r : steps) {
    std::snprintf(buf, sizeof buf, "%.17g", r.t);
    out << buf;
    for (int i = 0; i < n; ++i) emit(r.x(i));
    for (int i = 0; i < np; ++i) emit(r.s(i));
    for (int i = 0; i < n; ++i) emit(r.x_hat(i));
    for (int i = 0; i < np; ++i) emit(r.s_hat(i));
    for (int i = 0; i < m; ++i) emit(r.u(i));
    for (int i = 0; i < m; ++i) emit(r.u_hat(i));
    for (int i = 0; i < n; ++i) emit(r.w_o(i));
    emit(r.stage_cost);
    out << "," << r.qp_status << "," << (r.tube_ok ? 1 : 0);
    emit(r.v_opt);
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

SimulationTrace simulate_closed_loop(const Plant& plant, const Controller& controller,
                                     const Vec& x0, int steps,
                                     const DisturbanceSpec& disturbance,
                                     const Mat& cost_Q, const Mat& cost_R) {
  require(geometry::contains(plant.X, x0), "simulate_closed_loop: x0 outside X");
  SimulationTrace trace;
  trace.steps.reserve(steps);
  Vec x = x0;
  const int n = plant.state_dim;
  auto zero_w = [n](double) { return Vec::Zero(n); };
  for (int k = 0; k < steps; ++k) {
    const double t = k * plant.T;
    ControlDecision dec = controller(x);
    StepRecord rec;
    rec.t = t;
    rec.x = x;
    rec.s = dec.s;
    rec.s_hat = dec.s_hat;
    rec.u = dec.u;
    rec.u_hat = dec.u_hat;
    rec.qp_status = dec.qp_status;
    rec.tube_ok = dec.tube_ok;
    rec.v_opt = dec.v_opt;
    rec.nominal_stage = dec.nominal_stage;
    rec.x_hat = dec.x_hat.size() == n ? dec.x_hat : Vec::Zero(n);

    auto w_fn = [&](double tt) { return disturbance.value(n, tt, k); };
    Vec xp;
    try {
      xp = rk4_step(plant, x, dec.u, w_fn, t);
    } catch (const NumericalError&) {
      trace.aborted = true;
      trace.steps.push_back(rec);
      return trace;
    }
    rec.w_o = xp - rk4_step(plant, x, dec.u, zero_w, t);
    rec.stage_cost = xp.dot(cost_Q * xp) + dec.u.dot(cost_R * dec.u);
    trace.J += rec.stage_cost;
    trace.steps.push_back(rec);
    x = xp;
  }
  return trace;
}

}  // namespace rkmpc::plants
