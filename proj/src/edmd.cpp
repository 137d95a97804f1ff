#include "rkmpc/edmd.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "rkmpc/kernels.hpp"
#include "rkmpc/rng.hpp"
#include "rkmpc/simplex.hpp"

namespace rkmpc::edmd {

void Dataset::lift_with(const lifting::Dictionary& dict) {
  const std::string fp = dict.fingerprint();
  if (dict_fingerprint == fp && S.cols() == X.cols()) return;
  const int M = count();
  S.resize(dict.lifted_dim(), M);
  Sp.resize(dict.lifted_dim(), M);
  kernels::for_each_index(M, [&](int i) {
    S.col(i) = lifting::lift(dict, X.col(i));
    Sp.col(i) = lifting::lift(dict, Xp.col(i));
  });
  dict_fingerprint = fp;
}

void Dataset::save_csv(const std::string& path, const std::string& provenance) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  char buf[64];
  out << "# rkmpc dataset tag=" << tag << " seed=" << seed << " plant=" << plant;
  if (!provenance.empty()) out << " " << provenance;
  out << "\n";
  const int n = state_dim(), m = input_dim();
  for (int i = 1; i <= n; ++i) out << "x_" << i << ",";
  for (int i = 1; i <= m; ++i) out << "u_" << i << ",";
  for (int i = 1; i <= n; ++i) out << "w_" << i << ",";
  for (int i = 1; i <= n; ++i) out << "xp_" << i << (i == n ? "" : ",");
  out << "\n";
  auto emit = [&](double v, bool last) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << (last ? "\n" : ",");
  };
  for (int k = 0; k < count(); ++k) {
    for (int i = 0; i < n; ++i) emit(X(i, k), false);
    for (int i = 0; i < m; ++i) emit(U(i, k), false);
    for (int i = 0; i < n; ++i) emit(W(i, k), false);
    for (int i = 0; i < n; ++i) emit(Xp(i, k), i == n - 1);
  }
  if (!out) throw IoError("write failed: " + path);
}

Dataset load_csv_impl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  Dataset ds;
  std::string line;
  std::vector<std::vector<double>> rows;
  int n = 0, m = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream is(line.substr(1));
      std::string tok;
      while (is >> tok) {
        if (tok.rfind("tag=", 0) == 0) ds.tag = tok.substr(4);
        if (tok.rfind("seed=", 0) == 0) ds.seed = std::stoull(tok.substr(5));
        if (tok.rfind("plant=", 0) == 0) ds.plant = tok.substr(6);
      }
      continue;
    }
    if (line.rfind("x_1", 0) == 0) {
      // header: count the x_ and u_ columns
      std::istringstream is(line);
      std::string col;
      while (std::getline(is, col, ',')) {
        if (col.rfind("x_", 0) == 0) ++n;
        if (col.rfind("u_", 0) == 0) ++m;
      }
      continue;
    }
    std::istringstream is(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(is, cell, ',')) vals.push_back(std::stod(cell));
    rows.push_back(std::move(vals));
  }
  require(n > 0 && m > 0, "load_csv: missing header in " + path);
  const int M = static_cast<int>(rows.size());
  ds.X.resize(n, M);
  ds.U.resize(m, M);
  ds.W.resize(n, M);
  ds.Xp.resize(n, M);
  for (int k = 0; k < M; ++k) {
    require(static_cast<int>(rows[k].size()) == 3 * n + m,
            "load_csv: bad column count in " + path);
    int c = 0;
    for (int i = 0; i < n; ++i) ds.X(i, k) = rows[k][c++];
    for (int i = 0; i < m; ++i) ds.U(i, k) = rows[k][c++];
    for (int i = 0; i < n; ++i) ds.W(i, k) = rows[k][c++];
    for (int i = 0; i < n; ++i) ds.Xp(i, k) = rows[k][c++];
  }
  return ds;
}

Dataset Dataset::load_csv(const std::string& path) { return load_csv_impl(path); }

namespace {

// stacked regressors z_i = (s_i, u_i, w_i)
Mat stack_regressors(const Dataset& ds) {
  const int np = static_cast<int>(ds.S.rows());
  const int m = ds.input_dim(), n = ds.state_dim();
  Mat Z(np + m + n, ds.count());
  Z.topRows(np) = ds.S;
  Z.middleRows(np, m) = ds.U;
  Z.bottomRows(n) = ds.W;
  return Z;
}

// solve (Gram + alpha I) Theta^T = Cross; throws with rank diagnostics when
// alpha = 0 and the normal matrix is singular
Mat ridge_solve(const Mat& gram, const Mat& cross, double alpha, const char* what) {
  const int p = static_cast<int>(gram.rows());
  Mat Greg = gram + alpha * Mat::Identity(p, p);
  Eigen::LDLT<Mat> ldlt(Greg);
  if (alpha <= 0.0) {
    Eigen::FullPivLU<Mat> lu(gram);
    lu.setThreshold(1e-12);
    if (lu.rank() < p) {
      std::ostringstream os;
      os << what << ": singular normal matrix with alpha = 0 (rank " << lu.rank()
         << " of " << p << "); add regularization or enrich the data";
      throw NumericalError(os.str());
    }
  }
  return ldlt.solve(cross).transpose();  // rows of Theta
}

}  // namespace

KoopmanFit fit_koopman(Dataset& ds, const lifting::Dictionary& dict, double alpha) {
  require(alpha >= 0.0, "fit_koopman: alpha must be >= 0");
  ds.lift_with(dict);
  const int np = dict.lifted_dim(), m = ds.input_dim(), n = ds.state_dim();
  const Mat Z = stack_regressors(ds);
  auto gr = kernels::gram_accumulate(Z, ds.Sp);
  Mat Theta = ridge_solve(gr.gram, gr.cross, alpha, "fit_koopman");
  KoopmanFit f;
  f.A = Theta.leftCols(np);
  f.B = Theta.middleCols(np, m);
  f.D = Theta.rightCols(n);
  f.residual_rms = std::sqrt((Theta * Z - ds.Sp).squaredNorm() / ds.count());
  return f;
}

Mat fit_output_map(Dataset& ds, const lifting::Dictionary& dict, double beta) {
  require(beta >= 0.0, "fit_output_map: beta must be >= 0");
  ds.lift_with(dict);
  auto gr = kernels::gram_accumulate(ds.S, ds.X);
  return ridge_solve(gr.gram, gr.cross, beta, "fit_output_map");
}

std::vector<std::pair<int, int>> sample_pairs(const Dataset& ds, int pair_budget,
                                              uint64_t seed) {
  require(pair_budget >= 1, "sample_pairs: pair_budget must be >= 1");
  const int M = ds.count();
  std::vector<std::pair<int, int>> pairs;
  if (M < 2) return pairs;
  std::set<std::pair<int, int>> seen;
  auto add = [&](int i, int j) {
    if (i == j) return;
    auto key = std::minmax(i, j);
    if (seen.insert({key.first, key.second}).second)
      pairs.push_back({key.first, key.second});
  };

  // nearest-neighbor bias: adjacency along random projections of (s, u, w)
  const Mat Z = stack_regressors(ds);
  auto gen = detail::stream_rng(seed, 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n_proj = 4;
  for (int rp = 0; rp < n_proj && static_cast<int>(pairs.size()) < pair_budget; ++rp) {
    Vec dir(Z.rows());
    for (int i = 0; i < dir.size(); ++i) dir(i) = normal(gen);
    Vec proj = Z.transpose() * dir;
    std::vector<int> ord(M);
    for (int i = 0; i < M; ++i) ord[i] = i;
    std::stable_sort(ord.begin(), ord.end(),
                     [&](int a, int b) { return proj(a) < proj(b); });
    for (int t = 0; t + 1 < M && static_cast<int>(pairs.size()) < pair_budget; ++t)
      add(ord[t], ord[t + 1]);
  }
  // fill the remainder with uniform random pairs
  std::uniform_int_distribution<int> pick(0, M - 1);
  int attempts = 0;
  while (static_cast<int>(pairs.size()) < pair_budget && attempts < 20 * pair_budget) {
    add(pick(gen), pick(gen));
    ++attempts;
  }
  return pairs;
}

double lipschitz_replay_violation(const Dataset& ds, const Mat& A, const Mat& B,
                                  const Mat& D, double L_s, double L_u, double L_what,
                                  const std::vector<std::pair<int, int>>& pairs) {
  Mat Theta(A.rows(), A.cols() + B.cols() + D.cols());
  Theta << A, B, D;
  const Mat Z = stack_regressors(ds);
  const Mat R = Theta * Z - ds.Sp;
  double worst = -std::numeric_limits<double>::infinity();
  for (auto [i, j] : pairs) {
    const double gap = (R.col(i) - R.col(j)).norm();
    const double bound = L_s * (ds.S.col(i) - ds.S.col(j)).norm() +
                         L_u * (ds.U.col(i) - ds.U.col(j)).norm() +
                         L_what * (ds.W.col(i) - ds.W.col(j)).norm();
    worst = std::max(worst, gap - bound);
  }
  return worst;
}

LipschitzFit fit_lipschitz_regularized(Dataset& ds, const lifting::Dictionary& dict,
                                       double alpha, double alpha_s, double alpha_u,
                                       double alpha_w, int pair_budget,
                                       uint64_t pair_seed) {
  require(alpha_s > 0 && alpha_u > 0 && alpha_w > 0,
          "fit_lipschitz_regularized: alpha_s, alpha_u, alpha_w must be > 0");
  ds.lift_with(dict);
  const int np = dict.lifted_dim(), m = ds.input_dim(), n = ds.state_dim();
  const Mat Z = stack_regressors(ds);
  auto base = kernels::gram_accumulate(Z, ds.Sp);

  const auto pairs = sample_pairs(ds, pair_budget, pair_seed);
  const int P = static_cast<int>(pairs.size());
  Mat dens(P, 3);
  Mat dZ(Z.rows(), P);
  Mat dSp(ds.Sp.rows(), P);
  for (int p = 0; p < P; ++p) {
    auto [i, j] = pairs[p];
    dens(p, 0) = (ds.S.col(i) - ds.S.col(j)).norm();
    dens(p, 1) = (ds.U.col(i) - ds.U.col(j)).norm();
    dens(p, 2) = (ds.W.col(i) - ds.W.col(j)).norm();
    dZ.col(p) = Z.col(i) - Z.col(j);
    dSp.col(p) = ds.Sp.col(i) - ds.Sp.col(j);
  }
  const Vec costs = (Vec(3) << alpha_s, alpha_u, alpha_w).finished();

  LipschitzFit out;
  Mat Theta = ridge_solve(base.gram, base.cross, alpha, "fit_lipschitz_regularized");
  double best_obj = std::numeric_limits<double>::infinity();
  Mat best_Theta = Theta;
  Vec best_L = Vec::Zero(3);
  std::vector<std::pair<int, double>> duals;

  const int cap = 50;
  int it = 0;
  double prev_obj = std::numeric_limits<double>::infinity();
  for (it = 0; it < cap; ++it) {
    const Mat R = Theta * Z - ds.Sp;
    Vec gaps(P);
    for (int p = 0; p < P; ++p) {
      auto [i, j] = pairs[p];
      gaps(p) = (R.col(i) - R.col(j)).norm();
    }
    bool lp_ok = true;
    Vec L = detail::covering_lp(dens, gaps, costs, &lp_ok, &duals);
    const double vk = R.squaredNorm() + alpha * Theta.squaredNorm();
    const double obj = vk + costs.dot(L);
    if (obj < best_obj) {
      best_obj = obj;
      best_Theta = Theta;
      best_L = L;
    }
    if (std::abs(prev_obj - obj) < 1e-8 * (1.0 + std::abs(obj))) {
      out.converged = true;
      ++it;
      break;
    }
    prev_obj = obj;

    // refit: ridge plus first-order weights on the pairs pinning the constants
    Mat gram = base.gram;
    Mat cross = base.cross;
    for (auto [p, y] : duals) {
      const double g = std::max(gaps(p), 1e-9);
      const double w = 0.5 * y / g;
      gram.noalias() += w * dZ.col(p) * dZ.col(p).transpose();
      cross.noalias() += w * dZ.col(p) * dSp.col(p).transpose();
    }
    Theta = ridge_solve(gram, cross, alpha, "fit_lipschitz_regularized");
  }

  out.iterations = it;
  out.A = best_Theta.leftCols(np);
  out.B = best_Theta.middleCols(np, m);
  out.D = best_Theta.rightCols(n);
  out.objective = best_obj;
  out.pair_count = P;
  // the returned constants must certify the sampled pairs for the returned
  // matrices; recompute the tightest L at best_Theta
  {
    const Mat R = best_Theta * Z - ds.Sp;
    Vec gaps(P);
    for (int p = 0; p < P; ++p) {
      auto [i, j] = pairs[p];
      gaps(p) = (R.col(i) - R.col(j)).norm();
    }
    bool lp_ok = true;
    Vec L = detail::covering_lp(dens, gaps, costs, &lp_ok);
    out.L_s = L(0);
    out.L_u = L(1);
    out.L_what = L(2);
  }
  return out;
}

ModelCheckReport check_model(const LiftedModel& model) {
  ModelCheckReport rep;
  const int np = model.lifted_dim();
  std::ostringstream os;

  Eigen::EigenSolver<Mat> es(model.A);
  rep.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();

  // PBH: rank [lambda I - A, B] = n_psi for every |lambda| >= 1
  rep.stabilizable = true;
  for (int i = 0; i < np; ++i) {
    const std::complex<double> lam = es.eigenvalues()(i);
    if (std::abs(lam) < 1.0 - 1e-9) continue;
    Eigen::MatrixXcd pbh(np, np + model.B.cols());
    pbh << lam * Eigen::MatrixXcd::Identity(np, np) - model.A.cast<std::complex<double>>(),
        model.B.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    const auto& s = svd.singularValues();
    int rank = 0;
    for (int kk = 0; kk < s.size(); ++kk)
      if (s(kk) > 1e-10 * std::max(1.0, s(0))) ++rank;
    if (rank < np) {
      rep.stabilizable = false;
      os << "PBH fails at |lambda| = " << std::abs(lam) << "; ";
    }
  }

  // observability matrix [C; CA; ...; CA^{n_psi - 1}]
  Mat obs(model.C.rows() * np, np);
  Mat CAk = model.C;
  for (int k = 0; k < np; ++k) {
    obs.middleRows(k * model.C.rows(), model.C.rows()) = CAk;
    CAk = CAk * model.A;
  }
  Eigen::JacobiSVD<Mat> svd(obs);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (int kk = 0; kk < s.size(); ++kk)
    if (s(kk) > 1e-10 * std::max(1.0, s(0))) ++rank;
  rep.observable = (rank == np);
  if (!rep.observable) os << "observability matrix rank " << rank << " < " << np << "; ";

  rep.psi0_norm =
      lifting::lift(model.dictionary, Vec::Zero(model.dictionary.state_dim)).norm();
  os << "rho(A) = " << rep.spectral_radius << ", ||Psi(0)|| = " << rep.psi0_norm;
  rep.detail = os.str();
  return rep;
}

LiftedModel fit_model(Dataset& ds, const lifting::Dictionary& dict, double alpha,
                      double beta, bool with_lipschitz, double alpha_s, double alpha_u,
                      double alpha_w, int pair_budget, double L_dw) {
  LiftedModel model;
  model.dictionary = dict;
  if (with_lipschitz) {
    auto f = fit_lipschitz_regularized(ds, dict, alpha, alpha_s, alpha_u, alpha_w,
                                       pair_budget);
    model.A = f.A;
    model.B = f.B;
    model.D = f.D;
    LipschitzEstimates le;
    le.L_s = f.L_s;
    le.L_u = f.L_u;
    le.L_what = f.L_what;
    le.L_dw = L_dw;
    model.lipschitz = le;
  } else {
    auto f = fit_koopman(ds, dict, alpha);
    model.A = f.A;
    model.B = f.B;
    model.D = f.D;
  }
  model.C = fit_output_map(ds, dict, beta);

  const Mat Z = stack_regressors(ds);
  Mat Theta(model.A.rows(), Z.rows());
  Theta << model.A, model.B, model.D;
  model.meta.alpha = alpha;
  model.meta.beta = beta;
  model.meta.sample_count = ds.count();
  model.meta.residual_rms = std::sqrt((Theta * Z - ds.Sp).squaredNorm() / ds.count());
  model.meta.output_residual_rms =
      std::sqrt((model.C * ds.S - ds.X).squaredNorm() / ds.count());
  model.meta.dataset_tag = ds.tag;
  model.meta.dataset_seed = ds.seed;
  return model;
}

}  // namespace rkmpc::edmd
