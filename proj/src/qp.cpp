#include "rkmpc/qp.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace rkmpc::qp {

QpProblem::QpProblem(Mat H_, Vec f_, Mat A_, Vec b_)
    : H(std::move(H_)), f(std::move(f_)), A_in(std::move(A_)), b_in(std::move(b_)) {
  require_dims(H.rows() == H.cols() && H.rows() == f.size(),
               "QpProblem: H/f dimension mismatch");
  require_dims(A_in.rows() == b_in.size() && (A_in.rows() == 0 || A_in.cols() == f.size()),
               "QpProblem: constraint dimension mismatch");
  H = 0.5 * (H + H.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  const double lmin = es.eigenvalues().minCoeff();
  require(lmin >= -1e-10, "QpProblem: H is not positive semidefinite");
  if (lmin < 0.0) H -= lmin * Mat::Identity(H.rows(), H.cols());
}

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::max_iter: return "max_iter";
    case QpStatus::infeasible: return "infeasible";
  }
  return "?";
}

AdmmSolver::AdmmSolver(const Mat& H, const Mat& A_in, QpSettings settings)
    : H_(0.5 * (H + H.transpose())), A_(A_in), settings_(settings) {
  const int n = static_cast<int>(H_.rows());
  const int m = static_cast<int>(A_.rows());

  // Ruiz-style diagonal equilibration of the variables followed by row
  // normalization of the constraints; the fixed unit penalty then behaves
  // across badly scaled condensed problems
  col_scale_ = Vec::Ones(n);
  Mat Hs = H_;
  Mat Ac = A_;
  for (int it = 0; it < 10; ++it) {
    Vec c(n);
    for (int j = 0; j < n; ++j) {
      double v = Hs.col(j).lpNorm<Eigen::Infinity>();
      if (m > 0) v = std::max(v, Ac.col(j).lpNorm<Eigen::Infinity>());
      c(j) = v > 0 ? 1.0 / std::sqrt(v) : 1.0;
    }
    col_scale_ = col_scale_.cwiseProduct(c);
    Hs = c.asDiagonal() * Hs * c.asDiagonal();
    if (m > 0) Ac = Ac * c.asDiagonal();
  }
  cost_scale_ = 1.0;
  {
    const double hnorm = Hs.diagonal().cwiseAbs().mean();
    if (hnorm > 0) cost_scale_ = 1.0 / std::max(1e-8, hnorm);
    Hs *= cost_scale_;
  }
  Hs_ = Hs;
  row_scale_ = Vec::Ones(m);
  As_ = Ac;
  for (int i = 0; i < m; ++i) {
    const double nrm = Ac.row(i).norm();
    if (nrm > 0) {
      row_scale_(i) = nrm;
      As_.row(i) /= nrm;
    }
  }
  Mat kkt = Hs_ + settings_.sigma * Mat::Identity(n, n) +
            settings_.rho * As_.transpose() * As_;
  kkt_.compute(kkt);
  require(kkt_.info() == Eigen::Success, "AdmmSolver: factorization failed");
}

QpSolution AdmmSolver::solve(const Vec& f, const Vec& b_in, const Vec* warm_z,
                             const Vec* warm_dual) const {
  const int n = static_cast<int>(H_.rows());
  const int m = static_cast<int>(A_.rows());
  const double rho = settings_.rho;
  // work in the equilibrated variables: zs = z / col_scale
  const Vec fs = cost_scale_ * f.cwiseProduct(col_scale_);
  Vec bs = b_in.cwiseQuotient(row_scale_);

  Vec z = warm_z && warm_z->size() == n ? Vec(warm_z->cwiseQuotient(col_scale_))
                                        : Vec(Vec::Zero(n));
  Vec w = warm_dual && warm_dual->size() == m
              ? Vec((cost_scale_ *
                     warm_dual->cwiseProduct(row_scale_)).cwiseMax(0.0))
              : Vec(Vec::Zero(m));
  Vec v = m > 0 ? Vec((As_ * z).cwiseMin(bs)) : Vec(Vec::Zero(0));

  QpSolution sol;
  auto finish = [&](QpStatus status, int iters) {
    sol.status = status;
    sol.iterations = iters;
    sol.z = z.cwiseProduct(col_scale_);
    sol.lambda = m > 0 ? Vec(w.cwiseQuotient(row_scale_) / cost_scale_) : Vec::Zero(0);
    sol.objective = 0.5 * sol.z.dot(H_ * sol.z) + f.dot(sol.z);
    const Vec slack = m > 0 ? Vec(A_ * sol.z - b_in) : Vec::Zero(0);
    sol.kkt_stationarity =
        (H_ * sol.z + f + (m > 0 ? Vec(A_.transpose() * sol.lambda) : Vec::Zero(n)))
            .lpNorm<Eigen::Infinity>();
    sol.kkt_primal = m > 0 ? std::max(0.0, slack.maxCoeff()) : 0.0;
    sol.kkt_complementarity = m > 0 ? std::abs(sol.lambda.dot(slack)) : 0.0;
    return sol;
  };

  auto kkt_ok = [&]() {
    const Vec zu = z.cwiseProduct(col_scale_);
    const Vec lambda =
        m > 0 ? Vec(w.cwiseQuotient(row_scale_) / cost_scale_) : Vec::Zero(0);
    const double st =
        (H_ * zu + f + (m > 0 ? Vec(A_.transpose() * lambda) : Vec::Zero(n)))
            .lpNorm<Eigen::Infinity>();
    if (st > settings_.tol) return false;
    if (m == 0) return true;
    const Vec slack = A_ * zu - b_in;
    return std::max(0.0, slack.maxCoeff()) <= settings_.tol &&
           std::abs(lambda.dot(slack)) <= settings_.tol;
  };

  if (m == 0) {
    // unconstrained: proximal iteration removes the sigma bias
    for (int it = 1; it <= settings_.max_iter; ++it) {
      z = kkt_.solve(settings_.sigma * z - fs);
      if (it % settings_.check_interval == 0 && kkt_ok())
        return finish(QpStatus::optimal, it);
    }
    return finish(QpStatus::max_iter, settings_.max_iter);
  }

  Vec w_prev_check = w;
  for (int it = 1; it <= settings_.max_iter; ++it) {
    // quadratic prox step
    const Vec rhs = settings_.sigma * z - fs + As_.transpose() * (rho * v - w);
    z = kkt_.solve(rhs);
    // projection of the slack onto {v <= bs}
    const Vec Az = As_ * z;
    v = (Az + w / rho).cwiseMin(bs);
    w += rho * (Az - v);

    if (it % settings_.check_interval == 0 || it == settings_.max_iter) {
      if (kkt_ok()) return finish(QpStatus::optimal, it);

      // divergence certificate for primal infeasibility: a nonnegative dual
      // direction y with A'y ~ 0 and b'y < 0
      Vec dy = (w - w_prev_check).cwiseQuotient(row_scale_).cwiseMax(0.0);
      const double dn = dy.lpNorm<Eigen::Infinity>();
      if (dn > 1e-10) {
        dy /= dn;
        const double aty = (A_.transpose() * dy).lpNorm<Eigen::Infinity>();
        const double bty = b_in.dot(dy);
        if (aty <= 1e-9 && bty < -1e-9) return finish(QpStatus::infeasible, it);
      }
      w_prev_check = w;
    }
  }
  return finish(QpStatus::max_iter, settings_.max_iter);
}

QpSolution solve(const QpProblem& p, QpSettings settings, const Vec* warm_z,
                 const Vec* warm_dual) {
  AdmmSolver solver(p.H, p.A_in, settings);
  return solver.solve(p.f, p.b_in, warm_z, warm_dual);
}

Vec CondensedMpc::b_for(const Vec& s_k) const {
  Vec b = b_const;
  if (tube_A.rows() > 0)
    b.segment(tube_offset, tube_A.rows()) -= tube_A * s_k;
  return b;
}

QpProblem CondensedMpc::problem(const Vec& s_k) const {
  return QpProblem(H, Vec::Zero(num_vars()), A_in, b_for(s_k));
}

Mat CondensedMpc::trajectory(const Vec& z) const {
  Mat traj(n_s, N + 1);
  const Vec flat = Phi * z;
  for (int i = 0; i <= N; ++i) traj.col(i) = flat.segment(i * n_s, n_s);
  return traj;
}

CondensedMpc condense(const Mat& A, const Mat& B, int N, const Mat& Q_stage,
                      const Mat& R, const Mat& P, const geometry::HPolytope& stage_S,
                      const geometry::HPolytope& input_U,
                      const geometry::HPolytope& terminal,
                      const geometry::HPolytope& init_tube) {
  const int ns = static_cast<int>(A.rows());
  const int nu = static_cast<int>(B.cols());
  require(N >= 1, "condense: horizon must be >= 1");
  require_dims(A.cols() == ns && B.rows() == ns, "condense: A/B dimension mismatch");
  require_dims(Q_stage.rows() == ns && Q_stage.cols() == ns,
               "condense: stage weight must act on the lifted state");
  require_dims(R.rows() == nu && R.cols() == nu, "condense: R dimension mismatch");
  require_dims(P.rows() == ns && P.cols() == ns, "condense: P dimension mismatch");
  {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (R + R.transpose()));
    require(es.eigenvalues().minCoeff() > 0.0, "condense: R must be positive definite");
  }

  CondensedMpc c;
  c.n_s = ns;
  c.n_u = nu;
  c.N = N;
  const int nz = ns + N * nu;

  // prediction stack Phi: s_hat_{k+i} = Phi_i z
  c.Phi = Mat::Zero((N + 1) * ns, nz);
  Mat Ai = Mat::Identity(ns, ns);
  for (int i = 0; i <= N; ++i) {
    c.Phi.block(i * ns, 0, ns, ns) = Ai;
    Ai = A * Ai;
  }
  for (int j = 0; j < N; ++j) {
    Mat AiB = B;
    for (int i = j + 1; i <= N; ++i) {
      c.Phi.block(i * ns, ns + j * nu, ns, nu) = AiB;
      AiB = A * AiB;
    }
  }

  // cost
  Mat M = Mat::Zero(nz, nz);
  for (int i = 0; i < N; ++i) {
    const auto Phi_i = c.Phi.middleRows(i * ns, ns);
    M.noalias() += Phi_i.transpose() * Q_stage * Phi_i;
  }
  const auto Phi_N = c.Phi.middleRows(N * ns, ns);
  M.noalias() += Phi_N.transpose() * P * Phi_N;
  for (int j = 0; j < N; ++j) M.block(ns + j * nu, ns + j * nu, nu, nu) += R;
  c.H = M + M.transpose();  // 1/2 z'Hz == z'Mz

  // constraint rows
  const int rows_S = stage_S.num_rows() * N;
  const int rows_U = input_U.num_rows() * N;
  const int rows_T = terminal.num_rows();
  const int rows_tube = init_tube.num_rows();
  const int m_total = rows_S + rows_U + rows_T + rows_tube;
  c.A_in = Mat::Zero(m_total, nz);
  c.b_const = Vec::Zero(m_total);
  int r = 0;
  for (int i = 0; i < N; ++i) {
    c.A_in.middleRows(r, stage_S.num_rows()) =
        stage_S.A * c.Phi.middleRows(i * ns, ns);
    c.b_const.segment(r, stage_S.num_rows()) = stage_S.b;
    r += stage_S.num_rows();
  }
  for (int j = 0; j < N; ++j) {
    c.A_in.block(r, ns + j * nu, input_U.num_rows(), nu) = input_U.A;
    c.b_const.segment(r, input_U.num_rows()) = input_U.b;
    r += input_U.num_rows();
  }
  c.A_in.middleRows(r, rows_T) = terminal.A * Phi_N;
  c.b_const.segment(r, rows_T) = terminal.b;
  r += rows_T;
  // initial tube: T.A (s_k - s_hat_k) <= T.b  =>  -T.A s_hat_k <= T.b - T.A s_k
  c.tube_offset = r;
  c.tube_A = init_tube.A;
  c.A_in.block(r, 0, rows_tube, ns) = -init_tube.A;
  c.b_const.segment(r, rows_tube) = init_tube.b;
  return c;
}

}  // namespace rkmpc::qp
