#pragma once

#include <memory>

#include "rkmpc/geometry.hpp"
#include "rkmpc/types.hpp"

namespace rkmpc::qp {

/// minimize 1/2 z'Hz + f'z  subject to  A_in z <= b_in.
/// H is symmetrized on construction; a minimum eigenvalue >= -1e-10 is
/// tolerated and shifted to zero.
struct QpProblem {
  Mat H;
  Vec f;
  Mat A_in;
  Vec b_in;

  QpProblem() = default;
  QpProblem(Mat H_, Vec f_, Mat A_, Vec b_);
};

enum class QpStatus { optimal, max_iter, infeasible };

const char* to_string(QpStatus s);

struct QpSolution {
  Vec z;
  Vec lambda;  // multipliers for A_in z <= b_in
  double objective = 0.0;
  QpStatus status = QpStatus::max_iter;
  double kkt_stationarity = 0.0;
  double kkt_primal = 0.0;
  double kkt_complementarity = 0.0;
  int iterations = 0;
};

struct QpSettings {
  double tol = 1e-8;
  int max_iter = 200000;
  double rho = 1.0;    // fixed splitting penalty
  double sigma = 1e-6; // proximal regularization
  int check_interval = 25;
};

/// Operator-splitting (ADMM) solver with a cached factorization, reusable
/// across solves that keep H and A_in fixed (the MPC loop updates only f/b).
class AdmmSolver {
 public:
  AdmmSolver(const Mat& H, const Mat& A_in, QpSettings settings = {});
  QpSolution solve(const Vec& f, const Vec& b_in, const Vec* warm_z = nullptr,
                   const Vec* warm_dual = nullptr) const;

 private:
  Mat H_, A_;       // originals
  Mat Hs_, As_;     // equilibrated cost and constraints
  Vec col_scale_;   // z = diag(col_scale) * z_scaled
  Vec row_scale_;
  double cost_scale_ = 1.0;
  Eigen::LDLT<Mat> kkt_;
  QpSettings settings_;
};

QpSolution solve(const QpProblem& p, QpSettings settings = {},
                 const Vec* warm_z = nullptr, const Vec* warm_dual = nullptr);

/// Dense condensed MPC problem over z = (s_hat_k, u_hat_{k..k+N-1}): the
/// predicted lifted states are eliminated through the dynamics. The initial
/// tube rows depend on the measured lifted state, so `b_for` rebuilds the
/// right-hand side per step while H and A_in stay fixed.
struct CondensedMpc {
  Mat H;
  Mat A_in;
  Vec b_const;      // rows independent of s_k (tube rows hold T.b there)
  Mat tube_A;       // tube rows are  -T.A s_hat_k <= T.b - T.A s_k
  int tube_offset = 0;
  Mat Phi;          // (N+1)*n_s x nz prediction stack
  int n_s = 0, n_u = 0, N = 0;

  int num_vars() const { return n_s + N * n_u; }
  Vec b_for(const Vec& s_k) const;
  QpProblem problem(const Vec& s_k) const;
  /// Predicted trajectory (s_hat_{k..k+N}) columns from a solution z.
  Mat trajectory(const Vec& z) const;
};

/// Build the condensed QP. `stage_S` constrains s_hat_{k+i}, i = 0..N-1;
/// `input_U` constrains u_hat_{k+i}; `terminal` constrains s_hat_{k+N};
/// `init_tube` is the H-representation of the tube cross-section in the
/// error coordinate e = s_k - s_hat_k. R must be positive definite.
CondensedMpc condense(const Mat& A, const Mat& B, int N, const Mat& Q_stage,
                      const Mat& R, const Mat& P, const geometry::HPolytope& stage_S,
                      const geometry::HPolytope& input_U,
                      const geometry::HPolytope& terminal,
                      const geometry::HPolytope& init_tube);

}  // namespace rkmpc::qp
