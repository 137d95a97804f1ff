#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rkmpc/lifting.hpp"
#include "rkmpc/types.hpp"

namespace rkmpc::edmd {

/// One-step transition tuples (x_i, u_i, w_hat_i, x_i+), columns as samples,
/// with the lifted cache populated on demand.
struct Dataset {
  Mat X, U, W, Xp;
  std::string tag;     // split tag, e.g. "fit" / "validate"
  uint64_t seed = 0;
  std::string plant;

  Mat S, Sp;  // lifted cache
  std::string dict_fingerprint;

  int count() const { return static_cast<int>(X.cols()); }
  int state_dim() const { return static_cast<int>(X.rows()); }
  int input_dim() const { return static_cast<int>(U.rows()); }

  void lift_with(const lifting::Dictionary& dict);

  void save_csv(const std::string& path, const std::string& provenance = "") const;
  static Dataset load_csv(const std::string& path);
};

struct FitMeta {
  double alpha = 0.0;
  double beta = 0.0;
  int sample_count = 0;
  double residual_rms = 0.0;   // one-step lifted residual RMS
  double output_residual_rms = 0.0;
  std::string dataset_tag;
  uint64_t dataset_seed = 0;
};

struct LipschitzEstimates {
  double L_s = 0.0;
  double L_u = 0.0;
  double L_dw = 0.0;   // config-supplied; not estimated by the fit
  double L_what = 0.0;
};

/// Lifted linear predictor s+ = A s + B u (+ D w_hat), x = C s.
struct LiftedModel {
  Mat A, B, D, C;
  std::optional<LipschitzEstimates> lipschitz;
  lifting::Dictionary dictionary;
  FitMeta meta;

  int lifted_dim() const { return static_cast<int>(A.rows()); }
  int state_dim() const { return static_cast<int>(C.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
};

struct KoopmanFit {
  Mat A, B, D;
  double residual_rms = 0.0;
};

/// Ridge least squares for [A B D]: min sum ||[A B D](s,u,w) - s+||^2
/// + alpha ||[A B D]||_F^2, solved by normal equations.
KoopmanFit fit_koopman(Dataset& ds, const lifting::Dictionary& dict, double alpha);

/// Ridge least squares for the output map: min sum ||C s - x||^2 + beta ||C||_F^2.
Mat fit_output_map(Dataset& ds, const lifting::Dictionary& dict, double beta);

struct LipschitzFit {
  Mat A, B, D;
  double L_s = 0.0, L_u = 0.0, L_what = 0.0;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  int pair_count = 0;
};

/// Lipschitz-regularized fit: alternates the ridge matrix fit (with extra
/// weight on the pairs pinning the constants) and the tightest-L linear
/// program over a subsampled, nearest-neighbor-biased pair set.
LipschitzFit fit_lipschitz_regularized(Dataset& ds, const lifting::Dictionary& dict,
                                       double alpha, double alpha_s, double alpha_u,
                                       double alpha_w, int pair_budget,
                                       uint64_t pair_seed = 31u);

/// Residual-Lipschitz constraint violation replay: max over the same sampled
/// pairs of ||Y_i - Y_j|| - (L_s ds + L_u du + L_w dw).
double lipschitz_replay_violation(const Dataset& ds, const Mat& A, const Mat& B,
                                  const Mat& D, double L_s, double L_u, double L_what,
                                  const std::vector<std::pair<int, int>>& pairs);

/// The deterministic pair subsample used by the Lipschitz fit.
std::vector<std::pair<int, int>> sample_pairs(const Dataset& ds, int pair_budget,
                                              uint64_t seed);

struct ModelCheckReport {
  bool stabilizable = false;
  bool observable = false;
  double spectral_radius = 0.0;
  double psi0_norm = 0.0;
  std::string detail;
  bool pass() const { return stabilizable && observable; }
};

/// PBH stabilizability over the unstable eigenvalues of A, full-rank test of
/// the observability matrix, spectral radius, and the Psi(0)=0 equilibrium check.
ModelCheckReport check_model(const LiftedModel& model);

/// Convenience: both fits plus (optionally) the Lipschitz-regularized variant.
LiftedModel fit_model(Dataset& ds, const lifting::Dictionary& dict, double alpha,
                      double beta, bool with_lipschitz = false, double alpha_s = 1e-4,
                      double alpha_u = 1e-4, double alpha_w = 1e-4,
                      int pair_budget = 50000, double L_dw = 0.0);

}  // namespace rkmpc::edmd
