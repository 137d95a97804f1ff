#pragma once

#include <string>
#include <vector>

#include "rkmpc/geometry.hpp"
#include "rkmpc/types.hpp"

namespace rkmpc::lifting {

enum class KernelKind { thinplate, gaussian, polyharmonic, inverse_quadratic, polynomial };

std::string to_string(KernelKind k);
KernelKind kernel_kind_from_string(const std::string& s);

/// Observable dictionary Psi(x). The lifted vector starts with x itself when
/// `includes_state` and appends one basis value per center (or per monomial
/// for the polynomial kind), shifted so that Psi(0) = 0 exactly.
struct Dictionary {
  KernelKind kind = KernelKind::thinplate;
  int state_dim = 0;
  bool includes_state = true;
  std::vector<Vec> centers;                    // kernel kinds
  std::vector<std::vector<int>> poly_exponents;  // polynomial kind: one multi-index per term
  Vec offsets;                                 // basis values at x = 0
  uint64_t seed = 0;                           // provenance of random centers

  int basis_count() const {
    return kind == KernelKind::polynomial ? static_cast<int>(poly_exponents.size())
                                          : static_cast<int>(centers.size());
  }
  int lifted_dim() const { return (includes_state ? state_dim : 0) + basis_count(); }
  std::string fingerprint() const;
};

Dictionary build_dictionary(KernelKind kind, const std::vector<Vec>& centers,
                            int state_dim, bool includes_state = true);

/// Monomials of total degree 2..degree (1..degree when the state block is
/// absent, so the identity coordinates are never duplicated).
Dictionary build_polynomial_dictionary(int state_dim, int degree,
                                       bool includes_state = true);

/// Centers drawn uniformly in the box hull of X with a fixed seed, rejecting
/// draws closer than 1e-3 * diam(X) to an existing center.
Dictionary random_dictionary(KernelKind kind, int n_centers,
                             const geometry::HPolytope& X, uint64_t seed,
                             bool includes_state = true);

Vec lift(const Dictionary& dict, const Vec& x);
/// Analytic Jacobian dPsi/dx (n_psi x n). Rows for samples on a kernel center
/// where the kernel is not differentiable are returned as zero; rank_check
/// reports such hits.
Mat lift_jacobian(const Dictionary& dict, const Vec& x);
Mat lift_jacobian_fd(const Dictionary& dict, const Vec& x, double h = 1e-6);

struct RankReport {
  int min_rank = 0;
  double worst_sigma_ratio = 0.0;  // sigma_n / sigma_1 at the worst sample
  Vec worst_sample;
  std::vector<int> center_hits;  // sample indices on a non-differentiable point
  bool pass = false;
};

/// Maximal-rank diagnostic: rank of dPsi at each sample must equal state_dim.
RankReport rank_check(const Dictionary& dict, const std::vector<Vec>& samples);

/// Grid estimate of the Lipschitz constant of Psi over the box hull of X.
double lipschitz_estimate(const Dictionary& dict, const geometry::HPolytope& X,
                          int grid_per_dim = 25);

}  // namespace rkmpc::lifting
