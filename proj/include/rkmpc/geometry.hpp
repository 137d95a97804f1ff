#pragma once

#include <optional>
#include <vector>

#include "rkmpc/types.hpp"

namespace rkmpc::geometry {

/// Zonotope {c + sum_i theta_i g_i : |theta_i| <= 1}. Generators are the
/// columns of `generators`; a zonotope with no generators is a point.
struct Zonotope {
  Vec center;
  Mat generators;  // dim x g

  Zonotope() = default;
  Zonotope(Vec c, Mat G);

  int dim() const { return static_cast<int>(center.size()); }
  int num_generators() const { return static_cast<int>(generators.cols()); }

  static Zonotope point(const Vec& c);
  /// Axis-aligned box: center c, per-axis half-widths r >= 0.
  static Zonotope box(const Vec& c, const Vec& half_widths);
  /// Symmetric interval box [-r, r]^d.
  static Zonotope symmetric_box(const Vec& half_widths);

  /// True when every generator has a single nonzero component.
  bool is_axis_aligned_box() const;
  /// Per-axis support radii sum_j |G(i,j)|.
  Vec radii() const;
  /// Smallest axis-aligned box containing this zonotope.
  Zonotope interval_hull() const;
  Zonotope scaled(double factor) const;
};

/// H-polytope {x : A x <= b}. May be empty; emptiness is queryable, never a
/// construction error.
struct HPolytope {
  Mat A;
  Vec b;

  HPolytope() = default;
  HPolytope(Mat A_, Vec b_);

  int dim() const { return static_cast<int>(A.cols()); }
  int num_rows() const { return static_cast<int>(A.rows()); }

  static HPolytope box(const Vec& lo, const Vec& hi);
  static HPolytope symmetric_box(const Vec& half_widths);

  bool is_empty() const;
  bool contains_origin(double margin = 0.0) const;
};

/// State tube (lifted space) and the output tube it induces.
struct SetPair {
  Zonotope state_tube;   // Z_s, dim n_psi
  Zonotope output_tube;  // Z_x = C Z_s (+) V, dim n
};

double support(const Zonotope& Z, const Vec& dir);
/// Support of an H-polytope (LP). Returns nullopt when unbounded in `dir`,
/// throws on an empty polytope.
std::optional<double> support(const HPolytope& P, const Vec& dir);

Zonotope minkowski_sum(const Zonotope& Z1, const Zonotope& Z2);
Zonotope linear_map(const Mat& M, const Zonotope& Z);
HPolytope pontryagin_diff(const HPolytope& P, const Zonotope& Z);
HPolytope intersect(const HPolytope& P1, const HPolytope& P2);

bool contains(const HPolytope& P, const Vec& x, double tol = 1e-9);
bool contains(const Zonotope& Z, const Vec& x, double tol = 1e-9);

/// Directions used for sampled support-function containment certificates:
/// 360 uniform angles in 2-D, `n_random` fixed-seed random unit vectors above.
Mat certificate_directions(int dim, int n_random = 1000, uint64_t seed = 20240u);

/// Outer approximation of the minimal robust positively invariant set of
/// e+ = F e + w, w in W: finds the smallest k with F^k W inside alpha*W
/// (alpha <= alpha_max), returns (1-alpha)^-1 * (W + F W + ... + F^{k-1} W).
/// Containment is tested on W's facet normals when W is an axis-aligned box
/// (exact) and on a fixed direction grid otherwise.
Zonotope rpi_set(const Mat& F, const Zonotope& W, double alpha_max = 0.05,
                 int k_max = 200);

/// Maximal constraint-admissible invariant set of x+ = A_cl x inside C_con
/// (Gilbert-Tan iteration with LP redundancy elimination).
HPolytope max_invariant_set(const Mat& A_cl, const HPolytope& C_con,
                            int iter_cap = 500);

/// Rank of the generator matrix is below the ambient dimension.
bool is_degenerate(const Zonotope& Z, double tol = 1e-12);

/// Exact H-representation by facet enumeration; requires dim <= 8 and
/// generator count <= 12. Degenerate zonotopes are embedded in their affine
/// hull; the hull itself is returned as paired inequalities.
HPolytope to_hrep(const Zonotope& Z);

/// Girard order reduction: keeps the most elongated generators, boxes the
/// rest. Result has at most `order * dim` generators and contains Z.
Zonotope reduce_order(const Zonotope& Z, int order);

}  // namespace rkmpc::geometry
