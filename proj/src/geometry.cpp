#include "rkmpc/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "rkmpc/rng.hpp"
#include "rkmpc/simplex.hpp"

namespace rkmpc::geometry {

namespace {

double spectral_radius(const Mat& F) {
  return F.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Zonotope::Zonotope(Vec c, Mat G) : center(std::move(c)), generators(std::move(G)) {
  if (generators.size() == 0) generators.resize(center.size(), 0);
  require_dims(generators.rows() == center.size(),
               "Zonotope: generator dimension mismatch");
}

Zonotope Zonotope::point(const Vec& c) { return Zonotope(c, Mat(c.size(), 0)); }

Zonotope Zonotope::box(const Vec& c, const Vec& half_widths) {
  require_dims(c.size() == half_widths.size(), "Zonotope::box: size mismatch");
  return Zonotope(c, Mat(half_widths.asDiagonal()));
}

Zonotope Zonotope::symmetric_box(const Vec& half_widths) {
  return box(Vec::Zero(half_widths.size()), half_widths);
}

bool Zonotope::is_axis_aligned_box() const {
  for (int j = 0; j < generators.cols(); ++j) {
    int nz = 0;
    for (int i = 0; i < generators.rows(); ++i)
      if (generators(i, j) != 0.0) ++nz;
    if (nz > 1) return false;
  }
  return true;
}

Vec Zonotope::radii() const { return generators.cwiseAbs().rowwise().sum(); }

Zonotope Zonotope::interval_hull() const { return box(center, radii()); }

Zonotope Zonotope::scaled(double factor) const {
  return Zonotope(factor * center, factor * generators);
}

HPolytope::HPolytope(Mat A_, Vec b_) : A(std::move(A_)), b(std::move(b_)) {
  require_dims(A.rows() == b.size(), "HPolytope: row count mismatch");
  for (int i = 0; i < A.rows(); ++i)
    require(A.row(i).lpNorm<Eigen::Infinity>() > 0.0,
            "HPolytope: zero normal row");
}

HPolytope HPolytope::box(const Vec& lo, const Vec& hi) {
  require_dims(lo.size() == hi.size(), "HPolytope::box: size mismatch");
  const int d = static_cast<int>(lo.size());
  Mat A(2 * d, d);
  Vec b(2 * d);
  A.setZero();
  for (int i = 0; i < d; ++i) {
    A(2 * i, i) = 1.0;
    b(2 * i) = hi(i);
    A(2 * i + 1, i) = -1.0;
    b(2 * i + 1) = -lo(i);
  }
  return HPolytope(A, b);
}

HPolytope HPolytope::symmetric_box(const Vec& half_widths) {
  return box(-half_widths, half_widths);
}

bool HPolytope::is_empty() const { return !detail::lp_feasible(A, b); }

bool HPolytope::contains_origin(double margin) const {
  for (int i = 0; i < A.rows(); ++i) {
    if (b(i) < margin * A.row(i).norm()) return false;
  }
  return true;
}

double support(const Zonotope& Z, const Vec& dir) {
  require_dims(dir.size() == Z.dim(), "support: direction dimension mismatch");
  return dir.dot(Z.center) + (Z.generators.transpose() * dir).cwiseAbs().sum();
}

std::optional<double> support(const HPolytope& P, const Vec& dir) {
  require_dims(dir.size() == P.dim(), "support: direction dimension mismatch");
  detail::LpResult r = detail::lp_maximize(dir, P.A, P.b);
  if (r.status == detail::LpStatus::unbounded) return std::nullopt;
  if (r.status == detail::LpStatus::infeasible)
    throw NumericalError("support: polytope is empty");
  return r.value;
}

Zonotope minkowski_sum(const Zonotope& Z1, const Zonotope& Z2) {
  require_dims(Z1.dim() == Z2.dim(), "minkowski_sum: dimension mismatch");
  Mat G(Z1.dim(), Z1.num_generators() + Z2.num_generators());
  G << Z1.generators, Z2.generators;
  return Zonotope(Z1.center + Z2.center, G);
}

Zonotope linear_map(const Mat& M, const Zonotope& Z) {
  require_dims(M.cols() == Z.dim(), "linear_map: dimension mismatch");
  return Zonotope(M * Z.center, M * Z.generators);
}

HPolytope pontryagin_diff(const HPolytope& P, const Zonotope& Z) {
  require_dims(P.dim() == Z.dim(), "pontryagin_diff: dimension mismatch");
  Vec b = P.b;
  for (int i = 0; i < P.A.rows(); ++i)
    b(i) -= support(Z, P.A.row(i).transpose());
  return HPolytope(P.A, b);
}

HPolytope intersect(const HPolytope& P1, const HPolytope& P2) {
  require_dims(P1.dim() == P2.dim(), "intersect: dimension mismatch");
  Mat A(P1.num_rows() + P2.num_rows(), P1.dim());
  Vec b(A.rows());
  A << P1.A, P2.A;
  b << P1.b, P2.b;
  return HPolytope(A, b);
}

bool contains(const HPolytope& P, const Vec& x, double tol) {
  if (x.size() != P.dim()) return false;
  return ((P.A * x - P.b).array() <= tol).all();
}

bool contains(const Zonotope& Z, const Vec& x, double tol) {
  if (x.size() != Z.dim()) return false;
  const Vec r = x - Z.center;
  const int g = Z.num_generators();
  if (g == 0) return r.lpNorm<Eigen::Infinity>() <= tol;
  if (Z.is_axis_aligned_box()) {
    return ((r.cwiseAbs() - Z.radii()).array() <= tol).all();
  }
  // feasibility of G theta = r, |theta| <= 1 as a linear feasibility problem
  const int d = Z.dim();
  Mat A(2 * d + 2 * g, g);
  Vec b(2 * d + 2 * g);
  A.topRows(d) = Z.generators;
  b.head(d) = r.array() + tol;
  A.middleRows(d, d) = -Z.generators;
  b.segment(d, d) = -r.array() + tol;
  A.middleRows(2 * d, g) = Mat::Identity(g, g);
  b.segment(2 * d, g).setOnes();
  A.bottomRows(g) = -Mat::Identity(g, g);
  b.tail(g).setOnes();
  return detail::lp_feasible(A, b);
}

Mat certificate_directions(int dim, int n_random, uint64_t seed) {
  if (dim == 1) {
    Mat D(1, 2);
    D << 1.0, -1.0;
    return D;
  }
  if (dim == 2) {
    Mat D(2, 360);
    for (int k = 0; k < 360; ++k) {
      const double a = 2.0 * std::numbers::pi * k / 360.0;
      D(0, k) = std::cos(a);
      D(1, k) = std::sin(a);
    }
    return D;
  }
  Mat D(dim, n_random);
  auto gen = detail::stream_rng(seed, static_cast<uint64_t>(dim));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < n_random; ++k) {
    Vec v(dim);
    do {
      for (int i = 0; i < dim; ++i) v(i) = normal(gen);
    } while (v.norm() < 1e-12);
    D.col(k) = v / v.norm();
  }
  return D;
}

Zonotope rpi_set(const Mat& F, const Zonotope& W, double alpha_max, int k_max) {
  require_dims(F.rows() == F.cols() && F.rows() == W.dim(),
               "rpi_set: dimension mismatch");
  require(alpha_max > 0.0 && alpha_max < 1.0, "rpi_set: alpha_max must be in (0,1)");
  if (spectral_radius(F) >= 1.0)
    throw NumericalError("rpi_set: F is not Schur stable");

  // containment directions: exact facet normals for boxes, grid otherwise
  Mat dirs;
  if (W.is_axis_aligned_box()) {
    const int d = W.dim();
    dirs.resize(d, 2 * d);
    dirs.setZero();
    for (int i = 0; i < d; ++i) {
      dirs(i, 2 * i) = 1.0;
      dirs(i, 2 * i + 1) = -1.0;
    }
  } else {
    dirs = certificate_directions(W.dim());
  }
  Vec hW(dirs.cols());
  for (int j = 0; j < dirs.cols(); ++j) hW(j) = support(W, dirs.col(j));
  require((hW.array() > 0.0).all(),
          "rpi_set: W must contain the origin in its interior");

  Mat Fk = F;  // F^k
  int k = -1;
  double alpha = 0.0;
  for (int kk = 1; kk <= k_max; ++kk) {
    double a = 0.0;
    for (int j = 0; j < dirs.cols(); ++j) {
      const double h = support(linear_map(Fk, W), dirs.col(j));
      a = std::max(a, h / hW(j));
    }
    if (a <= alpha_max) {
      k = kk;
      alpha = a;
      break;
    }
    Fk = F * Fk;
  }
  if (k < 0)
    throw NumericalError(
        "rpi_set: k_max exhausted without reaching alpha_max; F contracts too slowly");

  Zonotope Z = W;
  Mat Fi = F;
  for (int i = 1; i < k; ++i) {
    Z = minkowski_sum(Z, linear_map(Fi, W));
    Fi = F * Fi;
  }
  return Z.scaled(1.0 / (1.0 - alpha));
}

HPolytope max_invariant_set(const Mat& A_cl, const HPolytope& C_con, int iter_cap) {
  require_dims(A_cl.rows() == A_cl.cols() && A_cl.rows() == C_con.dim(),
               "max_invariant_set: dimension mismatch");
  if (spectral_radius(A_cl) >= 1.0)
    throw NumericalError("max_invariant_set: A_cl is not Schur stable");
  require(C_con.contains_origin(1e-12),
          "max_invariant_set: constraint set must contain the origin");

  const int d = C_con.dim();
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> offs;
  for (int i = 0; i < C_con.num_rows(); ++i) {
    rows.emplace_back(C_con.A.row(i));
    offs.push_back(C_con.b(i));
  }
  auto assemble = [&]() {
    Mat A(static_cast<int>(rows.size()), d);
    Vec b(static_cast<int>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
      A.row(static_cast<int>(i)) = rows[i];
      b(static_cast<int>(i)) = offs[i];
    }
    return HPolytope(A, b);
  };

  // interval bounds of the current iterate; cheap sound redundancy screen
  bool box_valid = false;
  Vec box_lo(d), box_hi(d);
  auto refresh_box = [&](const HPolytope& omega) {
    box_valid = true;
    for (int i = 0; i < d && box_valid; ++i) {
      Vec e = Vec::Zero(d);
      e(i) = 1.0;
      auto hp = support(omega, e);
      auto hm = support(omega, -e);
      if (!hp || !hm) {
        box_valid = false;
        break;
      }
      box_hi(i) = *hp;
      box_lo(i) = -*hm;
    }
  };
  auto box_max = [&](const Eigen::RowVectorXd& a) {
    double v = 0.0;
    for (int j = 0; j < d; ++j) v += a(j) > 0 ? a(j) * box_hi(j) : a(j) * box_lo(j);
    return v;
  };

  Mat At = A_cl;  // A_cl^{t+1}
  for (int t = 0; t < iter_cap; ++t) {
    HPolytope omega = assemble();
    refresh_box(omega);
    bool all_redundant = true;
    const Mat cand = C_con.A * At;
    for (int i = 0; i < cand.rows(); ++i) {
      Eigen::RowVectorXd a = cand.row(i);
      const double tol = 1e-10 * (1.0 + std::abs(C_con.b(i)));
      if (a.norm() < 1e-13) continue;  // degenerate row holds everywhere (b > 0)
      if (box_valid && box_max(a) <= C_con.b(i) + tol) continue;  // provably redundant
      auto h = support(omega, a.transpose());
      if (h.has_value() && *h <= C_con.b(i) + tol) continue;
      all_redundant = false;
      rows.emplace_back(a);
      offs.push_back(C_con.b(i));
      if (rows.size() > 2000)
        throw NumericalError("max_invariant_set: representation grew past 2000 rows");
    }
    if (all_redundant) {
      // exact redundancy sweep keeps the final representation small
      HPolytope full = assemble();
      std::vector<int> keep;
      for (int i = 0; i < full.num_rows(); ++i) {
        Mat Ao(full.num_rows() - 1, d);
        Vec bo(full.num_rows() - 1);
        int r = 0;
        for (int jj = 0; jj < full.num_rows(); ++jj) {
          if (jj == i) continue;
          Ao.row(r) = full.A.row(jj);
          bo(r) = full.b(jj);
          ++r;
        }
        auto h = support(HPolytope(Ao, bo), full.A.row(i).transpose());
        if (!h.has_value() || *h > full.b(i) + 1e-10 * (1.0 + std::abs(full.b(i))))
          keep.push_back(i);
      }
      if (keep.empty()) return full;
      Mat A(static_cast<int>(keep.size()), d);
      Vec b(static_cast<int>(keep.size()));
      for (size_t i = 0; i < keep.size(); ++i) {
        A.row(static_cast<int>(i)) = full.A.row(keep[i]);
        b(static_cast<int>(i)) = full.b(keep[i]);
      }
      return HPolytope(A, b);
    }
    At = A_cl * At;
  }
  throw NumericalError("max_invariant_set: iteration cap reached without convergence");
}

bool is_degenerate(const Zonotope& Z, double tol) {
  if (Z.num_generators() < Z.dim()) return true;
  Eigen::JacobiSVD<Mat> svd(Z.generators);
  const Vec s = svd.singularValues();
  return s(s.size() - 1) <= tol * std::max(1.0, s(0));
}

namespace {

// facet enumeration in the full-dimensional case
HPolytope hrep_full_rank(const Zonotope& Z) {
  const int d = Z.dim();
  const int g = Z.num_generators();
  std::vector<Vec> normals;

  if (d == 1) {
    Mat A(2, 1);
    A << 1.0, -1.0;
    Vec b(2);
    b << support(Z, Vec::Ones(1)), support(Z, -Vec::Ones(1));
    return HPolytope(A, b);
  }

  std::vector<int> idx(d - 1);
  // iterate over all (d-1)-subsets of generators
  std::vector<int> comb(d - 1);
  for (int i = 0; i < d - 1; ++i) comb[i] = i;
  auto next_comb = [&]() {
    int i = d - 2;
    while (i >= 0 && comb[i] == g - (d - 1) + i) --i;
    if (i < 0) return false;
    ++comb[i];
    for (int j = i + 1; j < d - 1; ++j) comb[j] = comb[j - 1] + 1;
    return true;
  };
  if (g >= d - 1) {
    do {
      Mat S(d, d - 1);
      for (int j = 0; j < d - 1; ++j) S.col(j) = Z.generators.col(comb[j]);
      Eigen::JacobiSVD<Mat> svd(S, Eigen::ComputeFullU);
      if (d >= 2 && svd.rank() < d - 1) continue;
      Vec n = svd.matrixU().col(d - 1);  // orthogonal complement of the subset
      // dedup up to sign
      bool dup = false;
      for (const Vec& m : normals) {
        if ((m - n).lpNorm<Eigen::Infinity>() < 1e-10 ||
            (m + n).lpNorm<Eigen::Infinity>() < 1e-10) {
          dup = true;
          break;
        }
      }
      if (!dup) normals.push_back(n);
    } while (next_comb());
  }

  Mat A(2 * static_cast<int>(normals.size()), d);
  Vec b(A.rows());
  for (size_t i = 0; i < normals.size(); ++i) {
    A.row(2 * static_cast<int>(i)) = normals[i].transpose();
    b(2 * static_cast<int>(i)) = support(Z, normals[i]);
    A.row(2 * static_cast<int>(i) + 1) = -normals[i].transpose();
    b(2 * static_cast<int>(i) + 1) = support(Z, -normals[i]);
  }
  return HPolytope(A, b);
}

}  // namespace

HPolytope to_hrep(const Zonotope& Z) {
  const int d = Z.dim();
  const int g = Z.num_generators();
  require(d <= 8 && g <= 12,
          "to_hrep: size bound exceeded (dim <= 8, generators <= 12); request a box approximation instead");
  if (g == 0) {
    // point: paired equalities x = c
    Mat A(2 * d, d);
    Vec b(2 * d);
    A << Mat::Identity(d, d), -Mat::Identity(d, d);
    b << Z.center, -Z.center;
    return HPolytope(A, b);
  }
  if (!is_degenerate(Z)) return hrep_full_rank(Z);

  // degenerate: factor through the affine hull
  Eigen::JacobiSVD<Mat> svd(Z.generators, Eigen::ComputeFullU);
  const Vec s = svd.singularValues();
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > 1e-12 * std::max(1.0, s(0))) ++r;
  const Mat U = svd.matrixU();
  const Mat Ur = U.leftCols(r);    // basis of the affine hull
  const Mat Un = U.rightCols(d - r);

  HPolytope inner = (r == 0)
                        ? HPolytope(Mat::Zero(0, 0), Vec::Zero(0))
                        : hrep_full_rank(Zonotope(Vec::Zero(r), Ur.transpose() * Z.generators));

  const int nin = (r == 0) ? 0 : inner.num_rows();
  Mat A(nin + 2 * (d - r), d);
  Vec b(A.rows());
  for (int i = 0; i < nin; ++i) {
    Vec n = Ur * inner.A.row(i).transpose();
    A.row(i) = n.transpose();
    b(i) = inner.b(i) + n.dot(Z.center);
  }
  for (int j = 0; j < d - r; ++j) {
    const Vec u = Un.col(j);
    A.row(nin + 2 * j) = u.transpose();
    b(nin + 2 * j) = u.dot(Z.center);
    A.row(nin + 2 * j + 1) = -u.transpose();
    b(nin + 2 * j + 1) = -u.dot(Z.center);
  }
  return HPolytope(A, b);
}

Zonotope reduce_order(const Zonotope& Z, int order) {
  require(order >= 1, "reduce_order: order must be >= 1");
  const int d = Z.dim();
  const int g = Z.num_generators();
  const int keep = std::max(0, (order - 1) * d);
  if (g <= keep + d) return Z;

  // elongation score: ||g||_1 - ||g||_inf (small => box-like, safe to absorb)
  std::vector<int> ord(g);
  for (int i = 0; i < g; ++i) ord[i] = i;
  std::vector<double> score(g);
  for (int i = 0; i < g; ++i)
    score[i] = Z.generators.col(i).lpNorm<1>() - Z.generators.col(i).lpNorm<Eigen::Infinity>();
  std::stable_sort(ord.begin(), ord.end(),
                   [&](int a, int b) { return score[a] > score[b]; });

  Mat G(d, keep + d);
  G.setZero();
  for (int i = 0; i < keep; ++i) G.col(i) = Z.generators.col(ord[i]);
  Vec boxr = Vec::Zero(d);
  for (int i = keep; i < g; ++i) boxr += Z.generators.col(ord[i]).cwiseAbs();
  G.rightCols(d) = Mat(boxr.asDiagonal());
  return Zonotope(Z.center, G);
}

}  // namespace rkmpc::geometry
