#include "rkmpc/simplex.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace rkmpc::detail {
namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kFeasTol = 1e-9;

// Tableau simplex core: maximize c'z s.t. T z = rhs, z >= 0 starting from the
// given basic feasible basis. T is modified in place. Returns false on
// unboundedness. Bland's rule throughout.
bool run_simplex(Mat& T, Vec& rhs, const Vec& c, std::vector<int>& basis) {
  const int m = static_cast<int>(T.rows());
  const int n = static_cast<int>(T.cols());
  // reduced cost row: z_j - c_j = c_B' B^-1 a_j - c_j; maintained incrementally
  Vec red = Vec::Zero(n);
  for (int j = 0; j < n; ++j) {
    double cb = 0.0;
    for (int i = 0; i < m; ++i) cb += c(basis[i]) * T(i, j);
    red(j) = cb - c(j);
  }
  const int max_pivots = 50 * (m + n) + 1000;
  for (int it = 0; it < max_pivots; ++it) {
    // entering: smallest index with negative reduced cost
    int enter = -1;
    for (int j = 0; j < n; ++j) {
      if (red(j) < -kFeasTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return true;  // optimal
    // ratio test, Bland tie-break on basis index
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (T(i, enter) > kPivotTol) {
        double ratio = rhs(i) / T(i, enter);
        if (ratio < best - 1e-12 ||
            (ratio < best + 1e-12 && (leave < 0 || basis[i] < basis[leave]))) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) return false;  // unbounded
    // pivot
    const double piv = T(leave, enter);
    T.row(leave) /= piv;
    rhs(leave) /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == leave) continue;
      const double f = T(i, enter);
      if (f != 0.0) {
        T.row(i) -= f * T.row(leave);
        rhs(i) -= f * rhs(leave);
        if (rhs(i) < 0 && rhs(i) > -1e-12) rhs(i) = 0;
      }
    }
    const double fr = red(enter);
    red -= fr * T.row(leave).transpose();
    basis[leave] = enter;
  }
  return true;  // pivot cap: treat current point as optimal enough
}

}  // namespace

LpResult lp_maximize(const Vec& c, const Mat& A, const Vec& b) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  LpResult res;
  if (m == 0) {
    // unconstrained: bounded only for c = 0
    if (c.lpNorm<Eigen::Infinity>() < kFeasTol) {
      res.status = LpStatus::optimal;
      res.value = 0.0;
      res.x = Vec::Zero(n);
    } else {
      res.status = LpStatus::unbounded;
    }
    return res;
  }

  // standard form: z = (x+, x-, slack, artificial)
  const int nsplit = 2 * n;
  std::vector<int> art_rows;
  Mat T(m, nsplit + m);
  Vec rhs(m);
  for (int i = 0; i < m; ++i) {
    double sgn = (b(i) < 0) ? -1.0 : 1.0;
    T.block(i, 0, 1, n) = sgn * A.row(i);
    T.block(i, n, 1, n) = -sgn * A.row(i);
    T.block(i, nsplit, 1, m).setZero();
    T(i, nsplit + i) = sgn;  // slack (negated rows get -1)
    rhs(i) = sgn * b(i);
    if (sgn < 0) art_rows.push_back(i);
  }
  const int nart = static_cast<int>(art_rows.size());
  Mat Tb(m, nsplit + m + nart);
  Tb.leftCols(nsplit + m) = T;
  Tb.rightCols(nart).setZero();
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = nsplit + i;
  for (int k = 0; k < nart; ++k) {
    Tb(art_rows[k], nsplit + m + k) = 1.0;
    basis[art_rows[k]] = nsplit + m + k;
  }

  if (nart > 0) {
    // phase 1: maximize -(sum of artificials)
    Vec c1 = Vec::Zero(nsplit + m + nart);
    c1.tail(nart).setConstant(-1.0);
    run_simplex(Tb, rhs, c1, basis);
    double art_sum = 0.0;
    for (int i = 0; i < m; ++i)
      if (basis[i] >= nsplit + m) art_sum += rhs(i);
    if (art_sum > 1e-7) {
      res.status = LpStatus::infeasible;
      return res;
    }
    // pivot lingering zero-level artificials out where possible
    for (int i = 0; i < m; ++i) {
      if (basis[i] >= nsplit + m) {
        int enter = -1;
        for (int j = 0; j < nsplit + m; ++j) {
          if (std::abs(Tb(i, j)) > 1e-7) {
            enter = j;
            break;
          }
        }
        if (enter >= 0) {
          const double piv = Tb(i, enter);
          Tb.row(i) /= piv;
          rhs(i) /= piv;
          for (int r = 0; r < m; ++r) {
            if (r == i) continue;
            const double f = Tb(r, enter);
            if (f != 0.0) {
              Tb.row(r) -= f * Tb.row(i);
              rhs(r) -= f * rhs(i);
            }
          }
          basis[i] = enter;
        }
      }
    }
  }

  // phase 2 on the original columns; rows still holding an artificial at
  // level zero are redundant (all-zero in the real columns) and are dropped
  std::vector<int> rows_keep;
  for (int i = 0; i < m; ++i)
    if (basis[i] < nsplit + m) rows_keep.push_back(i);
  const int m2 = static_cast<int>(rows_keep.size());
  Mat T2(m2, nsplit + m);
  Vec rhs2(m2);
  std::vector<int> basis2(m2);
  for (int r = 0; r < m2; ++r) {
    T2.row(r) = Tb.row(rows_keep[r]).head(nsplit + m);
    rhs2(r) = rhs(rows_keep[r]);
    basis2[r] = basis[rows_keep[r]];
  }
  Vec c2 = Vec::Zero(nsplit + m);
  c2.head(n) = c;
  c2.segment(n, n) = -c;
  bool bounded = run_simplex(T2, rhs2, c2, basis2);
  if (!bounded) {
    res.status = LpStatus::unbounded;
    return res;
  }
  Vec z = Vec::Zero(nsplit + m);
  for (int r = 0; r < m2; ++r) z(basis2[r]) = rhs2(r);
  res.x = z.head(n) - z.segment(n, n);
  res.value = c.dot(res.x);
  res.status = LpStatus::optimal;
  return res;
}

bool lp_feasible(const Mat& A, const Vec& b) {
  // phase-1 via lp_maximize with zero objective
  LpResult r = lp_maximize(Vec::Zero(A.cols()), A, b);
  return r.status == LpStatus::optimal;
}

Vec covering_lp(const Mat& dens, const Vec& gaps, const Vec& costs, bool* ok,
                std::vector<std::pair<int, double>>* duals) {
  const int k = static_cast<int>(costs.size());
  if (ok) *ok = true;
  if (duals) duals->clear();
  std::vector<int> keep;
  for (int p = 0; p < gaps.size(); ++p) {
    if (gaps(p) <= kFeasTol) continue;
    if (dens.row(p).lpNorm<Eigen::Infinity>() < 1e-12) {
      if (ok) *ok = false;  // positive gap, zero denominators: unsatisfiable
      continue;
    }
    keep.push_back(p);
  }
  if (keep.empty()) return Vec::Zero(k);

  // dual: max g'y  s.t.  dens' y <= costs, y >= 0.  k rows, P columns.
  const int P = static_cast<int>(keep.size());
  Mat T(k, P + k);
  Vec rhs = costs;
  Vec c = Vec::Zero(P + k);
  for (int p = 0; p < P; ++p) {
    T.col(p) = dens.row(keep[p]).transpose();
    c(p) = gaps(keep[p]);
  }
  T.rightCols(k) = Mat::Identity(k, k);
  std::vector<int> basis(k);
  for (int i = 0; i < k; ++i) basis[i] = P + i;
  run_simplex(T, rhs, c, basis);  // costs > 0 so slack basis is feasible; bounded since L multipliers finite

  // primal L = duals = reduced costs on the slack columns at optimality
  Vec red = Vec::Zero(k);
  for (int j = 0; j < k; ++j) {
    double cb = 0.0;
    for (int i = 0; i < k; ++i) cb += c(basis[i]) * T(i, P + j);
    red(j) = cb;  // c of slack is 0
  }
  if (duals) {
    for (int i = 0; i < k; ++i)
      if (basis[i] < P && rhs(i) > kFeasTol)
        duals->emplace_back(keep[basis[i]], rhs(i));
  }
  return red.cwiseMax(0.0);
}

}  // namespace rkmpc::detail
