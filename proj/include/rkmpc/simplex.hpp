#pragma once

#include "rkmpc/types.hpp"

namespace rkmpc::detail {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;
  Vec x;
};

/// Maximize c'x subject to A x <= b with x free. Dense two-phase tableau
/// simplex with Bland's rule (deterministic, cycle-free). Intended for the
/// small polytopes this library manipulates (dim <= ~10, a few hundred rows).
LpResult lp_maximize(const Vec& c, const Mat& A, const Vec& b);

/// Feasibility of {x : A x <= b} (phase-1 only).
bool lp_feasible(const Mat& A, const Vec& b);

/// Covering LP: minimize costs'L subject to dens.row(p) * L >= gaps(p), L >= 0.
/// Solved through its standard-form dual (k rows, one column per pair), so the
/// pair count may be large while k stays tiny. Rows with gaps(p) <= 0 are
/// skipped; a row with positive gap and an all-zero dens row is unsatisfiable
/// and reported via `ok = false`. `duals`, when given, receives the (row,
/// multiplier) pairs with positive dual weight (at most k of them).
Vec covering_lp(const Mat& dens, const Vec& gaps, const Vec& costs, bool* ok = nullptr,
                std::vector<std::pair<int, double>>* duals = nullptr);

}  // namespace rkmpc::detail
