#pragma once

#include "qcfa/types.hpp"

namespace qcfa {

/// Dense linear program in the form
///   maximize c^T x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  lower <= x <= upper.
/// Upper bounds may be +infinity; lower bounds must be finite.
struct LinearProgram {
  Vec c;
  Mat A_eq;
  Vec b_eq;
  Mat A_ub;
  Vec b_ub;
  Vec lower, upper;

  int num_vars() const { return int(c.size()); }
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vec x;
  double objective = 0;
  int iterations = 0;
};

/// Bounded-variable revised simplex with a dense basis inverse. Cold solves
/// run an artificial-variable phase 1; after RHS-only updates the retained
/// basis stays dual feasible and is reoptimized by the dual simplex, which is
/// what makes the scalar line searches of the design solvers cheap.
class SimplexSolver {
 public:
  explicit SimplexSolver(const LinearProgram& lp, double tol = 1e-9);

  /// Replace the right-hand side of inequality row `row` (0-based in A_ub).
  void set_ub_rhs(int row, double value);
  /// Replace the structural coefficients and RHS of inequality row `row`.
  void set_ub_row(int row, const Vec& coeffs, double value);

  LpResult solve(int max_iter = 200000);

 private:
  enum class VStat : unsigned char { Basic, AtLower, AtUpper };

  int m_ = 0;         // rows
  int n_real_ = 0;    // structural + slack columns
  int n_struct_ = 0;  // structural columns
  int n_ = 0;         // total columns incl. artificials
  int n_eq_ = 0;
  double tol_ = 1e-9;
  Mat A_;             // m x n
  Vec b_, lo_, hi_, c_, cart_;
  Mat Binv_;
  std::vector<int> basis_;
  std::vector<VStat> vstat_;
  Vec xval_;
  bool factor_valid_ = false;
  bool have_basis_ = false;

  bool refactor();
  void recompute_basic_values();
  double primal_infeasibility() const;
  // plain bounded primal simplex on objective `obj`; returns 0 optimal,
  // 1 unbounded, 2 singular, 3 iteration limit
  int primal(const Vec& obj, int max_iter, int& used);
  // bounded dual simplex from a dual-feasible basis; returns 0 primal
  // feasible, 1 primal infeasible, 2 numerical failure, 3 iteration limit
  int dual(int max_iter, int& used);
  LpResult cold_solve(int max_iter);
  LpResult finish(int used);
};

/// One-shot solve.
LpResult lp_solve(const LinearProgram& lp, double tol = 1e-9);

}  // namespace qcfa
