#pragma once

#include <optional>

#include "qcfa/lp.hpp"
#include "qcfa/metrics.hpp"

namespace qcfa {

/// CFA design problem data. tv_max is in the 2K-normalized scale reported by
/// the metrics module; the solver converts to the raw Def.-3 sum internally.
struct DesignProblem {
  int rows = 4;
  int cols = 4;
  double lambda_l = 0.1;
  double lambda_rho = 0.02;
  double tv_max = 0.131;
  CrosstalkModel deltas{0.23, 0.15, 0.10};
  LumaChromaBasis basis = LumaChromaBasis::canonical();
  bool enable_anti_alias = true;
  bool enable_tv = true;

  int K() const { return rows * cols; }
  double tv_max_raw() const { return tv_max * 2.0 * K(); }
  void validate() const;
};

struct SolverTrace {
  struct Record {
    int k = 0;
    double tau = 0;
    double objective = 0;
    std::string subproblem_status;
  };
  std::vector<Record> records;
  bool converged = false;
  int lp_solves = 0;
};

struct DesignResult {
  ColorAtom atom;
  SolverTrace trace;
  ConstraintResiduals residuals;
  double gamma_l = 0;
  double gamma_c = 0;  // Def.-1 scale; the published table squares this
  double rho = 0;
  double tv_norm = 0;
};

/// `count` points in [0,1]^dim; every dimension is stratified into `count`
/// equal bins with exactly one sample per bin. Deterministic per seed.
std::vector<Vec> latin_hypercube(int count, int dim, std::uint64_t seed);

/// Convex subproblem of the successive approximation at linearization point
/// x_k and fixed lower bound tau (tau <= 0 leaves the sensitivity cuts out).
LinearProgram build_sca_subproblem(const DesignProblem& problem, const Vec& x_k, double tau);

/// Successive convex approximation (monotone in tau, golden-section outer
/// search over tau per iteration).
DesignResult solve_sca(const DesignProblem& problem, const Vec& x0, double tol = 1e-6,
                       int max_iter = 100);

/// Quadrature-carrier convex design at grid frequency omega0 = (u0, v0).
/// When phi is absent, 24 phases in [0, pi) are tried and the best gamma_c
/// wins. Throws SolverError when infeasible.
DesignResult solve_convex_design(const DesignProblem& problem, std::pair<int, int> omega0,
                                 std::optional<double> phi);

struct MultiStartResult {
  DesignResult best;
  int best_index = -1;
  std::vector<SolverTrace> traces;
  std::vector<double> gamma_c_per_start;
};

/// Latin-hypercube multi-start; selection by final gamma_c, ties broken by
/// lower rho, then lower TV, then start index. Result is independent of the
/// parallelism degree.
MultiStartResult multi_start_design(const DesignProblem& problem, int n_starts,
                                    std::uint64_t seed, int parallelism);

}  // namespace qcfa
