#include "qcfa/design.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qcfa/parallel.hpp"
#include "qcfa/rng.hpp"

namespace qcfa {

void DesignProblem::validate() const {
  if (rows < 1 || cols < 1) throw DataError("design: atom dimensions must be positive");
  if (lambda_l < 0 || lambda_rho < 0) throw DataError("design: weights must be nonnegative");
  if (enable_tv && !(tv_max > 0)) throw DataError("design: tv_max must be positive");
  deltas.validate();
  basis.validate();
}

std::vector<Vec> latin_hypercube(int count, int dim, std::uint64_t seed) {
  if (count < 1 || dim < 1) throw DataError("latin_hypercube: count and dim must be >= 1");
  std::vector<Vec> pts(count, Vec::Zero(dim));
  for (int d = 0; d < dim; ++d) {
    Pcg32 rng(seed, std::uint64_t(d) + 1);
    std::vector<int> perm(count);
    for (int i = 0; i < count; ++i) perm[i] = i;
    for (int i = count - 1; i > 0; --i) {
      const int j = int(rng.next() % std::uint32_t(i + 1));
      std::swap(perm[i], perm[j]);
    }
    for (int i = 0; i < count; ++i) pts[i][d] = (perm[i] + rng.uniform()) / count;
  }
  return pts;
}

namespace {

constexpr double kPi = std::numbers::pi;

// Conjugate-class representatives of the off-baseband frequency grid.
struct FreqClasses {
  std::vector<std::pair<int, int>> reps;
  std::vector<bool> self_conj;
};

FreqClasses frequency_classes(int M, int N) {
  FreqClasses fc;
  std::vector<bool> seen(size_t(M) * N, false);
  for (int u = 0; u < M; ++u)
    for (int v = 0; v < N; ++v) {
      if ((u == 0 && v == 0) || seen[u * N + v]) continue;
      const int cu = (M - u) % M, cv = (N - v) % N;
      seen[u * N + v] = seen[cu * N + cv] = true;
      fc.reps.emplace_back(u, v);
      fc.self_conj.push_back(cu == u && cv == v);
    }
  return fc;
}

// Row of F Z_i at frequency (u,v): complex coefficients over x = [h_r;h_g;h_b].
CVec fz_row(const SelectionMaps& Z, int M, int N, int u, int v, int i) {
  const int K = M * N;
  CVec row = CVec::Zero(3 * K);
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < N; ++n) {
      const double ang = -2.0 * kPi * (double(m) * u / M + double(n) * v / N);
      const Complex e(std::cos(ang), std::sin(ang));
      for (int c = 0; c < 3; ++c) row[c * K + m * N + n] += Z.rows(i, c) * e;
    }
  return row;
}

// Circular difference operator rows over a single channel grid.
std::vector<std::pair<std::array<int, 2>, std::array<double, 2>>> diff_pairs(int M, int N) {
  std::vector<std::pair<std::array<int, 2>, std::array<double, 2>>> out;
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < N; ++n)
      out.push_back({{((m + 1) % M) * N + n, m * N + n}, {1.0, -1.0}});
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < N; ++n)
      out.push_back({{m * N + (n + 1) % N, m * N + n}, {1.0, -1.0}});
  return out;
}

// Shared skeleton of the SCA subproblem; the two sensitivity cuts are the
// last two inequality rows (zeroed until set).
struct ScaSkeleton {
  LinearProgram lp;
  int n_vars = 0;
  int cut_row_alpha = -1;
  int cut_row_beta = -1;
  SelectionMaps Z;
  Vec b_l;  // gamma_l gradient over x, padded later
};

ScaSkeleton build_skeleton(const DesignProblem& p, bool with_cut_rows) {
  p.validate();
  const int M = p.rows, N = p.cols, K = p.K();
  const int nx = 3 * K;
  const SelectionMaps Z = build_selection_maps(p.basis, K);
  const FreqClasses fc = frequency_classes(M, N);

  const int n_diff = 2 * K;
  const int n_tv_aux = p.enable_tv ? 3 * n_diff : 0;

  // rho absolute-value terms: (channel, rep, re/im) with conjugate weight
  struct RhoTerm {
    Vec row;
    double weight;
  };
  std::vector<RhoTerm> rho_terms;
  for (int ch = 1; ch <= 2; ++ch) {
    // baseband contributes |Re| of the DC coefficient
    rho_terms.push_back({fz_row(Z, M, N, 0, 0, ch).real(), 1.0});
    for (size_t t = 0; t < fc.reps.size(); ++t) {
      const auto [u, v] = fc.reps[t];
      const CVec row = fz_row(Z, M, N, u, v, ch);
      const double w = fc.self_conj[t] ? 1.0 : 2.0;
      rho_terms.push_back({row.real(), w});
      if (!fc.self_conj[t]) rho_terms.push_back({row.imag(), w});
    }
  }
  const int n_rho = int(rho_terms.size());
  const int n_vars = nx + n_tv_aux + n_rho;

  // equality rows
  std::vector<Vec> eq_rows;
  for (size_t t = 0; t < fc.reps.size(); ++t) {
    const auto [u, v] = fc.reps[t];
    const CVec row = fz_row(Z, M, N, u, v, 0);
    eq_rows.push_back(row.real());
    if (!fc.self_conj[t]) eq_rows.push_back(row.imag());
  }
  if (p.enable_anti_alias) {
    for (const auto& [u, v] : anti_alias_index_set(M, N)) {
      const bool self_conj = ((M - u) % M == u) && ((N - v) % N == v);
      for (int ch = 1; ch <= 2; ++ch) {
        const CVec row = fz_row(Z, M, N, u, v, ch);
        eq_rows.push_back(row.real());
        if (!self_conj) eq_rows.push_back(row.imag());
      }
    }
  }

  ScaSkeleton sk;
  sk.Z = Z;
  sk.n_vars = n_vars;
  LinearProgram& lp = sk.lp;
  lp.c = Vec::Zero(n_vars);
  sk.b_l = Z.dense(0).colwise().sum().transpose() / K;
  lp.c.head(nx) = p.lambda_l * sk.b_l;

  lp.A_eq = Mat::Zero(int(eq_rows.size()), n_vars);
  lp.b_eq = Vec::Zero(int(eq_rows.size()));
  for (size_t i = 0; i < eq_rows.size(); ++i) lp.A_eq.row(int(i)).head(nx) = eq_rows[i];

  int n_ub = 0;
  if (p.enable_tv) n_ub += 3 * n_diff * 2 + 1;
  n_ub += 2 * n_rho;
  if (with_cut_rows) n_ub += 2;
  lp.A_ub = Mat::Zero(n_ub, n_vars);
  lp.b_ub = Vec::Zero(n_ub);

  int r = 0;
  if (p.enable_tv) {
    const auto pairs = diff_pairs(M, N);
    for (int c = 0; c < 3; ++c)
      for (int j = 0; j < n_diff; ++j) {
        const auto& [idx, coef] = pairs[j];
        const int aux = nx + c * n_diff + j;
        for (int sgn : {+1, -1}) {
          lp.A_ub(r, c * K + idx[0]) = sgn * coef[0];
          lp.A_ub(r, c * K + idx[1]) = sgn * coef[1];
          lp.A_ub(r, aux) = -1.0;
          lp.b_ub[r] = 0.0;
          ++r;
        }
      }
    for (int c = 0; c < 3; ++c)
      lp.A_ub.row(r).segment(nx + c * n_diff, n_diff).setConstant(p.deltas.delta(c));
    lp.b_ub[r] = p.tv_max_raw();
    ++r;
  }
  // The penalty enters the objective on the per-pixel spectrum scale (rho/K):
  // on the raw Def.-4 scale the paper's lambda_rho would dominate the
  // chrominance reward outright and every run would collapse to zero chroma.
  for (int t = 0; t < n_rho; ++t) {
    const int aux = nx + n_tv_aux + t;
    for (int sgn : {+1, -1}) {
      lp.A_ub.row(r).head(nx) = sgn * rho_terms[t].row;
      lp.A_ub(r, aux) = -1.0;
      lp.b_ub[r] = 0.0;
      ++r;
    }
    lp.c[aux] = -p.lambda_rho * rho_terms[t].weight / K;
  }
  if (with_cut_rows) {
    sk.cut_row_alpha = r;
    sk.cut_row_beta = r + 1;
    r += 2;  // rows stay zero (0 <= 0) until armed
  }

  lp.lower = Vec::Zero(n_vars);
  lp.upper = Vec::Constant(n_vars, std::numeric_limits<double>::infinity());
  lp.upper.head(nx).setOnes();
  return sk;
}

// gradient row and quadratic value of Q_i = Z_i^T Z_i / K at x
void cut_data(const SelectionMaps& Z, int channel, const Vec& x, Vec& grad, double& quad) {
  const int K = Z.K;
  const Vec zx = Z.apply(channel, x);
  quad = zx.squaredNorm() / K;
  grad = Vec::Zero(3 * K);
  for (int c = 0; c < 3; ++c) grad.segment(c * K, K) = (Z.rows(channel, c) / K) * zx;
}

double gamma_c_def1(const SelectionMaps& Z, const Vec& x) {
  return std::min(Z.apply(1, x).norm(), Z.apply(2, x).norm()) / std::sqrt(double(Z.K));
}

DesignResult finish_result(const DesignProblem& p, const Vec& x, SolverTrace trace) {
  DesignResult res;
  res.atom = ColorAtom::from_stacked(p.rows, p.cols, x.cwiseMax(0.0).cwiseMin(1.0));
  res.trace = std::move(trace);
  res.residuals = constraint_residuals(res.atom, p.basis, p.deltas, p.tv_max_raw(), p.enable_tv);
  res.gamma_l = luminance_sensitivity(res.atom, p.basis);
  res.gamma_c = chrominance_sensitivity(res.atom, p.basis);
  res.rho = orthogonality_penalty(res.atom, p.basis);
  res.tv_norm = total_variation(res.atom, p.deltas, true);
  return res;
}

}  // namespace

LinearProgram build_sca_subproblem(const DesignProblem& problem, const Vec& x_k, double tau) {
  const int nx = 3 * problem.K();
  if (x_k.size() != nx) throw DataError("sca: x_k length mismatch");
  ScaSkeleton sk = build_skeleton(problem, true);
  for (int ch = 1; ch <= 2; ++ch) {
    Vec grad;
    double quad;
    cut_data(sk.Z, ch, x_k, grad, quad);
    const int row = ch == 1 ? sk.cut_row_alpha : sk.cut_row_beta;
    sk.lp.A_ub.row(row).head(nx) = -2.0 * grad;
    sk.lp.b_ub[row] = -(tau * tau + quad);
  }
  return sk.lp;
}

DesignResult solve_sca(const DesignProblem& problem, const Vec& x0, double tol, int max_iter) {
  problem.validate();
  const int K = problem.K();
  const int nx = 3 * K;
  if (x0.size() != nx) throw DataError("sca: x0 length mismatch");

  ScaSkeleton sk = build_skeleton(problem, true);
  SimplexSolver solver(sk.lp, 1e-9);
  SolverTrace trace;

  Vec x = x0.cwiseMax(0.0).cwiseMin(1.0);
  double tau = 0.0;
  {
    // A feasible start resumes at its own sensitivity.
    ColorAtom a0 = ColorAtom::from_stacked(problem.rows, problem.cols, x);
    const auto r0 = constraint_residuals(a0, problem.basis, problem.deltas, problem.tv_max_raw(),
                                         problem.enable_tv);
    if (std::max({r0.uniform_luma, r0.anti_alias, r0.tv_excess, r0.box_violation}) < 1e-7)
      tau = gamma_c_def1(sk.Z, x);
  }
  const double tau_ub = 1.0;
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;

  Vec grad_a, grad_b;
  double quad_a = 0, quad_b = 0;

  for (int k = 0; k < max_iter; ++k) {
    cut_data(sk.Z, 1, x, grad_a, quad_a);
    cut_data(sk.Z, 2, x, grad_b, quad_b);
    // No feasible x can push the linearized bound past its box maximum
    // 2 sum(max(grad,0)) - quad, so the tau search is confined there; this
    // also collapses the interval when an iterate loses its chroma (the cut
    // rows would otherwise degenerate to numerically zero coefficients).
    double cap = tau_ub;
    for (const auto* g : {&grad_a, &grad_b}) {
      const double quad = g == &grad_a ? quad_a : quad_b;
      const double box_max = 2.0 * g->cwiseMax(0.0).sum() - quad;
      cap = std::min(cap, box_max > 0 ? std::sqrt(box_max) : 0.0);
    }
    const double hi_k = std::max(tau, std::min(tau_ub, cap));
    solver.set_ub_row(sk.cut_row_alpha, [&] {
      Vec row = Vec::Zero(sk.n_vars);
      row.head(nx) = -2.0 * grad_a;
      return row;
    }(), 0.0);
    solver.set_ub_row(sk.cut_row_beta, [&] {
      Vec row = Vec::Zero(sk.n_vars);
      row.head(nx) = -2.0 * grad_b;
      return row;
    }(), 0.0);

    struct Eval {
      double value = -std::numeric_limits<double>::infinity();
      Vec x;
      bool feasible = false;
    };
    auto evaluate = [&](double t) {
      Eval e;
      solver.set_ub_rhs(sk.cut_row_alpha, -(t * t + quad_a));
      solver.set_ub_rhs(sk.cut_row_beta, -(t * t + quad_b));
      const LpResult r = solver.solve(30000);
      ++trace.lp_solves;
      if (r.status == LpStatus::Optimal) {
        e.value = t + r.objective;
        e.x = r.x.head(nx);
        e.feasible = true;
      }
      return e;
    };

    Eval best = evaluate(tau);
    double best_t = tau;
    std::string status = best.feasible ? "optimal" : "infeasible-at-tau";
    double a = tau, b = hi_k;
    double c1 = b - golden * (b - a), d1 = a + golden * (b - a);
    Eval ec = evaluate(c1), ed = evaluate(d1);
    auto consider = [&](const Eval& e, double t) {
      if (e.feasible && e.value > best.value) {
        best = e;
        best_t = t;
      }
    };
    consider(ec, c1);
    consider(ed, d1);
    for (int it = 0; it < 40; ++it) {
      if (ec.value >= ed.value) {
        b = d1;
        d1 = c1;
        ed = ec;
        c1 = b - golden * (b - a);
        ec = evaluate(c1);
        consider(ec, c1);
      } else {
        a = c1;
        c1 = d1;
        ec = ed;
        d1 = a + golden * (b - a);
        ed = evaluate(d1);
        consider(ed, d1);
      }
    }
    if (!best.feasible) {
      trace.records.push_back({k, tau, 0.0, "subproblem infeasible"});
      throw SolverError("sca: subproblem infeasible at iteration " + std::to_string(k));
    }
    const double tau_new = best_t;
    trace.records.push_back({k, tau_new, best.value, status});
    const bool done = std::abs(tau_new - tau) < tol;
    x = best.x;
    tau = tau_new;
    if (done) {
      trace.converged = true;
      break;
    }
  }
  return finish_result(problem, x, std::move(trace));
}

DesignResult solve_convex_design(const DesignProblem& problem, std::pair<int, int> omega0,
                                 std::optional<double> phi) {
  problem.validate();
  const int M = problem.rows, N = problem.cols, K = problem.K();
  const int nx = 3 * K;
  const auto [u0, v0] = omega0;
  if (u0 < 0 || u0 >= M || v0 < 0 || v0 >= N)
    throw DataError("convex design: omega0 must lie on the atom frequency grid");

  std::vector<double> phis;
  if (phi)
    phis.push_back(*phi);
  else
    for (int i = 0; i < 24; ++i) phis.push_back(kPi * i / 24.0);

  const SelectionMaps Z = build_selection_maps(problem.basis, K);
  DesignResult best;
  double best_gc = -1;
  std::string last_err = "infeasible";
  for (const double ph : phis) {
    // carriers
    Vec xc(K), xs(K);
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n) {
        const double ang = 2.0 * kPi * (double(u0) * m / M + double(v0) * n / N) - ph;
        xc[m * N + n] = std::sqrt(2.0) * std::cos(ang);
        xs[m * N + n] = std::sqrt(2.0) * std::sin(ang);
      }

    DesignProblem sub = problem;
    sub.enable_anti_alias = false;  // carriers are chosen explicitly
    ScaSkeleton sk = build_skeleton(sub, false);
    LinearProgram lp = sk.lp;
    // add gamma_c variable
    const int n_old = sk.n_vars;
    const int gc_col = n_old;
    auto widen = [&](Mat& A) {
      if (A.size() == 0) return;
      Mat W = Mat::Zero(A.rows(), n_old + 1);
      W.leftCols(n_old) = A;
      A = W;
    };
    widen(lp.A_eq);
    widen(lp.A_ub);
    Vec c2 = Vec::Zero(n_old + 1);
    c2.head(n_old) = lp.c;
    c2[gc_col] = 1.0;
    lp.c = c2;
    Vec lo2 = Vec::Zero(n_old + 1), hi2 = Vec::Constant(n_old + 1, std::numeric_limits<double>::infinity());
    lo2.head(n_old) = lp.lower;
    hi2.head(n_old) = lp.upper;
    lp.lower = lo2;
    lp.upper = hi2;
    // quadrature equalities Z_a x = gc*xc, Z_b x = gc*xs
    const int e0 = int(lp.A_eq.rows());
    Mat Aeq = Mat::Zero(e0 + 2 * K, n_old + 1);
    Aeq.topRows(e0) = lp.A_eq;
    Vec beq = Vec::Zero(e0 + 2 * K);
    beq.head(e0) = lp.b_eq;
    const Mat Za = Z.dense(1), Zb = Z.dense(2);
    for (int r = 0; r < K; ++r) {
      Aeq.row(e0 + r).head(nx) = Za.row(r);
      Aeq(e0 + r, gc_col) = -xc[r];
      Aeq.row(e0 + K + r).head(nx) = Zb.row(r);
      Aeq(e0 + K + r, gc_col) = -xs[r];
    }
    lp.A_eq = Aeq;
    lp.b_eq = beq;

    const LpResult r = lp_solve(lp, 1e-9);
    if (r.status != LpStatus::Optimal) {
      last_err = r.status == LpStatus::Infeasible ? "infeasible" : "solver failure";
      continue;
    }
    const double gc_var = r.x[gc_col];
    if (gc_var > best_gc) {
      best_gc = gc_var;
      SolverTrace tr;
      tr.lp_solves = 1;
      tr.records.push_back({0, gc_var, r.objective, "optimal"});
      tr.converged = true;
      best = finish_result(problem, r.x.head(nx), std::move(tr));
    }
  }
  if (best_gc < 0) throw SolverError("convex design: " + last_err);
  return best;
}

MultiStartResult multi_start_design(const DesignProblem& problem, int n_starts,
                                    std::uint64_t seed, int parallelism) {
  problem.validate();
  if (n_starts < 1) throw DataError("multi_start: n_starts must be >= 1");
  const auto points = latin_hypercube(n_starts, 3 * problem.K(), seed);

  struct Slot {
    bool ok = false;
    DesignResult res;
    std::string error;
  };
  std::vector<Slot> slots(n_starts);
  parallel_for_indexed(n_starts, std::max(1, parallelism), [&](int i) {
    try {
      slots[i].res = solve_sca(problem, points[i]);
      slots[i].ok = true;
    } catch (const std::exception& e) {
      slots[i].error = e.what();
    }
  });

  MultiStartResult out;
  int best = -1;
  for (int i = 0; i < n_starts; ++i) {
    out.traces.push_back(slots[i].ok ? slots[i].res.trace : SolverTrace{});
    out.gamma_c_per_start.push_back(slots[i].ok ? slots[i].res.gamma_c : -1.0);
    if (!slots[i].ok) continue;
    if (best < 0) {
      best = i;
      continue;
    }
    const DesignResult& a = slots[i].res;
    const DesignResult& b = slots[best].res;
    if (a.gamma_c > b.gamma_c ||
        (a.gamma_c == b.gamma_c && (a.rho < b.rho || (a.rho == b.rho && a.tv_norm < b.tv_norm))))
      best = i;
  }
  if (best < 0) {
    std::string diag = "multi_start: all starts failed;";
    for (int i = 0; i < std::min(n_starts, 5); ++i) diag += " [" + std::to_string(i) + "] " + slots[i].error;
    throw SolverError(diag);
  }
  out.best = slots[best].res;
  out.best_index = best;
  return out;
}

}  // namespace qcfa
