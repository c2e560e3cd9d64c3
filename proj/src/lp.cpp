#include "qcfa/lp.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>

namespace qcfa {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void LinearProgram::validate() const {
  const int n = num_vars();
  if (lower.size() != n || upper.size() != n)
    throw DataError("lp: bound vectors must match objective length");
  if (A_eq.size() > 0 && A_eq.cols() != n) throw DataError("lp: A_eq column mismatch");
  if (A_ub.size() > 0 && A_ub.cols() != n) throw DataError("lp: A_ub column mismatch");
  if (A_eq.rows() != b_eq.size()) throw DataError("lp: b_eq length mismatch");
  if (A_ub.rows() != b_ub.size()) throw DataError("lp: b_ub length mismatch");
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(lower[i])) throw DataError("lp: lower bounds must be finite");
    if (lower[i] > upper[i]) throw DataError("lp: lower bound exceeds upper bound");
  }
}

SimplexSolver::SimplexSolver(const LinearProgram& lp, double tol) : tol_(tol) {
  lp.validate();
  n_struct_ = lp.num_vars();
  n_eq_ = int(lp.A_eq.rows());
  const int n_ub = int(lp.A_ub.rows());
  m_ = n_eq_ + n_ub;
  n_real_ = n_struct_ + n_ub;
  n_ = n_real_ + m_;  // artificial columns appended

  A_ = Mat::Zero(m_, n_);
  b_ = Vec::Zero(m_);
  if (n_eq_ > 0) {
    A_.topLeftCorner(n_eq_, n_struct_) = lp.A_eq;
    b_.head(n_eq_) = lp.b_eq;
  }
  if (n_ub > 0) {
    A_.block(n_eq_, 0, n_ub, n_struct_) = lp.A_ub;
    A_.block(n_eq_, n_struct_, n_ub, n_ub) = Mat::Identity(n_ub, n_ub);
    b_.tail(n_ub) = lp.b_ub;
  }
  lo_ = Vec::Zero(n_);
  hi_ = Vec::Constant(n_, kInf);
  lo_.head(n_struct_) = lp.lower;
  hi_.head(n_struct_) = lp.upper;
  // artificial columns start disabled (pinned to zero); cold_solve arms them
  lo_.tail(m_).setZero();
  hi_.tail(m_).setZero();
  c_ = Vec::Zero(n_);
  c_.head(n_struct_) = lp.c;
  cart_ = Vec::Zero(n_);
  cart_.tail(m_).setConstant(-1.0);
  xval_ = Vec::Zero(n_);
}

void SimplexSolver::set_ub_rhs(int row, double value) {
  b_[n_eq_ + row] = value;
  if (have_basis_ && factor_valid_) recompute_basic_values();
}

void SimplexSolver::set_ub_row(int row, const Vec& coeffs, double value) {
  if (coeffs.size() != n_struct_) throw DataError("lp: row coefficient length mismatch");
  A_.row(n_eq_ + row).head(n_struct_) = coeffs.transpose();
  b_[n_eq_ + row] = value;
  factor_valid_ = false;
  have_basis_ = false;  // dual feasibility is lost; require a cold solve
}

bool SimplexSolver::refactor() {
  if (m_ == 0) {
    factor_valid_ = true;
    recompute_basic_values();
    return true;
  }
  Mat B(m_, m_);
  for (int i = 0; i < m_; ++i) B.col(i) = A_.col(basis_[i]);
  Eigen::PartialPivLU<Mat> lu(B);
  const Mat& LU = lu.matrixLU();
  double dmin = kInf, dmax = 0;
  for (int i = 0; i < m_; ++i) {
    const double d = std::abs(LU(i, i));
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  if (!(dmin > 1e-13 * std::max(1.0, dmax))) return false;
  Binv_ = lu.inverse();
  factor_valid_ = true;
  recompute_basic_values();
  return true;
}

void SimplexSolver::recompute_basic_values() {
  Vec rhs = b_;
  for (int j = 0; j < n_; ++j) {
    if (vstat_.empty()) break;
    if (vstat_[j] == VStat::Basic) continue;
    const double v = vstat_[j] == VStat::AtLower ? lo_[j] : hi_[j];
    xval_[j] = v;
    if (v != 0.0) rhs -= v * A_.col(j);
  }
  if (m_ > 0) {
    const Vec xb = Binv_ * rhs;
    for (int i = 0; i < m_; ++i) xval_[basis_[i]] = xb[i];
  }
}

double SimplexSolver::primal_infeasibility() const {
  double worst = 0;
  for (int i = 0; i < m_; ++i) {
    const int j = basis_[i];
    worst = std::max({worst, lo_[j] - xval_[j], xval_[j] - hi_[j]});
  }
  return worst;
}

int SimplexSolver::primal(const Vec& obj, int max_iter, int& used) {
  int stall = 0;
  bool bland = false;
  int since_refactor = 0;
  while (used < max_iter) {
    Vec cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = obj[basis_[i]];
    const Vec y = m_ > 0 ? Vec(Binv_.transpose() * cb) : Vec();
    int entering = -1, dir = 0;
    double best = bland ? 1e-10 : tol_;
    for (int j = 0; j < n_; ++j) {
      if (vstat_[j] == VStat::Basic) continue;
      if (lo_[j] == hi_[j]) continue;  // pinned
      const double d = obj[j] - (m_ > 0 ? A_.col(j).dot(y) : 0.0);
      if (vstat_[j] == VStat::AtLower && d > best) {
        entering = j;
        dir = +1;
        best = d;
        if (bland) break;
      } else if (vstat_[j] == VStat::AtUpper && -d > best) {
        entering = j;
        dir = -1;
        best = -d;
        if (bland) break;
      }
    }
    if (entering < 0) return 0;  // optimal under obj

    const Vec alpha = m_ > 0 ? Vec(Binv_ * A_.col(entering)) : Vec();
    // ratio test along x_B -= t*dir*alpha, t >= 0; under Bland's rule ties
    // resolve to the lowest basis variable index, otherwise to the largest
    // pivot magnitude
    double best_t = hi_[entering] - lo_[entering];
    int best_row = -1, best_bound = 0;
    double best_piv = 0;
    for (int i = 0; i < m_; ++i) {
      const double bi = dir * alpha[i];
      if (std::abs(bi) <= 1e-11) continue;
      const int j = basis_[i];
      double target;
      int bound;
      if (bi > 0) {
        target = lo_[j];
        bound = -1;
        if (!std::isfinite(target)) continue;
      } else {
        target = hi_[j];
        bound = +1;
        if (!std::isfinite(target)) continue;
      }
      const double t = std::max((xval_[j] - target) / bi, 0.0);
      bool take = t < best_t - 1e-12;
      if (!take && t <= best_t + 1e-12 && best_row >= 0)
        take = bland ? j < basis_[best_row] : std::abs(bi) > best_piv;
      if (!take && t <= best_t + 1e-12 && best_row < 0 && t < best_t)
        take = true;  // beat the bound-flip span on an exact tie margin
      if (take) {
        best_t = t;
        best_row = i;
        best_bound = bound;
        best_piv = std::abs(bi);
      }
    }
    if (!std::isfinite(best_t)) return 1;  // unbounded
    // apply step
    if (best_t != 0.0)
      for (int i = 0; i < m_; ++i) xval_[basis_[i]] -= best_t * dir * alpha[i];
    const double enter_val = xval_[entering] + dir * best_t;
    if (best_row < 0) {
      xval_[entering] = enter_val;
      vstat_[entering] = dir > 0 ? VStat::AtUpper : VStat::AtLower;
    } else {
      const int leaving = basis_[best_row];
      vstat_[leaving] = best_bound < 0 ? VStat::AtLower : VStat::AtUpper;
      xval_[leaving] = best_bound < 0 ? lo_[leaving] : hi_[leaving];
      basis_[best_row] = entering;
      vstat_[entering] = VStat::Basic;
      xval_[entering] = enter_val;
      // eta update of the basis inverse; the movement direction plays no role
      Eigen::RowVectorXd prow = Binv_.row(best_row) / alpha[best_row];
      for (int i = 0; i < m_; ++i) {
        if (i == best_row) continue;
        if (alpha[i] != 0.0) Binv_.row(i) -= alpha[i] * prow;
      }
      Binv_.row(best_row) = prow;
    }
    ++used;
    if (best_t <= 1e-12) {
      if (++stall > 2 * (m_ + 10)) bland = true;
    } else {
      stall = 0;
      bland = false;
    }
    if (++since_refactor >= 100) {
      since_refactor = 0;
      if (!refactor()) return 2;
    }
  }
  return 3;
}

int SimplexSolver::dual(int max_iter, int& used) {
  int since_refactor = 0;
  while (used < max_iter) {
    // most violated basic variable leaves
    int row = -1;
    double worst = 1e-9;
    bool below = true;
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[i];
      if (lo_[j] - xval_[j] > worst) {
        worst = lo_[j] - xval_[j];
        row = i;
        below = true;
      }
      if (xval_[j] - hi_[j] > worst) {
        worst = xval_[j] - hi_[j];
        row = i;
        below = false;
      }
    }
    if (row < 0) return 0;  // primal feasible

    // reduced costs
    Vec cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = c_[basis_[i]];
    const Vec y = Binv_.transpose() * cb;
    const Eigen::RowVectorXd rho = Binv_.row(row) * A_;

    // leaving variable exits at the violated bound; entering keeps dual
    // feasibility with the minimal |d|/|rho| ratio
    int entering = -1, dir = 0;
    double best_ratio = kInf;
    double best_piv = 0;
    for (int j = 0; j < n_; ++j) {
      if (vstat_[j] == VStat::Basic || lo_[j] == hi_[j]) continue;
      const double r = rho[j];
      if (std::abs(r) <= 1e-11) continue;
      // basic value must move toward feasibility:
      //   d x_B[row] / d x_j = -rho_j
      int cand_dir;
      if (below)  // needs to increase
        cand_dir = (r < 0) ? +1 : -1;
      else
        cand_dir = (r > 0) ? +1 : -1;
      if (cand_dir > 0 && vstat_[j] != VStat::AtLower) continue;
      if (cand_dir < 0 && vstat_[j] != VStat::AtUpper) continue;
      const double d = c_[j] - A_.col(j).dot(y);
      const double ratio = std::abs(d) / std::abs(r);
      if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && std::abs(r) > best_piv)) {
        best_ratio = ratio;
        entering = j;
        dir = cand_dir;
        best_piv = std::abs(r);
      }
    }
    if (entering < 0) return 1;  // primal infeasible

    const Vec alpha = Binv_ * A_.col(entering);
    const int leaving = basis_[row];
    const double target = below ? lo_[leaving] : hi_[leaving];
    const double t = (xval_[leaving] - target) / (dir * alpha[row]);
    for (int i = 0; i < m_; ++i) xval_[basis_[i]] -= t * dir * alpha[i];
    vstat_[leaving] = below ? VStat::AtLower : VStat::AtUpper;
    xval_[leaving] = target;
    basis_[row] = entering;
    const double enter_val = (vstat_[entering] == VStat::AtLower ? lo_[entering] : hi_[entering]) + dir * t;
    vstat_[entering] = VStat::Basic;
    xval_[entering] = enter_val;
    Eigen::RowVectorXd prow = Binv_.row(row) / alpha[row];
    for (int i = 0; i < m_; ++i) {
      if (i == row) continue;
      if (alpha[i] != 0.0) Binv_.row(i) -= alpha[i] * prow;
    }
    Binv_.row(row) = prow;
    ++used;
    if (++since_refactor >= 100) {
      since_refactor = 0;
      if (!refactor()) return 2;
    }
  }
  return 3;
}

LpResult SimplexSolver::cold_solve(int max_iter) {
  LpResult res;
  // nonbasic structurals at the lower bound; slacks basic where possible
  vstat_.assign(n_, VStat::AtLower);
  basis_.assign(m_, -1);
  xval_.setZero();
  for (int j = 0; j < n_real_; ++j) xval_[j] = lo_[j];
  // arm artificial columns: a_i = sign(residual_i) * e_i
  Vec resid = b_;
  for (int j = 0; j < n_real_; ++j)
    if (lo_[j] != 0.0) resid -= lo_[j] * A_.col(j);
  for (int i = 0; i < m_; ++i) {
    const int aj = n_real_ + i;
    A_.col(aj).setZero();
    A_(i, aj) = resid[i] >= 0 ? 1.0 : -1.0;
    lo_[aj] = 0.0;
    hi_[aj] = kInf;
    basis_[i] = aj;
    vstat_[aj] = VStat::Basic;
    xval_[aj] = std::abs(resid[i]);
  }
  Binv_ = Mat::Zero(m_, m_);
  for (int i = 0; i < m_; ++i) Binv_(i, i) = A_(i, n_real_ + i);  // inverse of +-1 diagonal
  factor_valid_ = true;
  have_basis_ = true;

  int used = 0;
  const int p1 = primal(cart_, max_iter, used);
  res.iterations = used;
  double art_sum = 0;
  for (int i = 0; i < m_; ++i)
    if (basis_[i] >= n_real_) art_sum += std::abs(xval_[basis_[i]]);
  const double bscale = m_ > 0 ? b_.cwiseAbs().maxCoeff() : 0.0;
  if (p1 == 2 || p1 == 3) {
    res.status = p1 == 3 ? LpStatus::IterLimit : LpStatus::Infeasible;
    return res;
  }
  if (art_sum > 1e-7 * (1.0 + bscale)) {
    res.status = LpStatus::Infeasible;
    return res;
  }
  // pin artificials at zero for phase 2
  for (int i = 0; i < m_; ++i) hi_[n_real_ + i] = 0.0;
  for (int j = n_real_; j < n_; ++j)
    if (vstat_[j] != VStat::Basic) {
      vstat_[j] = VStat::AtLower;
      xval_[j] = 0.0;
    }
  const int p2 = primal(c_, max_iter, used);
  res.iterations = used;
  if (p2 == 2) {
    res.status = LpStatus::Infeasible;
    return res;
  }
  if (p2 == 1) {
    res.status = LpStatus::Unbounded;
    return res;
  }
  if (p2 == 3) {
    res.status = LpStatus::IterLimit;
    return res;
  }
  return finish(used);
}

LpResult SimplexSolver::finish(int used) {
  LpResult res;
  res.iterations = used;
  recompute_basic_values();
  const double bscale = m_ > 0 ? b_.cwiseAbs().maxCoeff() : 0.0;
  if (primal_infeasibility() > 1e-6 * (1.0 + bscale)) {
    res.status = LpStatus::Infeasible;
    return res;
  }
  res.status = LpStatus::Optimal;
  res.x = xval_.head(n_struct_);
  res.objective = c_.head(n_struct_).dot(res.x);
  return res;
}

LpResult SimplexSolver::solve(int max_iter) {
  if (!have_basis_) return cold_solve(max_iter);
  if (!factor_valid_ && !refactor()) return cold_solve(max_iter);

  // warm path: basis is dual feasible after RHS changes. Degenerate cycling
  // is cut off by a pivot budget; the cold path (with its own anti-cycling)
  // is the fallback.
  const double bscale = m_ > 0 ? b_.cwiseAbs().maxCoeff() : 0.0;
  const int budget = 2 * (m_ + n_real_) + 200;
  int used = 0;
  if (primal_infeasibility() > 1e-9 * (1.0 + bscale)) {
    const int d = dual(budget, used);
    if (d == 1) {
      LpResult res;
      res.status = LpStatus::Infeasible;
      res.iterations = used;
      return res;
    }
    if (d == 2 || d == 3) return cold_solve(max_iter);
  }
  // polish: reduced costs can drift outside tolerance after many updates
  const int p2 = primal(c_, budget + used, used);
  if (p2 == 1) {
    LpResult res;
    res.status = LpStatus::Unbounded;
    res.iterations = used;
    return res;
  }
  if (p2 == 2 || p2 == 3) return cold_solve(max_iter);
  LpResult res = finish(used);
  if (res.status != LpStatus::Optimal) return cold_solve(max_iter);
  return res;
}

LpResult lp_solve(const LinearProgram& lp, double tol) {
  SimplexSolver solver(lp, tol);
  return solver.solve();
}

}  // namespace qcfa
