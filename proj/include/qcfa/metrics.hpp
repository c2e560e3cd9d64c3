#pragma once

#include <optional>
#include <set>
#include <tuple>

#include "qcfa/atoms.hpp"

namespace qcfa {

/// Charge-leakage model: per-channel 3x3 stencil with center 1-delta and
/// delta/4 on the four edge neighbors.
struct CrosstalkModel {
  double delta_r = 0, delta_g = 0, delta_b = 0;

  double delta(int c) const { return c == 0 ? delta_r : (c == 1 ? delta_g : delta_b); }
  /// 3x3 kernel of channel c, row-major.
  std::array<double, 9> kernel(int c) const;
  void validate() const;
};

/// Aggregated feasibility report for a designed atom.
struct ConstraintResiduals {
  double uniform_luma = 0;   // max |off-baseband luma coefficient|
  double anti_alias = 0;     // max |constrained chroma coefficient|
  double tv_excess = 0;      // max(0, TV - TV_max), raw scale
  double box_violation = 0;  // max distance of x from [0,1]
};

/// gamma_l = (1/K) 1^T Z_l x (dual/CFA-side rows; equals the T rows for
/// orthonormal bases). Equals (1/K)||h~_l||_2 when the luminance is uniform.
double luminance_sensitivity(const ColorAtom& atom, const LumaChromaBasis& basis);

/// gamma_c = (1/K) min(||h~_alpha||_2, ||h~_beta||_2)  (Def. 1 scale).
/// Note: the published parameter-table scale is the square of this value.
double chrominance_sensitivity(const ColorAtom& atom, const LumaChromaBasis& basis);

/// delta-weighted l1 norm of the circular first differences of the RGB masks.
/// normalize divides by 2K (the per-channel difference count).
double total_variation(const ColorAtom& atom, const CrosstalkModel& model, bool normalize);

/// rho = sum over the grid of |Re| + |Im| of both chroma spectra.
double orthogonality_penalty(const ColorAtom& atom, const LumaChromaBasis& basis);

/// Grid indices (u,v) whose carrier lies on a frequency axis with folded
/// magnitude below pi/2, plus the baseband; both chroma channels are forced
/// to zero there.
std::vector<std::pair<int, int>> anti_alias_index_set(int rows, int cols);

/// Discretized aliasing criterion: mean over DFT bins of
/// (S_l S_alpha + S_l S_beta) / max(S_theta, 1e-12), periodogram PSDs of the
/// RMS-normalized reference (invariant to global positive scaling).
/// Throws DataError("zero spectrum") for an all-constant reference.
double aliasing_metric(const ColorAtom& atom, const LumaChromaBasis& basis, const Image3& reference);

/// Per-channel circular convolution of the atom with its crosstalk kernel.
ColorAtom apply_crosstalk(const ColorAtom& atom, const CrosstalkModel& model);

/// kappa(A) = sigma_max / sigma_min of A = G~ H~ T (3x3 eigensolve of A^H A).
/// The crosstalk branch needs one shared kernel; unequal deltas use their mean.
/// Throws SolverError("degenerate acquisition") when A is rank deficient.
double condition_number(const ColorAtom& atom, const LumaChromaBasis& basis,
                        const std::optional<CrosstalkModel>& model);

/// Residuals of a candidate design vector for the given problem data.
ConstraintResiduals constraint_residuals(const ColorAtom& atom, const LumaChromaBasis& basis,
                                         const CrosstalkModel& model, double tv_max_raw,
                                         bool tv_enabled);

}  // namespace qcfa
