#include "qcfa/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

namespace qcfa {

std::array<double, 9> CrosstalkModel::kernel(int c) const {
  const double d = delta(c);
  return {0, d / 4, 0, d / 4, 1 - d, d / 4, 0, d / 4, 0};
}

void CrosstalkModel::validate() const {
  for (int c = 0; c < 3; ++c)
    if (!(delta(c) >= 0.0 && delta(c) < 1.0))
      throw DataError("crosstalk leakage must lie in [0,1)");
}

double luminance_sensitivity(const ColorAtom& atom, const LumaChromaBasis& basis) {
  atom.validate();
  const int K = atom.size();
  const SelectionMaps Z = build_cfa_selection_maps(basis, K);
  return Z.apply(0, atom.stacked()).sum() / K;
}

double chrominance_sensitivity(const ColorAtom& atom, const LumaChromaBasis& basis) {
  const AtomSpectrum s = atom_spectrum(atom, basis);
  const int K = atom.size();
  return std::min(s.alpha.norm(), s.beta.norm()) / K;
}

// Circular vertical+horizontal first differences of a K-vector on the atom grid.
static Vec circular_differences(const Vec& h, int rows, int cols) {
  const int K = rows * cols;
  Vec d(2 * K);
  for (int m = 0; m < rows; ++m)
    for (int n = 0; n < cols; ++n) {
      const int k = m * cols + n;
      d[k] = h[((m + 1) % rows) * cols + n] - h[k];
      d[K + k] = h[m * cols + (n + 1) % cols] - h[k];
    }
  return d;
}

double total_variation(const ColorAtom& atom, const CrosstalkModel& model, bool normalize) {
  atom.validate();
  model.validate();
  double tv = 0;
  for (int c = 0; c < 3; ++c)
    tv += model.delta(c) * circular_differences(atom.channel(c), atom.rows, atom.cols).lpNorm<1>();
  if (normalize) tv /= 2.0 * atom.size();
  return tv;
}

double orthogonality_penalty(const ColorAtom& atom, const LumaChromaBasis& basis) {
  const AtomSpectrum s = atom_spectrum(atom, basis);
  double rho = 0;
  for (int i = 0; i < 2; ++i) {
    const CVec& ch = s.chroma(i);
    for (int k = 0; k < ch.size(); ++k)
      rho += std::abs(ch[k].real()) + std::abs(ch[k].imag());
  }
  return rho;
}

static double fold_angle(double w) {
  const double two_pi = 2.0 * std::numbers::pi;
  double f = std::fmod(w, two_pi);
  if (f > std::numbers::pi + 1e-12) f -= two_pi;
  if (f <= -std::numbers::pi + 1e-12) f += two_pi;
  return f;
}

std::vector<std::pair<int, int>> anti_alias_index_set(int rows, int cols) {
  if (rows < 1 || cols < 1) throw DataError("grid dimensions must be positive");
  std::vector<std::pair<int, int>> out;
  out.emplace_back(0, 0);
  const double half_pi = std::numbers::pi / 2;
  for (int u = 0; u < rows; ++u)
    for (int v = 0; v < cols; ++v) {
      if (u == 0 && v == 0) continue;
      const double wu = fold_angle(2.0 * std::numbers::pi * u / rows);
      const double wv = fold_angle(2.0 * std::numbers::pi * v / cols);
      const bool on_u_axis = std::abs(wv) < 1e-12;
      const bool on_v_axis = std::abs(wu) < 1e-12;
      if (on_u_axis && std::abs(wu) < half_pi - 1e-12) out.emplace_back(u, v);
      else if (on_v_axis && std::abs(wv) < half_pi - 1e-12) out.emplace_back(u, v);
    }
  return out;
}

// FFTW plan creation is not thread safe.
static std::mutex fftw_mutex;

static std::vector<Complex> dft2_full(const Vec& plane, int rows, int cols) {
  std::vector<double> in(plane.data(), plane.data() + plane.size());
  std::vector<Complex> out(size_t(rows) * cols);
  const int cc = cols / 2 + 1;
  std::vector<fftw_complex> half(size_t(rows) * cc);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    plan = fftw_plan_dft_r2c_2d(rows, cols, in.data(), half.data(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    fftw_destroy_plan(plan);
  }
  for (int u = 0; u < rows; ++u)
    for (int v = 0; v < cols; ++v) {
      if (v < cc) {
        out[size_t(u) * cols + v] = Complex(half[size_t(u) * cc + v][0], half[size_t(u) * cc + v][1]);
      } else {
        const int cu = (rows - u) % rows, cv = cols - v;
        out[size_t(u) * cols + v] = std::conj(Complex(half[size_t(cu) * cc + cv][0], half[size_t(cu) * cc + cv][1]));
      }
    }
  return out;
}

double aliasing_metric(const ColorAtom& atom, const LumaChromaBasis& basis, const Image3& reference) {
  atom.validate();
  if (reference.rows < 64 || reference.cols < 64)
    throw DataError("aliasing_metric: reference must be at least 64x64");
  const int H = reference.rows, W = reference.cols;
  const int P = H * W;

  // Image channels transform by T (covariant side).
  std::array<Vec, 3> lc;
  for (int i = 0; i < 3; ++i)
    lc[i] = basis.T(i, 0) * reference.r + basis.T(i, 1) * reference.g + basis.T(i, 2) * reference.b;
  const double rms = std::sqrt((lc[0].squaredNorm() + lc[1].squaredNorm() + lc[2].squaredNorm()) / P);

  // Degeneracy check: no AC content anywhere in the stack.
  double ac = 0;
  for (int i = 0; i < 3; ++i) {
    const double mean = lc[i].mean();
    ac += (lc[i].array() - mean).matrix().squaredNorm();
  }
  if (rms <= 0 || ac / P < 1e-18) throw DataError("aliasing_metric: zero spectrum");

  for (int i = 0; i < 3; ++i) lc[i] /= rms;
  // The three transmitted components of the mosaicked image: the CFA in
  // luma/chroma space (dual rows) times the image channels. Their sum is
  // theta; the J_l overlap is measured between the transmitted luminance and
  // the modulated (carrier-shifted) chrominance.
  const Image3 cfa = tile(atom, H, W);
  const Mat3 D = basis.cfa_rows();
  std::array<Vec, 3> part;
  for (int i = 0; i < 3; ++i) {
    Vec ci = D(i, 0) * cfa.r + D(i, 1) * cfa.g + D(i, 2) * cfa.b;
    part[i] = ci.cwiseProduct(lc[i]);
  }
  const Vec theta = part[0] + part[1] + part[2];

  const auto Sl = dft2_full(part[0], H, W);
  const auto Sa = dft2_full(part[1], H, W);
  const auto Sb = dft2_full(part[2], H, W);
  const auto St = dft2_full(theta, H, W);
  double acc = 0;
  for (int k = 0; k < P; ++k) {
    const double sl = std::norm(Sl[k]) / P;
    const double sa = std::norm(Sa[k]) / P;
    const double sb = std::norm(Sb[k]) / P;
    const double st = std::max(std::norm(St[k]) / P, 1e-12);
    acc += (sl * sa + sl * sb) / st;
  }
  return acc / P;
}

ColorAtom apply_crosstalk(const ColorAtom& atom, const CrosstalkModel& model) {
  atom.validate();
  model.validate();
  ColorAtom out = atom;
  const int M = atom.rows, N = atom.cols;
  for (int c = 0; c < 3; ++c) {
    const auto k = model.kernel(c);
    Vec conv = Vec::Zero(M * N);
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n) {
        double s = 0;
        for (int dm = -1; dm <= 1; ++dm)
          for (int dn = -1; dn <= 1; ++dn) {
            const double w = k[(dm + 1) * 3 + (dn + 1)];
            if (w == 0) continue;
            const int mm = ((m - dm) % M + M) % M;
            const int nn = ((n - dn) % N + N) % N;
            s += w * atom.channel(c)[mm * N + nn];
          }
        conv[m * N + n] = s;
      }
    for (int i = 0; i < conv.size(); ++i) {
      if (conv[i] < 0 && conv[i] > -1e-12) conv[i] = 0;
      if (conv[i] > 1 && conv[i] < 1 + 1e-12) conv[i] = 1;
    }
    out.channel(c) = conv;
  }
  return out;
}

double condition_number(const ColorAtom& atom, const LumaChromaBasis& basis,
                        const std::optional<CrosstalkModel>& model) {
  const AtomSpectrum s = atom_spectrum(atom, basis);
  const int K = atom.size();
  Eigen::MatrixXcd A(K, 3);
  A.col(0) = s.luma;
  A.col(1) = s.alpha;
  A.col(2) = s.beta;
  if (model) {
    const double d = (model->delta_r + model->delta_g + model->delta_b) / 3.0;
    CrosstalkModel shared{d, d, d};
    // DFT of the shared kernel on the atom grid (wrap the 3x3 stencil).
    Vec g = Vec::Zero(K);
    const auto kern = shared.kernel(0);
    for (int dm = -1; dm <= 1; ++dm)
      for (int dn = -1; dn <= 1; ++dn) {
        const double w = kern[(dm + 1) * 3 + (dn + 1)];
        if (w == 0) continue;
        const int m = ((dm) % atom.rows + atom.rows) % atom.rows;
        const int n = ((dn) % atom.cols + atom.cols) % atom.cols;
        g[m * atom.cols + n] += w;
      }
    const CVec gt = atom_dft(g, atom.rows, atom.cols);
    for (int k = 0; k < K; ++k) A.row(k) *= gt[k];
  }
  A = A * basis.T.cast<Complex>();
  const Eigen::Matrix3cd gram = A.adjoint() * A;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> eig(gram);
  const Vec evals = eig.eigenvalues();
  const double smax = std::sqrt(std::max(evals.maxCoeff(), 0.0));
  const double smin = std::sqrt(std::max(evals.minCoeff(), 0.0));
  if (smin <= 1e-12 * std::max(smax, 1.0)) throw SolverError("degenerate acquisition");
  return smax / smin;
}

ConstraintResiduals constraint_residuals(const ColorAtom& atom, const LumaChromaBasis& basis,
                                         const CrosstalkModel& model, double tv_max_raw,
                                         bool tv_enabled) {
  ConstraintResiduals res;
  const SelectionMaps Z = build_selection_maps(basis, atom.size());
  const Vec x = atom.stacked();
  const CVec lt = atom_dft(Z.apply(0, x), atom.rows, atom.cols);
  for (int k = 1; k < lt.size(); ++k)
    res.uniform_luma = std::max(res.uniform_luma, std::abs(lt[k]));
  const CVec at = atom_dft(Z.apply(1, x), atom.rows, atom.cols);
  const CVec bt = atom_dft(Z.apply(2, x), atom.rows, atom.cols);
  for (const auto& [u, v] : anti_alias_index_set(atom.rows, atom.cols)) {
    const int k = u * atom.cols + v;
    res.anti_alias = std::max({res.anti_alias, std::abs(at[k]), std::abs(bt[k])});
  }
  if (tv_enabled)
    res.tv_excess = std::max(0.0, total_variation(atom, model, false) - tv_max_raw);
  for (int i = 0; i < x.size(); ++i)
    res.box_violation = std::max({res.box_violation, -x[i], x[i] - 1.0});
  res.box_violation = std::max(res.box_violation, 0.0);
  return res;
}

}  // namespace qcfa
