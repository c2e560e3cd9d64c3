#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcfa {

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using Mat3 = Eigen::Matrix3d;
using Complex = std::complex<double>;

/// Malformed or out-of-contract input data (CLI exit code 2).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Solver-side failure: infeasible, unbounded, iteration limit (CLI exit code 3).
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

/// M x N periodic CFA building block. The three opacity masks are stored as
/// row-major K-vectors (m outer, n inner), K = M*N, entries in [0,1].
struct ColorAtom {
  int rows = 0;
  int cols = 0;
  Vec r, g, b;

  int size() const { return rows * cols; }
  const Vec& channel(int i) const { return i == 0 ? r : (i == 1 ? g : b); }
  Vec& channel(int i) { return i == 0 ? r : (i == 1 ? g : b); }

  /// Stacked design vector x = [h_r; h_g; h_b] of length 3K.
  Vec stacked() const;
  static ColorAtom from_stacked(int rows, int cols, const Vec& x);

  void validate() const;  // throws DataError on range/shape violations
};

/// 3x3 luma/chroma transform. Rows map RGB -> (l, alpha, beta); every row is
/// unit-norm and T is invertible. For non-orthonormal T the CFA side of the
/// mosaicking identity theta = c^T im transforms by the dual rows T^-T
/// (images transform by T); cfa_rows() exposes that dual matrix.
struct LumaChromaBasis {
  Mat3 T = Mat3::Identity();
  std::string name;

  Mat3 cfa_rows() const { return T.inverse().transpose(); }
  bool orthonormal(double tol = 1e-12) const;
  void validate() const;

  static LumaChromaBasis canonical();
  static LumaChromaBasis bayer();
  static LumaChromaBasis rgbcy();
  static LumaChromaBasis rgbcwy();
  static LumaChromaBasis hao();
  /// Lookup by name ("canonical", "bayer", "rgbcy", "rgbcwy", "hao").
  static LumaChromaBasis named(const std::string& name);
};

/// Complex DFT coefficients of the luma/chroma atoms on the carrier grid
/// omega(u,v) = (2*pi*u/M, 2*pi*v/N), stored row-major like the atoms.
struct AtomSpectrum {
  int rows = 0;
  int cols = 0;
  CVec luma, alpha, beta;

  const CVec& chroma(int i) const { return i == 0 ? alpha : beta; }
};

/// Mean photon count per jot per frame over an H x W sensor.
struct ExposureMap {
  int rows = 0;
  int cols = 0;
  Vec theta;

  void validate() const;
};

/// Planar RGB image, values nominally in [0,1], each plane row-major H*W.
struct Image3 {
  int rows = 0;
  int cols = 0;
  Vec r, g, b;

  Image3() = default;
  Image3(int h, int w) : rows(h), cols(w), r(Vec::Zero(h * w)), g(Vec::Zero(h * w)), b(Vec::Zero(h * w)) {}
  int size() const { return rows * cols; }
  const Vec& channel(int i) const { return i == 0 ? r : (i == 1 ? g : b); }
  Vec& channel(int i) { return i == 0 ? r : (i == 1 ? g : b); }
};

/// Single grayscale plane, row-major.
struct Plane {
  int rows = 0;
  int cols = 0;
  Vec v;

  Plane() = default;
  Plane(int h, int w) : rows(h), cols(w), v(Vec::Zero(h * w)) {}
  double& at(int m, int n) { return v[m * cols + n]; }
  double at(int m, int n) const { return v[m * cols + n]; }
};

}  // namespace qcfa
