#include "qcfa/atoms.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace qcfa {

Vec ColorAtom::stacked() const {
  const int K = size();
  Vec x(3 * K);
  x.segment(0, K) = r;
  x.segment(K, K) = g;
  x.segment(2 * K, K) = b;
  return x;
}

ColorAtom ColorAtom::from_stacked(int rows, int cols, const Vec& x) {
  ColorAtom a;
  a.rows = rows;
  a.cols = cols;
  const int K = rows * cols;
  if (x.size() != 3 * K) throw DataError("stacked vector length mismatch");
  a.r = x.segment(0, K);
  a.g = x.segment(K, K);
  a.b = x.segment(2 * K, K);
  return a;
}

void ColorAtom::validate() const {
  if (rows < 1 || cols < 1) throw DataError("atom dimensions must be positive");
  const int K = size();
  if (r.size() != K || g.size() != K || b.size() != K)
    throw DataError("atom channel length must equal rows*cols");
  for (int c = 0; c < 3; ++c)
    for (int k = 0; k < K; ++k) {
      const double v = channel(c)[k];
      if (!(v >= 0.0 && v <= 1.0)) throw DataError("atom entries must lie in [0,1]");
    }
}

bool LumaChromaBasis::orthonormal(double tol) const {
  return (T * T.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < tol;
}

void LumaChromaBasis::validate() const {
  for (int i = 0; i < 3; ++i)
    if (std::abs(T.row(i).norm() - 1.0) > 1e-9)
      throw DataError("basis rows must have unit norm");
  if (std::abs(T.determinant()) <= 1e-9) throw DataError("basis must be invertible");
}

LumaChromaBasis LumaChromaBasis::canonical() {
  LumaChromaBasis b;
  const double s3 = std::sqrt(3.0), s6 = std::sqrt(6.0), s2 = std::sqrt(2.0);
  b.T << 1 / s3, 1 / s3, 1 / s3, -1 / s6, 2 / s6, -1 / s6, 1 / s2, 0, -1 / s2;
  b.name = "canonical";
  return b;
}

LumaChromaBasis LumaChromaBasis::bayer() {
  LumaChromaBasis b;
  const double s6 = std::sqrt(6.0), s2 = std::sqrt(2.0);
  b.T << 1 / s6, 2 / s6, 1 / s6, 1 / s6, -2 / s6, 1 / s6, 1 / s2, 0, -1 / s2;
  b.name = "bayer";
  return b;
}

LumaChromaBasis LumaChromaBasis::rgbcy() {
  LumaChromaBasis b;
  const double s118 = std::sqrt(118.0), s6 = std::sqrt(6.0), s2 = std::sqrt(2.0);
  b.T << 3 / s118, 10 / s118, 3 / s118, 1 / s6, -2 / s6, 1 / s6, 1 / s2, 0, -1 / s2;
  b.name = "rgbcy";
  return b;
}

LumaChromaBasis LumaChromaBasis::rgbcwy() {
  LumaChromaBasis b;
  const double s822 = std::sqrt(822.0), s6 = std::sqrt(6.0), s2 = std::sqrt(2.0);
  b.T << 13 / s822, 22 / s822, 13 / s822, 1 / s6, -2 / s6, 1 / s6, 1 / s2, 0, -1 / s2;
  b.name = "rgbcwy";
  return b;
}

LumaChromaBasis LumaChromaBasis::hao() {
  LumaChromaBasis b;
  const double s22 = std::sqrt(22.0), s2 = std::sqrt(2.0), s6 = std::sqrt(6.0);
  b.T << 2 / s22, 3 / s22, 3 / s22, 0, -1 / s2, 1 / s2, -2 / s6, 1 / s6, 1 / s6;
  b.name = "hao";
  return b;
}

LumaChromaBasis LumaChromaBasis::named(const std::string& name) {
  if (name == "canonical") return canonical();
  if (name == "bayer") return bayer();
  if (name == "rgbcy") return rgbcy();
  if (name == "rgbcwy") return rgbcwy();
  if (name == "hao") return hao();
  throw DataError("unknown basis name: " + name);
}

void ExposureMap::validate() const {
  if (rows < 1 || cols < 1 || theta.size() != rows * cols)
    throw DataError("exposure map shape mismatch");
  if ((theta.array() < 0).any()) throw DataError("exposure values must be nonnegative");
}

Vec SelectionMaps::apply(int i, const Vec& x) const {
  Vec out = Vec::Zero(K);
  for (int c = 0; c < 3; ++c) out += rows(i, c) * x.segment(c * K, K);
  return out;
}

Vec SelectionMaps::select(int c, const Vec& x) const { return x.segment(c * K, K); }

Mat SelectionMaps::dense(int i) const {
  Mat Z = Mat::Zero(K, 3 * K);
  for (int c = 0; c < 3; ++c) Z.block(0, c * K, K, K) = rows(i, c) * Mat::Identity(K, K);
  return Z;
}

SelectionMaps build_selection_maps(const LumaChromaBasis& basis, int K) {
  if (K < 1) throw DataError("K must be positive");
  return SelectionMaps{K, basis.T};
}

SelectionMaps build_cfa_selection_maps(const LumaChromaBasis& basis, int K) {
  if (K < 1) throw DataError("K must be positive");
  return SelectionMaps{K, basis.cfa_rows()};
}

std::array<Vec, 3> to_luma_chroma(const ColorAtom& atom, const LumaChromaBasis& basis) {
  atom.validate();
  const SelectionMaps Z = build_selection_maps(basis, atom.size());
  const Vec x = atom.stacked();
  return {Z.apply(0, x), Z.apply(1, x), Z.apply(2, x)};
}

CVec atom_dft(const Vec& h, int rows, int cols) {
  const int K = rows * cols;
  if (h.size() != K) throw DataError("atom_dft: length must equal rows*cols");
  CVec out(K);
  for (int u = 0; u < rows; ++u)
    for (int v = 0; v < cols; ++v) {
      Complex s{0.0, 0.0};
      for (int m = 0; m < rows; ++m)
        for (int n = 0; n < cols; ++n) {
          const double ang = -2.0 * std::numbers::pi *
                             (double(m) * u / rows + double(n) * v / cols);
          s += h[m * cols + n] * Complex(std::cos(ang), std::sin(ang));
        }
      out[u * cols + v] = s;
    }
  return out;
}

Vec atom_idft(const CVec& hs, int rows, int cols) {
  const int K = rows * cols;
  if (hs.size() != K) throw DataError("atom_idft: length must equal rows*cols");
  Vec out(K);
  for (int m = 0; m < rows; ++m)
    for (int n = 0; n < cols; ++n) {
      Complex s{0.0, 0.0};
      for (int u = 0; u < rows; ++u)
        for (int v = 0; v < cols; ++v) {
          const double ang = 2.0 * std::numbers::pi *
                             (double(m) * u / rows + double(n) * v / cols);
          s += hs[u * cols + v] * Complex(std::cos(ang), std::sin(ang));
        }
      out[m * cols + n] = s.real() / K;
    }
  return out;
}

AtomSpectrum atom_spectrum(const ColorAtom& atom, const LumaChromaBasis& basis) {
  atom.validate();
  const SelectionMaps Z = build_cfa_selection_maps(basis, atom.size());
  const Vec x = atom.stacked();
  AtomSpectrum s;
  s.rows = atom.rows;
  s.cols = atom.cols;
  s.luma = atom_dft(Z.apply(0, x), atom.rows, atom.cols);
  s.alpha = atom_dft(Z.apply(1, x), atom.rows, atom.cols);
  s.beta = atom_dft(Z.apply(2, x), atom.rows, atom.cols);
  return s;
}

Image3 tile(const ColorAtom& atom, int height, int width) {
  atom.validate();
  if (height < 1 || width < 1) throw DataError("tile: image dimensions must be positive");
  Image3 out(height, width);
  for (int m = 0; m < height; ++m)
    for (int n = 0; n < width; ++n) {
      const int k = (m % atom.rows) * atom.cols + (n % atom.cols);
      const int p = m * width + n;
      out.r[p] = atom.r[k];
      out.g[p] = atom.g[k];
      out.b[p] = atom.b[k];
    }
  return out;
}

ExposureMap mosaic(const Image3& image, const ColorAtom& atom, double eta) {
  if (eta <= 0) throw DataError("mosaic: eta must be positive");
  for (int c = 0; c < 3; ++c)
    for (int k = 0; k < image.size(); ++k) {
      const double v = image.channel(c)[k];
      if (!(v >= 0.0 && v <= 1.0)) throw DataError("mosaic: image entries must lie in [0,1]");
    }
  const Image3 cfa = tile(atom, image.rows, image.cols);
  ExposureMap e;
  e.rows = image.rows;
  e.cols = image.cols;
  e.theta = eta * (cfa.r.cwiseProduct(image.r) + cfa.g.cwiseProduct(image.g) +
                   cfa.b.cwiseProduct(image.b));
  return e;
}

std::string atom_to_json(const ColorAtom& atom) {
  nlohmann::json j;
  j["rows"] = atom.rows;
  j["cols"] = atom.cols;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> v(atom.channel(c).data(), atom.channel(c).data() + atom.size());
    j[c == 0 ? "r" : (c == 1 ? "g" : "b")] = v;
  }
  return j.dump(2);
}

ColorAtom atom_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw DataError(std::string("atom JSON parse error: ") + e.what());
  }
  ColorAtom a;
  try {
    a.rows = j.at("rows").get<int>();
    a.cols = j.at("cols").get<int>();
    for (int c = 0; c < 3; ++c) {
      const auto v = j.at(c == 0 ? "r" : (c == 1 ? "g" : "b")).get<std::vector<double>>();
      a.channel(c) = Eigen::Map<const Vec>(v.data(), v.size());
    }
  } catch (const std::exception& e) {
    throw DataError(std::string("atom JSON field error: ") + e.what());
  }
  a.validate();
  return a;
}

ColorAtom load_atom(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open atom file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return atom_from_json(ss.str());
}

void save_atom(const ColorAtom& atom, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write atom file: " + path);
  out << atom_to_json(atom) << "\n";
}

ColorAtom bayer_atom() {
  ColorAtom a;
  a.rows = a.cols = 2;
  a.r = Vec(4);
  a.g = Vec(4);
  a.b = Vec(4);
  a.r << 0, 1, 0, 0;
  a.g << 1, 0, 0, 1;
  a.b << 0, 0, 1, 0;
  return a;
}

ColorAtom rgbcy_atom() {
  // Coefficient grids of the published 4x4 RGBCY frequency structure; the
  // atom is their inverse DFT (lands exactly on {0, 0.5, 1}).
  static const double R[16] = {3, 2, 1, 2, 2, 1, 0, 1, 1, 0, -1, 0, 2, 1, 0, 1};
  static const double G[16] = {10, 0, -2, 0, 0, -2, 0, -2, -2, 0, 2, 0, 0, -2, 0, -2};
  static const double B[16] = {3, -2, 1, -2, -2, 1, 0, 1, 1, 0, -1, 0, -2, 1, 0, 1};
  ColorAtom a;
  a.rows = a.cols = 4;
  const double* tabs[3] = {R, G, B};
  for (int c = 0; c < 3; ++c) {
    CVec spec(16);
    for (int k = 0; k < 16; ++k) spec[k] = tabs[c][k];
    Vec h = atom_idft(spec, 4, 4);
    for (int k = 0; k < 16; ++k) h[k] = std::round(h[k] * 2.0) / 2.0;
    a.channel(c) = h;
  }
  return a;
}

}  // namespace qcfa
