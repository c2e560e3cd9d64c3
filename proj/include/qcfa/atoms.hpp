#pragma once

#include "qcfa/types.hpp"

namespace qcfa {

/// Linear maps from the stacked design vector x = [h_r; h_g; h_b] (3K) to
/// K-vectors. Z_r/Z_g/Z_b are coordinate selectors; Z_l/Z_alpha/Z_beta apply
/// one basis row per pixel. Stored as the three per-channel weights of each
/// map, so applying one costs O(K).
struct SelectionMaps {
  int K = 0;
  Mat3 rows;  // row i holds the weights of Z_{l,alpha,beta} over (r,g,b)

  Vec apply(int i, const Vec& x) const;    // Z_i x, i in {0:l, 1:alpha, 2:beta}
  Vec select(int c, const Vec& x) const;   // Z_{r,g,b} x
  /// Dense K x 3K matrix of map i (used to assemble optimizer rows).
  Mat dense(int i) const;
};

/// Selection maps for the given basis (uses the T rows verbatim).
SelectionMaps build_selection_maps(const LumaChromaBasis& basis, int K);
/// Selection maps built from the dual rows T^-T: the decomposition of the CFA
/// side of theta = c^T im. Identical to build_selection_maps for orthonormal T.
SelectionMaps build_cfa_selection_maps(const LumaChromaBasis& basis, int K);

/// Per-pixel transform of the atom by T. Returns the three K-vectors
/// (h_l, h_alpha, h_beta); T^-1 recovers the RGB atom.
std::array<Vec, 3> to_luma_chroma(const ColorAtom& atom, const LumaChromaBasis& basis);

/// Unnormalized forward 2D DFT of a row-major M x N sequence:
/// h~(u,v) = sum_{m,n} h(m,n) exp(-j 2 pi (m u / M + n v / N)).
CVec atom_dft(const Vec& h, int rows, int cols);
/// Inverse of atom_dft (carries the 1/K factor).
Vec atom_idft(const CVec& hs, int rows, int cols);

/// Spectrum of the atom's luma/chroma decomposition under the basis' dual
/// (CFA-side) rows; equals the T-row spectrum for orthonormal bases.
AtomSpectrum atom_spectrum(const ColorAtom& atom, const LumaChromaBasis& basis);

/// Periodic tiling of the atom to an H x W image; partial periods at the
/// borders are truncated.
Image3 tile(const ColorAtom& atom, int height, int width);

/// theta(m,n) = eta * sum_i c_i(m,n) im_i(m,n) with c from tile().
/// Rejects images with entries outside [0,1].
ExposureMap mosaic(const Image3& image, const ColorAtom& atom, double eta);

/// JSON (de)serialization: {"rows":M,"cols":N,"r":[...],"g":[...],"b":[...]}.
std::string atom_to_json(const ColorAtom& atom);
ColorAtom atom_from_json(const std::string& text);
ColorAtom load_atom(const std::string& path);
void save_atom(const ColorAtom& atom, const std::string& path);

/// GRBG Bayer 2x2 atom.
ColorAtom bayer_atom();
/// RGBCY 4x4 atom (inverse DFT of its published frequency structure).
ColorAtom rgbcy_atom();

}  // namespace qcfa
