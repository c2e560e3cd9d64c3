#include "doctest.h"
#include "qcfa/atoms.hpp"
#include "qcfa/rng.hpp"

#include <cmath>

using namespace qcfa;

namespace {

ColorAtom random_atom(int rows, int cols, Pcg32& rng) {
  ColorAtom a;
  a.rows = rows;
  a.cols = cols;
  const int K = rows * cols;
  for (int c = 0; c < 3; ++c) {
    a.channel(c) = Vec(K);
    for (int k = 0; k < K; ++k) a.channel(c)[k] = rng.uniform();
  }
  return a;
}

// brute-force double-loop DFT, written independently of atom_dft
CVec dft_oracle(const Vec& h, int M, int N) {
  CVec out(M * N);
  for (int u = 0; u < M; ++u)
    for (int v = 0; v < N; ++v) {
      double re = 0, im = 0;
      for (int m = 0; m < M; ++m)
        for (int n = 0; n < N; ++n) {
          const double ang = 2.0 * M_PI * (double(m) * u / M + double(n) * v / N);
          re += h[m * N + n] * std::cos(ang);
          im -= h[m * N + n] * std::sin(ang);
        }
      out[u * N + v] = Complex(re, im);
    }
  return out;
}

}  // namespace

TEST_CASE("selection maps: canonical values") {
  const auto basis = LumaChromaBasis::canonical();
  auto Z = build_selection_maps(basis, 1);
  Vec x(3);
  x << 1, 1, 1;
  CHECK(Z.apply(0, x)[0] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  x << 1, 0, 0;
  CHECK(Z.apply(2, x)[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  // Bayer GRBG alpha atom
  const ColorAtom bayer = bayer_atom();
  auto Z4 = build_selection_maps(basis, 4);
  const Vec ha = Z4.apply(1, bayer.stacked());
  const double s6 = std::sqrt(6.0);
  CHECK(ha[0] == doctest::Approx(2 / s6).epsilon(1e-12));
  CHECK(ha[1] == doctest::Approx(-1 / s6).epsilon(1e-12));
  CHECK(ha[2] == doctest::Approx(-1 / s6).epsilon(1e-12));
  CHECK(ha[3] == doctest::Approx(2 / s6).epsilon(1e-12));
}

TEST_CASE("to_luma_chroma: Bayer luma, zero atom, inverse round trip") {
  const auto basis = LumaChromaBasis::canonical();
  const auto lc = to_luma_chroma(bayer_atom(), basis);
  for (int k = 0; k < 4; ++k) CHECK(lc[0][k] == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-12));

  ColorAtom zero;
  zero.rows = zero.cols = 2;
  zero.r = zero.g = zero.b = Vec::Zero(4);
  const auto z = to_luma_chroma(zero, basis);
  for (int i = 0; i < 3; ++i) CHECK(z[i].cwiseAbs().maxCoeff() == 0.0);

  Pcg32 rng(11, 0);
  const ColorAtom a = random_atom(3, 3, rng);
  const auto t = to_luma_chroma(a, basis);
  const Mat3 Tinv = basis.T.inverse();
  for (int k = 0; k < 9; ++k) {
    Eigen::Vector3d lab(t[0][k], t[1][k], t[2][k]);
    Eigen::Vector3d rgb = Tinv * lab;
    CHECK(rgb[0] == doctest::Approx(a.r[k]).epsilon(1e-12));
    CHECK(rgb[1] == doctest::Approx(a.g[k]).epsilon(1e-12));
    CHECK(rgb[2] == doctest::Approx(a.b[k]).epsilon(1e-12));
  }
}

TEST_CASE("atom_dft: Bayer spectra and impulse") {
  const auto basis = LumaChromaBasis::canonical();
  const auto lc = to_luma_chroma(bayer_atom(), basis);
  const CVec lt = atom_dft(lc[0], 2, 2);
  const CVec at = atom_dft(lc[1], 2, 2);
  const CVec bt = atom_dft(lc[2], 2, 2);
  const double s3 = std::sqrt(3.0), s6 = std::sqrt(6.0), s2 = std::sqrt(2.0);
  CHECK(std::abs(lt[0] - Complex(4 / s3, 0)) < 1e-12);
  CHECK(std::abs(lt[1]) < 1e-12);
  CHECK(std::abs(lt[2]) < 1e-12);
  CHECK(std::abs(lt[3]) < 1e-12);
  CHECK(std::abs(at[0] - Complex(2 / s6, 0)) < 1e-12);
  CHECK(std::abs(at[3] - Complex(6 / s6, 0)) < 1e-12);
  CHECK(std::abs(bt[1] - Complex(-2 / s2, 0)) < 1e-12);
  CHECK(std::abs(bt[2] - Complex(2 / s2, 0)) < 1e-12);
  CHECK(std::abs(bt[0]) < 1e-12);
  CHECK(std::abs(bt[3]) < 1e-12);

  Vec impulse = Vec::Zero(9);
  impulse[0] = 1;
  const CVec it = atom_dft(impulse, 3, 3);
  for (int k = 0; k < 9; ++k) CHECK(std::abs(it[k] - Complex(1, 0)) < 1e-12);
}

TEST_CASE("atom_dft: brute-force oracle and Parseval on random atoms") {
  Pcg32 rng(17, 1);
  for (const auto [M, N] : {std::pair{2, 2}, {3, 2}, {3, 3}, {4, 4}, {7, 7}}) {
    const ColorAtom a = random_atom(M, N, rng);
    for (int c = 0; c < 3; ++c) {
      const CVec got = atom_dft(a.channel(c), M, N);
      const CVec want = dft_oracle(a.channel(c), M, N);
      CHECK((got - want).cwiseAbs().maxCoeff() < 1e-10);
      // Parseval: ||h~||^2 = K ||h||^2
      CHECK(got.squaredNorm() ==
            doctest::Approx(M * N * a.channel(c).squaredNorm()).epsilon(1e-9));
      // conjugate symmetry
      for (int u = 0; u < M; ++u)
        for (int v = 0; v < N; ++v)
          CHECK(std::abs(got[u * N + v] -
                         std::conj(got[((M - u) % M) * N + (N - v) % N])) < 1e-9);
      // round trip
      const Vec back = atom_idft(got, M, N);
      CHECK((back - a.channel(c)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("tile: block repetition, truncation, identity") {
  const ColorAtom bayer = bayer_atom();
  const Image3 t4 = tile(bayer, 4, 4);
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) {
      CHECK(t4.r[m * 4 + n] == bayer.r[(m % 2) * 2 + n % 2]);
      CHECK(t4.g[m * 4 + n] == bayer.g[(m % 2) * 2 + n % 2]);
    }
  const Image3 t3 = tile(bayer, 3, 3);
  CHECK(t3.g[2 * 3 + 2] == bayer.g[0]);
  const Image3 t2 = tile(bayer, 2, 2);
  CHECK((t2.b - bayer.b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mosaic: pure red, zero filter, gray Bayer, linearity") {
  ColorAtom red;
  red.rows = red.cols = 1;
  red.r = Vec::Ones(1);
  red.g = Vec::Zero(1);
  red.b = Vec::Zero(1);
  Image3 im(1, 1);
  im.r[0] = 1;
  CHECK(mosaic(im, red, 2.0).theta[0] == doctest::Approx(2.0));

  ColorAtom dark = red;
  dark.r.setZero();
  CHECK(mosaic(im, dark, 1.0).theta[0] == 0.0);

  Image3 gray(6, 6);
  gray.r.setConstant(0.5);
  gray.g.setConstant(0.5);
  gray.b.setConstant(0.5);
  const ExposureMap e = mosaic(gray, bayer_atom(), 1.0);
  CHECK((e.theta.array() - 0.5).abs().maxCoeff() < 1e-15);

  // linearity in the image
  Pcg32 rng(3, 2);
  Image3 a(4, 4), b(4, 4);
  for (int c = 0; c < 3; ++c)
    for (int k = 0; k < 16; ++k) {
      a.channel(c)[k] = 0.5 * rng.uniform();
      b.channel(c)[k] = 0.5 * rng.uniform();
    }
  Image3 mix(4, 4);
  for (int c = 0; c < 3; ++c) mix.channel(c) = 0.25 * a.channel(c) + 0.5 * b.channel(c);
  const Vec lhs = mosaic(mix, bayer_atom(), 1.3).theta;
  const Vec rhs = 0.25 * mosaic(a, bayer_atom(), 1.3).theta + 0.5 * mosaic(b, bayer_atom(), 1.3).theta;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);

  Image3 bad(1, 1);
  bad.r[0] = 1.5;
  CHECK_THROWS_AS(mosaic(bad, red, 1.0), DataError);
}

TEST_CASE("atom json round trip and validation") {
  const ColorAtom a = bayer_atom();
  const ColorAtom b = atom_from_json(atom_to_json(a));
  CHECK(b.rows == 2);
  CHECK((b.g - a.g).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(atom_from_json("{\"rows\":1,\"cols\":1,\"r\":[2],\"g\":[0],\"b\":[0]}"), DataError);
  CHECK_THROWS_AS(atom_from_json("not json"), DataError);
}

TEST_CASE("basis constants validate; rgbcy atom is a valid published CFA") {
  for (const char* n : {"canonical", "bayer", "rgbcy", "rgbcwy", "hao"}) {
    const auto b = LumaChromaBasis::named(n);
    CHECK_NOTHROW(b.validate());
  }
  CHECK(LumaChromaBasis::canonical().orthonormal());
  CHECK_FALSE(LumaChromaBasis::bayer().orthonormal());

  const ColorAtom rc = rgbcy_atom();
  CHECK_NOTHROW(rc.validate());
  // entries are exactly {0, 0.5, 1}
  for (int c = 0; c < 3; ++c)
    for (int k = 0; k < 16; ++k) {
      const double v = rc.channel(c)[k];
      CHECK((v == 0.0 || v == 0.5 || v == 1.0));
    }
}
