#include "qcfa/sensor.hpp"

#include <cmath>
#include <unordered_map>

#include "qcfa/parallel.hpp"
#include "qcfa/rng.hpp"

namespace qcfa {

void QisConfig::validate() const {
  if (q < 1) throw DataError("qis: threshold q must be >= 1");
  if (!(eta > 0)) throw DataError("qis: gain eta must be positive");
  if (frames < 1) throw DataError("qis: frame count must be >= 1");
}

void FrameStack::validate() const {
  config.validate();
  if (rows < 1 || cols < 1 || counts.size() != size_t(rows) * cols)
    throw DataError("frame stack shape mismatch");
  for (auto c : counts)
    if (std::int64_t(c) > config.frames) throw DataError("frame stack count exceeds frame total");
}

double incomplete_gamma_psi(int q, double theta) {
  if (q < 1) throw DataError("psi: q must be >= 1");
  if (theta < 0) throw DataError("psi: theta must be nonnegative");
  // sum_{k<q} theta^k e^-theta / k!, accumulated with a running term
  double term = std::exp(-theta);
  double sum = term;
  for (int k = 1; k < q; ++k) {
    term *= theta / k;
    sum += term;
  }
  return std::min(sum, 1.0);
}

double invert_bit_mean(int q, double mean) {
  // solve 1 - Psi_q(theta) = mean; Psi_q decreases monotonically in theta
  if (mean <= 0) return 0.0;
  const double cap = 50.0;
  if (mean >= 1.0 - incomplete_gamma_psi(q, cap)) return cap;
  double lo = 0.0, hi = cap;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - incomplete_gamma_psi(q, mid) < mean)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-13 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

FrameStack simulate(const ExposureMap& exposure, const QisConfig& config, int threads) {
  exposure.validate();
  config.validate();
  FrameStack stack;
  stack.rows = exposure.rows;
  stack.cols = exposure.cols;
  stack.config = config;
  const int P = exposure.rows * exposure.cols;
  stack.counts.assign(P, 0);
  const int T = config.frames;
  parallel_for_indexed(P, threads, [&](int j) {
    const double p = 1.0 - incomplete_gamma_psi(config.q, exposure.theta[j]);
    Pcg32 rng(config.seed, std::uint64_t(j));
    int c = 0;
    for (int t = 0; t < T; ++t)
      if (rng.uniform() < p) ++c;
    stack.counts[j] = std::uint32_t(c);
  });
  return stack;
}

ExposureMap tone_map(const FrameStack& stack) {
  stack.validate();
  const int T = stack.config.frames;
  ExposureMap out;
  out.rows = stack.rows;
  out.cols = stack.cols;
  out.theta = Vec::Zero(stack.counts.size());
  // counts take at most T+1 distinct values; memoize the inversions
  std::unordered_map<int, double> memo;
  for (size_t j = 0; j < stack.counts.size(); ++j) {
    const int c = stack.counts[j];
    auto it = memo.find(c);
    if (it == memo.end()) {
      double mean = double(c) / T;
      if (c == T) mean = 1.0 - 0.5 / T;
      it = memo.emplace(c, invert_bit_mean(stack.config.q, mean)).first;
    }
    out.theta[j] = it->second;
  }
  return out;
}

Plane box_blur(const Plane& plane, int k) {
  if (k < 1 || k % 2 == 0) throw DataError("box blur size must be odd and positive");
  if (k == 1) return plane;
  const int r = k / 2;
  const int H = plane.rows, W = plane.cols;
  auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
  // separable box with replicate borders
  Plane tmp(H, W), out(H, W);
  for (int m = 0; m < H; ++m)
    for (int n = 0; n < W; ++n) {
      double s = 0;
      for (int d = -r; d <= r; ++d) s += plane.at(m, clampi(n + d, W - 1));
      tmp.at(m, n) = s / k;
    }
  for (int m = 0; m < H; ++m)
    for (int n = 0; n < W; ++n) {
      double s = 0;
      for (int d = -r; d <= r; ++d) s += tmp.at(clampi(m + d, H - 1), n);
      out.at(m, n) = s / k;
    }
  return out;
}

Image3 diffraction_blur(const Image3& image, int k) {
  Image3 out(image.rows, image.cols);
  for (int c = 0; c < 3; ++c) {
    Plane p(image.rows, image.cols);
    p.v = image.channel(c);
    out.channel(c) = box_blur(p, k).v;
  }
  return out;
}

}  // namespace qcfa
