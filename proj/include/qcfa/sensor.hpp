#pragma once

#include <cstdint>

#include "qcfa/types.hpp"

namespace qcfa {

/// Single-bit QIS acquisition parameters.
struct QisConfig {
  int q = 1;                 // photon threshold, >= 1
  double eta = 1.0;          // sensor gain, > 0
  int frames = 1;            // temporal oversampling T
  std::uint64_t seed = 0;

  void validate() const;
};

/// Sum of T binary frames per jot.
struct FrameStack {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint32_t> counts;  // in [0, T]; 16-bit PGM serialization requires T <= 65535
  QisConfig config;

  void validate() const;
};

/// Psi_q(theta) = P(Poisson(theta) < q) = sum_{k<q} theta^k e^-theta / k!.
double incomplete_gamma_psi(int q, double theta);

/// Inverse of 1 - Psi_q at a given bit mean, by bisection on [0, 50].
double invert_bit_mean(int q, double mean);

/// Per jot and frame: bit = 1 iff Poisson(theta_j) >= q, accumulated over T
/// frames. Thresholded Poisson is Bernoulli(1 - Psi_q(theta)) in law; the
/// per-jot streams are keyed by (seed, jot), so any processing order gives
/// the same stack.
FrameStack simulate(const ExposureMap& exposure, const QisConfig& config, int threads = 1);

/// Maximum-likelihood tone mapping theta_j = Psi_q^-1(1 - counts/T); a
/// saturated jot (counts == T) is clamped to mean 1 - 1/(2T) first.
ExposureMap tone_map(const FrameStack& stack);

/// Normalized k x k box filter with replicate-padded borders; k odd.
Image3 diffraction_blur(const Image3& image, int k);
Plane box_blur(const Plane& plane, int k);

}  // namespace qcfa
