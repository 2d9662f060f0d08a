#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "audlet/design.hpp"

namespace audlet {

// Real finite-length signal in the circular (periodic) model.
struct Signal {
  Eigen::VectorXd samples;
  double sample_rate = 0.0;
};

// Ragged sub-band container: bands[k] holds L/d_k complex samples. Carries
// the generating bank's geometry so synthesis can check compatibility.
struct Coefficients {
  std::vector<Eigen::VectorXcd> bands;
  std::vector<int> down;
  long signal_length = 0;
  double sample_rate = 0.0;
  std::array<std::uint8_t, 32> fingerprint{};
};

// Sub-band analysis: per channel, multiply the signal spectrum by the
// channel response, fold to length L/d_k (circular convolution followed by
// plain decimation) and inverse-transform.
Coefficients analyze(const Signal& x, const FilterBank& fb);

// Dual operation: periodize each band spectrum, weight by the synthesis
// responses (interior channels of a real-signal bank count twice) and take
// the real part of the inverse transform.
Signal synthesize(const Coefficients& c, const FilterBank& fb_syn);

// Sampled squared-magnitude bank response on the full DFT grid:
//   sum_k w_k/(2 d_k) (|H_k[j]|^2 + |H_k[(L-j) mod L]|^2)
// for a real-signal bank (the mirror term makes it the exact diagonal of the
// frame operator on real signals), plain sum_k |H_k[j]|^2 / d_k otherwise.
Eigen::VectorXd filterbank_response(const FilterBank& fb);

// Rational-rate resampling by p/q in the frequency domain: periodize the
// spectrum p times, fold by q, keep the common band and scale by p.
// Preserves time-domain amplitude; round trips are exact for inputs
// band-limited to the narrower of the two rates.
Eigen::VectorXcd resample_rational(const Eigen::VectorXcd& y, long p, long q);

// Deterministic unit-norm noise with a speech-like long-term spectrum:
// second-order high-pass near 150 Hz and a -6 dB/octave rolloff above
// 500 Hz. Useful as a reproducible stand-in for recorded speech in
// reconstruction and denoising comparisons.
Signal speech_shaped_noise(double sample_rate, long length,
                           std::uint64_t seed);

namespace detail {

// Folded band spectra: Y_k[m] = (1/d_k) sum_r H_k[m + r L/d_k] X[m + r L/d_k].
std::vector<Eigen::VectorXcd> analyze_bands_fd(const Eigen::VectorXcd& X,
                                               const FilterBank& fb);

// Synthesis accumulation: sum_k w_k G_k[j] Y_k[j mod L/d_k]; conjugates the
// responses first when conj_responses is set (the analysis adjoint).
Eigen::VectorXcd accumulate_fd(const std::vector<Eigen::VectorXcd>& bands_fd,
                               const FilterBank& fb, bool conj_responses);

void check_compatible(const Coefficients& c, const FilterBank& fb);

}  // namespace detail

}  // namespace audlet
