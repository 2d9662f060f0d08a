#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "audlet/design.hpp"
#include "audlet/errors.hpp"
#include "audlet/fft.hpp"
#include "audlet/frame.hpp"
#include "audlet/metrics.hpp"
#include "audlet/transform.hpp"

using namespace audlet;

namespace {

Signal random_signal(double fs, long len, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Signal x;
  x.sample_rate = fs;
  x.samples.resize(len);
  for (long n = 0; n < len; ++n) x.samples[n] = dist(gen);
  return x;
}

FilterBank small_bank(long L = 4000, double redfac = 1.0) {
  return select_downsampling(
             audlet_filters(Scale::erb, 16000.0, L, 0.0, 8000.0, 1.0,
                            PrototypeWindow::hann(), 1.0),
             redfac)
      .bank;
}

// Time-domain oracle: circular convolution with the channel's impulse
// response followed by plain decimation.
Eigen::VectorXcd brute_band(const Signal& x, const Channel& ch, long L) {
  Eigen::VectorXcd H = Eigen::VectorXcd::Zero(L);
  for (long i = 0; i < ch.response.size(); ++i)
    H[(ch.start_bin + i) % L] = ch.response[i];
  const Eigen::VectorXcd h = fft_inverse(H);
  const long M = L / ch.down;
  Eigen::VectorXcd y(M);
  for (long n = 0; n < M; ++n) {
    std::complex<double> acc = 0.0;
    const long t = n * ch.down;
    for (long m = 0; m < L; ++m)
      acc += x.samples[m] * h[((t - m) % L + L) % L];
    y[n] = acc;
  }
  return y;
}

}  // namespace

TEST_CASE("painless dual reconstructs random signals") {
  const FilterBank fb = small_bank();
  const FilterBank dual = painless_dual(fb);
  const Signal x = random_signal(16000.0, 4000, 5);
  const Signal back = synthesize(analyze(x, fb), dual);
  CHECK(rel_error(x, back) <= 1e-10);
}

TEST_CASE("analysis of the zero signal yields zero bands") {
  const FilterBank fb = small_bank();
  Signal x;
  x.sample_rate = 16000.0;
  x.samples = Eigen::VectorXd::Zero(4000);
  const Coefficients c = analyze(x, fb);
  for (const auto& band : c.bands) CHECK(band.norm() == 0.0);
  const Signal zero = synthesize(c, painless_dual(fb));
  CHECK(zero.samples.norm() == 0.0);
}

TEST_CASE("analysis is linear") {
  const FilterBank fb = small_bank();
  const Signal a = random_signal(16000.0, 4000, 1);
  const Signal b = random_signal(16000.0, 4000, 2);
  Signal mix;
  mix.sample_rate = 16000.0;
  mix.samples = 2.0 * a.samples - 0.5 * b.samples;
  const Coefficients ca = analyze(a, fb);
  const Coefficients cb = analyze(b, fb);
  const Coefficients cm = analyze(mix, fb);
  for (size_t k = 0; k < cm.bands.size(); ++k) {
    const Eigen::VectorXcd expect = 2.0 * ca.bands[k] - 0.5 * cb.bands[k];
    CHECK((cm.bands[k] - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
  }
}

TEST_CASE("DFT-domain analysis equals brute-force convolution") {
  const FilterBank fb = small_bank(512);
  const Signal x = random_signal(16000.0, 512, 9);
  const Coefficients c = analyze(x, fb);
  for (long k = 0; k < fb.size(); ++k) {
    const Eigen::VectorXcd oracle = brute_band(x, fb.channels[k], 512);
    CHECK((c.bands[k] - oracle).norm() <= 1e-10 * (1.0 + oracle.norm()));
  }
}

TEST_CASE("synthesis with conjugated filters is the analysis adjoint") {
  const FilterBank fb = small_bank();
  const FilterBank conj_bank = matched_synthesis_bank(fb, false);
  const Signal x = random_signal(16000.0, 4000, 3);
  const Coefficients y = analyze(x, fb);

  // arbitrary coefficient-side vector with the same geometry
  Coefficients c = y;
  std::mt19937_64 gen(17);
  std::normal_distribution<double> dist;
  for (auto& band : c.bands)
    for (long i = 0; i < band.size(); ++i) band[i] = {dist(gen), dist(gen)};

  const auto w = channel_weights(fb);
  double lhs = 0.0;
  for (size_t k = 0; k < c.bands.size(); ++k)
    lhs += w[k] * c.bands[k].dot(y.bands[k]).real();
  const double rhs = synthesize(c, conj_bank).samples.dot(x.samples);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("weighted band energy matches the frame operator quadratic form") {
  const FilterBank fb = small_bank();
  const Signal x = random_signal(16000.0, 4000, 8);
  const Coefficients c = analyze(x, fb);
  const auto w = channel_weights(fb);
  double energy = 0.0;
  for (size_t k = 0; k < c.bands.size(); ++k)
    energy += w[k] * c.bands[k].squaredNorm();
  const double quad = apply_frame_operator(x, fb).samples.dot(x.samples);
  CHECK(energy == doctest::Approx(quad).epsilon(1e-12));

  // Parseval sandwich from the response extremes
  const Eigen::VectorXd h0 = filterbank_response(fb);
  const double n2 = x.samples.squaredNorm();
  CHECK(energy >= h0.minCoeff() * n2 * (1.0 - 1e-12));
  CHECK(energy <= h0.maxCoeff() * n2 * (1.0 + 1e-12));
}

TEST_CASE("bank response reduces to the squared magnitude for one channel") {
  FilterBank fb;
  fb.sample_rate = 16000.0;
  fb.signal_length = 64;
  fb.real_signal = false;
  Channel ch;
  ch.center_hz = 2000.0;
  ch.down = 1;
  ch.start_bin = 5;
  ch.response = Eigen::VectorXcd::Zero(7);
  for (long i = 0; i < 7; ++i) ch.response[i] = 1.0 - 0.1 * std::abs(i - 3);
  fb.channels.push_back(ch);

  const Eigen::VectorXd h0 = filterbank_response(fb);
  for (long j = 0; j < 64; ++j) {
    const std::complex<double> v = ch.at(j, 64);
    CHECK(h0[j] == doctest::Approx(std::norm(v)).epsilon(1e-12));
  }
}

TEST_CASE("real-signal response doubles interior channels symmetrically") {
  // a DC-symmetric single-channel real bank keeps H0 = |H|^2 exactly
  FilterBank fb;
  fb.sample_rate = 16000.0;
  fb.signal_length = 64;
  fb.real_signal = true;
  Channel ch;
  ch.center_hz = 0.0;
  ch.down = 2;
  ch.start_bin = 61;  // symmetric run around DC: bins -3 .. 3
  ch.response = Eigen::VectorXcd::Zero(7);
  for (long i = 0; i < 7; ++i) ch.response[i] = 1.0 - 0.2 * std::abs(i - 3);
  fb.channels.push_back(ch);

  const Eigen::VectorXd h0 = filterbank_response(fb);
  for (long j = 0; j < 64; ++j)
    CHECK(h0[j] ==
          doctest::Approx(std::norm(ch.at(j, 64)) / 2.0).epsilon(1e-12));
}

TEST_CASE("analysis rejects a mismatched signal") {
  const FilterBank fb = small_bank();
  CHECK_THROWS_AS(analyze(random_signal(16000.0, 4001, 1), fb), domain_error);
  Signal wrong_rate = random_signal(8000.0, 4000, 1);
  CHECK_THROWS_AS(analyze(wrong_rate, fb), domain_error);
}

TEST_CASE("synthesis rejects coefficients from a different grid") {
  const FilterBank fb = small_bank(4000, 1.0);
  const FilterBank other = small_bank(4000, 2.0);
  const Signal x = random_signal(16000.0, 4000, 4);
  const Coefficients c = analyze(x, fb);
  CHECK_THROWS_AS(synthesize(c, painless_dual(other)), domain_error);
}

TEST_CASE("rational resampling keeps band-limited content") {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> dist;
  const long N = 96;
  Eigen::VectorXcd X = Eigen::VectorXcd::Zero(N);
  for (long j = 0; j <= 10; ++j) {
    X[j] = {dist(gen), dist(gen)};
    if (j > 0) X[N - j] = std::conj(X[j]);
  }
  const Eigen::VectorXcd x = fft_inverse(X);

  SUBCASE("unit factor is the identity") {
    CHECK((resample_rational(x, 1, 1) - x).norm() == 0.0);
  }
  SUBCASE("down then up round trips") {
    const Eigen::VectorXcd down = resample_rational(x, 1, 2);
    CHECK(down.size() == N / 2);
    const Eigen::VectorXcd up = resample_rational(down, 2, 1);
    CHECK((up - x).norm() <= 1e-10 * x.norm());
  }
  SUBCASE("a kept pure bin scales by exactly 1/q in the DFT") {
    Eigen::VectorXcd tone = Eigen::VectorXcd::Zero(N);
    for (long n = 0; n < N; ++n)
      tone[n] = std::exp(std::complex<double>(
          0.0, 2.0 * M_PI * 4.0 * static_cast<double>(n) / N));
    const Eigen::VectorXcd down = resample_rational(tone, 1, 3);
    const Eigen::VectorXcd D = fft_forward(down);
    // DFT coefficient is one third of the original N; time amplitude 1
    CHECK(std::abs(D[4] - std::complex<double>(N / 3.0, 0.0)) < 1e-9);
    for (long j = 0; j < N / 3; ++j)
      if (j != 4) CHECK(std::abs(D[j]) < 1e-9);
  }
  SUBCASE("invalid factors are rejected") {
    CHECK_THROWS_AS(resample_rational(x, 0, 1), domain_error);
    CHECK_THROWS_AS(resample_rational(x, 1, 5), domain_error);
  }
}

TEST_CASE("speech-shaped noise is deterministic and unit norm") {
  const Signal a = speech_shaped_noise(16000.0, 8000, 42);
  const Signal b = speech_shaped_noise(16000.0, 8000, 42);
  CHECK((a.samples - b.samples).norm() == 0.0);
  CHECK(a.samples.norm() == doctest::Approx(1.0).epsilon(1e-12));
  const Signal c = speech_shaped_noise(16000.0, 8000, 43);
  CHECK((a.samples - c.samples).norm() > 1e-3);

  // long-term spectrum rolls off: more energy in 0.2-1 kHz than 4-8 kHz
  const Eigen::VectorXcd A = fft_forward(a.samples);
  auto band_energy = [&](double f0, double f1) {
    double e = 0.0;
    for (long j = 0; j <= 4000; ++j) {
      const double f = static_cast<double>(j) * 16000.0 / 8000.0;
      if (f >= f0 && f < f1) e += std::norm(A[j]);
    }
    return e;
  };
  CHECK(band_energy(200.0, 1000.0) > band_energy(4000.0, 8000.0));
  CHECK(band_energy(0.0, 50.0) < 0.01 * band_energy(200.0, 1000.0));
  CHECK_THROWS_AS(speech_shaped_noise(0.0, 8000, 1), domain_error);
}
