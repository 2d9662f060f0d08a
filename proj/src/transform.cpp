#include "audlet/transform.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "audlet/errors.hpp"
#include "audlet/fft.hpp"

namespace audlet {
namespace detail {

std::vector<Eigen::VectorXcd> analyze_bands_fd(const Eigen::VectorXcd& X,
                                               const FilterBank& fb) {
  const long L = fb.signal_length;
  std::vector<Eigen::VectorXcd> bands;
  bands.reserve(fb.channels.size());
  for (const Channel& ch : fb.channels) {
    const long M = L / ch.down;
    Eigen::VectorXcd Y = Eigen::VectorXcd::Zero(M);
    const long len = ch.response.size();
    for (long i = 0; i < len; ++i) {
      const long j = (ch.start_bin + i) % L;
      Y[j % M] += ch.response[i] * X[j];
    }
    Y /= static_cast<double>(ch.down);
    bands.push_back(std::move(Y));
  }
  return bands;
}

Eigen::VectorXcd accumulate_fd(const std::vector<Eigen::VectorXcd>& bands_fd,
                               const FilterBank& fb, bool conj_responses) {
  const long L = fb.signal_length;
  const std::vector<double> w = channel_weights(fb);
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(L);
  for (size_t k = 0; k < fb.channels.size(); ++k) {
    const Channel& ch = fb.channels[k];
    const Eigen::VectorXcd& Y = bands_fd[k];
    const long M = L / ch.down;
    const long len = ch.response.size();
    for (long i = 0; i < len; ++i) {
      const long j = (ch.start_bin + i) % L;
      const std::complex<double> g =
          conj_responses ? std::conj(ch.response[i]) : ch.response[i];
      acc[j] += w[k] * g * Y[j % M];
    }
  }
  return acc;
}

void check_compatible(const Coefficients& c, const FilterBank& fb) {
  if (c.signal_length != fb.signal_length ||
      c.sample_rate != fb.sample_rate ||
      c.down.size() != fb.channels.size())
    throw domain_error("coefficients are not compatible with the bank");
  for (size_t k = 0; k < c.down.size(); ++k)
    if (c.down[k] != fb.channels[k].down)
      throw domain_error("coefficients are not compatible with the bank");
}

}  // namespace detail

Coefficients analyze(const Signal& x, const FilterBank& fb) {
  const long L = fb.signal_length;
  if (x.samples.size() != L)
    throw domain_error("signal length does not match the bank");
  if (x.sample_rate != fb.sample_rate)
    throw domain_error("sample rate does not match the bank");
  if (!x.samples.allFinite())
    throw domain_error("signal contains non-finite samples");
  for (const Channel& ch : fb.channels)
    if (ch.down < 1 || L % ch.down != 0)
      throw domain_error("downsampling factors must divide the length");

  const Eigen::VectorXcd X = fft_forward(x.samples);
  std::vector<Eigen::VectorXcd> bands_fd = detail::analyze_bands_fd(X, fb);

  Coefficients c;
  c.signal_length = L;
  c.sample_rate = fb.sample_rate;
  c.fingerprint = bank_fingerprint(fb);
  c.bands.reserve(bands_fd.size());
  c.down.reserve(bands_fd.size());
  for (size_t k = 0; k < bands_fd.size(); ++k) {
    c.bands.push_back(fft_inverse(bands_fd[k]));
    c.down.push_back(fb.channels[k].down);
  }
  return c;
}

Signal synthesize(const Coefficients& c, const FilterBank& fb_syn) {
  detail::check_compatible(c, fb_syn);
  std::vector<Eigen::VectorXcd> bands_fd;
  bands_fd.reserve(c.bands.size());
  for (const Eigen::VectorXcd& y : c.bands) bands_fd.push_back(fft_forward(y));
  const Eigen::VectorXcd acc = detail::accumulate_fd(bands_fd, fb_syn, false);
  Signal out;
  out.sample_rate = fb_syn.sample_rate;
  out.samples = fft_inverse(acc).real();
  return out;
}

Eigen::VectorXd filterbank_response(const FilterBank& fb) {
  const long L = fb.signal_length;
  const std::vector<double> w = channel_weights(fb);
  Eigen::VectorXd h0 = Eigen::VectorXd::Zero(L);
  for (size_t k = 0; k < fb.channels.size(); ++k) {
    const Channel& ch = fb.channels[k];
    const double s = w[k] / static_cast<double>(ch.down);
    const long len = ch.response.size();
    for (long i = 0; i < len; ++i) {
      const long j = (ch.start_bin + i) % L;
      const double m2 = std::norm(ch.response[i]);
      if (fb.real_signal) {
        h0[j] += 0.5 * s * m2;
        h0[(L - j) % L] += 0.5 * s * m2;
      } else {
        h0[j] += s * m2;
      }
    }
  }
  return h0;
}

Eigen::VectorXcd resample_rational(const Eigen::VectorXcd& y, long p, long q) {
  if (p < 1 || q < 1) throw domain_error("resampling factors must be positive");
  const long g = std::gcd(p, q);
  p /= g;
  q /= g;
  const long N = y.size();
  if (N == 0 || (N * p) % q != 0)
    throw domain_error("resampled length is not an integer");
  const long Nout = N * p / q;
  if (p == 1 && q == 1) return y;

  const Eigen::VectorXcd Y = fft_forward(y);
  // Periodizing p copies then folding by q lands input bin b at output bin
  // b mod Nout, scaled 1/q; the final factor p preserves time amplitude.
  Eigen::VectorXcd Z = Eigen::VectorXcd::Zero(Nout);
  const long keep = std::min(N, Nout);  // width of the surviving band
  for (long b = 0; b < N; ++b) {
    const long signed_b = (b <= N / 2) ? b : b - N;
    if (2 * std::abs(signed_b) >= keep) continue;
    const long out = ((signed_b % Nout) + Nout) % Nout;
    Z[out] += Y[b] * static_cast<double>(p) / static_cast<double>(q);
  }
  return fft_inverse(Z);
}

Signal speech_shaped_noise(double sample_rate, long length,
                           std::uint64_t seed) {
  if (!(sample_rate > 0.0)) throw domain_error("sample rate must be positive");
  if (length < 2) throw domain_error("signal length must be at least 2");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Eigen::VectorXd x(length);
  for (long n = 0; n < length; ++n) x[n] = dist(gen);
  Eigen::VectorXcd spec = fft_forward(x);
  for (long j = 0; j < length; ++j) {
    const double f =
        static_cast<double>(std::min(j, length - j)) * sample_rate / length;
    spec[j] *= (f * f / (f * f + 150.0 * 150.0)) * (500.0 / (500.0 + f));
  }
  Signal out;
  out.sample_rate = sample_rate;
  out.samples = fft_inverse(spec).real();
  out.samples /= out.samples.norm();
  return out;
}

}  // namespace audlet
