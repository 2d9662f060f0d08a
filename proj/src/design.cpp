#include "audlet/design.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <openssl/evp.h>

#include "audlet/errors.hpp"
#include "audlet/fft.hpp"
#include "audlet/transform.hpp"

namespace audlet {
namespace {

constexpr double kPi = 3.14159265358979323846;

// sigma with exp(-x^2 / (2 sigma^2)) = 1/2 at x = 1/2, i.e. -6 dB width 1.
const double kGaussSigma = 0.5 / std::sqrt(2.0 * std::log(2.0));

// Root of (1 + p/2) exp(-p/2) = 1/2: roex slope with -6 dB width 1.
double roex_p6() {
  static const double p = [] {
    double lo = 0.1, hi = 20.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double v = (1.0 + 0.5 * mid) * std::exp(-0.5 * mid);
      (v > 0.5 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return p;
}

// Root of (1 + u) exp(-u) = 1e-5: -100 dB truncation point of the
// rounded-exponential tail, in units of p * g.
double roex_u_cut() {
  static const double u = [] {
    double lo = 1.0, hi = 50.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double v = (1.0 + mid) * std::exp(-mid);
      (v > 1e-5 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return u;
}

// Equivalent rectangular width of the prototype relative to its nominal
// bandwidth: energy over peak power, integrated across the support. Hann
// gives 3/4, the Gaussian sigma*sqrt(pi).
double proto_erw(const PrototypeWindow& proto) {
  const double half = 0.5 * proto.support_factor;
  const long n = 20000;
  const double h = 2.0 * half / static_cast<double>(n);
  double energy = 0.0;
  for (long i = 0; i <= n; ++i) {
    const double v = proto.eval(-half + static_cast<double>(i) * h);
    energy += (i == 0 || i == n ? 0.5 : 1.0) * v * v;
  }
  energy *= h;
  const double peak = proto.eval(0.0);
  if (!(peak > 0.0) || !(energy > 0.0))
    throw domain_error("prototype must peak at the channel center");
  return energy / (peak * peak);
}

// Signed circular frequency distance, wrapped into [-fs/2, fs/2).
double circ_dist(double f, double center, double fs) {
  double d = std::fmod(f - center, fs);
  if (d < -0.5 * fs) d += fs;
  if (d >= 0.5 * fs) d -= fs;
  return d;
}

// Samples value(delta_hz) on the DFT bins within half_hz of center, trims
// zero-valued edge bins and normalizes to unit energy.
Channel sample_support(double center, double bandwidth, double half_hz,
                       double fs, long L,
                       const std::function<double(double)>& value) {
  Channel ch;
  ch.center_hz = center;
  ch.bandwidth_hz = bandwidth;

  const double binw = fs / static_cast<double>(L);
  std::vector<double> vals;
  long lo = 0;
  if (2.0 * half_hz >= fs) {
    // Support covers the whole circle.
    vals.resize(static_cast<size_t>(L));
    for (long j = 0; j < L; ++j)
      vals[static_cast<size_t>(j)] = value(circ_dist(j * binw, center, fs));
  } else {
    lo = static_cast<long>(std::ceil((center - half_hz) / binw - 1e-12));
    const long hi =
        static_cast<long>(std::floor((center + half_hz) / binw + 1e-12));
    vals.reserve(static_cast<size_t>(hi - lo + 1));
    for (long j = lo; j <= hi; ++j) vals.push_back(value(j * binw - center));
  }

  size_t a = 0, b = vals.size();
  while (a < b && vals[a] == 0.0) ++a;
  while (b > a && vals[b - 1] == 0.0) --b;
  if (a == b)
    throw domain_error("prototype support contains no DFT bins");

  ch.start_bin = (((lo + static_cast<long>(a)) % L) + L) % L;
  ch.response.resize(static_cast<long>(b - a));
  for (size_t i = a; i < b; ++i)
    ch.response[static_cast<long>(i - a)] = vals[i];

  const double energy = ch.response.squaredNorm();
  if (!(energy > 0.0))
    throw domain_error("prototype support contains no DFT bins");
  ch.response /= std::sqrt(energy);
  return ch;
}

std::vector<long> divisors(long n) {
  std::vector<long> out;
  for (long d = 1; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      if (d != n / d) out.push_back(n / d);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void check_bank_args(double fs, long L, double fmin, double fmax,
                     double bw_divisor) {
  if (!(fs > 0.0)) throw domain_error("sample rate must be positive");
  if (L < 2) throw domain_error("signal length must be at least 2");
  if (fmin < 0.0 || !(fmin < fmax))
    throw domain_error("need 0 <= fmin < fmax");
  if (fmax > 0.5 * fs + 1e-9)
    throw domain_error("fmax exceeds the Nyquist frequency");
  if (!(bw_divisor >= 1.0))
    throw domain_error("bandwidth divisor must be >= 1");
}

}  // namespace

PrototypeWindow PrototypeWindow::hann() {
  PrototypeWindow w;
  w.kind = Kind::hann;
  w.support_factor = 2.0;
  return w;
}

PrototypeWindow PrototypeWindow::gaussian() {
  PrototypeWindow w;
  w.kind = Kind::gaussian;
  w.support_factor = 8.0 * kGaussSigma;
  return w;
}

PrototypeWindow PrototypeWindow::roex() {
  PrototypeWindow w;
  w.kind = Kind::roex;
  w.roex_p = roex_p6();
  w.roex_r = 0.0;
  w.support_factor = 2.0 * roex_u_cut() / w.roex_p;
  return w;
}

PrototypeWindow PrototypeWindow::custom(std::function<double(double)> shape,
                                        double support_factor) {
  PrototypeWindow w;
  w.kind = Kind::custom;
  w.shape = std::move(shape);
  w.support_factor = support_factor;
  return w;
}

double PrototypeWindow::eval(double x) const {
  if (std::abs(x) > 0.5 * support_factor) return 0.0;
  switch (kind) {
    case Kind::hann: {
      if (std::abs(x) >= 1.0) return 0.0;
      const double c = std::cos(0.5 * kPi * x);
      return c * c;
    }
    case Kind::gaussian:
      return std::exp(-x * x / (2.0 * kGaussSigma * kGaussSigma));
    case Kind::roex: {
      const double u = roex_p * std::abs(x);
      return (1.0 - roex_r) * (1.0 + u) * std::exp(-u) + roex_r;
    }
    case Kind::custom:
      return shape(x);
  }
  return 0.0;
}

std::complex<double> Channel::at(long bin, long L) const {
  long idx = (bin - start_bin) % L;
  if (idx < 0) idx += L;
  if (idx < response.size()) return response[idx];
  return {0.0, 0.0};
}

std::vector<double> channel_weights(const FilterBank& fb) {
  std::vector<double> w(fb.channels.size(), fb.real_signal ? 2.0 : 1.0);
  if (fb.real_signal && !w.empty()) {
    w.front() = 1.0;
    w.back() = 1.0;
  }
  return w;
}

FilterBank audlet_filters(Scale scale, double sample_rate, long signal_length,
                          double fmin_hz, double fmax_hz, double density,
                          const PrototypeWindow& proto, double bw_divisor) {
  check_bank_args(sample_rate, signal_length, fmin_hz, fmax_hz, bw_divisor);
  if (!(proto.support_factor > 0.0))
    throw domain_error("prototype has zero support");

  const std::vector<double> designed =
      aud_space(scale, fmin_hz, fmax_hz, density);

  // Bandwidths of the designed centers. A mel grid has no bandwidth formula:
  // use grid differences (span of the two neighbors; doubled one-sided steps
  // at the ends).
  std::vector<double> bw(designed.size());
  if (scale == Scale::mel && designed.size() >= 2) {
    for (size_t i = 0; i < designed.size(); ++i) {
      if (i == 0)
        bw[i] = 2.0 * (designed[1] - designed[0]);
      else if (i + 1 == designed.size())
        bw[i] = 2.0 * (designed[i] - designed[i - 1]);
      else
        bw[i] = designed[i + 1] - designed[i - 1];
    }
  } else {
    for (size_t i = 0; i < designed.size(); ++i)
      bw[i] = aud_bandwidth(scale, designed[i]);
  }

  struct Spec {
    double center, bandwidth;
  };
  std::vector<Spec> specs;
  const double nyq = 0.5 * sample_rate;
  // The DC and Nyquist channels are their own spectral mirrors and see only
  // a half-line, while the reflected interior grid already tiles the edge
  // regions at full density. Half the neighboring bandwidth pins the band
  // ends without doubling the summed response there.
  if (designed.front() > 0.0)
    specs.push_back({0.0, 0.5 * bw.front()});
  for (size_t i = 0; i < designed.size(); ++i) {
    if (designed[i] >= nyq - 1e-9 * std::max(1.0, nyq)) break;
    specs.push_back({designed[i], bw[i]});
  }
  specs.push_back({nyq, 0.5 * bw.back()});

  FilterBank fb;
  fb.sample_rate = sample_rate;
  fb.signal_length = signal_length;
  fb.scale = scale;
  fb.real_signal = true;
  fb.channels.reserve(specs.size());
  // The nominal bandwidth is realized as the channel's equivalent
  // rectangular width: stretching the shape by 1/erw makes energy over
  // peak power of the sampled response land on gamma, whatever the
  // prototype. A -6 dB reading would tie the same nominal width to a
  // shape-dependent level crossing instead.
  const double erw = proto_erw(proto);
  for (const Spec& s : specs) {
    const double gamma = s.bandwidth / bw_divisor;
    const double width = gamma / erw;
    fb.channels.push_back(sample_support(
        s.center, gamma, 0.5 * proto.support_factor * width, sample_rate,
        signal_length, [&](double d) { return proto.eval(d / width); }));
  }
  return fb;
}

FilterBank audlet_filters_count(Scale scale, double sample_rate,
                                long signal_length, double fmin_hz,
                                double fmax_hz, long count,
                                const PrototypeWindow& proto,
                                double bw_divisor) {
  if (count < 1) throw domain_error("channel count must be positive");
  if (count == 1) {
    // Degenerate single-center grid.
    const double eps = 1e-6 * std::max(1.0, fmin_hz);
    return audlet_filters(scale, sample_rate, signal_length, fmin_hz,
                          std::min(fmin_hz + eps, fmax_hz), 1.0, proto,
                          bw_divisor);
  }
  const double span =
      aud_forward(scale, fmax_hz) - aud_forward(scale, fmin_hz);
  return audlet_filters(scale, sample_rate, signal_length, fmin_hz, fmax_hz,
                        static_cast<double>(count - 1) / span, proto,
                        bw_divisor);
}

DownsamplingResult select_downsampling(const FilterBank& fb, double redfac) {
  if (!(redfac > 0.0)) throw domain_error("redundancy factor must be positive");
  DownsamplingResult res;
  res.bank = fb;
  res.painless_possible = redfac >= 1.0 - 1e-12;
  res.fallback = false;

  const long L = fb.signal_length;
  const std::vector<long> divs = divisors(L);
  const bool cap = redfac >= 1.0 - 1e-12;
  for (Channel& ch : res.bank.channels) {
    const long len = ch.response.size();
    // Baseline sub-band rate: just cover the support, L/len. The returned
    // factor is the divisor of L nearest to baseline/redfac (ties take the
    // smaller). At redfac >= 1 the candidates are restricted to factors
    // whose sub-band still covers the support, so divisor rounding cannot
    // silently break band-limitation; the flag is verified below anyway.
    const double target =
        static_cast<double>(L) / static_cast<double>(len) / redfac;
    long best = 1;
    double best_err = std::abs(1.0 - target);
    for (long d : divs) {
      if (cap && d * len > L) continue;
      const double err = std::abs(static_cast<double>(d) - target);
      if (err < best_err - 1e-12) {
        best = d;
        best_err = err;
      }
    }
    ch.down = static_cast<int>(best);
    if (len * best > L) {
      res.painless_possible = false;
      if (cap) res.fallback = true;
    }
  }
  return res;
}

FilterBank copy_downsampling(const FilterBank& dst, const FilterBank& src) {
  if (dst.channels.size() != src.channels.size() ||
      dst.signal_length != src.signal_length)
    throw domain_error("banks have different geometry");
  FilterBank out = dst;
  for (size_t k = 0; k < out.channels.size(); ++k)
    out.channels[k].down = src.channels[k].down;
  return out;
}

double redundancy(const FilterBank& fb) {
  const std::vector<double> w = channel_weights(fb);
  double r = 0.0;
  for (size_t k = 0; k < fb.channels.size(); ++k)
    r += w[k] / static_cast<double>(fb.channels[k].down);
  return r;
}

FilterBank gammatone_filters(double sample_rate, long signal_length,
                             const std::vector<double>& centers_hz,
                             double beta, int order, long ir_length,
                             double bw_divisor) {
  if (centers_hz.empty()) throw domain_error("no channel centers given");
  if (order < 1) throw domain_error("gammatone order must be >= 1");
  if (ir_length < 1 || ir_length > signal_length)
    throw domain_error("impulse response length must be in [1, L]");
  if (!(bw_divisor >= 1.0))
    throw domain_error("bandwidth divisor must be >= 1");

  FilterBank fb;
  fb.sample_rate = sample_rate;
  fb.signal_length = signal_length;
  fb.scale = Scale::erb;
  fb.real_signal = true;
  fb.channels.reserve(centers_hz.size());

  for (double c : centers_hz) {
    const double bw = aud_bandwidth(Scale::erb, c);
    const double lambda = beta / bw_divisor * bw;
    Eigen::VectorXcd ir = Eigen::VectorXcd::Zero(signal_length);
    for (long n = 0; n < ir_length; ++n) {
      const double t = static_cast<double>(n) / sample_rate;
      const double env =
          (order == 1 ? 1.0 : std::pow(t, order - 1)) *
          std::exp(-2.0 * kPi * lambda * t);
      ir[n] = std::polar(env, 2.0 * kPi * c * t);
    }
    Channel ch;
    ch.center_hz = c;
    ch.bandwidth_hz = bw / bw_divisor;
    ch.start_bin = 0;
    ch.response = fft_forward(ir);
    const double energy = ch.response.squaredNorm();
    if (!(energy > 0.0)) throw domain_error("gammatone response is zero");
    ch.response /= std::sqrt(energy);
    fb.channels.push_back(std::move(ch));
  }
  return fb;
}

FilterBank roex_filters(double sample_rate, long signal_length,
                        const std::vector<double>& centers_hz, double r,
                        double bw_divisor) {
  if (centers_hz.empty()) throw domain_error("no channel centers given");
  if (!(r >= 0.0 && r < 1.0)) throw domain_error("roex floor must be in [0, 1)");
  if (!(bw_divisor >= 1.0))
    throw domain_error("bandwidth divisor must be >= 1");

  FilterBank fb;
  fb.sample_rate = sample_rate;
  fb.signal_length = signal_length;
  fb.scale = Scale::erb;
  fb.real_signal = true;
  fb.channels.reserve(centers_hz.size());

  const double binw = sample_rate / static_cast<double>(signal_length);
  const double ucut = roex_u_cut();

  for (double c : centers_hz) {
    const double target = aud_bandwidth(Scale::erb, c) / bw_divisor;
    if (c == 0.0) {
      // The shape divides by the center frequency; at DC use a prototype
      // bump of the same family instead.
      const PrototypeWindow proto = PrototypeWindow::roex();
      fb.channels.push_back(sample_support(
          0.0, target, 0.5 * proto.support_factor * target, sample_rate,
          signal_length, [&](double d) { return proto.eval(d / target); }));
      continue;
    }

    const auto sample_at = [&](double p) {
      const double half =
          (r > 0.0) ? 0.5 * sample_rate : std::min(ucut / p * c,
                                                   0.5 * sample_rate);
      return sample_support(c, target, half, sample_rate, signal_length,
                            [&](double d) {
                              const double u = p * std::abs(d) / c;
                              return (1.0 - r) * (1.0 + u) * std::exp(-u) + r;
                            });
    };
    // Equivalent rectangular width of the sampled magnitude, in Hz.
    // sample_support normalizes energy, which cancels in the ratio.
    const auto erw = [&](const Channel& ch) {
      const double peak = ch.response.cwiseAbs().maxCoeff();
      return ch.response.squaredNorm() / (peak * peak) * binw;
    };

    // Width decreases monotonically in p; bisect from a bracket around the
    // standard initial guess 4 c / target.
    double lo = 4.0 * c / target / 16.0;
    double hi = 4.0 * c / target * 16.0;
    int guard = 0;
    while (erw(sample_at(lo)) < target && ++guard < 8) lo *= 0.25;
    guard = 0;
    while (erw(sample_at(hi)) > target && ++guard < 8) hi *= 4.0;

    double p = 0.5 * (lo + hi);
    for (int i = 0; i < 48; ++i) {
      p = 0.5 * (lo + hi);
      const double w = erw(sample_at(p));
      if (std::abs(w - target) <= 1e-9 * target) break;
      (w > target ? lo : hi) = p;
    }
    fb.channels.push_back(sample_at(p));
  }
  return fb;
}

FilterBank matched_synthesis_bank(const FilterBank& fb, bool normalize) {
  FilterBank out = fb;
  for (Channel& ch : out.channels) ch.response = ch.response.conjugate();
  if (normalize) {
    // Median of the response is robust against the narrow dips and
    // pile-ups near DC and Nyquist, which otherwise drag a least-squares
    // gain away from the passband level.
    Eigen::VectorXd h0 = filterbank_response(fb);
    std::nth_element(h0.data(), h0.data() + h0.size() / 2,
                     h0.data() + h0.size());
    const double med = h0[h0.size() / 2];
    if (!(med > 0.0)) throw numerical_error("bank response is zero");
    for (Channel& ch : out.channels) ch.response *= 1.0 / med;
  }
  return out;
}

std::array<std::uint8_t, 32> bank_fingerprint(const FilterBank& fb) {
  std::string canon = "audlet-bank;";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "fs=%.17g;len=%ld;n=%zu;", fb.sample_rate,
                fb.signal_length, fb.channels.size());
  canon += buf;
  for (const Channel& ch : fb.channels) {
    std::snprintf(buf, sizeof(buf), "c=%.17g;b=%.17g;d=%d;", ch.center_hz,
                  ch.bandwidth_hz, ch.down);
    canon += buf;
  }
  std::array<std::uint8_t, 32> fp{};
  unsigned int len = 0;
  EVP_Digest(canon.data(), canon.size(), fp.data(), &len, EVP_sha256(),
             nullptr);
  return fp;
}

std::string fingerprint_hex(const std::array<std::uint8_t, 32>& fp) {
  static const char* hex = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (std::uint8_t b : fp) {
    s.push_back(hex[b >> 4]);
    s.push_back(hex[b & 0xf]);
  }
  return s;
}

}  // namespace audlet
