#include "audlet/scales.hpp"

#include <algorithm>
#include <cmath>

#include "audlet/errors.hpp"

namespace audlet {
namespace {

// bark(f) saturates at 13*pi/2 + 3.5*pi/2 ~ 25.918; keep the invertible
// range finite so bisection has a bracket.
constexpr double kBarkMaxHz = 1.0e7;

double bark_forward(double f) {
  const double u = f / 7500.0;
  return 13.0 * std::atan(0.00076 * f) + 3.5 * std::atan(u * u);
}

double erb_forward(double f) { return 9.265 * std::log1p(f / 228.8455); }

double mel_forward(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }

double erb_inverse(double a) { return 228.8455 * std::expm1(a / 9.265); }

double mel_inverse(double m) {
  return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
}

// Monotone bisection; the map is cheap, so fixed iteration depth is fine.
double bark_inverse(double a) {
  if (a == 0.0) return 0.0;
  if (a > bark_forward(kBarkMaxHz))
    throw domain_error("bark value exceeds the invertible range");
  double lo = 0.0, hi = 1000.0;
  while (bark_forward(hi) < a) {
    lo = hi;
    hi *= 2.0;
    if (hi > kBarkMaxHz) {
      hi = kBarkMaxHz;
      break;
    }
  }
  // 1e-10 Hz absolute needs ~ log2(1e7/1e-10) ~ 57 halvings.
  for (int i = 0; i < 80 && hi - lo > 1e-10; ++i) {
    const double mid = 0.5 * (lo + hi);
    (bark_forward(mid) < a ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void check_freq(double f) {
  if (!std::isfinite(f) || f < 0.0)
    throw domain_error("frequency must be finite and nonnegative");
}

}  // namespace

Scale scale_from_string(const std::string& name) {
  if (name == "erb") return Scale::erb;
  if (name == "bark") return Scale::bark;
  if (name == "mel") return Scale::mel;
  throw domain_error("unknown scale name: " + name);
}

std::string to_string(Scale s) {
  switch (s) {
    case Scale::erb: return "erb";
    case Scale::bark: return "bark";
    case Scale::mel: return "mel";
  }
  return "?";
}

double aud_forward(Scale s, double freq_hz) {
  check_freq(freq_hz);
  switch (s) {
    case Scale::erb: return erb_forward(freq_hz);
    case Scale::bark: return bark_forward(freq_hz);
    case Scale::mel: return mel_forward(freq_hz);
  }
  return 0.0;
}

double aud_inverse(Scale s, double aud) {
  if (!std::isfinite(aud) || aud < 0.0)
    throw domain_error("scale value must be finite and nonnegative");
  double f = 0.0;
  switch (s) {
    case Scale::erb: f = erb_inverse(aud); break;
    case Scale::bark: return bark_inverse(aud);
    case Scale::mel: f = mel_inverse(aud); break;
  }
  if (!std::isfinite(f)) throw domain_error("scale value out of range");
  return f;
}

double aud_bandwidth(Scale s, double freq_hz) {
  check_freq(freq_hz);
  switch (s) {
    case Scale::erb:
      return 24.7 + freq_hz / 9.265;
    case Scale::bark: {
      const double t = 1.0 + 1.4e-6 * freq_hz * freq_hz;
      return 25.0 + 75.0 * std::pow(t, 0.69);
    }
    case Scale::mel: {
      const double a = mel_forward(freq_hz);
      return mel_inverse(a + 1.0) - mel_inverse(std::max(a - 1.0, 0.0));
    }
  }
  return 0.0;
}

std::vector<double> aud_space(Scale s, double fmin_hz, double fmax_hz,
                              double density) {
  if (!(density > 0.0) || !std::isfinite(density))
    throw domain_error("density must be positive");
  check_freq(fmin_hz);
  check_freq(fmax_hz);
  if (!(fmin_hz < fmax_hz))
    throw domain_error("fmin must be strictly below fmax");

  const double a0 = aud_forward(s, fmin_hz);
  const double a1 = aud_forward(s, fmax_hz);
  // Small forward slack so a span that lands exactly on the grid keeps its
  // endpoint instead of losing it to rounding.
  const long count =
      static_cast<long>(std::floor(density * (a1 - a0) + 1e-9)) + 1;

  std::vector<double> centers;
  centers.reserve(static_cast<size_t>(count));
  centers.push_back(fmin_hz);
  for (long k = 1; k < count; ++k) {
    double f = aud_inverse(s, a0 + static_cast<double>(k) / density);
    if (std::abs(f - fmax_hz) <= 1e-9 * std::max(1.0, fmax_hz)) f = fmax_hz;
    if (f > fmax_hz) break;
    centers.push_back(f);
  }
  return centers;
}

}  // namespace audlet
