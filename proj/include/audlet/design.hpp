#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "audlet/scales.hpp"

namespace audlet {

// Prototype magnitude shape w(x), centered at 0 with -6 dB width exactly 1.
// support_factor is the full width of the (possibly truncated) support in
// units of x; audlet_filters rescales x when mapping the shape onto a
// channel's nominal bandwidth.
struct PrototypeWindow {
  enum class Kind { hann, gaussian, roex, custom };

  Kind kind = Kind::hann;
  double support_factor = 2.0;
  double roex_p = 0.0;  // roex slope; ignored for other kinds
  double roex_r = 0.0;  // roex floor in [0, 1)
  std::function<double(double)> shape;  // custom only

  // w(x) = cos^2(pi x / 2) on |x| <= 1.
  static PrototypeWindow hann();
  // Gaussian with sigma = 1 / (2 sqrt(2 ln 2)), truncated at 4 sigma.
  static PrototypeWindow gaussian();
  // (1 - r) (1 + p|x|) exp(-p|x|) + r with p giving -6 dB width 1;
  // truncated where the first term falls to -100 dB (r = 0).
  static PrototypeWindow roex();
  static PrototypeWindow custom(std::function<double(double)> shape,
                                double support_factor);

  double eval(double x) const;
};

// One analysis filter, sampled on the length-L DFT grid. The response is
// stored as a contiguous run of bins starting at start_bin, wrapping
// circularly; bins outside the run are zero.
struct Channel {
  double center_hz = 0.0;
  double bandwidth_hz = 0.0;
  int down = 1;  // downsampling factor, divides L
  long start_bin = 0;
  Eigen::VectorXcd response;

  // Response value at an absolute DFT bin (0 outside the stored run).
  std::complex<double> at(long bin, long L) const;
};

// Ordered filter set: channel 0 sits at DC, the last channel at Nyquist,
// centers strictly increasing. When real_signal is set the bank covers only
// the nonnegative-frequency half and synthesis doubles interior channels.
struct FilterBank {
  std::vector<Channel> channels;
  double sample_rate = 0.0;
  long signal_length = 0;
  Scale scale = Scale::erb;
  bool real_signal = true;

  long size() const { return static_cast<long>(channels.size()); }
};

// Synthesis weights: 1 for the first and last channel of a real-signal bank,
// 2 for interior channels; all 1 for a two-sided bank.
std::vector<double> channel_weights(const FilterBank& fb);

// Frequency-domain bank on an auditory scale: centers from aud_space plus a
// DC channel (when fmin > 0) and a Nyquist channel, each channel sampled
// from the prototype and normalized to unit energy sum |H[j]|^2 = 1. The
// shape is stretched so the channel's equivalent rectangular width (energy
// over peak power) equals aud_bandwidth(center)/bw_divisor, making the
// nominal width shape-independent. The DC and Nyquist channels are their
// own spectral mirrors, so they take half the neighboring bandwidth; the
// reflected interior grid supplies the rest of the edge coverage.
// Downsampling starts at 1.
FilterBank audlet_filters(Scale scale, double sample_rate, long signal_length,
                          double fmin_hz, double fmax_hz, double density,
                          const PrototypeWindow& proto, double bw_divisor);

// Same, but with a requested channel count on the scale grid instead of a
// density; count >= 2 spans [fmin, fmax] exactly.
FilterBank audlet_filters_count(Scale scale, double sample_rate,
                                long signal_length, double fmin_hz,
                                double fmax_hz, long count,
                                const PrototypeWindow& proto,
                                double bw_divisor);

struct DownsamplingResult {
  FilterBank bank;
  bool painless_possible = false;
  // Set when a channel wanted a larger factor than any divisor of L allows.
  bool fallback = false;
};

// Chooses per-channel downsampling factors. Baseline per channel: the
// sub-band rate that just covers the support, L / support_bins. The
// returned factor is the divisor of L nearest to baseline/redfac (ties
// take the smaller); at redfac >= 1 candidates are restricted to factors
// whose sub-band still covers the support. painless_possible reports
// redfac >= 1 and support_bins * d_k <= L for all channels, which the
// restriction guarantees whenever redfac >= 1.
DownsamplingResult select_downsampling(const FilterBank& fb, double redfac);

// Copies the downsampling factors of src onto dst (channel counts and
// signal lengths must match). Used to run reference banks on the same
// sub-band grid as a designed bank.
FilterBank copy_downsampling(const FilterBank& dst, const FilterBank& src);

// R = 1/d_first + 2 sum_interior 1/d_k + 1/d_last for a real-signal bank
// (the interior sub-bands are complex-valued); plain sum 1/d_k otherwise.
double redundancy(const FilterBank& fb);

// FIR gammatone bank: impulse response t^(order-1) exp(2 pi t (i c - l))
// sampled at sample_rate, truncated to ir_length taps, energy-normalized,
// converted to length-L DFT responses. Decay l = (beta / bw_divisor) *
// aud_bandwidth(erb, center). Centers are taken as given (typically from an
// audlet bank so both banks share geometry).
FilterBank gammatone_filters(double sample_rate, long signal_length,
                             const std::vector<double>& centers_hz,
                             double beta, int order, long ir_length,
                             double bw_divisor);

// Rounded-exponential bank: (1-r)(1 + p g) exp(-p g) + r with g =
// |f - c| / c, p tuned by bisection until the measured equivalent
// rectangular width of the sampled response equals
// aud_bandwidth(erb, center)/bw_divisor. The DC channel (c = 0) substitutes
// a prototype bump of the same shape.
FilterBank roex_filters(double sample_rate, long signal_length,
                        const std::vector<double>& centers_hz, double r,
                        double bw_divisor);

// Conjugated responses: synthesizing with this bank applies the
// time-reversed conjugate filters. When normalize is set, responses are
// scaled by 1/median(H0) so the round trip has unit gain at the typical
// passband level; the median ignores the narrow response artifacts near
// DC and Nyquist.
FilterBank matched_synthesis_bank(const FilterBank& fb, bool normalize);

// SHA-256 over the canonical geometry (sample rate, length, per-channel
// center/bandwidth/downsampling). Banks with identical geometry (e.g. a bank
// and its dual) share the fingerprint.
std::array<std::uint8_t, 32> bank_fingerprint(const FilterBank& fb);
std::string fingerprint_hex(const std::array<std::uint8_t, 32>& fp);

}  // namespace audlet
