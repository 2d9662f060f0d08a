#pragma once

#include <vector>

#include "audlet/transform.hpp"

namespace audlet {

// dB value with a sentinel cap at +/-300 dB; capped reports that the true
// ratio was out of range (typically an exact reconstruction).
struct DbValue {
  double db = 0.0;
  bool capped = false;
};

constexpr double kDbCap = 300.0;

// ||est - ref|| / ||ref||.
double rel_error(const Signal& ref, const Signal& est);

// Same, minimized over circular shifts of est (located by FFT
// cross-correlation); compensates the group delay of causal FIR paths.
// *shift, when given, receives the delay of est relative to ref in
// samples: est[n] ~ ref[n - shift], positive when est lags.
double rel_error_best_shift(const Signal& ref, const Signal& est,
                            long* shift = nullptr);

// 10 log10(||ref||^2 / ||ref - est||^2), capped at +/-300 dB.
DbValue snr(const Signal& ref, const Signal& est);

// Mean of per-frame SNRs over non-overlapping frames of frame_ms
// milliseconds, each clipped to [clip_lo, clip_hi] dB; frames with zero
// reference energy are skipped and a trailing partial frame is dropped.
double segsnr(const Signal& ref, const Signal& est, double frame_ms = 32.0,
              double clip_lo = -10.0, double clip_hi = 35.0);

struct BssScores {
  DbValue sdr;  // signal to distortion
  DbValue sir;  // signal to interference
  DbValue sar;  // signal to artifact
};

// Whole-signal projection decomposition of est over span{ref_sources}:
// target = projection onto the true source, interference = remainder of the
// projection onto the full span, artifact = residual outside the span.
BssScores bss_eval(const std::vector<Signal>& ref_sources, const Signal& est,
                   int target_index);

}  // namespace audlet
