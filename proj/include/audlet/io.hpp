#pragma once

#include <string>

#include "audlet/design.hpp"
#include "audlet/processing.hpp"
#include "audlet/transform.hpp"

namespace audlet {

// WAV reader for PCM 16-bit and IEEE float32; multi-channel files keep the
// first channel (a notice goes to stderr). PCM samples map to sample/32768.
Signal read_wav(const std::string& path);

// Writes IEEE float32 WAV; write -> read round trips are bit-exact up to
// the double -> float cast on write.
void write_wav(const std::string& path, const Signal& s);

// Binary coefficient container ("AUDC"): little-endian header carrying the
// bank geometry, interleaved re/im samples (complex128 or complex64), and a
// trailing geometry fingerprint that is re-verified on load.
void save_coefficients(const std::string& path, const Coefficients& c,
                       const FilterBank& fb, bool complex128 = true);
Coefficients load_coefficients(const std::string& path);

// Mask container ("AUDM"): same geometry header, float32 gains in [0, 1].
void save_mask(const std::string& path, const Mask& m, const FilterBank& fb);
Mask load_mask(const std::string& path);

// CSV with columns freq_hz, H0_db, and one |H_k| column per channel (dB,
// floored at -300), rows covering the non-negative frequencies.
void export_response_csv(const FilterBank& fb, const std::string& path);

// CSV with a time_s column and one column per channel (header carries the
// center frequencies): 20 log10 |y_k| clipped below at floor_db, rows on the
// finest sub-band grid with sample-and-hold for coarser channels.
void export_spectrogram_csv(const Coefficients& c, const FilterBank& fb,
                            const std::string& path, double floor_db = -80.0);

// Canonical design parameters; a bank descriptor file stores these plus the
// fingerprint of the bank they regenerate.
struct BankConfig {
  Scale scale = Scale::erb;
  double sample_rate = 0.0;
  long signal_length = 0;
  double fmin_hz = 0.0;
  double fmax_hz = 0.0;
  double density = 1.0;  // channels per scale unit; used when count == 0
  long count = 0;        // requested channel count; 0 selects density mode
  std::string prototype = "hann";  // hann | gauss | roex
  double bw_divisor = 1.0;
  double redfac = 1.0;
};

// Regenerates the bank (filters + downsampling) from its parameters.
FilterBank build_bank(const BankConfig& cfg, bool* painless = nullptr);

struct LoadedBank {
  BankConfig config;
  FilterBank bank;
};

// Descriptor round trip: save writes a JSON file with the parameters and
// fingerprint; load rebuilds the bank and fails on fingerprint mismatch.
void save_bank(const std::string& path, const BankConfig& cfg);
LoadedBank load_bank(const std::string& path);

}  // namespace audlet
