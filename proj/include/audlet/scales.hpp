#pragma once

#include <string>
#include <vector>

namespace audlet {

enum class Scale { erb, bark, mel };

Scale scale_from_string(const std::string& name);
std::string to_string(Scale s);

// Hz -> auditory units. Strictly increasing on [0, inf), maps 0 to 0.
double aud_forward(Scale s, double freq_hz);

// Auditory units -> Hz. erb and mel invert in closed form; bark is inverted
// by bracketed bisection to 1e-10 Hz absolute.
double aud_inverse(Scale s, double aud);

// Critical bandwidth at freq_hz, in Hz. The mel scale has no published
// bandwidth formula; the unit-step convention
//   inverse(forward(f) + 1) - inverse(max(forward(f) - 1, 0))
// is used (filter banks built on a mel grid use grid differences instead,
// see audlet_filters).
double aud_bandwidth(Scale s, double freq_hz);

// Center frequencies spaced exactly 1/density apart on the scale, starting
// at fmin and not exceeding fmax. A degenerate range yields {fmin}.
std::vector<double> aud_space(Scale s, double fmin_hz, double fmax_hz,
                              double density);

}  // namespace audlet
