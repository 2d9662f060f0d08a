#pragma once

#include <vector>

#include <Eigen/Dense>

#include "audlet/transform.hpp"

namespace audlet {

// Per-band real gains on the coefficient grid, values in [0, 1].
struct Mask {
  std::vector<Eigen::VectorXd> bands;
};

// Elementwise product; mask shape must match the coefficient grid.
Coefficients apply_mask(const Coefficients& c, const Mask& m);

// Complex soft threshold: shrink magnitudes by eta, keep the phase.
Coefficients soft_threshold(const Coefficients& c, double eta);

// Per-channel thresholds (one eta per band).
Coefficients soft_threshold(const Coefficients& c,
                            const std::vector<double>& etas);

// 1 where |c| >= eta, else 0.
Mask magnitude_mask(const Coefficients& c, double eta);

}  // namespace audlet
