#pragma once

#include <vector>

#include <Eigen/Dense>

#include "audlet/transform.hpp"

namespace audlet {

// Stability report for a bank used as an analysis frame. All spectral
// quantities refer to the two-sided system: interior channels of a
// real-signal bank are accounted for together with their mirror images.
struct FrameDiagnostics {
  Eigen::VectorXd H0;           // bank response on the DFT grid
  Eigen::VectorXd alias_norms;  // max_j |H_n[j]| for n = 1 .. D-1
  double A = 0.0, B = 0.0;      // frame-bound estimates
  bool a_converged = false, b_converged = false;
  double A0 = 0.0, B0 = 0.0;    // diagonal-dominance (Gershgorin) bounds
  bool painless = false;        // band-limited supports and min H0 > 0
  bool diag_dominant = false;   // A0 > 0
  double redundancy = 0.0;
  long D = 1;                   // lcm of the downsampling factors
  std::vector<long> q;          // D / d_k per original channel
};

// Expansion of a non-uniform bank into sum(q_k) channels with the common
// downsampling factor D: channel (k, l) is the original channel k delayed by
// l d_k samples. Mirrors of interior channels are included for real-signal
// banks so the expansion describes the full two-sided system.
struct UniformChannel {
  int orig_channel = 0;  // index into the source bank
  bool mirrored = false;
  int delay = 0;  // l in [0, q)
  long start_bin = 0;
  Eigen::VectorXcd response;

  std::complex<double> at(long bin, long L) const;
};

struct UniformBank {
  std::vector<UniformChannel> channels;
  long D = 1;
  long signal_length = 0;
  double sample_rate = 0.0;
};

// Computes the bank response, the alias terms H_n on the DFT grid, the
// painless/diagonal-dominance flags and frame-bound estimates. For painless
// banks A and B are the exact extremes of H0; otherwise they are estimated
// by power iteration (B) and inverse power iteration via CG (A), capped at
// bound_iters outer steps. bound_iters = 0 skips estimation and reports the
// Gershgorin bounds with the converged flags cleared.
FrameDiagnostics diagnostics(const FilterBank& fb, int bound_iters = 200);

// Canonical dual of a painless bank: per-bin division of each channel by
// the bank response on the channel support. Throws domain_error when the
// bank is not painless.
FilterBank painless_dual(const FilterBank& fb);

// Uniform expansion; throws capacity_error when D or the expanded channel
// count exceeds the caps.
UniformBank to_uniform(const FilterBank& fb, long d_cap = 8192,
                       long q_cap = 4096);

// Analysis through the uniform expansion, regrouped onto the original
// channel grid. Equals analyze(x, fb) up to rounding.
Coefficients analyze_uniform(const Signal& x, const UniformBank& ub,
                             const FilterBank& fb);

struct UniformDualResult {
  UniformBank uniform;    // dual uniform channels
  FilterBank bank;        // mapped-back non-uniform synthesis filters
  // Worst relative disagreement between the delay-compensated duals of the
  // same source channel; small values confirm the solution is the canonical
  // dual.
  double back_map_spread = 0.0;
};

// Per-bin minimum-norm dual of the uniform system: for every group of bins
// congruent modulo L/D, one orthogonal decomposition of the D x N alias
// matrix solves the D reconstruction conditions. Rank deficiency raises
// frame_error naming the offending frequency.
UniformDualResult uniform_dual(const UniformBank& ub, const FilterBank& fb);

// Worst-case reconstruction defect of an analysis/synthesis pair: the alias
// conditions demand sum_k q_k [q_k | n] G_k[j] H_k[j + n L/D] = D for n = 0
// and 0 otherwise; returns the largest deviation across bins and offsets,
// normalized by D.
double pr_residual(const FilterBank& fb_ana, const FilterBank& fb_syn);

// S x = synthesize(analyze(x)) with conjugated responses; self-adjoint and
// positive semidefinite on real signals.
Signal apply_frame_operator(const Signal& x, const FilterBank& fb);

struct CgReport {
  int iterations = 0;
  double residual = 0.0;  // final relative residual
  bool converged = false;
  std::vector<double> history;  // relative residual per iteration
};

struct CgResult {
  Signal x;
  CgReport report;
};

// Conjugate-gradient inversion of the frame operator: solves S x = b where
// b is the adjoint synthesis of the coefficients, optionally preconditioned
// per DFT bin by 1/H0. Non-convergence returns the best iterate with the
// converged flag cleared (never silently).
CgResult cg_synthesize(const Coefficients& c, const FilterBank& fb,
                       double tol = 1e-10, int max_iter = 500,
                       bool precondition = true);

}  // namespace audlet
