#include "audlet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "audlet/errors.hpp"
#include "audlet/fft.hpp"

namespace audlet {
namespace {

void check_lengths(const Signal& a, const Signal& b) {
  if (a.samples.size() != b.samples.size())
    throw domain_error("signals have different lengths (" +
                       std::to_string(a.samples.size()) + " vs " +
                       std::to_string(b.samples.size()) + ")");
}

DbValue ratio_db(double num, double den) {
  DbValue v;
  if (den <= 0.0) {
    v.db = kDbCap;
    v.capped = true;
  } else if (num <= 0.0) {
    v.db = -kDbCap;
    v.capped = true;
  } else {
    v.db = 10.0 * std::log10(num / den);
    if (v.db > kDbCap || v.db < -kDbCap) {
      v.db = v.db > 0.0 ? kDbCap : -kDbCap;
      v.capped = true;
    }
  }
  return v;
}

}  // namespace

double rel_error(const Signal& ref, const Signal& est) {
  check_lengths(ref, est);
  const double rn = ref.samples.norm();
  if (rn == 0.0) throw domain_error("reference signal is zero");
  return (est.samples - ref.samples).norm() / rn;
}

double rel_error_best_shift(const Signal& ref, const Signal& est,
                            long* shift) {
  check_lengths(ref, est);
  const double rn = ref.samples.norm();
  if (rn == 0.0) throw domain_error("reference signal is zero");
  const long N = ref.samples.size();
  // argmax_s sum_n ref[n] est[(n+s) mod N] minimizes the shifted distance.
  const Eigen::VectorXcd corr =
      fft_inverse(fft_forward(ref.samples).conjugate().cwiseProduct(
          fft_forward(est.samples)));
  long best = 0;
  double best_val = corr[0].real();
  for (long s = 1; s < N; ++s)
    if (corr[s].real() > best_val) {
      best_val = corr[s].real();
      best = s;
    }
  Signal shifted;
  shifted.sample_rate = est.sample_rate;
  shifted.samples.resize(N);
  for (long n = 0; n < N; ++n) shifted.samples[n] = est.samples[(n + best) % N];
  if (shift) *shift = best;
  return rel_error(ref, shifted);
}

DbValue snr(const Signal& ref, const Signal& est) {
  check_lengths(ref, est);
  const double rn2 = ref.samples.squaredNorm();
  if (rn2 == 0.0) throw domain_error("reference signal is zero");
  return ratio_db(rn2, (ref.samples - est.samples).squaredNorm());
}

double segsnr(const Signal& ref, const Signal& est, double frame_ms,
              double clip_lo, double clip_hi) {
  check_lengths(ref, est);
  if (!(ref.sample_rate > 0.0)) throw domain_error("sample rate must be set");
  if (!(frame_ms > 0.0)) throw domain_error("frame length must be positive");
  const long flen =
      static_cast<long>(std::lround(frame_ms * 1e-3 * ref.sample_rate));
  if (flen < 1 || ref.samples.size() < flen)
    throw domain_error("signal is shorter than one frame");
  double sum = 0.0;
  long used = 0;
  for (long start = 0; start + flen <= ref.samples.size(); start += flen) {
    const double rn2 = ref.samples.segment(start, flen).squaredNorm();
    if (rn2 == 0.0) continue;
    const double en2 = (ref.samples.segment(start, flen) -
                        est.samples.segment(start, flen))
                           .squaredNorm();
    double db = en2 == 0.0 ? clip_hi : 10.0 * std::log10(rn2 / en2);
    sum += std::clamp(db, clip_lo, clip_hi);
    ++used;
  }
  if (used == 0) throw domain_error("reference signal is silent");
  return sum / static_cast<double>(used);
}

BssScores bss_eval(const std::vector<Signal>& ref_sources, const Signal& est,
                   int target_index) {
  const long K = static_cast<long>(ref_sources.size());
  if (K < 2) throw domain_error("need at least two reference sources");
  if (target_index < 0 || target_index >= K)
    throw domain_error("target index out of range");
  const long N = est.samples.size();
  for (const Signal& s : ref_sources) check_lengths(s, est);

  Eigen::MatrixXd R(N, K);
  for (long k = 0; k < K; ++k) R.col(k) = ref_sources[k].samples;

  const Eigen::MatrixXd gram = R.transpose() * R;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (lu.rank() < K)
    throw numerical_error(
        "reference sources are linearly dependent; the projection "
        "decomposition is not defined");

  const Eigen::VectorXd coef = lu.solve(R.transpose() * est.samples);
  const Eigen::VectorXd proj_all = R * coef;

  const Eigen::VectorXd& st = ref_sources[target_index].samples;
  const double st2 = st.squaredNorm();
  if (st2 == 0.0) throw domain_error("target reference is zero");
  const Eigen::VectorXd target = (st.dot(est.samples) / st2) * st;

  const Eigen::VectorXd e_interf = proj_all - target;
  const Eigen::VectorXd e_artif = est.samples - proj_all;

  BssScores s;
  s.sdr = ratio_db(target.squaredNorm(), (e_interf + e_artif).squaredNorm());
  s.sir = ratio_db(target.squaredNorm(), e_interf.squaredNorm());
  s.sar =
      ratio_db((target + e_interf).squaredNorm(), e_artif.squaredNorm());
  return s;
}

}  // namespace audlet
