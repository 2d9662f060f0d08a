#include "audlet/frame.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <random>

#include "audlet/errors.hpp"
#include "audlet/fft.hpp"

namespace audlet {
namespace {

constexpr double kPi = 3.14159265358979323846;

struct ExtChannel {
  Channel ch;
  int orig = 0;
  bool mirrored = false;
};

Channel mirror_channel(const Channel& src, long L) {
  Channel m = src;
  const long last = src.start_bin + src.response.size() - 1;
  m.start_bin = ((L - last) % L + L) % L;
  m.response = src.response.reverse().conjugate();
  return m;
}

// Two-sided channel set: a real-signal bank gains mirror images of its
// interior channels, which is exactly the system the synthesis convention
// (double interior weights, take the real part) applies.
std::vector<ExtChannel> extended_channels(const FilterBank& fb) {
  std::vector<ExtChannel> ext;
  const long K = fb.size();
  for (long k = 0; k < K; ++k) {
    ext.push_back({fb.channels[k], static_cast<int>(k), false});
    if (fb.real_signal && k > 0 && k + 1 < K)
      ext.push_back({mirror_channel(fb.channels[k], fb.signal_length),
                     static_cast<int>(k), true});
  }
  return ext;
}

long lcm_capped(const FilterBank& fb, long cap, const char* what) {
  long l = 1;
  for (const Channel& ch : fb.channels) {
    l = std::lcm(l, static_cast<long>(ch.down));
    if (l > cap)
      throw capacity_error(std::string(what) + " exceeds the cap " +
                           std::to_string(cap));
  }
  return l;
}

Eigen::VectorXd s_apply(const Eigen::VectorXd& x, const FilterBank& fb) {
  const Eigen::VectorXcd X = fft_forward(x);
  const std::vector<Eigen::VectorXcd> bands = detail::analyze_bands_fd(X, fb);
  return fft_inverse(detail::accumulate_fd(bands, fb, true)).real();
}

struct CoreReport {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<double> history;
};

// Preconditioned conjugate gradient on real vectors. precond may be empty.
Eigen::VectorXd cg_core(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& precond,
    const Eigen::VectorXd& b, double tol, int max_iter, CoreReport& rep) {
  const double bnorm = b.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  rep = CoreReport{};
  if (bnorm == 0.0) {
    rep.converged = true;
    return x;
  }
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = precond ? precond(r) : r;
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd sp = apply(p);
    const double psp = p.dot(sp);
    if (!(psp > 0.0)) break;  // lost positive definiteness numerically
    const double alpha = rz / psp;
    x += alpha * p;
    r -= alpha * sp;
    rep.iterations = it + 1;
    rep.residual = r.norm() / bnorm;
    rep.history.push_back(rep.residual);
    if (rep.residual <= tol) {
      rep.converged = true;
      return x;
    }
    z = precond ? precond(r) : r;
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return x;
}

}  // namespace

std::complex<double> UniformChannel::at(long bin, long L) const {
  long idx = (bin - start_bin) % L;
  if (idx < 0) idx += L;
  if (idx < response.size()) return response[idx];
  return {0.0, 0.0};
}

FrameDiagnostics diagnostics(const FilterBank& fb, int bound_iters) {
  const long L = fb.signal_length;
  FrameDiagnostics d;
  d.H0 = filterbank_response(fb);
  d.redundancy = redundancy(fb);
  d.D = 1;
  for (const Channel& ch : fb.channels)
    d.D = std::lcm(d.D, static_cast<long>(ch.down));
  d.q.reserve(fb.channels.size());
  for (const Channel& ch : fb.channels) d.q.push_back(d.D / ch.down);

  bool supports_ok = true;
  for (const Channel& ch : fb.channels)
    if (ch.response.size() * ch.down > L) supports_ok = false;
  const double h0min = d.H0.minCoeff();
  const double h0max = d.H0.maxCoeff();
  d.painless = supports_ok && h0min > 0.0;

  // Alias terms of the two-sided system, visited sparsely: channel c only
  // contributes to offsets n that are multiples of q_c = D/d_c.
  const std::vector<ExtChannel> ext = extended_channels(fb);
  const long lambda = L / d.D;
  d.alias_norms = Eigen::VectorXd::Zero(std::max<long>(d.D - 1, 0));
  Eigen::VectorXd sumabs = Eigen::VectorXd::Zero(L);
  if (d.D > 1) {
    Eigen::VectorXcd scratch = Eigen::VectorXcd::Zero(L);
    std::vector<long> touched;
    for (long n = 1; n < d.D; ++n) {
      touched.clear();
      for (const ExtChannel& e : ext) {
        const long qc = d.D / e.ch.down;
        if (n % qc != 0) continue;
        const long off = n * lambda;
        const long len = e.ch.response.size();
        for (long i = 0; i < len; ++i) {
          const long j = (e.ch.start_bin + i) % L;
          const std::complex<double> v =
              std::conj(e.ch.response[i]) * e.ch.at(j + off, L);
          if (v == std::complex<double>(0.0, 0.0)) continue;
          if (scratch[j] == std::complex<double>(0.0, 0.0))
            touched.push_back(j);
          scratch[j] += v / static_cast<double>(e.ch.down);
        }
      }
      double mx = 0.0;
      for (long j : touched) {
        const double a = std::abs(scratch[j]);
        mx = std::max(mx, a);
        sumabs[j] += a;
        scratch[j] = 0.0;
      }
      d.alias_norms[n - 1] = mx;
    }
  }
  d.A0 = (d.H0 - sumabs).minCoeff();
  d.B0 = (d.H0 + sumabs).maxCoeff();
  d.diag_dominant = d.A0 > 0.0;

  if (d.painless) {
    d.A = h0min;
    d.B = h0max;
    d.a_converged = d.b_converged = true;
    return d;
  }
  if (bound_iters <= 0) {
    d.A = d.A0;
    d.B = d.B0;
    d.a_converged = d.b_converged = false;
    return d;
  }

  const auto apply = [&](const Eigen::VectorXd& v) { return s_apply(v, fb); };
  std::mt19937_64 gen(0x0a0d1e7);
  std::normal_distribution<double> dist;
  Eigen::VectorXd u(L);
  for (long i = 0; i < L; ++i) u[i] = dist(gen);
  u.normalize();

  // Largest eigenvalue of S by power iteration.
  double lam = 0.0, lam_prev = -1.0;
  d.b_converged = false;
  for (int it = 0; it < bound_iters; ++it) {
    const Eigen::VectorXd v = apply(u);
    lam = u.dot(v);
    const double nv = v.norm();
    if (!(nv > 0.0)) break;
    u = v / nv;
    if (std::abs(lam - lam_prev) <= 1e-9 * std::max(std::abs(lam), 1e-300)) {
      d.b_converged = true;
      break;
    }
    lam_prev = lam;
  }
  d.B = lam;

  // Smallest eigenvalue by inverse iteration; each step is a CG solve.
  for (long i = 0; i < L; ++i) u[i] = dist(gen);
  u.normalize();
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> precond;
  if (h0min > 0.0) {
    const Eigen::VectorXd h0 = d.H0;
    precond = [h0](const Eigen::VectorXd& r) {
      Eigen::VectorXcd R = fft_forward(r);
      R.array() /= h0.array().cast<std::complex<double>>();
      return Eigen::VectorXd(fft_inverse(R).real());
    };
  }
  double mu_prev = -1.0;
  d.a_converged = false;
  for (int it = 0; it < bound_iters; ++it) {
    CoreReport rep;
    const Eigen::VectorXd z = cg_core(apply, precond, u, 1e-8, 200, rep);
    const double nz = z.norm();
    if (!(nz > 0.0)) break;
    const double mu = u.dot(z);
    u = z / nz;
    if (std::abs(mu - mu_prev) <= 1e-9 * std::max(std::abs(mu), 1e-300)) {
      d.a_converged = true;
      break;
    }
    mu_prev = mu;
  }
  d.A = u.dot(apply(u));
  return d;
}

FilterBank painless_dual(const FilterBank& fb) {
  const long L = fb.signal_length;
  const Eigen::VectorXd h0 = filterbank_response(fb);
  bool supports_ok = true;
  for (const Channel& ch : fb.channels)
    if (ch.response.size() * ch.down > L) supports_ok = false;
  if (!supports_ok || !(h0.minCoeff() > 0.0))
    throw domain_error(
        "bank is not painless (band-limitation or coverage fails); "
        "reconstruct with cg_synthesize instead");

  FilterBank dual = fb;
  for (Channel& ch : dual.channels) {
    const long len = ch.response.size();
    for (long i = 0; i < len; ++i)
      ch.response[i] /= h0[(ch.start_bin + i) % L];
  }
  return dual;
}

UniformBank to_uniform(const FilterBank& fb, long d_cap, long q_cap) {
  const long L = fb.signal_length;
  const long D =
      lcm_capped(fb, d_cap, "common downsampling factor D");

  const std::vector<ExtChannel> ext = extended_channels(fb);
  long total = 0;
  for (const ExtChannel& e : ext) total += D / e.ch.down;
  if (total > q_cap)
    throw capacity_error("expanded channel count " + std::to_string(total) +
                         " exceeds the cap " + std::to_string(q_cap));

  UniformBank ub;
  ub.D = D;
  ub.signal_length = L;
  ub.sample_rate = fb.sample_rate;
  ub.channels.reserve(static_cast<size_t>(total));
  for (const ExtChannel& e : ext) {
    const long q = D / e.ch.down;
    for (long l = 0; l < q; ++l) {
      UniformChannel uc;
      uc.orig_channel = e.orig;
      uc.mirrored = e.mirrored;
      uc.delay = static_cast<int>(l);
      uc.start_bin = e.ch.start_bin;
      const long len = e.ch.response.size();
      uc.response.resize(len);
      const double step =
          -2.0 * kPi * static_cast<double>(l * e.ch.down) / L;
      for (long i = 0; i < len; ++i) {
        const long j = (e.ch.start_bin + i) % L;
        uc.response[i] = e.ch.response[i] * std::polar(1.0, step * j);
      }
      ub.channels.push_back(std::move(uc));
    }
  }
  return ub;
}

Coefficients analyze_uniform(const Signal& x, const UniformBank& ub,
                             const FilterBank& fb) {
  const long L = ub.signal_length;
  if (x.samples.size() != L)
    throw domain_error("signal length does not match the bank");
  const Eigen::VectorXcd X = fft_forward(x.samples);
  const long D = ub.D;
  const long n_out = L / D;

  Coefficients c;
  c.signal_length = L;
  c.sample_rate = ub.sample_rate;
  c.fingerprint = bank_fingerprint(fb);
  c.bands.resize(fb.channels.size());
  c.down.resize(fb.channels.size());
  for (size_t k = 0; k < fb.channels.size(); ++k) {
    c.down[k] = fb.channels[k].down;
    c.bands[k].setZero(L / fb.channels[k].down);
  }

  for (const UniformChannel& uc : ub.channels) {
    if (uc.mirrored) continue;
    const int k = uc.orig_channel;
    const long dk = fb.channels[k].down;
    const long Mk = L / dk;
    const long qk = D / dk;
    Eigen::VectorXcd Y = Eigen::VectorXcd::Zero(n_out);
    const long len = uc.response.size();
    for (long i = 0; i < len; ++i) {
      const long j = (uc.start_bin + i) % L;
      Y[j % n_out] += uc.response[i] * X[j];
    }
    Y /= static_cast<double>(D);
    const Eigen::VectorXcd y = fft_inverse(Y);
    // y_k^{(l)}[n] = y_k[n q_k - l]
    for (long n = 0; n < n_out; ++n) {
      long idx = (n * qk - uc.delay) % Mk;
      if (idx < 0) idx += Mk;
      c.bands[k][idx] = y[n];
    }
  }
  return c;
}

UniformDualResult uniform_dual(const UniformBank& ub, const FilterBank& fb) {
  const long L = ub.signal_length;
  const long D = ub.D;
  const long lambda = L / D;
  const long N = static_cast<long>(ub.channels.size());

  UniformDualResult res;
  res.uniform.D = D;
  res.uniform.signal_length = L;
  res.uniform.sample_rate = ub.sample_rate;
  res.uniform.channels.resize(static_cast<size_t>(N));
  for (long c = 0; c < N; ++c) {
    UniformChannel& uc = res.uniform.channels[static_cast<size_t>(c)];
    uc.orig_channel = ub.channels[static_cast<size_t>(c)].orig_channel;
    uc.mirrored = ub.channels[static_cast<size_t>(c)].mirrored;
    uc.delay = ub.channels[static_cast<size_t>(c)].delay;
    uc.start_bin = 0;
    uc.response.setZero(L);
  }

  // One decomposition per residue class solves the reconstruction
  // conditions for all D bins of the class: the alias matrix of bin
  // j0 + s*lambda is a cyclic row shift of the class matrix, so the s-th
  // bin uses right-hand side D e_s.
  Eigen::MatrixXcd A(D, N);
  const Eigen::MatrixXcd rhs =
      static_cast<double>(D) * Eigen::MatrixXcd::Identity(D, D);
  for (long j0 = 0; j0 < lambda; ++j0) {
    for (long n = 0; n < D; ++n) {
      const long bin = (j0 + n * lambda) % L;
      for (long c = 0; c < N; ++c)
        A(n, c) = ub.channels[static_cast<size_t>(c)].at(bin, L);
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(A);
    if (cod.rank() < D)
      throw frame_error(
          "alias system is rank deficient near " +
          std::to_string(static_cast<double>(j0) * ub.sample_rate /
                         static_cast<double>(L)) +
          " Hz; the bank does not form a frame on this grid");
    const Eigen::MatrixXcd G = cod.solve(rhs);  // N x D, min-norm columns
    for (long s = 0; s < D; ++s) {
      const long bin = (j0 + s * lambda) % L;
      for (long c = 0; c < N; ++c)
        res.uniform.channels[static_cast<size_t>(c)].response[bin] = G(c, s);
    }
  }

  // Delay-compensate each expanded channel back to its source filter; all
  // delays of one source must agree for the canonical dual.
  res.bank = fb;
  for (Channel& ch : res.bank.channels) {
    ch.start_bin = 0;
    ch.response.setZero(L);
  }
  std::vector<double> group_count(fb.channels.size(), 0.0);
  std::vector<Eigen::VectorXcd> group_sum(
      fb.channels.size(), Eigen::VectorXcd::Zero(L));
  std::vector<Eigen::VectorXd> group_max(
      fb.channels.size(), Eigen::VectorXd::Zero(L));

  std::vector<Eigen::VectorXcd> dedelayed(static_cast<size_t>(N));
  for (long c = 0; c < N; ++c) {
    const UniformChannel& uc = res.uniform.channels[static_cast<size_t>(c)];
    if (uc.mirrored) continue;
    const int k = uc.orig_channel;
    const long dk = fb.channels[static_cast<size_t>(k)].down;
    // The solved copies carry the synthesis-side modulation, which is the
    // conjugate of the analysis-side one; de-delaying therefore reuses the
    // analysis phase step.
    const double step = -2.0 * kPi * static_cast<double>(uc.delay * dk) / L;
    Eigen::VectorXcd g(L);
    for (long j = 0; j < L; ++j)
      g[j] = uc.response[j] * std::polar(1.0, step * j);
    group_sum[static_cast<size_t>(k)] += g;
    group_count[static_cast<size_t>(k)] += 1.0;
    dedelayed[static_cast<size_t>(c)] = std::move(g);
  }
  double worst = 0.0;
  double scale = 0.0;
  for (size_t k = 0; k < fb.channels.size(); ++k) {
    if (group_count[k] == 0.0) continue;
    res.bank.channels[k].response = group_sum[k] / group_count[k];
    scale = std::max(scale,
                     res.bank.channels[k].response.cwiseAbs().maxCoeff());
  }
  for (long c = 0; c < N; ++c) {
    const UniformChannel& uc = res.uniform.channels[static_cast<size_t>(c)];
    if (uc.mirrored) continue;
    const size_t k = static_cast<size_t>(uc.orig_channel);
    worst = std::max(
        worst,
        (dedelayed[static_cast<size_t>(c)] - res.bank.channels[k].response)
            .cwiseAbs()
            .maxCoeff());
  }
  res.back_map_spread = scale > 0.0 ? worst / scale : 0.0;
  return res;
}

double pr_residual(const FilterBank& fb_ana, const FilterBank& fb_syn) {
  const long L = fb_ana.signal_length;
  if (fb_syn.signal_length != L ||
      fb_syn.channels.size() != fb_ana.channels.size())
    throw domain_error("analysis and synthesis banks have different geometry");
  for (size_t k = 0; k < fb_ana.channels.size(); ++k)
    if (fb_ana.channels[k].down != fb_syn.channels[k].down)
      throw domain_error("analysis and synthesis banks have different geometry");

  const std::vector<ExtChannel> ana = extended_channels(fb_ana);
  const std::vector<ExtChannel> syn = extended_channels(fb_syn);
  long D = 1;
  for (const ExtChannel& e : ana) D = std::lcm(D, static_cast<long>(e.ch.down));
  const long lambda = L / D;

  Eigen::VectorXcd scratch = Eigen::VectorXcd::Zero(L);
  std::vector<char> hit(static_cast<size_t>(L), 0);
  std::vector<long> touched;
  double worst = 0.0;
  for (long n = 0; n < D; ++n) {
    touched.clear();
    for (size_t e = 0; e < ana.size(); ++e) {
      const long qc = D / ana[e].ch.down;
      if (n % qc != 0) continue;
      const long off = n * lambda;
      const Channel& g = syn[e].ch;
      const long len = g.response.size();
      for (long i = 0; i < len; ++i) {
        const long j = (g.start_bin + i) % L;
        if (!hit[static_cast<size_t>(j)]) {
          hit[static_cast<size_t>(j)] = 1;
          touched.push_back(j);
        }
        scratch[j] += static_cast<double>(qc) * g.response[i] *
                      ana[e].ch.at(j + off, L);
      }
    }
    const std::complex<double> want(n == 0 ? static_cast<double>(D) : 0.0,
                                    0.0);
    if (n == 0 && static_cast<long>(touched.size()) < L)
      worst = std::max(worst, static_cast<double>(D));
    for (long j : touched) {
      worst = std::max(worst, std::abs(scratch[j] - want));
      scratch[j] = 0.0;
      hit[static_cast<size_t>(j)] = 0;
    }
  }
  return worst / static_cast<double>(D);
}

Signal apply_frame_operator(const Signal& x, const FilterBank& fb) {
  if (x.samples.size() != fb.signal_length)
    throw domain_error("signal length does not match the bank");
  Signal out;
  out.sample_rate = fb.sample_rate;
  out.samples = s_apply(x.samples, fb);
  return out;
}

CgResult cg_synthesize(const Coefficients& c, const FilterBank& fb,
                       double tol, int max_iter, bool precondition) {
  if (!(tol > 0.0)) throw domain_error("tolerance must be positive");
  if (max_iter < 1) throw domain_error("iteration cap must be positive");
  detail::check_compatible(c, fb);

  std::vector<Eigen::VectorXcd> bands_fd;
  bands_fd.reserve(c.bands.size());
  for (const Eigen::VectorXcd& y : c.bands) bands_fd.push_back(fft_forward(y));
  const Eigen::VectorXd b =
      fft_inverse(detail::accumulate_fd(bands_fd, fb, true)).real();

  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> precond;
  if (precondition) {
    Eigen::VectorXd h0 = filterbank_response(fb);
    if (!(h0.minCoeff() > 0.0))
      throw numerical_error(
          "bank response has zeros; run without preconditioning");
    precond = [h0 = std::move(h0)](const Eigen::VectorXd& r) {
      Eigen::VectorXcd R = fft_forward(r);
      R.array() /= h0.array().cast<std::complex<double>>();
      return Eigen::VectorXd(fft_inverse(R).real());
    };
  }

  CoreReport rep;
  CgResult res;
  res.x.sample_rate = fb.sample_rate;
  res.x.samples = cg_core(
      [&](const Eigen::VectorXd& v) { return s_apply(v, fb); }, precond, b,
      tol, max_iter, rep);
  res.report.iterations = rep.iterations;
  res.report.residual = rep.residual;
  res.report.converged = rep.converged;
  res.report.history = std::move(rep.history);
  return res;
}

}  // namespace audlet
