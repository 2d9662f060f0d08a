#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <string>

#include "audlet/design.hpp"
#include "audlet/errors.hpp"
#include "audlet/frame.hpp"
#include "audlet/metrics.hpp"
#include "audlet/transform.hpp"

using namespace audlet;

namespace {

Signal random_signal(double fs, long len, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Signal x;
  x.sample_rate = fs;
  x.samples.resize(len);
  for (long n = 0; n < len; ++n) x.samples[n] = dist(gen);
  return x;
}

FilterBank erb_bank(long L, double redfac) {
  return select_downsampling(
             audlet_filters(Scale::erb, 16000.0, L, 0.0, 8000.0, 1.0,
                            PrototypeWindow::hann(), 1.0),
             redfac)
      .bank;
}

// Two-sided toy channel covering the full grid.
Channel full_channel(long L, double value, int down) {
  Channel ch;
  ch.down = down;
  ch.start_bin = 0;
  ch.response = Eigen::VectorXcd::Constant(L, value);
  return ch;
}

FilterBank tight_bank(long L, double value) {
  FilterBank fb;
  fb.sample_rate = 16000.0;
  fb.signal_length = L;
  fb.real_signal = false;
  fb.channels.push_back(full_channel(L, value, 1));
  return fb;
}

}  // namespace

TEST_CASE("diagnostics reports painlessness and exact bounds") {
  const FilterBank painless = erb_bank(4000, 1.0);
  const FrameDiagnostics d1 = diagnostics(painless);
  CHECK(d1.painless);
  CHECK(d1.A > 0.0);
  CHECK(d1.A <= d1.B);
  CHECK(d1.A == doctest::Approx(d1.H0.minCoeff()));
  CHECK(d1.B == doctest::Approx(d1.H0.maxCoeff()));
  for (long n = 0; n < d1.alias_norms.size(); ++n)
    CHECK(d1.alias_norms[n] <= 1e-12 * d1.H0.maxCoeff());

  const FrameDiagnostics d2 = diagnostics(erb_bank(4000, 0.38));
  CHECK(!d2.painless);
  CHECK(d2.alias_norms.maxCoeff() > 1e-6);
}

TEST_CASE("single full-support channel gives its own magnitude bounds") {
  FilterBank fb;
  fb.sample_rate = 16000.0;
  fb.signal_length = 128;
  fb.real_signal = false;
  Channel ch = full_channel(128, 0.0, 1);
  for (long j = 0; j < 128; ++j)
    ch.response[j] = 1.0 + 0.5 * std::sin(2.0 * M_PI * j / 128.0);
  fb.channels.push_back(ch);

  const FrameDiagnostics d = diagnostics(fb);
  CHECK(d.painless);
  CHECK(d.A == doctest::Approx(0.25).epsilon(1e-9));   // min |H|^2
  CHECK(d.B == doctest::Approx(2.25).epsilon(1e-9));   // max |H|^2
}

TEST_CASE("painless dual inverts and composes to the identity") {
  const FilterBank fb = erb_bank(4000, 1.0);
  const FilterBank dual = painless_dual(fb);

  const Signal x = random_signal(16000.0, 4000, 21);
  CHECK(rel_error(x, synthesize(analyze(x, fb), dual)) <= 1e-10);

  // dual of the dual recovers the original filters
  const FilterBank back = painless_dual(dual);
  for (long k = 0; k < fb.size(); ++k) {
    const auto& a = fb.channels[k].response;
    const auto& b = back.channels[k].response;
    CHECK((a - b).norm() <= 1e-8 * a.norm());
  }
}

TEST_CASE("tight bank dual divides by the constant response") {
  const FilterBank fb = tight_bank(64, 2.0);
  const FilterBank dual = painless_dual(fb);
  // H0 = 4 everywhere, so G = H / 4
  CHECK((dual.channels[0].response -
         fb.channels[0].response / 4.0).norm() <= 1e-12);
}

TEST_CASE("painless dual refuses an aliased bank and names the way out") {
  const FilterBank fb = erb_bank(4000, 0.38);
  bool threw = false;
  try {
    painless_dual(fb);
  } catch (const domain_error& e) {
    threw = true;
    CHECK(std::string(e.what()).find("cg_synthesize") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("uniform expansion counts delayed channels") {
  FilterBank fb;
  fb.sample_rate = 16000.0;
  fb.signal_length = 12;
  fb.real_signal = false;
  fb.channels.push_back(full_channel(12, 1.0, 2));
  fb.channels.push_back(full_channel(12, 0.5, 3));
  fb.channels[1].center_hz = 100.0;

  const UniformBank ub = to_uniform(fb);
  CHECK(ub.D == 6);
  CHECK(ub.channels.size() == 5);  // q = 3 + 2
  for (const UniformChannel& uc : ub.channels) {
    CHECK(uc.delay >= 0);
    CHECK(uc.delay < (uc.orig_channel == 0 ? 3 : 2));
  }

  // equal factors collapse to the original channel set
  FilterBank eq = fb;
  eq.channels[1].down = 2;
  const UniformBank ue = to_uniform(eq);
  CHECK(ue.D == 2);
  CHECK(ue.channels.size() == 2);
  for (const UniformChannel& uc : ue.channels) CHECK(uc.delay == 0);

  CHECK_THROWS_AS(to_uniform(fb, 4, 4096), capacity_error);
  CHECK_THROWS_AS(to_uniform(fb, 8192, 3), capacity_error);
}

TEST_CASE("uniform-route analysis equals direct analysis") {
  const FilterBank fb = erb_bank(1024, 1.0);
  const UniformBank ub = to_uniform(fb);
  const Signal x = random_signal(16000.0, 1024, 33);
  const Coefficients direct = analyze(x, fb);
  const Coefficients viauni = analyze_uniform(x, ub, fb);
  REQUIRE(direct.bands.size() == viauni.bands.size());
  for (size_t k = 0; k < direct.bands.size(); ++k)
    CHECK((direct.bands[k] - viauni.bands[k]).norm() <=
          1e-10 * (1.0 + direct.bands[k].norm()));
}

TEST_CASE("uniform dual matches the painless dual on painless banks") {
  const FilterBank fb = erb_bank(1024, 1.0);
  const UniformDualResult ud = uniform_dual(to_uniform(fb), fb);
  CHECK(ud.back_map_spread <= 1e-8);
  CHECK(pr_residual(fb, ud.bank) <= 1e-10);

  const FilterBank pd = painless_dual(fb);
  const Signal x = random_signal(16000.0, 1024, 55);
  const Coefficients c = analyze(x, fb);
  const Signal via_pd = synthesize(c, pd);
  const Signal via_ud = synthesize(c, ud.bank);
  CHECK((via_pd.samples - via_ud.samples).norm() <=
        1e-8 * via_pd.samples.norm());
  CHECK(rel_error(x, via_ud) <= 1e-10);
}

TEST_CASE("identity bank is self-dual through the uniform route") {
  const FilterBank fb = tight_bank(16, 1.0);
  const UniformDualResult ud = uniform_dual(to_uniform(fb), fb);
  CHECK((ud.bank.channels[0].response -
         Eigen::VectorXcd::Ones(16)).norm() <= 1e-10);
  CHECK(pr_residual(fb, ud.bank) <= 1e-12);
}

TEST_CASE("rank-deficient bin groups are reported as frame failures") {
  // single narrow channel with d = 2 leaves most residue classes empty
  FilterBank fb;
  fb.sample_rate = 16000.0;
  fb.signal_length = 16;
  fb.real_signal = false;
  Channel ch;
  ch.down = 2;
  ch.start_bin = 0;
  ch.response = Eigen::VectorXcd::Ones(3);
  fb.channels.push_back(ch);
  CHECK_THROWS_AS(uniform_dual(to_uniform(fb), fb), frame_error);
}

TEST_CASE("reconstruction residual separates exact from matched pairs") {
  const FilterBank fb = erb_bank(4000, 1.0);
  CHECK(pr_residual(fb, painless_dual(fb)) <= 1e-10);

  FilterBank zero = fb;
  for (Channel& ch : zero.channels) ch.response.setZero();
  CHECK(pr_residual(fb, zero) == doctest::Approx(1.0));
}

TEST_CASE("matched gammatone synthesis leaves a visibly imperfect residual") {
  const double fs = 16000.0;
  const long L = 16000;
  const FilterBank ref = erb_bank(L, 1.0);
  std::vector<double> centers;
  for (const Channel& ch : ref.channels) centers.push_back(ch.center_hz);
  const FilterBank gt = copy_downsampling(
      gammatone_filters(fs, L, centers, 1.019, 4, 6000, 1.0), ref);
  const double res = pr_residual(gt, matched_synthesis_bank(gt, true));
  // Worst-bin defect; dominated by the response pile-up at Nyquist, an
  // order above the speech-weighted signal-domain error.
  CHECK(res > 0.1);
  CHECK(res < 3.0);
}

TEST_CASE("frame operator is self-adjoint and positive") {
  const FilterBank fb = erb_bank(4000, 1.0);
  const Signal x = random_signal(16000.0, 4000, 71);
  const Signal y = random_signal(16000.0, 4000, 72);
  const Signal sx = apply_frame_operator(x, fb);
  const Signal sy = apply_frame_operator(y, fb);
  const double xy = sx.samples.dot(y.samples);
  const double yx = x.samples.dot(sy.samples);
  CHECK(xy == doctest::Approx(yx).epsilon(1e-10));
  CHECK(sx.samples.dot(x.samples) >= 0.0);

  // tight bank: S is the constant response times the identity
  const FilterBank tb = tight_bank(64, 2.0);
  Signal t = random_signal(16000.0, 64, 73);
  const Signal st = apply_frame_operator(t, tb);
  CHECK((st.samples - 4.0 * t.samples).norm() <= 1e-10 * t.samples.norm());
}

TEST_CASE("conjugate gradients reconstruct where no dual exists") {
  const FilterBank fb = erb_bank(4000, 0.38);
  const Signal x = random_signal(16000.0, 4000, 81);
  const Coefficients c = analyze(x, fb);
  const CgResult r = cg_synthesize(c, fb, 1e-10, 500, true);
  CHECK(r.report.converged);
  CHECK(rel_error(x, r.x) <= 1e-8);
  CHECK(r.report.history.size() ==
        static_cast<size_t>(r.report.iterations));
}

TEST_CASE("conjugate gradients solve a tight system in one step") {
  const FilterBank fb = tight_bank(64, 2.0);
  Signal x = random_signal(16000.0, 64, 82);
  const CgResult r = cg_synthesize(analyze(x, fb), fb, 1e-10, 50, false);
  CHECK(r.report.converged);
  CHECK(r.report.iterations == 1);
  CHECK(rel_error(x, r.x) <= 1e-10);
}

TEST_CASE("iteration cap reports non-convergence without throwing") {
  const FilterBank fb = erb_bank(4000, 0.38);
  const Signal x = random_signal(16000.0, 4000, 83);
  const CgResult r = cg_synthesize(analyze(x, fb), fb, 1e-12, 2, true);
  CHECK(!r.report.converged);
  CHECK(r.report.iterations == 2);
  CHECK(r.x.samples.allFinite());
}

TEST_CASE("preconditioning cuts the iteration count at low redundancy") {
  const FilterBank fb = erb_bank(8000, 0.38);
  const Signal x = random_signal(16000.0, 8000, 84);
  const Coefficients c = analyze(x, fb);
  const CgResult pre = cg_synthesize(c, fb, 1e-8, 500, true);
  const CgResult plain = cg_synthesize(c, fb, 1e-8, 500, false);
  CHECK(pre.report.converged);
  CHECK(pre.report.iterations < plain.report.iterations);
}

TEST_CASE("conjugate gradients validate their controls") {
  const FilterBank fb = erb_bank(4000, 1.0);
  const Signal x = random_signal(16000.0, 4000, 85);
  const Coefficients c = analyze(x, fb);
  CHECK_THROWS_AS(cg_synthesize(c, fb, 0.0, 10, true), domain_error);
  CHECK_THROWS_AS(cg_synthesize(c, fb, 1e-10, 0, true), domain_error);
}
