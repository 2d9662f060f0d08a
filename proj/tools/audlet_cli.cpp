#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "audlet/design.hpp"
#include "audlet/errors.hpp"
#include "audlet/frame.hpp"
#include "audlet/io.hpp"
#include "audlet/metrics.hpp"
#include "audlet/processing.hpp"
#include "audlet/transform.hpp"

namespace {

using namespace audlet;

struct MethodOpts {
  std::string method = "painless";
  double tol = 1e-10;
  int maxit = 500;
  bool noprecond = false;
};

void add_method_opts(CLI::App* cmd, MethodOpts& mo) {
  cmd->add_option("--method", mo.method, "reconstruction route")
      ->check(CLI::IsMember({"painless", "uniform", "cg"}))
      ->capture_default_str();
  cmd->add_option("--tol", mo.tol, "cg: relative residual target")
      ->capture_default_str();
  cmd->add_option("--maxit", mo.maxit, "cg: iteration cap")
      ->capture_default_str();
  cmd->add_flag("--noprecond", mo.noprecond, "cg: disable preconditioning");
}

Signal synthesize_with(const Coefficients& c, const FilterBank& fb,
                       const MethodOpts& mo) {
  if (mo.method == "painless") return synthesize(c, painless_dual(fb));
  if (mo.method == "uniform") {
    const UniformBank ub = to_uniform(fb);
    return synthesize(c, uniform_dual(ub, fb).bank);
  }
  CgResult res = cg_synthesize(c, fb, mo.tol, mo.maxit, !mo.noprecond);
  std::fprintf(stderr, "cg: %d iterations, relative residual %.3e\n",
               res.report.iterations, res.report.residual);
  if (!res.report.converged)
    throw numerical_error("cg did not reach tolerance " +
                          std::to_string(mo.tol) + " within " +
                          std::to_string(mo.maxit) + " iterations");
  return res.x;
}

Signal read_signal_for(const std::string& path, const FilterBank& fb) {
  Signal x = read_wav(path);
  if (x.samples.size() != fb.signal_length)
    throw domain_error(path + ": expected " +
                       std::to_string(fb.signal_length) + " samples, got " +
                       std::to_string(x.samples.size()));
  if (x.sample_rate != fb.sample_rate)
    throw domain_error(path + ": sample rate does not match the bank");
  return x;
}

void verify_fingerprint(const Coefficients& c, const FilterBank& fb) {
  if (c.fingerprint != bank_fingerprint(fb))
    throw format_error(
        "coefficients were produced by a bank with different geometry");
}

Signal random_signal(double fs, long len, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Signal x;
  x.sample_rate = fs;
  x.samples.resize(len);
  for (long n = 0; n < len; ++n) x.samples[n] = dist(gen);
  return x;
}

// Round-trip error through a matched (time-reversed) synthesis bank.
double matched_roundtrip_error(const Signal& x, const FilterBank& fb) {
  const FilterBank syn = matched_synthesis_bank(fb, true);
  return rel_error(x, synthesize(analyze(x, fb), syn));
}

int run_design(const BankConfig& cfg, const std::string& out) {
  bool painless = false;
  const FilterBank fb = build_bank(cfg, &painless);
  save_bank(out, cfg);
  std::printf("channels: %ld\n", fb.size());
  std::printf("redundancy: %.4f\n", redundancy(fb));
  std::printf("painless: %s\n", painless ? "yes" : "no");
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int run_compare(double fs, long len, double v, double bwdiv,
                const std::vector<double>& redfacs, const std::string& in,
                unsigned seed) {
  Signal x;
  if (!in.empty()) {
    x = read_wav(in);
    fs = x.sample_rate;
    len = x.samples.size();
  } else {
    // Reconstruction through a fixed-gain time-reversed bank depends on the
    // input spectrum; a speech-like spectrum matches the intended use.
    x = speech_shaped_noise(fs, len, seed);
  }

  std::vector<double> r_vals, err_erb, err_roex, err_gt;
  for (double redfac : redfacs) {
    FilterBank base = audlet_filters(Scale::erb, fs, len, 0.0, fs / 2.0, v,
                                     PrototypeWindow::hann(), bwdiv);
    DownsamplingResult ds = select_downsampling(base, redfac);
    const FilterBank& erb_bank = ds.bank;
    r_vals.push_back(redundancy(erb_bank));

    double e;
    if (ds.painless_possible) {
      e = rel_error(x, synthesize(analyze(x, erb_bank),
                                  painless_dual(erb_bank)));
    } else {
      CgResult res = cg_synthesize(analyze(x, erb_bank), erb_bank, 1e-10,
                                   500, true);
      e = rel_error(x, res.x);
    }
    err_erb.push_back(e);

    std::vector<double> centers;
    for (const Channel& ch : erb_bank.channels)
      centers.push_back(ch.center_hz);

    FilterBank roex = copy_downsampling(
        roex_filters(fs, len, centers, 0.0, bwdiv), erb_bank);
    err_roex.push_back(matched_roundtrip_error(x, roex));

    FilterBank gt = copy_downsampling(
        gammatone_filters(fs, len, centers, 1.019, 4,
                          std::min<long>(6000, len), bwdiv),
        erb_bank);
    err_gt.push_back(matched_roundtrip_error(x, gt));
  }

  std::printf("%-12s", "bank");
  for (size_t i = 0; i < redfacs.size(); ++i)
    std::printf("  redfac=%-5.2f (R=%5.2f)", redfacs[i], r_vals[i]);
  std::printf("\n");
  const auto row = [&](const char* name, const std::vector<double>& e) {
    std::printf("%-12s", name);
    for (double v2 : e) std::printf("  %-21.3g", v2);
    std::printf("\n");
  };
  row("erblet", err_erb);
  row("roex", err_roex);
  row("gammatone", err_gt);
  return 0;
}

void print_db(const char* name, const DbValue& v) {
  std::printf("%-6s %9.2f dB%s\n", name, v.db, v.capped ? " (capped)" : "");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "audlet: invertible filter banks on auditory frequency scales"};
  app.require_subcommand(1);
  app.footer(
      "exit codes: 0 success, 2 usage error, 3 file format error, "
      "4 numerical failure");

  // design
  BankConfig cfg;
  std::string scale_str = "erb", bank_out;
  double opt_v = 0.0;
  cfg.fmax_hz = -1.0;
  auto* design = app.add_subcommand(
      "design", "design a bank and write its descriptor");
  design->add_option("--scale", scale_str, "frequency scale")
      ->check(CLI::IsMember({"erb", "bark", "mel"}))
      ->capture_default_str();
  design->add_option("--fs", cfg.sample_rate, "sample rate in Hz")
      ->required();
  design->add_option("--len", cfg.signal_length, "signal length in samples")
      ->required();
  design->add_option("--fmin", cfg.fmin_hz, "lowest center in Hz")
      ->capture_default_str();
  design->add_option("--fmax", cfg.fmax_hz,
                     "highest center in Hz (default: fs/2)");
  auto* ov = design->add_option("--v", opt_v, "channels per scale unit");
  auto* ok = design->add_option("--k", cfg.count, "total channel count");
  ov->excludes(ok);
  design->add_option("--proto", cfg.prototype, "prototype window")
      ->check(CLI::IsMember({"hann", "gauss", "roex"}))
      ->capture_default_str();
  design->add_option("--bwdiv", cfg.bw_divisor, "bandwidth divisor")
      ->capture_default_str();
  design->add_option("--redfac", cfg.redfac, "redundancy multiplier")
      ->capture_default_str();
  design->add_option("--out", bank_out, "descriptor path")->required();
  design->callback([&] {
    cfg.scale = scale_from_string(scale_str);
    if (cfg.fmax_hz < 0.0) cfg.fmax_hz = cfg.sample_rate / 2.0;
    if (opt_v > 0.0) cfg.density = opt_v;
    run_design(cfg, bank_out);
  });

  // analyze
  std::string a_bank, a_in, a_out;
  bool a_c64 = false;
  auto* analyze_cmd =
      app.add_subcommand("analyze", "sub-band analysis of a WAV file");
  analyze_cmd->add_option("--bank", a_bank, "bank descriptor")->required();
  analyze_cmd->add_option("--in", a_in, "input WAV")->required();
  analyze_cmd->add_option("--out", a_out, "output coefficient file")
      ->required();
  analyze_cmd->add_flag("--c64", a_c64, "store complex64 instead of complex128");
  analyze_cmd->callback([&] {
    const LoadedBank lb = load_bank(a_bank);
    const Signal x = read_signal_for(a_in, lb.bank);
    save_coefficients(a_out, analyze(x, lb.bank), lb.bank, !a_c64);
    std::printf("wrote %s\n", a_out.c_str());
  });

  // synthesize
  std::string s_bank, s_in, s_out;
  MethodOpts s_mo;
  auto* synth_cmd = app.add_subcommand(
      "synthesize", "reconstruct a WAV file from coefficients");
  synth_cmd->add_option("--bank", s_bank, "bank descriptor")->required();
  synth_cmd->add_option("--in", s_in, "input coefficient file")->required();
  synth_cmd->add_option("--out", s_out, "output WAV")->required();
  add_method_opts(synth_cmd, s_mo);
  synth_cmd->callback([&] {
    const LoadedBank lb = load_bank(s_bank);
    const Coefficients c = load_coefficients(s_in);
    verify_fingerprint(c, lb.bank);
    write_wav(s_out, synthesize_with(c, lb.bank, s_mo));
    std::printf("wrote %s\n", s_out.c_str());
  });

  // respond
  std::string r_bank, r_out;
  auto* respond_cmd =
      app.add_subcommand("respond", "export bank magnitude responses as CSV");
  respond_cmd->add_option("--bank", r_bank, "bank descriptor")->required();
  respond_cmd->add_option("--out", r_out, "output CSV")->required();
  respond_cmd->callback([&] {
    export_response_csv(load_bank(r_bank).bank, r_out);
    std::printf("wrote %s\n", r_out.c_str());
  });

  // spectrogram
  std::string g_bank, g_in, g_out;
  double g_floor = -80.0;
  auto* spec_cmd = app.add_subcommand(
      "spectrogram", "export sub-band magnitudes (dB) as CSV");
  spec_cmd->add_option("--bank", g_bank, "bank descriptor")->required();
  spec_cmd->add_option("--in", g_in, "input WAV")->required();
  spec_cmd->add_option("--out", g_out, "output CSV")->required();
  spec_cmd->add_option("--floor", g_floor, "dB floor")->capture_default_str();
  spec_cmd->callback([&] {
    const LoadedBank lb = load_bank(g_bank);
    const Signal x = read_signal_for(g_in, lb.bank);
    export_spectrogram_csv(analyze(x, lb.bank), lb.bank, g_out, g_floor);
    std::printf("wrote %s\n", g_out.c_str());
  });

  // compare-gammatone
  double c_fs = 16000.0, c_v = 1.0, c_bwdiv = 1.0;
  long c_len = 64000;
  unsigned c_seed = 1;
  std::vector<double> c_redfacs{1.0, 2.0};
  std::string c_in;
  auto* cmp_cmd = app.add_subcommand(
      "compare-gammatone",
      "round-trip error table: erblet vs roex vs gammatone");
  cmp_cmd->add_option("--fs", c_fs, "sample rate when no input file")
      ->capture_default_str();
  cmp_cmd->add_option("--len", c_len, "length when no input file")
      ->capture_default_str();
  cmp_cmd->add_option("--v", c_v, "channels per scale unit")
      ->capture_default_str();
  cmp_cmd->add_option("--bwdiv", c_bwdiv, "bandwidth divisor")
      ->capture_default_str();
  cmp_cmd->add_option("--redfac", c_redfacs, "redundancy multipliers")
      ->capture_default_str();
  cmp_cmd->add_option("--in", c_in,
                      "test signal (default: speech-shaped noise)");
  cmp_cmd->add_option("--seed", c_seed, "noise seed")->capture_default_str();
  cmp_cmd->callback(
      [&] { run_compare(c_fs, c_len, c_v, c_bwdiv, c_redfacs, c_in, c_seed); });

  // mask-separate
  std::string m_bank, m_in, m_mask, m_out;
  std::vector<std::string> m_refs;
  int m_target = 0;
  MethodOpts m_mo;
  auto* mask_cmd = app.add_subcommand(
      "mask-separate", "masked resynthesis plus separation metrics");
  mask_cmd->add_option("--bank", m_bank, "bank descriptor")->required();
  mask_cmd->add_option("--in", m_in, "mixture WAV")->required();
  mask_cmd->add_option("--mask", m_mask, "mask file")->required();
  mask_cmd->add_option("--ref", m_refs, "reference stems (repeat, >= 2)")
      ->required();
  mask_cmd->add_option("--target", m_target, "target stem index")
      ->capture_default_str();
  mask_cmd->add_option("--out", m_out, "estimated source WAV");
  add_method_opts(mask_cmd, m_mo);
  mask_cmd->callback([&] {
    const LoadedBank lb = load_bank(m_bank);
    const Signal mix = read_signal_for(m_in, lb.bank);
    const Mask m = load_mask(m_mask);
    const Signal est =
        synthesize_with(apply_mask(analyze(mix, lb.bank), m), lb.bank, m_mo);
    if (!m_out.empty()) write_wav(m_out, est);

    std::vector<Signal> refs;
    for (const std::string& p : m_refs) refs.push_back(read_signal_for(p, lb.bank));
    const BssScores s = bss_eval(refs, est, m_target);
    print_db("SDR", s.sdr);
    print_db("SIR", s.sir);
    print_db("SAR", s.sar);
    print_db("SNR", snr(refs[static_cast<size_t>(m_target)], est));
    if (!m_out.empty()) std::printf("wrote %s\n", m_out.c_str());
  });

  // denoise
  std::string d_bank, d_in, d_out, d_ref;
  double d_sigma = 0.0, d_eta = -1.0;
  bool d_add_noise = false;
  unsigned d_seed = 1;
  MethodOpts d_mo;
  auto* den_cmd = app.add_subcommand(
      "denoise", "soft-threshold the sub-band coefficients");
  den_cmd->add_option("--bank", d_bank, "bank descriptor")->required();
  den_cmd->add_option("--in", d_in, "input WAV")->required();
  den_cmd->add_option("--sigma", d_sigma, "noise standard deviation")
      ->required();
  den_cmd->add_option("--eta", d_eta,
                      "threshold in units of signal amplitude (default: sigma)");
  den_cmd->add_option("--out", d_out, "denoised WAV");
  den_cmd->add_option("--ref", d_ref, "clean reference for the metrics table");
  den_cmd->add_flag("--add-noise", d_add_noise,
                    "treat --in as clean and add white noise of std sigma");
  den_cmd->add_option("--seed", d_seed, "noise seed")->capture_default_str();
  add_method_opts(den_cmd, d_mo);
  den_cmd->callback([&] {
    const LoadedBank lb = load_bank(d_bank);
    Signal noisy = read_signal_for(d_in, lb.bank);
    Signal ref;
    bool have_ref = false;
    if (d_add_noise) {
      ref = noisy;
      have_ref = true;
      const Signal n = random_signal(noisy.sample_rate,
                                     noisy.samples.size(), d_seed);
      noisy.samples += d_sigma * n.samples;
    }
    if (!d_ref.empty()) {
      ref = read_signal_for(d_ref, lb.bank);
      have_ref = true;
    }
    if (d_eta < 0.0) d_eta = d_sigma;

    // Unit-amplitude threshold mapped to the coefficient domain: white
    // noise of std sigma lands on each coefficient with std
    // sigma * ||h_k||_2.
    const long L = lb.bank.signal_length;
    std::vector<double> etas;
    for (const Channel& ch : lb.bank.channels)
      etas.push_back(d_eta *
                     std::sqrt(ch.response.squaredNorm() / static_cast<double>(L)));
    const Signal den = synthesize_with(
        soft_threshold(analyze(noisy, lb.bank), etas), lb.bank, d_mo);
    if (!d_out.empty()) write_wav(d_out, den);

    if (have_ref) {
      print_db("SNRin", snr(ref, noisy));
      print_db("SNRout", snr(ref, den));
      std::printf("%-6s %9.2f dB\n", "segin", segsnr(ref, noisy));
      std::printf("%-6s %9.2f dB\n", "segout", segsnr(ref, den));
    }
    if (!d_out.empty()) std::printf("wrote %s\n", d_out.c_str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const format_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const numerical_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
