#include "audlet/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <vector>

#include <nlohmann/json.hpp>

#include "audlet/errors.hpp"

namespace audlet {
namespace {

// All binary formats are little-endian; reads and writes go through memcpy
// on the host representation (little-endian platforms).
template <typename T>
void put(std::ofstream& f, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  f.write(buf, sizeof(T));
}

template <typename T>
T get(std::ifstream& f, const char* what) {
  char buf[sizeof(T)];
  f.read(buf, sizeof(T));
  if (!f)
    throw format_error(std::string("truncated file while reading ") + what);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

void put_tag(std::ofstream& f, const char* tag) { f.write(tag, 4); }

std::string get_tag(std::ifstream& f) {
  char buf[4];
  f.read(buf, 4);
  if (!f) throw format_error("truncated file while reading a chunk tag");
  return std::string(buf, 4);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw format_error("cannot open " + path + " for writing");
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw format_error("cannot open " + path);
  return f;
}

void write_geometry_header(std::ofstream& f, const char* magic,
                           std::uint16_t flags, const FilterBank& fb) {
  put_tag(f, magic);
  put<std::uint16_t>(f, 1);  // version
  put<std::uint16_t>(f, flags);
  put<double>(f, fb.sample_rate);
  put<std::uint64_t>(f, static_cast<std::uint64_t>(fb.signal_length));
  put<std::uint32_t>(f, static_cast<std::uint32_t>(fb.channels.size()));
}

struct GeometryHeader {
  std::uint16_t flags = 0;
  double sample_rate = 0.0;
  long signal_length = 0;
  std::vector<double> centers;
  std::vector<double> bandwidths;
  std::vector<int> down;
  std::vector<long> lengths;
};

std::array<std::uint8_t, 32> geometry_fingerprint(const GeometryHeader& h) {
  FilterBank fb;
  fb.sample_rate = h.sample_rate;
  fb.signal_length = h.signal_length;
  fb.channels.resize(h.centers.size());
  for (size_t k = 0; k < h.centers.size(); ++k) {
    fb.channels[k].center_hz = h.centers[k];
    fb.channels[k].bandwidth_hz = h.bandwidths[k];
    fb.channels[k].down = h.down[k];
  }
  return bank_fingerprint(fb);
}

void check_trailing_fingerprint(std::ifstream& f, const GeometryHeader& h,
                                std::array<std::uint8_t, 32>* out) {
  std::array<std::uint8_t, 32> stored;
  f.read(reinterpret_cast<char*>(stored.data()), 32);
  if (!f) throw format_error("truncated file while reading the fingerprint");
  if (stored != geometry_fingerprint(h))
    throw format_error("fingerprint does not match the stored geometry");
  if (out) *out = stored;
}

double db_power(double v) {
  return v > 0.0 ? std::max(10.0 * std::log10(v), -300.0) : -300.0;
}

double db_amp(double v) {
  return v > 0.0 ? std::max(20.0 * std::log10(v), -300.0) : -300.0;
}

}  // namespace

Signal read_wav(const std::string& path) {
  std::ifstream f = open_in(path);
  if (get_tag(f) != "RIFF") throw format_error(path + ": not a RIFF file");
  get<std::uint32_t>(f, "RIFF size");
  if (get_tag(f) != "WAVE") throw format_error(path + ": not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::vector<char> data;
  bool have_data = false;

  while (f.peek() != EOF) {
    const std::string tag = get_tag(f);
    const auto size = get<std::uint32_t>(f, "chunk size");
    if (tag == "fmt ") {
      if (size < 16) throw format_error(path + ": fmt chunk too short");
      format = get<std::uint16_t>(f, "format");
      channels = get<std::uint16_t>(f, "channels");
      rate = get<std::uint32_t>(f, "sample rate");
      get<std::uint32_t>(f, "byte rate");
      block_align = get<std::uint16_t>(f, "block align");
      bits = get<std::uint16_t>(f, "bits per sample");
      long rest = static_cast<long>(size) - 16;
      if (format == 0xFFFE && size >= 40) {
        get<std::uint16_t>(f, "extension size");
        get<std::uint16_t>(f, "valid bits");
        get<std::uint32_t>(f, "channel mask");
        format = get<std::uint16_t>(f, "sub-format");
        rest -= 10;
      }
      f.seekg(rest + (size % 2), std::ios::cur);
      have_fmt = true;
    } else if (tag == "data") {
      data.resize(size);
      f.read(data.data(), size);
      if (!f) throw format_error(path + ": truncated data chunk");
      if (size % 2) f.seekg(1, std::ios::cur);
      have_data = true;
    } else {
      f.seekg(static_cast<long>(size) + (size % 2), std::ios::cur);
      if (!f) throw format_error(path + ": truncated chunk " + tag);
    }
  }
  if (!have_fmt || !have_data)
    throw format_error(path + ": missing fmt or data chunk");
  if (channels == 0 || block_align == 0 || rate == 0)
    throw format_error(path + ": invalid fmt chunk");

  const bool pcm16 = format == 1 && bits == 16;
  const bool float32 = format == 3 && bits == 32;
  if (!pcm16 && !float32)
    throw format_error(path + ": unsupported WAV encoding: format tag " +
                       std::to_string(format) + ", " + std::to_string(bits) +
                       " bits (supported: PCM 16-bit, IEEE float 32-bit)");
  if (channels > 1)
    std::cerr << "note: " << path << ": using the first of " << channels
              << " channels\n";

  const long frames = static_cast<long>(data.size()) / block_align;
  Signal s;
  s.sample_rate = static_cast<double>(rate);
  s.samples.resize(frames);
  for (long n = 0; n < frames; ++n) {
    const char* p = data.data() + static_cast<size_t>(n) * block_align;
    if (pcm16) {
      std::int16_t v;
      std::memcpy(&v, p, 2);
      s.samples[n] = static_cast<double>(v) / 32768.0;
    } else {
      float v;
      std::memcpy(&v, p, 4);
      s.samples[n] = static_cast<double>(v);
    }
  }
  return s;
}

void write_wav(const std::string& path, const Signal& s) {
  if (!(s.sample_rate > 0.0)) throw domain_error("sample rate must be set");
  std::ofstream f = open_out(path);
  const std::uint32_t frames = static_cast<std::uint32_t>(s.samples.size());
  const std::uint32_t rate =
      static_cast<std::uint32_t>(std::lround(s.sample_rate));
  const std::uint32_t data_size = frames * 4;

  put_tag(f, "RIFF");
  put<std::uint32_t>(f, 4 + (8 + 16) + (8 + 4) + (8 + data_size));
  put_tag(f, "WAVE");
  put_tag(f, "fmt ");
  put<std::uint32_t>(f, 16);
  put<std::uint16_t>(f, 3);  // IEEE float
  put<std::uint16_t>(f, 1);
  put<std::uint32_t>(f, rate);
  put<std::uint32_t>(f, rate * 4);
  put<std::uint16_t>(f, 4);
  put<std::uint16_t>(f, 32);
  put_tag(f, "fact");
  put<std::uint32_t>(f, 4);
  put<std::uint32_t>(f, frames);
  put_tag(f, "data");
  put<std::uint32_t>(f, data_size);
  for (long n = 0; n < s.samples.size(); ++n)
    put<float>(f, static_cast<float>(s.samples[n]));
  if (!f) throw format_error("failed writing " + path);
}

void save_coefficients(const std::string& path, const Coefficients& c,
                       const FilterBank& fb, bool complex128) {
  detail::check_compatible(c, fb);
  std::ofstream f = open_out(path);
  write_geometry_header(f, "AUDC", complex128 ? 1 : 0, fb);
  for (size_t k = 0; k < fb.channels.size(); ++k) {
    const Channel& ch = fb.channels[k];
    put<double>(f, ch.center_hz);
    put<double>(f, ch.bandwidth_hz);
    put<std::uint32_t>(f, static_cast<std::uint32_t>(ch.down));
    put<std::uint64_t>(f, static_cast<std::uint64_t>(c.bands[k].size()));
    for (long n = 0; n < c.bands[k].size(); ++n) {
      if (complex128) {
        put<double>(f, c.bands[k][n].real());
        put<double>(f, c.bands[k][n].imag());
      } else {
        put<float>(f, static_cast<float>(c.bands[k][n].real()));
        put<float>(f, static_cast<float>(c.bands[k][n].imag()));
      }
    }
  }
  const auto fp = bank_fingerprint(fb);
  f.write(reinterpret_cast<const char*>(fp.data()), 32);
  if (!f) throw format_error("failed writing " + path);
}

Coefficients load_coefficients(const std::string& path) {
  std::ifstream f = open_in(path);

  // Geometry fields are interleaved with the payload, so parse both in one
  // pass and validate the fingerprint afterwards.
  if (get_tag(f) != "AUDC") throw format_error(path + ": not a coefficient file");
  const auto version = get<std::uint16_t>(f, "version");
  if (version != 1)
    throw format_error(path + ": unsupported version " +
                       std::to_string(version));
  const auto flags = get<std::uint16_t>(f, "flags");
  const bool complex128 = (flags & 1) != 0;

  GeometryHeader h;
  h.sample_rate = get<double>(f, "sample rate");
  h.signal_length = static_cast<long>(get<std::uint64_t>(f, "length"));
  const auto count = get<std::uint32_t>(f, "channel count");
  if (h.signal_length <= 0 || !(h.sample_rate > 0.0) || count == 0)
    throw format_error(path + ": invalid geometry header");

  Coefficients c;
  c.signal_length = h.signal_length;
  c.sample_rate = h.sample_rate;
  for (std::uint32_t k = 0; k < count; ++k) {
    h.centers.push_back(get<double>(f, "center"));
    h.bandwidths.push_back(get<double>(f, "bandwidth"));
    const auto d = get<std::uint32_t>(f, "downsampling factor");
    const auto len = static_cast<long>(get<std::uint64_t>(f, "band length"));
    if (d == 0 || h.signal_length % static_cast<long>(d) != 0 ||
        len != h.signal_length / static_cast<long>(d))
      throw format_error(path + ": band length inconsistent with the geometry");
    h.down.push_back(static_cast<int>(d));
    c.down.push_back(static_cast<int>(d));
    Eigen::VectorXcd band(len);
    for (long n = 0; n < len; ++n) {
      if (complex128) {
        const double re = get<double>(f, "sample");
        const double im = get<double>(f, "sample");
        band[n] = {re, im};
      } else {
        const float re = get<float>(f, "sample");
        const float im = get<float>(f, "sample");
        band[n] = {static_cast<double>(re), static_cast<double>(im)};
      }
    }
    c.bands.push_back(std::move(band));
  }
  check_trailing_fingerprint(f, h, &c.fingerprint);
  return c;
}

void save_mask(const std::string& path, const Mask& m, const FilterBank& fb) {
  if (m.bands.size() != fb.channels.size())
    throw domain_error("mask does not match the bank grid");
  for (size_t k = 0; k < m.bands.size(); ++k)
    if (m.bands[k].size() != fb.signal_length / fb.channels[k].down)
      throw domain_error("mask does not match the bank grid");
  for (const Eigen::VectorXd& band : m.bands)
    if (band.size() > 0 &&
        (!(band.minCoeff() >= 0.0) || !(band.maxCoeff() <= 1.0)))
      throw domain_error("mask values must lie in [0, 1]");

  std::ofstream f = open_out(path);
  write_geometry_header(f, "AUDM", 0, fb);
  for (size_t k = 0; k < fb.channels.size(); ++k) {
    const Channel& ch = fb.channels[k];
    put<double>(f, ch.center_hz);
    put<double>(f, ch.bandwidth_hz);
    put<std::uint32_t>(f, static_cast<std::uint32_t>(ch.down));
    put<std::uint64_t>(f, static_cast<std::uint64_t>(m.bands[k].size()));
    for (long n = 0; n < m.bands[k].size(); ++n)
      put<float>(f, static_cast<float>(m.bands[k][n]));
  }
  const auto fp = bank_fingerprint(fb);
  f.write(reinterpret_cast<const char*>(fp.data()), 32);
  if (!f) throw format_error("failed writing " + path);
}

Mask load_mask(const std::string& path) {
  std::ifstream f = open_in(path);
  if (get_tag(f) != "AUDM") throw format_error(path + ": not a mask file");
  const auto version = get<std::uint16_t>(f, "version");
  if (version != 1)
    throw format_error(path + ": unsupported version " +
                       std::to_string(version));
  get<std::uint16_t>(f, "flags");

  GeometryHeader h;
  h.sample_rate = get<double>(f, "sample rate");
  h.signal_length = static_cast<long>(get<std::uint64_t>(f, "length"));
  const auto count = get<std::uint32_t>(f, "channel count");
  if (h.signal_length <= 0 || !(h.sample_rate > 0.0) || count == 0)
    throw format_error(path + ": invalid geometry header");

  Mask m;
  for (std::uint32_t k = 0; k < count; ++k) {
    h.centers.push_back(get<double>(f, "center"));
    h.bandwidths.push_back(get<double>(f, "bandwidth"));
    const auto d = get<std::uint32_t>(f, "downsampling factor");
    const auto len = static_cast<long>(get<std::uint64_t>(f, "band length"));
    if (d == 0 || h.signal_length % static_cast<long>(d) != 0 ||
        len != h.signal_length / static_cast<long>(d))
      throw format_error(path + ": band length inconsistent with the geometry");
    h.down.push_back(static_cast<int>(d));
    Eigen::VectorXd band(len);
    for (long n = 0; n < len; ++n) {
      const float v = get<float>(f, "mask value");
      if (!(v >= 0.0f) || !(v <= 1.0f))
        throw format_error(path + ": mask value outside [0, 1]");
      band[n] = static_cast<double>(v);
    }
    m.bands.push_back(std::move(band));
  }
  check_trailing_fingerprint(f, h, nullptr);
  return m;
}

void export_response_csv(const FilterBank& fb, const std::string& path) {
  std::ofstream f = open_out(path);
  const long L = fb.signal_length;
  const Eigen::VectorXd h0 = filterbank_response(fb);

  f << "freq_hz,H0_db";
  for (size_t k = 0; k < fb.channels.size(); ++k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), ",ch_%04zu", k + 1);
    f << buf;
  }
  f << "\n";

  char cell[64];
  for (long j = 0; j <= L / 2; ++j) {
    std::snprintf(cell, sizeof(cell), "%.10g,%.4f",
                  static_cast<double>(j) * fb.sample_rate /
                      static_cast<double>(L),
                  db_power(h0[j]));
    f << cell;
    for (const Channel& ch : fb.channels) {
      std::snprintf(cell, sizeof(cell), ",%.4f", db_amp(std::abs(ch.at(j, L))));
      f << cell;
    }
    f << "\n";
  }
  if (!f) throw format_error("failed writing " + path);
}

void export_spectrogram_csv(const Coefficients& c, const FilterBank& fb,
                            const std::string& path, double floor_db) {
  detail::check_compatible(c, fb);
  std::ofstream f = open_out(path);
  int d_min = c.down[0];
  for (int d : c.down) d_min = std::min(d_min, d);
  const long rows = c.signal_length / d_min;

  f << "time_s";
  char cell[64];
  for (const Channel& ch : fb.channels) {
    std::snprintf(cell, sizeof(cell), ",%.6g", ch.center_hz);
    f << cell;
  }
  f << "\n";

  // Rows sit on the finest sub-band grid; coarser channels repeat their
  // latest sample (sample-and-hold).
  for (long n = 0; n < rows; ++n) {
    std::snprintf(cell, sizeof(cell), "%.8g",
                  static_cast<double>(n) * d_min / c.sample_rate);
    f << cell;
    for (size_t k = 0; k < c.bands.size(); ++k) {
      const long idx = n * d_min / c.down[k];
      const double mag = std::abs(c.bands[k][idx]);
      const double db =
          mag > 0.0 ? std::max(20.0 * std::log10(mag), floor_db) : floor_db;
      std::snprintf(cell, sizeof(cell), ",%.4f", db);
      f << cell;
    }
    f << "\n";
  }
  if (!f) throw format_error("failed writing " + path);
}

FilterBank build_bank(const BankConfig& cfg, bool* painless) {
  PrototypeWindow proto;
  if (cfg.prototype == "hann")
    proto = PrototypeWindow::hann();
  else if (cfg.prototype == "gauss" || cfg.prototype == "gaussian")
    proto = PrototypeWindow::gaussian();
  else if (cfg.prototype == "roex")
    proto = PrototypeWindow::roex();
  else
    throw domain_error("unknown prototype '" + cfg.prototype +
                       "' (expected hann, gauss, or roex)");

  FilterBank fb =
      cfg.count > 0
          ? audlet_filters_count(cfg.scale, cfg.sample_rate,
                                 cfg.signal_length, cfg.fmin_hz, cfg.fmax_hz,
                                 cfg.count, proto, cfg.bw_divisor)
          : audlet_filters(cfg.scale, cfg.sample_rate, cfg.signal_length,
                           cfg.fmin_hz, cfg.fmax_hz, cfg.density, proto,
                           cfg.bw_divisor);
  DownsamplingResult ds = select_downsampling(fb, cfg.redfac);
  if (painless) *painless = ds.painless_possible;
  return std::move(ds.bank);
}

void save_bank(const std::string& path, const BankConfig& cfg) {
  const FilterBank fb = build_bank(cfg);
  nlohmann::json j;
  j["format"] = "audlet-bank";
  j["version"] = 1;
  j["scale"] = to_string(cfg.scale);
  j["sample_rate"] = cfg.sample_rate;
  j["signal_length"] = cfg.signal_length;
  j["fmin_hz"] = cfg.fmin_hz;
  j["fmax_hz"] = cfg.fmax_hz;
  j["density"] = cfg.density;
  j["count"] = cfg.count;
  j["prototype"] = cfg.prototype;
  j["bw_divisor"] = cfg.bw_divisor;
  j["redfac"] = cfg.redfac;
  j["fingerprint"] = fingerprint_hex(bank_fingerprint(fb));
  std::ofstream f(path);
  if (!f) throw format_error("cannot open " + path + " for writing");
  f << j.dump(2) << "\n";
  if (!f) throw format_error("failed writing " + path);
}

LoadedBank load_bank(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw format_error("cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw format_error(path + ": " + e.what());
  }
  LoadedBank lb;
  try {
    if (j.at("format") != "audlet-bank" || j.at("version") != 1)
      throw format_error(path + ": not a bank descriptor");
    lb.config.scale = scale_from_string(j.at("scale").get<std::string>());
    lb.config.sample_rate = j.at("sample_rate").get<double>();
    lb.config.signal_length = j.at("signal_length").get<long>();
    lb.config.fmin_hz = j.at("fmin_hz").get<double>();
    lb.config.fmax_hz = j.at("fmax_hz").get<double>();
    lb.config.density = j.at("density").get<double>();
    lb.config.count = j.at("count").get<long>();
    lb.config.prototype = j.at("prototype").get<std::string>();
    lb.config.bw_divisor = j.at("bw_divisor").get<double>();
    lb.config.redfac = j.at("redfac").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw format_error(path + ": " + e.what());
  }
  lb.bank = build_bank(lb.config);
  if (fingerprint_hex(bank_fingerprint(lb.bank)) !=
      j.at("fingerprint").get<std::string>())
    throw format_error(path +
                       ": fingerprint mismatch; the descriptor does not "
                       "regenerate the stored bank");
  return lb;
}

}  // namespace audlet
