#include "audlet/processing.hpp"

#include <cmath>
#include <complex>

#include "audlet/errors.hpp"

namespace audlet {
namespace {

void check_shape(const Coefficients& c, const Mask& m) {
  if (m.bands.size() != c.bands.size())
    throw domain_error("mask band count does not match the coefficients");
  for (size_t k = 0; k < c.bands.size(); ++k)
    if (m.bands[k].size() != c.bands[k].size())
      throw domain_error("mask band " + std::to_string(k) +
                         " has the wrong length");
}

}  // namespace

Coefficients apply_mask(const Coefficients& c, const Mask& m) {
  check_shape(c, m);
  for (const Eigen::VectorXd& band : m.bands) {
    if (band.size() == 0) continue;
    if (!band.allFinite() || band.minCoeff() < 0.0 || band.maxCoeff() > 1.0)
      throw domain_error("mask values must lie in [0, 1]");
  }
  Coefficients out = c;
  for (size_t k = 0; k < out.bands.size(); ++k)
    out.bands[k].array() *= m.bands[k].array();
  return out;
}

Coefficients soft_threshold(const Coefficients& c, double eta) {
  return soft_threshold(c, std::vector<double>(c.bands.size(), eta));
}

Coefficients soft_threshold(const Coefficients& c,
                            const std::vector<double>& etas) {
  if (etas.size() != c.bands.size())
    throw domain_error("need one threshold per band");
  for (double eta : etas)
    if (!(eta >= 0.0)) throw domain_error("threshold must be non-negative");
  Coefficients out = c;
  for (size_t k = 0; k < out.bands.size(); ++k) {
    Eigen::VectorXcd& band = out.bands[k];
    const double eta = etas[k];
    for (long i = 0; i < band.size(); ++i) {
      const double mag = std::abs(band[i]);
      band[i] = mag > eta ? band[i] * ((mag - eta) / mag)
                          : std::complex<double>(0.0, 0.0);
    }
  }
  return out;
}

Mask magnitude_mask(const Coefficients& c, double eta) {
  if (!(eta >= 0.0)) throw domain_error("threshold must be non-negative");
  Mask m;
  m.bands.reserve(c.bands.size());
  for (const Eigen::VectorXcd& band : c.bands) {
    Eigen::VectorXd g(band.size());
    for (long i = 0; i < band.size(); ++i)
      g[i] = std::abs(band[i]) >= eta ? 1.0 : 0.0;
    m.bands.push_back(std::move(g));
  }
  return m;
}

}  // namespace audlet
