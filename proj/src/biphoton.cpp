#include "spdcsim/biphoton.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "spdcsim/errors.hpp"

namespace spdcsim {

void FilterSpec::validate() const {
  if (!(center > 0.0)) throw ConfigError("filter centre must be positive");
  if (!(fwhm > 0.0)) throw ConfigError("filter FWHM must be positive");
}

double filter_amplitude(double omega, const FilterSpec& filter) {
  const double x = omega - filter.center;
  if (filter.shape == FilterShape::tophat) return std::abs(x) <= 0.5 * filter.fwhm ? 1.0 : 0.0;
  return std::exp(-2.0 * std::numbers::ln2 * x * x / (filter.fwhm * filter.fwhm));
}

BeamGeometry BeamGeometry::from_phase_matching(const PhaseMatchPoint& point, double waist) {
  BeamGeometry g;
  g.pump = point.pump;
  g.waist = waist;
  g.pump_frequency = point.pump_frequency;
  g.signal0 = point.signal;
  g.idler0 = point.idler;
  g.validate();
  return g;
}

void BeamGeometry::validate() const {
  if (!(waist > 0.0)) throw ConfigError("pump waist must be positive");
  if (!(pump_frequency > 0.0)) throw ConfigError("pump frequency must be positive");
  if (!(signal0 + idler0 == pump)) throw InputError("signal0 + idler0 must equal the pump wavevector");
}

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

double pump_envelope(TransverseWavevector ks, TransverseWavevector ki, const BeamGeometry& geom) {
  const TransverseWavevector q = ks + ki - geom.pump;
  return std::exp(-0.5 * geom.waist * geom.waist * q.norm_squared());
}

double amplitude_exact(TransverseWavevector ks, TransverseWavevector ki, double omega_i,
                       const BeamGeometry& geom, const FilterSpec& filter, const CrystalSpec& spec) {
  if (filter.shape == FilterShape::gaussian && std::abs(omega_i - filter.center) > 5.0 * filter.fwhm * (1.0 + 1e-12)) {
    throw InputError(fmt::format("idler frequency is {:.2f} FWHM from the filter centre (limit 5)",
                                 std::abs(omega_i - filter.center) / filter.fwhm));
  }
  const double lambda = filter_amplitude(omega_i, filter);
  if (lambda == 0.0) return 0.0;
  const double omega_s = geom.pump_frequency - omega_i;
  const double dk = detail::mismatch(ks, ki, geom.pump, omega_s, omega_i, geom.pump_frequency, spec);
  return lambda * pump_envelope(ks, ki, geom) * sinc(0.5 * spec.length * dk);
}

double gaussian_mismatch(TransverseWavevector ks, TransverseWavevector ki, double omega_i,
                         const BeamGeometry& geom, const ExpansionCoefficients& coeffs) {
  const double detuning = omega_i - geom.degenerate_frequency();
  return coeffs.d_s.dot(ks - geom.signal0) + coeffs.d_i.dot(ki - geom.idler0) + coeffs.beta_s * detuning +
         coeffs.beta_i * (-detuning);
}

double amplitude_gaussian(TransverseWavevector ks, TransverseWavevector ki, double omega_i,
                          const BeamGeometry& geom, const FilterSpec& filter, const CrystalSpec& spec,
                          const ExpansionCoefficients& coeffs) {
  const double m = gaussian_mismatch(ks, ki, omega_i, geom, coeffs);
  const double L = spec.length;
  return filter_amplitude(omega_i, filter) * pump_envelope(ks, ki, geom) * std::exp(-L * L / 10.0 * m * m);
}

}  // namespace spdcsim
