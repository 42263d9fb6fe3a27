#include "spdcsim/crystal.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "spdcsim/errors.hpp"
#include "spdcsim/units.hpp"

namespace spdcsim {

void CrystalSpec::validate() const {
  if (!(length > 0.0)) throw ConfigError("crystal length must be positive");
  if (!(cut_angle >= 0.0 && cut_angle <= kPi / 2)) throw ConfigError("cut angle must lie in [0, 90] deg");
  if (dispersion.name.empty()) throw ConfigError("crystal has no dispersion data");
}

Polarization CrystalSpec::idler_polarization() const {
  return signal_polarization == Polarization::ordinary ? Polarization::extraordinary
                                                       : Polarization::ordinary;
}

double CrystalSpec::axis_sign() const { return signal_polarization == Polarization::ordinary ? 1.0 : -1.0; }

double refractive_index(Polarization pol, double wavelength, double propagation_angle,
                        const CrystalSpec& spec) {
  const double n_o = spec.dispersion.principal_index(Polarization::ordinary, wavelength);
  if (pol == Polarization::ordinary) return n_o;
  const double n_e = spec.dispersion.principal_index(Polarization::extraordinary, wavelength);
  const double c = std::cos(propagation_angle);
  const double s = std::sin(propagation_angle);
  return 1.0 / std::sqrt(c * c / (n_o * n_o) + s * s / (n_e * n_e));
}

double longitudinal_wavevector(Polarization pol, TransverseWavevector k, double omega,
                               const CrystalSpec& spec) {
  const double wavelength = vacuum_wavelength(omega);
  const double k0 = vacuum_wavenumber(omega);
  const double n_o = spec.dispersion.principal_index(Polarization::ordinary, wavelength);
  const double transverse2 = k.norm_squared();

  if (pol == Polarization::ordinary) {
    const double kz2 = n_o * n_o * k0 * k0 - transverse2;
    if (!(kz2 > 0.0)) throw DomainError("evanescent ordinary wave: transverse wavevector too large");
    return std::sqrt(kz2);
  }

  // Index ellipsoid: (k.a)^2 / n_o^2 + (|k|^2 - (k.a)^2) / n_e^2 = k0^2, with
  // the optic axis a = (sign sin(theta), 0, cos(theta)). Quadratic in k_z.
  const double n_e = spec.dispersion.principal_index(Polarization::extraordinary, wavelength);
  const double inv_o = 1.0 / (n_o * n_o);
  const double inv_e = 1.0 / (n_e * n_e);
  const double diff = inv_o - inv_e;
  const double ax = spec.axis_sign() * std::sin(spec.cut_angle);
  const double az = std::cos(spec.cut_angle);

  const double qa = az * az * diff + inv_e;
  const double qb = 2.0 * k.kx * ax * az * diff;
  const double qc = k.kx * k.kx * ax * ax * diff + transverse2 * inv_e - k0 * k0;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (!(disc >= 0.0)) throw DomainError("evanescent extraordinary wave: transverse wavevector too large");
  const double kz = (-qb + std::sqrt(disc)) / (2.0 * qa);
  if (!(kz > 0.0)) throw DomainError("extraordinary wave does not propagate forward");
  return kz;
}

namespace detail {

double mismatch(TransverseWavevector ks, TransverseWavevector ki, TransverseWavevector kp, double ws,
                double wi, double wp, const CrystalSpec& spec) {
  return longitudinal_wavevector(Polarization::extraordinary, ks + ki - kp, wp, spec) -
         longitudinal_wavevector(spec.signal_polarization, ks, ws, spec) -
         longitudinal_wavevector(spec.idler_polarization(), ki, wi, spec);
}

}  // namespace detail

double delta_kz(TransverseWavevector ks, TransverseWavevector ki, TransverseWavevector kp, double ws,
                double wi, double wp, const CrystalSpec& spec) {
  if (!(std::abs(ws + wi - wp) <= 1e-12 * std::abs(wp))) {
    throw InputError(fmt::format("energy not conserved: ws + wi - wp = {:.3e} rad/s", ws + wi - wp));
  }
  return detail::mismatch(ks, ki, kp, ws, wi, wp, spec);
}

double signal_external_angle(const PhaseMatchPoint& point) {
  return external_angle(point.signal.kx, point.degenerate_frequency());
}

PhaseMatchPoint solve_phase_matching(TransverseWavevector kp, double pump_frequency,
                                     const CrystalSpec& spec, const PhaseMatchingSearch& search) {
  if (kp.ky != 0.0) throw InputError("phase matching is solved in the x-z plane only (ky must be 0)");
  if (!(pump_frequency > 0.0)) throw InputError("pump frequency must be positive");
  if (!(search.scan_step > 0.0 && search.max_angle > search.scan_step)) {
    throw InputError("invalid phase-matching scan range");
  }

  const TransverseWavevector pump = on_lattice(kp);
  const double w0 = 0.5 * pump_frequency;
  const double k_vac = vacuum_wavenumber(w0);
  const auto residual = [&](double s) -> std::optional<double> {
    try {
      return detail::mismatch({s, 0.0}, pump - TransverseWavevector{s, 0.0}, pump, w0, w0, pump_frequency,
                              spec);
    } catch (const DomainError&) {
      return std::nullopt;
    }
  };

  // Scan external signal angles for sign changes, then refine each bracket.
  std::vector<double> roots;
  const int steps = static_cast<int>(std::ceil(search.max_angle / search.scan_step));
  double prev_s = 0.0;
  std::optional<double> prev_f;
  for (int j = 1; j <= steps; ++j) {
    const double s = k_vac * std::sin(j * search.scan_step);
    const auto f = residual(s);
    if (f && prev_f && ((*f < 0.0) != (*prev_f < 0.0))) {
      const auto fn = [&](double x) { return residual(x).value_or(std::numeric_limits<double>::quiet_NaN()); };
      std::uintmax_t iterations = 200;
      const auto [lo, hi] = boost::math::tools::toms748_solve(
          fn, prev_s, s, *prev_f, *f, boost::math::tools::eps_tolerance<double>(52), iterations);
      roots.push_back(0.5 * (lo + hi));
    }
    prev_s = s;
    prev_f = f;
  }
  if (roots.empty()) {
    throw NoPhaseMatchingError(fmt::format(
        "no degenerate phase matching for cut angle {:.4f} deg within {:.1f} deg of the pump",
        rad_to_deg(spec.cut_angle), rad_to_deg(search.max_angle)));
  }

  const double hint = k_vac * std::sin(search.branch_hint);
  double best = roots.front();
  for (double r : roots) {
    if (std::abs(r - hint) < std::abs(best - hint)) best = r;
  }

  // Move onto the lattice, keeping the better of the two neighbouring points.
  TransverseWavevector signal = on_lattice({best, 0.0});
  double best_residual = std::abs(residual(signal.kx).value_or(std::numeric_limits<double>::infinity()));
  for (double offset : {-kWavevectorLattice, kWavevectorLattice}) {
    const TransverseWavevector candidate{signal.kx + offset, 0.0};
    const double r = std::abs(residual(candidate.kx).value_or(std::numeric_limits<double>::infinity()));
    if (r < best_residual) {
      best_residual = r;
      signal = candidate;
    }
  }
  return {pump, signal, pump - signal, pump_frequency};
}

ExpansionCoefficients expansion_coefficients(const PhaseMatchPoint& point, const CrystalSpec& spec,
                                             const FiniteDifferenceSteps& steps) {
  const double w0 = point.degenerate_frequency();
  const double wp = point.pump_frequency;
  const auto dk = [&](TransverseWavevector ks, TransverseWavevector ki, double ws, double wi) {
    return detail::mismatch(ks, ki, point.pump, ws, wi, wp, spec);
  };

  const double at_point = dk(point.signal, point.idler, w0, w0);
  if (!(std::abs(at_point) <= 1e-6)) {
    throw InputError(fmt::format("expansion point is not phase matched (delta_kz = {:.3e} rad/m)", at_point));
  }

  const double h = steps.transverse;
  const double hw = steps.frequency;
  const TransverseWavevector hx{h, 0.0};
  const TransverseWavevector hy{0.0, h};
  const auto& ks = point.signal;
  const auto& ki = point.idler;

  ExpansionCoefficients c;
  c.d_s.x = (dk(ks + hx, ki, w0, w0) - dk(ks - hx, ki, w0, w0)) / (2 * h);
  c.d_s.y = (dk(ks + hy, ki, w0, w0) - dk(ks - hy, ki, w0, w0)) / (2 * h);
  c.d_i.x = (dk(ks, ki + hx, w0, w0) - dk(ks, ki - hx, w0, w0)) / (2 * h);
  c.d_i.y = (dk(ks, ki + hy, w0, w0) - dk(ks, ki - hy, w0, w0)) / (2 * h);
  c.beta_s = (dk(ks, ki, w0 + hw, w0) - dk(ks, ki, w0 - hw, w0)) / (2 * hw);
  c.beta_i = (dk(ks, ki, w0, w0 + hw) - dk(ks, ki, w0, w0 - hw)) / (2 * hw);
  return c;
}

}  // namespace spdcsim
