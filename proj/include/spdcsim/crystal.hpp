#pragma once

#include "spdcsim/dispersion.hpp"
#include "spdcsim/wavevector.hpp"

namespace spdcsim {

enum class PhaseMatchingType { type_ii };

/// Uniaxial nonlinear crystal with its optic axis in the x-z plane.
///
/// The pump is extraordinary (type II, e -> o + e). `signal_polarization`
/// chooses which daughter reaches the detector array; the idler carries the
/// other one. The optic axis leans toward the side of the ordinary daughter,
/// so swapping the assignment mirrors the geometry instead of changing it.
struct CrystalSpec {
  double length = 1e-3;     // m
  double cut_angle = 0.0;   // rad, optic axis to crystal normal
  DispersionSet dispersion;
  PhaseMatchingType type = PhaseMatchingType::type_ii;
  Polarization signal_polarization = Polarization::ordinary;

  void validate() const;

  Polarization idler_polarization() const;
  /// +1 when the optic axis leans toward +x.
  double axis_sign() const;
};

/// Refractive index for a wave whose wavevector makes `propagation_angle`
/// (rad) with the optic axis. Ordinary waves ignore the angle; extraordinary
/// waves use 1/n^2 = cos^2/n_o^2 + sin^2/n_e^2.
double refractive_index(Polarization pol, double wavelength, double propagation_angle,
                        const CrystalSpec& spec);

/// Longitudinal wavevector component k_z inside the crystal for a plane wave
/// with transverse part k and angular frequency omega. Throws DomainError for
/// evanescent waves.
double longitudinal_wavevector(Polarization pol, TransverseWavevector k, double omega,
                               const CrystalSpec& spec);

/// Phase mismatch k_pz(ks + ki - kp, wp) - k_sz(ks, ws) - k_iz(ki, wi).
///
/// The pump term takes the transverse offset from the central pump direction,
/// exactly as the mismatch is written in the model. Requires
/// ws + wi == wp to one part in 1e12.
double delta_kz(TransverseWavevector ks, TransverseWavevector ki, TransverseWavevector kp, double ws,
                double wi, double wp, const CrystalSpec& spec);

namespace detail {
/// delta_kz without the energy-conservation precondition (used for partial
/// derivatives with respect to one frequency).
double mismatch(TransverseWavevector ks, TransverseWavevector ki, TransverseWavevector kp, double ws,
                double wi, double wp, const CrystalSpec& spec);
}  // namespace detail

/// Degenerate perfect phase-matching point. `signal + idler == pump` holds
/// bitwise: all three lie on the kWavevectorLattice grid.
struct PhaseMatchPoint {
  TransverseWavevector pump;
  TransverseWavevector signal;
  TransverseWavevector idler;
  double pump_frequency = 0.0;

  double degenerate_frequency() const { return 0.5 * pump_frequency; }
};

struct PhaseMatchingSearch {
  /// The root whose external signal angle is closest to this one is returned.
  double branch_hint = 0.05235987755982988;  // 3 deg
  double max_angle = 0.2617993877991494;     // 15 deg
  double scan_step = 8.726646259971648e-4;   // 0.05 deg
};

/// Solves delta_kz(ks0, kp - ks0, kp; wp/2, wp/2, wp) = 0 on the signal's
/// positive-x side. `kp` is snapped onto the lattice first; the pump actually
/// used is returned in the result. Throws NoPhaseMatchingError when the scan
/// finds no root.
PhaseMatchPoint solve_phase_matching(TransverseWavevector kp, double pump_frequency,
                                     const CrystalSpec& spec, const PhaseMatchingSearch& search = {});

/// First-order expansion of delta_kz around a phase-matching point.
struct ExpansionCoefficients {
  Vector2 d_s;         // d(delta_kz)/d(kappa_s), dimensionless
  Vector2 d_i;         // d(delta_kz)/d(kappa_i)
  double beta_s = 0.0; // d(delta_kz)/d(omega_s), s/m
  double beta_i = 0.0; // d(delta_kz)/d(omega_i), s/m

  /// Taylor-linearized mismatch for offsets from the expansion point.
  double linearized(TransverseWavevector dks, TransverseWavevector dki, double dws, double dwi) const {
    return d_s.dot(dks) + d_i.dot(dki) + beta_s * dws + beta_i * dwi;
  }
};

struct FiniteDifferenceSteps {
  double transverse = 1.0;               // rad/m
  double frequency = 6.283185307179586e9;  // 2 pi x 1 GHz
};

/// Central finite differences of delta_kz at `point`. Throws InputError if the
/// point is not phase matched to 1e-6 rad/m.
ExpansionCoefficients expansion_coefficients(const PhaseMatchPoint& point, const CrystalSpec& spec,
                                             const FiniteDifferenceSteps& steps = {});

/// External signal angle (rad) of a phase-matching point.
double signal_external_angle(const PhaseMatchPoint& point);

}  // namespace spdcsim
