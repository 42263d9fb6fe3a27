#pragma once

#include <cmath>

namespace spdcsim {

/// Transverse (x, y) component of a wavevector in rad/m. Transverse components
/// are continuous across the planar crystal faces, so one value describes a
/// photon both inside the crystal and in air.
struct TransverseWavevector {
  double kx = 0.0;
  double ky = 0.0;

  constexpr double norm_squared() const { return kx * kx + ky * ky; }
  double norm() const { return std::hypot(kx, ky); }

  friend constexpr TransverseWavevector operator+(TransverseWavevector a, TransverseWavevector b) {
    return {a.kx + b.kx, a.ky + b.ky};
  }
  friend constexpr TransverseWavevector operator-(TransverseWavevector a, TransverseWavevector b) {
    return {a.kx - b.kx, a.ky - b.ky};
  }
  friend constexpr TransverseWavevector operator-(TransverseWavevector a) { return {-a.kx, -a.ky}; }
  friend constexpr TransverseWavevector operator*(double s, TransverseWavevector a) {
    return {s * a.kx, s * a.ky};
  }
  friend constexpr bool operator==(const TransverseWavevector&, const TransverseWavevector&) = default;
};

/// Plain 2-vector for gradients with respect to a transverse wavevector.
struct Vector2 {
  double x = 0.0;
  double y = 0.0;

  constexpr double dot(TransverseWavevector k) const { return x * k.kx + y * k.ky; }
};

/// Spacing of the grid on which phase-matching solutions are stored (rad/m).
/// Sums and differences of grid values below 2^28 rad/m are exact in double
/// precision.
inline constexpr double kWavevectorLattice = 0x1p-24;

/// Nearest lattice point, componentwise.
inline TransverseWavevector on_lattice(TransverseWavevector k) {
  return {std::nearbyint(k.kx / kWavevectorLattice) * kWavevectorLattice,
          std::nearbyint(k.ky / kWavevectorLattice) * kWavevectorLattice};
}

/// Transverse wavevector of a plane wave leaving the crystal at external angle
/// alpha (rad, in air, x-z plane). Snapped to the lattice.
TransverseWavevector from_external_angle(double alpha, double omega);

/// External angle (rad) in air of a photon with transverse component kx.
double external_angle(double kx, double omega);

}  // namespace spdcsim
