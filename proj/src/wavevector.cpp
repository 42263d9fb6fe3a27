#include "spdcsim/wavevector.hpp"

#include <cmath>

#include "spdcsim/units.hpp"

namespace spdcsim {

TransverseWavevector from_external_angle(double alpha, double omega) {
  return on_lattice({vacuum_wavenumber(omega) * std::sin(alpha), 0.0});
}

double external_angle(double kx, double omega) { return std::asin(kx / vacuum_wavenumber(omega)); }

}  // namespace spdcsim
