#include <doctest.h>

#include <cmath>
#include <random>

#include "spdcsim/biphoton.hpp"
#include "spdcsim/errors.hpp"
#include "spdcsim/units.hpp"
#include "support.hpp"

using namespace spdcsim;

namespace {

struct Fixture {
  CrystalSpec spec = test::default_crystal();
  double wp = test::pump_frequency();
  PhaseMatchPoint pt = solve_phase_matching({0.0, 0.0}, wp, spec);
  BeamGeometry geom = BeamGeometry::from_phase_matching(pt, 100e-6);
  FilterSpec filter = default_config().filter_spec();
  ExpansionCoefficients coeffs = expansion_coefficients(pt, spec);
};

}  // namespace

TEST_CASE("Gaussian filter shape") {
  const FilterSpec f{angular_frequency(808e-9), angular_bandwidth(808e-9, 10e-9), FilterShape::gaussian};
  CHECK(filter_amplitude(f.center, f) == 1.0);
  const double up = filter_amplitude(f.center + 0.5 * f.fwhm, f);
  const double down = filter_amplitude(f.center - 0.5 * f.fwhm, f);
  CHECK(up * up == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(down * down == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(f.fwhm == doctest::Approx(2.0 * kPi * 4.591958784677972e12).epsilon(1e-12));
  CHECK(f.fwhm / (2.0 * kPi * 4.59e12) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("top-hat filter") {
  const FilterSpec f{1e15, 1e13, FilterShape::tophat};
  CHECK(filter_amplitude(1e15 + 0.49e13, f) == 1.0);
  CHECK(filter_amplitude(1e15 - 0.51e13, f) == 0.0);
}

TEST_CASE("sinc and its Gaussian stand-in") {
  CHECK(sinc(0.0) == 1.0);
  CHECK(sinc(1e-6) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(sinc(kPi)) < 1e-15);
  for (double x = -1.0; x <= 1.0 + 1e-12; x += 0.01) {
    const double ratio = sinc_gaussian_approximation(x) / sinc(x);
    CHECK(ratio >= 0.9);
    CHECK(ratio <= 1.1);
  }
  CHECK(sinc_gaussian_approximation(1.0) / sinc(1.0) == doctest::Approx(0.972975619907909).epsilon(1e-12));
  CHECK(sinc_gaussian_approximation(kPi) > 0.0);
}

TEST_CASE("amplitudes at the expansion point") {
  Fixture s;
  CHECK(amplitude_exact(s.pt.signal, s.pt.idler, s.wp / 2, s.geom, s.filter, s.spec) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(amplitude_gaussian(s.pt.signal, s.pt.idler, s.wp / 2, s.geom, s.filter, s.spec, s.coeffs) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("opposite daughter shifts keep the pump envelope but leave phase matching") {
  Fixture s;
  const TransverseWavevector d{2e4, 0.0};
  CHECK(pump_envelope(s.pt.signal + d, s.pt.idler - d, s.geom) == 1.0);
  CHECK(amplitude_exact(s.pt.signal + d, s.pt.idler - d, s.wp / 2, s.geom, s.filter, s.spec) < 1.0);
}

TEST_CASE("exact amplitude at a probe point matches hand arithmetic") {
  Fixture s;
  const test::Oracle oracle{s.spec.cut_angle};
  const double ks = s.pt.signal.kx + 1e4;
  const double dk = oracle.delta_kz(ks, s.pt.idler.kx, 0.0, s.wp / 2, s.wp / 2, s.wp);
  CHECK(dk == doctest::Approx(1080.7238232884556).epsilon(1e-8));
  const double x = 0.5 * s.spec.length * dk;
  const double expected = std::exp(-0.5 * 1e-8 * 1e8) * std::sin(x) / x;
  CHECK(amplitude_exact({ks, 0.0}, s.pt.idler, s.wp / 2, s.geom, s.filter, s.spec) ==
        doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("Gaussian form keeps the printed coefficient") {
  // exp(-(L^2/10) m^2) with m the linearized mismatch.
  Fixture s;
  const TransverseWavevector d{3e3, 0.0};
  const double m = s.coeffs.d_s.x * d.kx;
  const double expected = std::exp(-0.5 * 1e-8 * 9e6) * std::exp(-1e-6 / 10.0 * m * m);
  CHECK(amplitude_gaussian(s.pt.signal + d, s.pt.idler, s.wp / 2, s.geom, s.filter, s.spec, s.coeffs) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("far tail: the Gaussian form stays positive where sinc vanishes") {
  Fixture s;
  // Choose a signal offset whose exact mismatch puts L dk / 2 at pi.
  double lo = 0.0, hi = 2e5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double dk = detail::mismatch({s.pt.signal.kx + mid, 0.0}, s.pt.idler, s.pt.pump, s.wp / 2, s.wp / 2, s.wp,
                                       s.spec);
    (0.5 * s.spec.length * std::abs(dk) < kPi ? lo : hi) = mid;
  }
  const TransverseWavevector ks{s.pt.signal.kx + lo, 0.0};
  CHECK(std::abs(amplitude_exact(ks, s.pt.idler, s.wp / 2, s.geom, s.filter, s.spec)) < 1e-9);
  CHECK(amplitude_gaussian(ks, s.pt.idler, s.wp / 2, s.geom, s.filter, s.spec, s.coeffs) > 0.0);
}

TEST_CASE("frequency term is invariant under swapping betas with mirrored detuning") {
  Fixture s;
  ExpansionCoefficients swapped = s.coeffs;
  std::swap(swapped.beta_s, swapped.beta_i);
  const TransverseWavevector d{1e3, 0.0};
  for (double det : {1e12, 5e12, 2e13}) {
    const double a = gaussian_mismatch(s.pt.signal + d, s.pt.idler, s.wp / 2 + det, s.geom, s.coeffs);
    const double b = gaussian_mismatch(s.pt.signal + d, s.pt.idler, s.wp / 2 - det, s.geom, swapped);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("envelope depends on the pump only through ks + ki - kp") {
  Fixture s;
  BeamGeometry shifted = s.geom;
  shifted.pump = {5e3, 0.0};
  const TransverseWavevector ks{4e5, 0.0}, ki{-3.9e5, 0.0};
  CHECK(pump_envelope(ks, ki, s.geom) == doctest::Approx(pump_envelope(ks + TransverseWavevector{5e3, 0.0}, ki, shifted)));
}

TEST_CASE("amplitudes never exceed one") {
  Fixture s;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dk(-5e4, 5e4), dw(-2.0, 2.0);
  for (int n = 0; n < 500; ++n) {
    const TransverseWavevector ks{s.pt.signal.kx + dk(rng), 0.0}, ki{s.pt.idler.kx + dk(rng), 0.0};
    const double wi = s.filter.center + dw(rng) * s.filter.fwhm;
    CHECK(std::abs(amplitude_exact(ks, ki, wi, s.geom, s.filter, s.spec)) <= 1.0);
    CHECK(std::abs(amplitude_gaussian(ks, ki, wi, s.geom, s.filter, s.spec, s.coeffs)) <= 1.0);
  }
}

TEST_CASE("exact amplitude rejects idler frequencies far outside the filter") {
  Fixture s;
  CHECK_THROWS_AS(amplitude_exact(s.pt.signal, s.pt.idler, s.filter.center + 6 * s.filter.fwhm, s.geom, s.filter,
                                  s.spec),
                  InputError);
}

TEST_CASE("beam geometry requires the daughters to sum to the pump") {
  Fixture s;
  BeamGeometry g = s.geom;
  g.idler0.kx += 1.0;
  CHECK_THROWS_AS(g.validate(), InputError);
  g = s.geom;
  g.waist = 0.0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
}
