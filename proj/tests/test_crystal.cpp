#include <doctest.h>

#include <cmath>
#include <random>

#include "spdcsim/crystal.hpp"
#include "spdcsim/errors.hpp"
#include "spdcsim/units.hpp"
#include "support.hpp"

using namespace spdcsim;
using spdcsim::test::Oracle;

TEST_CASE("pinned principal indices of the default BBO data") {
  const auto spec = test::default_crystal();
  CHECK(refractive_index(Polarization::ordinary, 808e-9, 0.0, spec) == doctest::Approx(1.6611317313209026).epsilon(1e-14));
  CHECK(refractive_index(Polarization::ordinary, 404e-9, 0.0, spec) == doctest::Approx(1.6925101943939174).epsilon(1e-14));
  CHECK(spec.dispersion.principal_index(Polarization::extraordinary, 808e-9) ==
        doctest::Approx(1.5460314568215534).epsilon(1e-14));
  CHECK(spec.dispersion.principal_index(Polarization::extraordinary, 404e-9) ==
        doctest::Approx(1.5681177625394047).epsilon(1e-14));
  const double n808 = refractive_index(Polarization::ordinary, 808e-9, 0.0, spec);
  CHECK(n808 > 1.5);
  CHECK(n808 < 1.8);
}

TEST_CASE("extraordinary index reduces to the principal values on and across the axis") {
  const auto spec = test::default_crystal();
  CHECK(refractive_index(Polarization::extraordinary, 808e-9, 0.0, spec) ==
        doctest::Approx(spec.dispersion.principal_index(Polarization::ordinary, 808e-9)).epsilon(1e-15));
  CHECK(refractive_index(Polarization::extraordinary, 808e-9, kPi / 2, spec) ==
        doctest::Approx(spec.dispersion.principal_index(Polarization::extraordinary, 808e-9)).epsilon(1e-15));
}

TEST_CASE("normal dispersion between 400 and 1000 nm") {
  const auto spec = test::default_crystal();
  for (auto pol : {Polarization::ordinary, Polarization::extraordinary}) {
    double previous = 10.0;
    for (double nm = 400.0; nm <= 1000.0; nm += 5.0) {
      const double n = spec.dispersion.principal_index(pol, nm * 1e-9);
      CHECK(n < previous);
      previous = n;
    }
  }
}

TEST_CASE("wavelengths outside the data range are domain errors") {
  const auto spec = test::default_crystal();
  CHECK_THROWS_AS(refractive_index(Polarization::ordinary, 300e-9, 0.0, spec), DomainError);
  CHECK_THROWS_AS(refractive_index(Polarization::ordinary, 1200e-9, 0.0, spec), DomainError);
}

TEST_CASE("bundled and file dispersion sets agree") {
  const auto builtin = builtin_dispersion("bbo_eimerl1987");
  const auto file = load_dispersion_file(SPDCSIM_DATA_DIR "/dispersion/bbo_eimerl1987.txt");
  CHECK(builtin.ordinary.a == file.ordinary.a);
  CHECK(builtin.extraordinary.d == file.extraordinary.d);
  const auto kato = resolve_dispersion("builtin:bbo_kato1986");
  CHECK(kato.name != builtin.name);
  CHECK_THROWS_AS(builtin_dispersion("quartz"), ConfigError);
  CHECK_THROWS_AS(parse_dispersion("name = x\nordinary.A = 1\n"), ConfigError);
}

TEST_CASE("extraordinary k_z matches the fixed-point oracle") {
  const auto spec = test::default_crystal();
  const Oracle oracle{spec.cut_angle};
  const double wp = test::pump_frequency();
  for (double kx : {-2e5, -1e4, 0.0, 3e4, 4.07e5}) {
    CHECK(longitudinal_wavevector(Polarization::extraordinary, {kx, 0.0}, wp, spec) ==
          doctest::Approx(oracle.kz_e(kx, wp)).epsilon(1e-13));
    CHECK(longitudinal_wavevector(Polarization::extraordinary, {kx, 0.0}, wp / 2, spec) ==
          doctest::Approx(oracle.kz_e(kx, wp / 2)).epsilon(1e-13));
  }
}

TEST_CASE("evanescent waves are domain errors") {
  const auto spec = test::default_crystal();
  CHECK_THROWS_AS(longitudinal_wavevector(Polarization::ordinary, {3e7, 0.0}, test::pump_frequency(), spec),
                  DomainError);
  CHECK_THROWS_AS(longitudinal_wavevector(Polarization::extraordinary, {3e7, 0.0}, test::pump_frequency(), spec),
                  DomainError);
}

TEST_CASE("phase mismatch at and around the pump-normal solution") {
  const auto spec = test::default_crystal();
  const double wp = test::pump_frequency();
  const auto pt = solve_phase_matching({0.0, 0.0}, wp, spec);
  const Oracle oracle{spec.cut_angle};

  CHECK(std::abs(delta_kz(pt.signal, pt.idler, pt.pump, wp / 2, wp / 2, wp, spec)) < 1e-6);

  const double d = 50.0;
  const double perturbed = delta_kz(pt.signal + TransverseWavevector{d, 0.0}, pt.idler - TransverseWavevector{d, 0.0},
                                    pt.pump, wp / 2, wp / 2, wp, spec);
  CHECK(std::abs(perturbed) > 0.0);
  CHECK(std::abs(perturbed) < 0.2 * d);

  // Detuned by 2 pi x 1 THz; frozen from the independent oracle.
  const double dw = 2.0 * kPi * 1e12;
  const double value = delta_kz(pt.signal, pt.idler, pt.pump, wp / 2 + dw, wp / 2 - dw, wp, spec);
  CHECK(value == doctest::Approx(oracle.delta_kz(pt.signal.kx, pt.idler.kx, 0.0, wp / 2 + dw, wp / 2 - dw, wp))
                     .epsilon(1e-8));
  CHECK(value == doctest::Approx(-1328.3670238312334).epsilon(1e-6));

  CHECK_THROWS_AS(delta_kz(pt.signal, pt.idler, pt.pump, wp / 2 + dw, wp / 2, wp, spec), InputError);
}

TEST_CASE("pump-normal phase matching sits at the calibrated 3 degrees") {
  const auto spec = test::default_crystal();
  const auto pt = solve_phase_matching({0.0, 0.0}, test::pump_frequency(), spec);
  CHECK(rad_to_deg(signal_external_angle(pt)) == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(pt.signal == -pt.idler);
  CHECK(pt.signal.kx == doctest::Approx(406975.88032526016).epsilon(1e-11));
}

TEST_CASE("phase matching holds and sums exactly across pump angles") {
  const auto spec = test::default_crystal();
  const double wp = test::pump_frequency();
  for (double deg = -0.15; deg <= 0.15 + 1e-12; deg += 0.01) {
    const auto kp = from_external_angle(deg_to_rad(deg), wp);
    const auto pt = solve_phase_matching(kp, wp, spec);
    CAPTURE(deg);
    CHECK(pt.pump == kp);
    CHECK(pt.signal + pt.idler == pt.pump);
    CHECK(std::abs(delta_kz(pt.signal, pt.idler, pt.pump, wp / 2, wp / 2, wp, spec)) < 1e-6);
  }
}

TEST_CASE("free phase-matching solution follows the pump with the frozen slope") {
  // Slope of the bare phase-matching direction; the pixel-level model with
  // the fixed idler fiber has a steeper slope (see the sweep tests).
  const auto spec = test::default_crystal();
  const double wp = test::pump_frequency();
  const auto pt = solve_phase_matching(from_external_angle(deg_to_rad(0.05), wp), wp, spec);
  const double slope = (rad_to_deg(signal_external_angle(pt)) - 3.0) / 0.05;
  CHECK(slope == doctest::Approx(1.5337744710157342).epsilon(1e-5));
}

TEST_CASE("no phase matching far from the calibrated cut") {
  auto spec = test::default_crystal();
  spec.cut_angle = deg_to_rad(30.0);
  CHECK_THROWS_AS(solve_phase_matching({0.0, 0.0}, test::pump_frequency(), spec), NoPhaseMatchingError);
}

TEST_CASE("expansion coefficients") {
  const auto spec = test::default_crystal();
  const double wp = test::pump_frequency();
  const auto pt = solve_phase_matching({0.0, 0.0}, wp, spec);
  const auto c = expansion_coefficients(pt, spec);

  SUBCASE("frozen values from the oracle") {
    CHECK(c.d_s.x == doctest::Approx(0.10788210015743971).epsilon(1e-7));
    CHECK(c.d_i.x == doctest::Approx(-0.02816230896860361).epsilon(1e-7));
    CHECK(c.beta_s == doctest::Approx(-5.623881048858902e-09).epsilon(1e-7));
    CHECK(c.beta_i == doctest::Approx(-5.412870739664716e-09).epsilon(1e-7));
    CHECK(std::abs(c.d_s.y) < 1e-6);
    CHECK(std::abs(c.beta_s - c.beta_i) > 1e-10);
  }

  SUBCASE("step halving changes nothing beyond 0.1 percent") {
    const auto h = expansion_coefficients(pt, spec, {0.5, kPi * 1e9});
    CHECK(h.d_s.x == doctest::Approx(c.d_s.x).epsilon(1e-3));
    CHECK(h.d_i.x == doctest::Approx(c.d_i.x).epsilon(1e-3));
    CHECK(h.beta_s == doctest::Approx(c.beta_s).epsilon(1e-3));
    CHECK(h.beta_i == doctest::Approx(c.beta_i).epsilon(1e-3));
  }

  SUBCASE("two-point stencil agrees with a four-point stencil") {
    const double h = 1.0;
    const auto f = [&](double dx) {
      return delta_kz(pt.signal + TransverseWavevector{dx, 0.0}, pt.idler, pt.pump, wp / 2, wp / 2, wp, spec);
    };
    const double four = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
    CHECK(c.d_s.x == doctest::Approx(four).epsilon(1e-6));
  }

  SUBCASE("beta difference matches the oracle's dispersion arithmetic") {
    const Oracle oracle{spec.cut_angle};
    const double hw = 2.0 * kPi * 1e9;
    const double s = pt.signal.kx, i = pt.idler.kx;
    const double bs = (oracle.delta_kz(s, i, 0.0, wp / 2 + hw, wp / 2, wp) -
                       oracle.delta_kz(s, i, 0.0, wp / 2 - hw, wp / 2, wp)) / (2 * hw);
    const double bi = (oracle.delta_kz(s, i, 0.0, wp / 2, wp / 2 + hw, wp) -
                       oracle.delta_kz(s, i, 0.0, wp / 2, wp / 2 - hw, wp)) / (2 * hw);
    CHECK(c.beta_s - c.beta_i == doctest::Approx(bs - bi).epsilon(1e-5));
  }

  SUBCASE("remainder of the linearization is second order") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const auto worst_ratio = [&](double eps_k, double eps_w) {
      double worst = 0.0;
      std::mt19937_64 local(rng);
      for (int n = 0; n < 100; ++n) {
        const TransverseWavevector dks{eps_k * unit(local), 0.0}, dki{eps_k * unit(local), 0.0};
        const double dw = eps_w * unit(local);
        const double exact = delta_kz(pt.signal + dks, pt.idler + dki, pt.pump, wp / 2 - dw, wp / 2 + dw, wp, spec);
        const double linear = c.linearized(dks, dki, -dw, dw);
        worst = std::max(worst, std::abs(exact - linear) / (eps_k * eps_k));
      }
      return worst;
    };
    const double eps = 10.0, eps_w = 2.0 * kPi * 1e10;
    const double c1 = worst_ratio(eps, eps_w);
    const double c2 = worst_ratio(eps / 2, eps_w / 2);
    CHECK(c1 > 0.0);
    CHECK(c2 == doctest::Approx(c1).epsilon(0.05));
  }

  SUBCASE("unmatched point is rejected") {
    PhaseMatchPoint off = pt;
    off.signal.kx += 1000.0;
    off.idler.kx -= 1000.0;
    CHECK_THROWS_AS(expansion_coefficients(off, spec), InputError);
  }
}

TEST_CASE("swapped polarization assignment mirrors the geometry and stays solvable") {
  auto spec = test::default_crystal();
  spec.signal_polarization = Polarization::extraordinary;
  CHECK(spec.axis_sign() == -1.0);
  CHECK(spec.idler_polarization() == Polarization::ordinary);
  const double wp = test::pump_frequency();
  const auto pt = solve_phase_matching({0.0, 0.0}, wp, spec);
  CHECK(rad_to_deg(signal_external_angle(pt)) == doctest::Approx(3.0).epsilon(1e-7));
}
