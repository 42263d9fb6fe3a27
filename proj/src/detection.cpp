#include "spdcsim/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "spdcsim/errors.hpp"
#include "spdcsim/units.hpp"

namespace spdcsim {

void SpadArraySpec::validate() const {
  if (n_pixels <= 0) throw ConfigError("array needs at least one pixel");
  if (!(pitch > 0.0 && diameter > 0.0)) throw ConfigError("pixel pitch and diameter must be positive");
  if (diameter > pitch) throw ConfigError("pixel diameter exceeds the pitch");
  if (dark_rate < 0.0) throw ConfigError("dark rate must be nonnegative");
  for (int d : dead_pixels) {
    if (d < 0 || d >= n_pixels) throw ConfigError(fmt::format("dead pixel {} outside [0, {})", d, n_pixels));
  }
}

bool SpadArraySpec::is_live(int pixel) const {
  return std::find(dead_pixels.begin(), dead_pixels.end(), pixel) == dead_pixels.end();
}

std::vector<bool> SpadArraySpec::live_mask() const {
  std::vector<bool> mask(static_cast<std::size_t>(n_pixels));
  for (int i = 0; i < n_pixels; ++i) mask[static_cast<std::size_t>(i)] = is_live(i);
  return mask;
}

void IdlerChannelSpec::validate() const {
  if (!(angular_acceptance_sigma > 0.0)) throw ConfigError("idler acceptance sigma must be positive");
  if (!(coupling_efficiency > 0.0 && coupling_efficiency <= 1.0)) {
    throw ConfigError("idler coupling efficiency must lie in (0, 1]");
  }
}

void CoincidenceSettings::validate() const {
  if (!(window > 0.0)) throw ConfigError("coincidence window must be positive");
  if (spad_singles_rate < 0.0 || spcm_singles_rate < 0.0) throw ConfigError("singles rates must be nonnegative");
}

double pixel_delta_k(const SpadArraySpec& array, double focal, double lambda0) {
  if (!(focal > 0.0)) throw InputError("focal length must be positive");
  return 2.0 * kPi * array.diameter / (lambda0 * focal);
}

double pixel_wavevector(double alpha_s, double lambda0) { return 2.0 * kPi * std::sin(alpha_s) / lambda0; }

double SignalMarginal::density(double k) const {
  const double x = (k - mean) / width;
  return peak * std::exp(-x * x);
}

double SignalMarginal::integral(double k1, double k2) const {
  return 0.5 * std::sqrt(kPi) * width * peak * (std::erf((k2 - mean) / width) - std::erf((k1 - mean) / width));
}

namespace {

// exp(-Q) with Q(z) = z^T H z - 2 g^T z + c over z = (u, v, t):
// u = ks - ks0, v = ki - ki0 (rad/m), t = (wi - wp/2) / fwhm.
struct QuadraticForm {
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  double c = 0.0;

  void add(const Eigen::Vector3d& a, double b, double weight) {
    h += weight * a * a.transpose();
    g += weight * b * a;
    c += weight * b * b;
  }
};

// Q after integrating v out analytically, as a function of (u, t):
// Q2 = [u t] H2 [u t]^T - 2 g2 . (u, t) + c2, with prefactor sqrt(pi / Hvv).
struct ReducedForm {
  double h_uu, h_ut, h_tt, g_u, g_t, c, prefactor;
};

QuadraticForm build_form(const BeamGeometry& geom, const FilterSpec& filter, const CrystalSpec& spec,
                         const ExpansionCoefficients& coeffs, const IdlerChannelSpec& idler) {
  if (filter.shape != FilterShape::gaussian) {
    throw InputError("the closed-form coincidence probability needs a Gaussian filter");
  }
  const double w0 = geom.degenerate_frequency();
  const double sk = idler.sigma_k(w0);
  const double L = spec.length;
  QuadraticForm q;
  q.add({1.0, 1.0, 0.0}, geom.pump.kx - geom.signal0.kx - geom.idler0.kx, geom.waist * geom.waist);
  q.add({coeffs.d_s.x, coeffs.d_i.x, (coeffs.beta_s - coeffs.beta_i) * filter.fwhm}, 0.0, L * L / 5.0);
  q.add({0.0, 0.0, 1.0}, (filter.center - w0) / filter.fwhm, 4.0 * std::numbers::ln2);
  q.add({0.0, 1.0, 0.0}, idler.axis.kx - geom.idler0.kx, 1.0 / (2.0 * sk * sk));
  return q;
}

ReducedForm integrate_idler(const QuadraticForm& q) {
  const double hvv = q.h(1, 1);
  ReducedForm r;
  r.h_uu = q.h(0, 0) - q.h(0, 1) * q.h(0, 1) / hvv;
  r.h_ut = q.h(0, 2) - q.h(0, 1) * q.h(1, 2) / hvv;
  r.h_tt = q.h(2, 2) - q.h(1, 2) * q.h(1, 2) / hvv;
  r.g_u = q.g(0) - q.h(0, 1) * q.g(1) / hvv;
  r.g_t = q.g(2) - q.h(1, 2) * q.g(1) / hvv;
  r.c = q.c - q.g(1) * q.g(1) / hvv;
  r.prefactor = std::sqrt(kPi / hvv);
  return r;
}

double analytic_probability(double k_sx, double dk, const BeamGeometry& geom, const FilterSpec& filter,
                            const CrystalSpec& spec, const ExpansionCoefficients& coeffs,
                            const IdlerChannelSpec& idler, const IntegrationSettings& settings) {
  if (settings.frequency_span_fwhm <= 0.0) {
    const SignalMarginal m = signal_marginal(geom, filter, spec, coeffs, idler);
    return m.integral(k_sx - 0.5 * dk, k_sx + 0.5 * dk);
  }
  const ReducedForm r = integrate_idler(build_form(geom, filter, spec, coeffs, idler));
  const double a = r.h_tt;
  const double sa = std::sqrt(a);
  const double t_center = (filter.center - geom.degenerate_frequency()) / filter.fwhm;
  const double t_lo = t_center - settings.frequency_span_fwhm;
  const double t_hi = t_center + settings.frequency_span_fwhm;
  // For fixed u the t integral is an erf window; the u integral over the
  // narrow pixel window is done by Gauss-Legendre.
  const auto density = [&](double u) {
    const double b = r.g_t - r.h_ut * u;
    const double m = b / a;
    const double rest = r.h_uu * u * u - 2.0 * r.g_u * u + r.c - b * b / a;
    const double window = 0.5 * std::sqrt(kPi / a) * (std::erf(sa * (t_hi - m)) - std::erf(sa * (t_lo - m)));
    return std::exp(-rest) * window;
  };
  const double u0 = k_sx - geom.signal0.kx;
  const double integral =
      boost::math::quadrature::gauss<double, 16>::integrate(density, u0 - 0.5 * dk, u0 + 0.5 * dk);
  return r.prefactor * filter.fwhm * integral;
}

double numeric_probability(double k_sx, double dk, const BeamGeometry& geom, const FilterSpec& filter,
                           const CrystalSpec& spec, const IdlerChannelSpec& idler,
                           const IntegrationSettings& settings) {
  using Quad = boost::math::quadrature::gauss_kronrod<double, 15>;
  const double sk = idler.sigma_k(geom.degenerate_frequency());
  const double half_u = 0.5 * dk;
  const double half_v = settings.idler_span_sigma * sk;
  const double half_w = filter.shape == FilterShape::gaussian
                            ? settings.numeric_frequency_span_fwhm * filter.fwhm
                            : 0.5 * filter.fwhm;
  const double tol = settings.relative_tolerance;
  const double inner_tol = 0.01 * tol;
  const double middle_tol = 0.1 * tol;

  // Every level integrates an O(1) function over [-1, 1]; Jacobians are
  // applied once at the end.
  // Inner levels request tighter tolerances so their quadrature noise stays
  // below the outer estimate; every level must meet the contract tolerance.
  const auto checked = [&](auto&& f, const char* level, double requested) {
    double error = 0.0;
    const double value = Quad::integrate(f, -1.0, 1.0, settings.max_depth, requested, &error);
    if (!(error <= std::max(tol * std::abs(value), settings.absolute_floor))) {
      throw NumericFailure(fmt::format("{} integral missed tolerance {:.1e} (estimated error {:.3e}, value {:.3e})",
                                       level, tol, error, value),
                           error);
    }
    return value;
  };

  const auto over_signal = [&](double su) {
    const TransverseWavevector ks{k_sx + su * half_u, 0.0};
    const auto over_idler = [&](double sv) {
      const double dv = sv * half_v;
      const TransverseWavevector ki{idler.axis.kx + dv, 0.0};
      const double weight = std::exp(-dv * dv / (2.0 * sk * sk));
      const auto over_frequency = [&](double sw) {
        const double a = amplitude_exact(ks, ki, filter.center + sw * half_w, geom, filter, spec);
        return a * a;
      };
      return weight * checked(over_frequency, "idler-frequency", inner_tol);
    };
    return checked(over_idler, "idler-wavevector", middle_tol);
  };
  return checked(over_signal, "signal-wavevector", tol) * half_u * half_v * half_w;
}

}  // namespace

SignalMarginal signal_marginal(const BeamGeometry& geom, const FilterSpec& filter, const CrystalSpec& spec,
                               const ExpansionCoefficients& coeffs, const IdlerChannelSpec& idler) {
  const ReducedForm r = integrate_idler(build_form(geom, filter, spec, coeffs, idler));
  // Integrate t over the real line, leaving a(u - mu)^2 + rest.
  const double a = r.h_uu - r.h_ut * r.h_ut / r.h_tt;
  const double b = r.g_u - r.h_ut * r.g_t / r.h_tt;
  const double c = r.c - r.g_t * r.g_t / r.h_tt;
  if (!(a > 0.0)) throw NumericFailure("signal marginal is not normalizable", a);
  const double mu = b / a;
  SignalMarginal m;
  m.mean = geom.signal0.kx + mu;
  m.width = 1.0 / std::sqrt(a);
  m.peak = r.prefactor * std::sqrt(kPi / r.h_tt) * filter.fwhm * std::exp(-(c - b * mu));
  return m;
}

double coincidence_probability(double k_sx, const BeamGeometry& geom, const FilterSpec& filter,
                               const CrystalSpec& spec, const ExpansionCoefficients& coeffs,
                               const IdlerChannelSpec& idler, double dk, IntegrationMethod method,
                               const IntegrationSettings& settings) {
  if (!(dk > 0.0)) throw InputError("pixel acceptance dk must be positive");
  if (method == IntegrationMethod::analytic) {
    return analytic_probability(k_sx, dk, geom, filter, spec, coeffs, idler, settings);
  }
  return numeric_probability(k_sx, dk, geom, filter, spec, idler, settings);
}

std::vector<double> normalize_profile(const std::vector<double>& profile, const SpadArraySpec& array) {
  if (profile.size() != static_cast<std::size_t>(array.n_pixels)) {
    throw InputError("profile length differs from the pixel count");
  }
  double total = 0.0;
  for (int i = 0; i < array.n_pixels; ++i) {
    if (array.is_live(i)) total += profile[static_cast<std::size_t>(i)];
  }
  if (!(total > 0.0)) throw InputError("profile has no weight on live pixels");
  std::vector<double> out(profile.size(), 0.0);
  for (int i = 0; i < array.n_pixels; ++i) {
    if (array.is_live(i)) out[static_cast<std::size_t>(i)] = profile[static_cast<std::size_t>(i)] / total;
  }
  return out;
}

std::vector<double> expected_counts(const std::vector<double>& profile, double pair_rate, double duration,
                                    const CoincidenceSettings& settings, const SpadArraySpec& array,
                                    const IdlerChannelSpec& idler) {
  if (profile.size() != static_cast<std::size_t>(array.n_pixels)) {
    throw InputError("profile length differs from the pixel count");
  }
  if (!(duration > 0.0)) throw InputError("acquisition duration must be positive");
  if (pair_rate < 0.0) throw InputError("pair rate must be nonnegative");
  double live_sum = 0.0;
  for (int i = 0; i < array.n_pixels; ++i) {
    if (array.is_live(i)) live_sum += profile[static_cast<std::size_t>(i)];
  }
  if (live_sum > 1.0 + 1e-9) throw InputError("profile sums to more than 1 over live pixels");

  const double accidentals = settings.accidental_model == AccidentalModel::rate_product
                                 ? (settings.spad_singles_rate + array.dark_rate) * settings.spcm_singles_rate *
                                       settings.window * duration
                                 : 0.0;
  std::vector<double> out(profile.size(), 0.0);
  for (int i = 0; i < array.n_pixels; ++i) {
    if (!array.is_live(i)) continue;
    const auto k = static_cast<std::size_t>(i);
    out[k] = pair_rate * duration * profile[k] * idler.coupling_efficiency + accidentals;
  }
  return out;
}

PixelHistogram sample_histogram(const std::vector<double>& expected, std::uint64_t seed,
                                const std::vector<bool>& live) {
  if (!live.empty() && live.size() != expected.size()) throw InputError("live mask length differs");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 engine(seq);
  PixelHistogram h;
  h.seed = seed;
  h.counts.reserve(expected.size());
  for (double mean : expected) {
    if (!(mean >= 0.0)) throw InputError("expected counts must be nonnegative");
    if (mean == 0.0) {
      h.counts.push_back(0);
      continue;
    }
    std::poisson_distribution<std::int64_t> draw(mean);
    h.counts.push_back(draw(engine));
  }
  h.live = live.empty() ? std::vector<bool>(expected.size(), true) : live;
  return h;
}

}  // namespace spdcsim
