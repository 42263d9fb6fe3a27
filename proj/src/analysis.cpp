#include "spdcsim/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <unsupported/Eigen/LevenbergMarquardt>

namespace spdcsim {

double GaussianFit::eval(double x) const {
  const double z = (x - center) / width;
  return amplitude * std::exp(-z * z) + offset;
}

namespace {

constexpr int kMaxIterations = 200;

struct GaussianResiduals : Eigen::DenseFunctor<double> {
  std::vector<double> x, y, inv_sigma;

  GaussianResiduals(std::vector<double> xs, std::vector<double> ys, std::vector<double> is)
      : DenseFunctor<double>(4, static_cast<int>(xs.size())), x(std::move(xs)), y(std::move(ys)),
        inv_sigma(std::move(is)) {}

  int operator()(const InputType& p, ValueType& r) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double z = (x[i] - p[1]) / p[2];
      r[static_cast<Eigen::Index>(i)] = (p[0] * std::exp(-z * z) + p[3] - y[i]) * inv_sigma[i];
    }
    return 0;
  }

  int df(const InputType& p, JacobianType& j) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const double z = (x[i] - p[1]) / p[2];
      const double e = std::exp(-z * z);
      j(row, 0) = e * inv_sigma[i];
      j(row, 1) = p[0] * e * 2.0 * z / p[2] * inv_sigma[i];
      j(row, 2) = p[0] * e * 2.0 * z * z / p[2] * inv_sigma[i];
      j(row, 3) = inv_sigma[i];
    }
    return 0;
  }
};

bool converged(Eigen::LevenbergMarquardtSpace::Status s) {
  using namespace Eigen::LevenbergMarquardtSpace;
  switch (s) {
    case RelativeReductionTooSmall:
    case RelativeErrorTooSmall:
    case RelativeErrorAndReductionTooSmall:
    case CosinusTooSmall:
    case FtolTooSmall:
    case XtolTooSmall:
    case GtolTooSmall:
      return true;
    default:
      return false;
  }
}

}  // namespace

GaussianFit fit_gaussian(const std::vector<double>& values, const std::vector<bool>& live, FitWeights weights) {
  if (values.size() != live.size()) throw InputError("values and live mask differ in length");
  std::vector<double> xs, ys, inv_sigma;
  int nonzero = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!live[i]) continue;
    if (!std::isfinite(values[i])) throw InputError(fmt::format("pixel {} holds a non-finite value", i));
    xs.push_back(static_cast<double>(i));
    ys.push_back(values[i]);
    inv_sigma.push_back(weights == FitWeights::poisson ? 1.0 / std::sqrt(std::max(values[i], 1.0)) : 1.0);
    if (values[i] != 0.0) ++nonzero;
  }
  if (nonzero < 5) throw InputError(fmt::format("Gaussian fit needs 5 live nonzero pixels, got {}", nonzero));

  // Moment seeding on the background-subtracted data.
  const double y_min = *std::min_element(ys.begin(), ys.end());
  const double y_max = *std::max_element(ys.begin(), ys.end());
  if (!(y_max > y_min)) throw FitError("flat data carry no peak to fit", {});
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double w = ys[i] - y_min;
    s0 += w;
    s1 += w * xs[i];
  }
  const double mean = s0 > 0.0 ? s1 / s0 : 0.5 * (xs.front() + xs.back());
  for (std::size_t i = 0; i < xs.size(); ++i) s2 += (ys[i] - y_min) * (xs[i] - mean) * (xs[i] - mean);
  const double sd = s0 > 0.0 ? std::sqrt(s2 / s0) : 0.25 * (xs.back() - xs.front());

  Eigen::VectorXd p(4);
  p << y_max - y_min, mean, std::max(sd * std::sqrt(2.0), 0.5), y_min;

  GaussianResiduals functor(xs, ys, inv_sigma);
  Eigen::LevenbergMarquardt<GaussianResiduals> lm(functor);
  lm.setXtol(1e-8);
  lm.setFtol(1e-14);
  lm.setGtol(0.0);
  lm.setMaxfev(100 * kMaxIterations);

  std::vector<FitIterate> trace;
  const auto record = [&]() {
    trace.push_back({{p[0], p[1], p[2], p[3]}, lm.fnorm()});
  };
  auto status = lm.minimizeInit(p);
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters) {
    throw FitError("improper input to the Gaussian fit", trace);
  }
  int iterations = 0;
  do {
    status = lm.minimizeOneStep(p);
    ++iterations;
    record();
  } while (status == Eigen::LevenbergMarquardtSpace::Running && iterations < kMaxIterations);

  if (!converged(status)) {
    throw FitError(fmt::format("Gaussian fit did not converge after {} iterations (status {})", iterations,
                               static_cast<int>(status)),
                   trace);
  }
  const double n_pix = static_cast<double>(values.size());
  if (!(std::abs(p[2]) > 0.0) || !(p[1] >= -2.0 && p[1] <= n_pix + 2.0)) {
    throw FitError(fmt::format("Gaussian fit left the valid region (centre {:.3f}, width {:.3f})", p[1], p[2]),
                   trace);
  }
  p[2] = std::abs(p[2]);

  Eigen::VectorXd r(static_cast<Eigen::Index>(xs.size()));
  functor(p, r);
  Eigen::MatrixXd j(static_cast<Eigen::Index>(xs.size()), 4);
  functor.df(p, j);
  const double dof = static_cast<double>(xs.size()) - 4.0;
  const double chi2 = r.squaredNorm();
  Eigen::Matrix4d cov = (j.transpose() * j).inverse();
  if (weights == FitWeights::uniform && dof > 0.0) cov *= chi2 / dof;

  GaussianFit fit;
  fit.amplitude = p[0];
  fit.center = p[1];
  fit.width = p[2];
  fit.offset = p[3];
  fit.amplitude_sigma = std::sqrt(cov(0, 0));
  fit.center_sigma = std::sqrt(cov(1, 1));
  fit.width_sigma = std::sqrt(cov(2, 2));
  fit.offset_sigma = std::sqrt(cov(3, 3));
  fit.reduced_chi2 = dof > 0.0 ? chi2 / dof : 0.0;
  fit.iterations = iterations;
  return fit;
}

GaussianFit fit_gaussian(const PixelHistogram& h) {
  h.validate();
  std::vector<double> values(h.counts.begin(), h.counts.end());
  return fit_gaussian(values, h.live, FitWeights::poisson);
}

double angle_from_center(double center, const PixelCalibration& calib) { return calib.angle_of(center); }

LinearFit fit_linear(const std::vector<LinearPoint>& points) {
  if (points.size() < 3) throw InputError("linear fit needs at least 3 points");
  double s = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& pt : points) {
    if (!(pt.sigma > 0.0)) throw InputError("linear-fit uncertainties must be positive");
    const double w = 1.0 / (pt.sigma * pt.sigma);
    s += w;
    sx += w * pt.x;
    sy += w * pt.y;
    sxx += w * pt.x * pt.x;
    sxy += w * pt.x * pt.y;
  }
  const double det = s * sxx - sx * sx;
  if (!(det > 1e-12 * s * sxx)) throw InputError("linear fit abscissas are degenerate");
  LinearFit fit;
  fit.intercept = (sxx * sy - sx * sxy) / det;
  fit.slope = (s * sxy - sx * sy) / det;
  fit.intercept_sigma = std::sqrt(sxx / det);
  fit.slope_sigma = std::sqrt(s / det);
  fit.covariance = -sx / det;
  for (const auto& pt : points) {
    const double r = (pt.y - fit.intercept - fit.slope * pt.x) / pt.sigma;
    fit.chi2 += r * r;
  }
  return fit;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b, const std::vector<bool>& live) {
  if (a.size() != b.size() || a.size() != live.size()) throw InputError("correlation inputs differ in length");
  double n = 0.0, ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!live[i]) continue;
    n += 1.0;
    ma += a[i];
    mb += b[i];
  }
  if (n < 2.0) throw InputError("correlation needs two live points");
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!live[i]) continue;
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace spdcsim
