// Copyright 2026 The iontwin Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <vector>

#include "iontwin/errors.hpp"

namespace iontwin::fit {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_err = 0.0;      // from residual scatter
  double intercept_err = 0.0;
};

/// Ordinary least squares y = a + b x, with standard errors from residuals.
inline LinearFit linear(const std::vector<double>& x,
                        const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw DegenerateFit("linear fit needs >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double d = n * sxx - sx * sx;
  if (d == 0.0) throw DegenerateFit("linear fit: degenerate abscissa");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / d;
  f.intercept = (sy - f.slope * sx) / n;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ss += r * r;
  }
  const double sigma2 = n > 2 ? ss / double(n - 2) : 0.0;
  f.slope_err = std::sqrt(sigma2 * n / d);
  f.intercept_err = std::sqrt(sigma2 * sxx / d);
  return f;
}

/// Weighted least squares y = a + b x with per-point standard deviations;
/// parameter errors propagate from the supplied sigmas.
inline LinearFit linear_weighted(const std::vector<double>& x,
                                 const std::vector<double>& y,
                                 const std::vector<double>& sigma) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n || sigma.size() != n)
    throw DegenerateFit("weighted linear fit needs >= 2 points");
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sigma[i] <= 0.0) throw DegenerateFit("weighted linear fit: sigma <= 0");
    const double w = 1.0 / (sigma[i] * sigma[i]);
    sw += w;
    swx += w * x[i];
    swy += w * y[i];
    swxx += w * x[i] * x[i];
    swxy += w * x[i] * y[i];
  }
  const double d = sw * swxx - swx * swx;
  if (d == 0.0) throw DegenerateFit("weighted linear fit: degenerate abscissa");
  LinearFit f;
  f.slope = (sw * swxy - swx * swy) / d;
  f.intercept = (swy - f.slope * swx) / sw;
  f.slope_err = std::sqrt(sw / d);
  f.intercept_err = std::sqrt(swxx / d);
  return f;
}

/// Least-squares polynomial coefficients c0 + c1 x + ... + c_deg x^deg.
inline std::vector<double> polynomial(const std::vector<double>& x,
                                      const std::vector<double>& y, int deg) {
  const std::size_t n = x.size();
  if (n < std::size_t(deg) + 1 || y.size() != n)
    throw DegenerateFit("polynomial fit: not enough points");
  Eigen::MatrixXd a(n, deg + 1);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    double p = 1.0;
    for (int j = 0; j <= deg; ++j) {
      a(i, j) = p;
      p *= x[i];
    }
    b(i) = y[i];
  }
  Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  return std::vector<double>(c.data(), c.data() + deg + 1);
}

struct GaussianFit {
  double amplitude = 0.0;
  double center = 0.0;
  double waist = 0.0;  // 1/e^2 intensity radius
  double diameter() const { return 2.0 * waist; }
};

/// Fit y = A exp(-2 (x-c)^2 / w^2) via an intensity-weighted log parabola.
/// Points below `floor_frac` of the sample maximum are excluded so a noise
/// floor does not drag the parabola.
inline GaussianFit gaussian(const std::vector<double>& x,
                            const std::vector<double>& y,
                            double floor_frac = 1e-4) {
  if (x.size() != y.size() || x.size() < 3)
    throw DegenerateFit("gaussian fit needs >= 3 points");
  double ymax = 0;
  for (double v : y) ymax = std::max(ymax, v);
  if (ymax <= 0.0) throw DegenerateFit("gaussian fit: no positive samples");
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] < floor_frac * ymax) continue;
    const double w = y[i] * y[i];  // variance of log(y) ~ 1/y^2
    const double l = std::log(y[i]);
    const double xi = x[i];
    s0 += w;
    s1 += w * xi;
    s2 += w * xi * xi;
    s3 += w * xi * xi * xi;
    s4 += w * xi * xi * xi * xi;
    t0 += w * l;
    t1 += w * l * xi;
    t2 += w * l * xi * xi;
    ++used;
  }
  if (used < 3) throw DegenerateFit("gaussian fit: too few usable points");
  Eigen::Matrix3d m;
  m << s0, s1, s2, s1, s2, s3, s2, s3, s4;
  Eigen::Vector3d rhs(t0, t1, t2);
  Eigen::Vector3d c = m.fullPivLu().solve(rhs);
  if (!(c(2) < 0.0)) throw DegenerateFit("gaussian fit: non-concave profile");
  GaussianFit g;
  g.waist = std::sqrt(-2.0 / c(2));
  g.center = -c(1) / (2.0 * c(2));
  g.amplitude = std::exp(c(0) - c(1) * c(1) / (4.0 * c(2)));
  return g;
}

struct SinusoidFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;  // y = offset + amplitude * cos(x - phase)
};

/// Linear fit of y = c + a cos x + b sin x on a known-frequency fringe.
inline SinusoidFit sinusoid(const std::vector<double>& phase,
                            const std::vector<double>& y) {
  const std::size_t n = phase.size();
  if (n < 3 || y.size() != n) throw DegenerateFit("sinusoid fit needs >= 3 points");
  Eigen::MatrixXd m(n, 3);
  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, 0) = 1.0;
    m(i, 1) = std::cos(phase[i]);
    m(i, 2) = std::sin(phase[i]);
    rhs(i) = y[i];
  }
  Eigen::Vector3d c = (m.transpose() * m).ldlt().solve(m.transpose() * rhs);
  SinusoidFit f;
  f.offset = c(0);
  f.amplitude = std::hypot(c(1), c(2));
  f.phase = std::atan2(c(2), c(1));
  return f;
}

struct DecayFit {
  double tau = 0.0;
  double tau_err = 0.0;
  double amplitude = 1.0;
};

/// Exponential contrast decay C(t) = C0 exp(-t/tau), fitted by least
/// squares on log C with positivity clipping at `clip`.
inline DecayFit exponential_decay(const std::vector<double>& t,
                                  const std::vector<double>& c,
                                  double clip = 1e-3) {
  if (t.size() != c.size() || t.size() < 2)
    throw DegenerateFit("decay fit needs >= 2 points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    lx.push_back(t[i]);
    ly.push_back(std::log(std::max(c[i], clip)));
  }
  LinearFit lf = linear(lx, ly);
  if (!(lf.slope < 0.0)) throw FitFailure("decay fit: non-decaying contrast");
  DecayFit d;
  d.tau = -1.0 / lf.slope;
  d.tau_err = lf.slope_err / (lf.slope * lf.slope);
  d.amplitude = std::exp(lf.intercept);
  return d;
}

}  // namespace iontwin::fit
