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
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "iontwin/constants.hpp"
#include "iontwin/errors.hpp"
#include "iontwin/fit.hpp"

namespace iontwin {

/// Astigmatic Gaussian beam above the chip.  Geometry is in micrometers
/// (chip frame: z up, z = 0 at the electrode surface), power in watts.
/// The "focused" transverse axis is the horizontal one (in the chip
/// plane, perpendicular to the beam); the "unfocused" axis is the
/// remaining transverse direction.  Each axis carries its own waist and
/// focus distance measured along the beam from the origin.
struct BeamField {
  std::string label;
  double wavelength_nm = 0.0;
  double power_w = 0.0;
  Eigen::Vector3d origin_um = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();  // unit vector
  double waist_focused_um = 1.0;    // 1/e^2 intensity radius
  double waist_unfocused_um = 1.0;
  double focus_distance_focused_um = 0.0;
  double focus_distance_unfocused_um = 0.0;

  /// Horizontal transverse unit vector (chip plane).
  Eigen::Vector3d axis_focused() const {
    Eigen::Vector3d h = Eigen::Vector3d::UnitZ().cross(direction);
    if (h.norm() < 1e-12) h = Eigen::Vector3d::UnitY();
    return h.normalized();
  }
  Eigen::Vector3d axis_unfocused() const {
    return direction.cross(axis_focused()).normalized();
  }

  double rayleigh_um(double waist_um) const {
    return constants::pi * waist_um * waist_um * 1e3 / wavelength_nm;
  }
  double width_focused_um(double s_um) const {
    const double zr = rayleigh_um(waist_focused_um);
    const double d = (s_um - focus_distance_focused_um) / zr;
    return waist_focused_um * std::sqrt(1.0 + d * d);
  }
  double width_unfocused_um(double s_um) const {
    const double zr = rayleigh_um(waist_unfocused_um);
    const double d = (s_um - focus_distance_unfocused_um) / zr;
    return waist_unfocused_um * std::sqrt(1.0 + d * d);
  }
};

/// Intensity in W/m^2 at a chip-frame point (um).  Elliptical Gaussian;
/// the transverse integral equals the beam power at every propagation
/// distance.
inline double intensity_at(const BeamField& beam,
                           const Eigen::Vector3d& point_um) {
  const Eigen::Vector3d r = point_um - beam.origin_um;
  const double s = r.dot(beam.direction);
  const double u = r.dot(beam.axis_focused());
  const double v = r.dot(beam.axis_unfocused());
  const double wa = beam.width_focused_um(s);
  const double wb = beam.width_unfocused_um(s);
  const double peak =
      2.0 * beam.power_w / (constants::pi * wa * um * wb * um);
  return peak * std::exp(-2.0 * u * u / (wa * wa) - 2.0 * v * v / (wb * wb));
}

/// Regular lateral sampling grid for focal-stack slices.
struct SliceGrid {
  double x0_um = -40.0;
  double y0_um = -40.0;
  double spacing_um = 0.5;
  int nx = 161;
  int ny = 161;

  double x_um(int i) const { return x0_um + i * spacing_um; }
  double y_um(int j) const { return y0_um + j * spacing_um; }
};

/// Synthetic microscope focal stack: ideal intensity slices at constant
/// height, stacked bottom to top.
struct FocalStack {
  std::vector<double> heights_um;  // strictly increasing
  SliceGrid grid;
  std::vector<Eigen::MatrixXd> slices;  // nx x ny intensity, W/m^2
};

inline FocalStack synthesize_stack(const BeamField& beam,
                                   const std::vector<double>& heights_um,
                                   const SliceGrid& grid) {
  FocalStack stack;
  stack.heights_um = heights_um;
  stack.grid = grid;
  stack.slices.reserve(heights_um.size());
  for (double z : heights_um) {
    Eigen::MatrixXd slice(grid.nx, grid.ny);
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ny; ++j)
        slice(i, j) =
            intensity_at(beam, {grid.x_um(i), grid.y_um(j), z});
    stack.slices.push_back(std::move(slice));
  }
  return stack;
}

/// Parameters recovered from a focal stack.
struct BeamEstimate {
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
  double emission_angle_deg = 0.0;  // from surface normal
  double waist_focused_um = 0.0;
  double waist_unfocused_um = 0.0;
  double focus_height_focused_um = 0.0;    // chip z of the waist
  double focus_height_unfocused_um = 0.0;
  double residual = 0.0;  // rms relative misfit of the width hyperbolae
};

namespace detail {

struct SliceMoments {
  double mass = 0.0;
  double cx = 0.0, cy = 0.0;
  // Widths (2 sigma) along the covariance eigenaxes; axis1 is the one
  // closest to the horizontal-transverse direction.
  double w1 = 0.0, w2 = 0.0;
  Eigen::Vector2d axis1, axis2;
};

inline SliceMoments slice_moments(const Eigen::MatrixXd& slice,
                                  const SliceGrid& grid,
                                  double threshold_frac) {
  SliceMoments m;
  const double thr = threshold_frac * slice.maxCoeff();
  double sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) {
      const double w = slice(i, j) < thr ? 0.0 : slice(i, j);
      m.mass += w;
      m.cx += w * grid.x_um(i);
      m.cy += w * grid.y_um(j);
    }
  if (m.mass <= 0.0) throw DegenerateFit("empty focal slice");
  m.cx /= m.mass;
  m.cy /= m.mass;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) {
      const double w = slice(i, j) < thr ? 0.0 : slice(i, j);
      const double dx = grid.x_um(i) - m.cx, dy = grid.y_um(j) - m.cy;
      sxx += w * dx * dx;
      syy += w * dy * dy;
      sxy += w * dx * dy;
    }
  sxx /= m.mass;
  syy /= m.mass;
  sxy /= m.mass;
  Eigen::Matrix2d cov;
  cov << sxx, sxy, sxy, syy;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  // Thresholding at fraction f of the peak truncates the Gaussian at
  // scaled radius S = ln(1/f) and shrinks the intensity-weighted second
  // moment by c = (1 - (1+S)e^{-S}) / (1 - e^{-S}); undo that bias.
  double c = 1.0;
  if (threshold_frac > 0.0 && threshold_frac < 1.0) {
    const double S = std::log(1.0 / threshold_frac);
    c = (1.0 - (1.0 + S) * std::exp(-S)) / (1.0 - std::exp(-S));
  }
  // 1/e^2 radius of a Gaussian is twice its standard deviation.
  m.w1 = 2.0 * std::sqrt(std::max(es.eigenvalues()(0), 0.0) / c);
  m.axis1 = es.eigenvectors().col(0);
  m.w2 = 2.0 * std::sqrt(std::max(es.eigenvalues()(1), 0.0) / c);
  m.axis2 = es.eigenvectors().col(1);
  return m;
}

struct AxisFit {
  double waist_um = 0.0;
  double focus_s_um = 0.0;
  double residual = 0.0;
};

/// Quadratic fit of w^2(s) = A + B s + C s^2, a hyperbola in disguise.
inline AxisFit fit_hyperbola(const std::vector<double>& s,
                             const std::vector<double>& w) {
  std::vector<double> w2(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) w2[i] = w[i] * w[i];
  const auto c = fit::polynomial(s, w2, 2);
  if (!(c[2] > 0.0))
    throw DegenerateFit("beam widths do not vary hyperbolically");
  AxisFit f;
  f.focus_s_um = -c[1] / (2.0 * c[2]);
  const double w0sq = c[0] - c[1] * c[1] / (4.0 * c[2]);
  if (!(w0sq > 0.0)) throw DegenerateFit("negative waist from hyperbola fit");
  f.waist_um = std::sqrt(w0sq);
  double ss = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double model = c[0] + c[1] * s[i] + c[2] * s[i] * s[i];
    const double rel = (w2[i] - model) / w2[i];
    ss += rel * rel;
  }
  f.residual = std::sqrt(ss / double(s.size()));
  return f;
}

}  // namespace detail

/// Reconstruct direction, waists, and focus heights from a focal stack:
/// per-slice centroids give the centerline by linear fit, per-slice
/// second-moment widths give a hyperbola per transverse axis.
/// `threshold_frac` rejects pixels below that fraction of the slice
/// maximum, which keeps additive noise out of the moments.
inline BeamEstimate reconstruct_beam(const FocalStack& stack,
                                     double threshold_frac = 0.02) {
  const std::size_t n = stack.slices.size();
  if (n < 3) throw DegenerateFit("need >= 3 slices to reconstruct a beam");
  std::vector<detail::SliceMoments> mom;
  mom.reserve(n);
  for (const auto& s : stack.slices)
    mom.push_back(detail::slice_moments(s, stack.grid, threshold_frac));

  // Centerline: centroid per slice, linear in height.
  std::vector<double> zs(stack.heights_um), cxs, cys;
  for (const auto& m : mom) {
    cxs.push_back(m.cx);
    cys.push_back(m.cy);
  }
  const auto fx = fit::linear(zs, cxs);
  const auto fy = fit::linear(zs, cys);
  BeamEstimate est;
  est.direction =
      Eigen::Vector3d(fx.slope, fy.slope, 1.0).normalized();
  est.emission_angle_deg = rad_to_deg(std::acos(est.direction.z()));

  // Horizontal transverse direction of the fitted beam, projected into
  // the slice plane.
  Eigen::Vector3d h3 = Eigen::Vector3d::UnitZ().cross(est.direction);
  if (h3.norm() < 1e-9) h3 = Eigen::Vector3d::UnitY();
  const Eigen::Vector2d h2 = h3.head<2>().normalized();
  const double cos_tilt = est.direction.z();

  std::vector<double> s_um, w_h, w_t;
  for (std::size_t i = 0; i < n; ++i) {
    s_um.push_back(stack.heights_um[i] / cos_tilt);
    const bool axis1_horizontal =
        std::abs(mom[i].axis1.dot(h2)) >= std::abs(mom[i].axis2.dot(h2));
    const double wh = axis1_horizontal ? mom[i].w1 : mom[i].w2;
    const double wt = axis1_horizontal ? mom[i].w2 : mom[i].w1;
    w_h.push_back(wh);
    // The tilt-plane slice stretches the second axis by 1/cos(tilt).
    w_t.push_back(wt * cos_tilt);
  }
  const auto fit_h = detail::fit_hyperbola(s_um, w_h);
  const auto fit_t = detail::fit_hyperbola(s_um, w_t);
  const double spread_h =
      *std::max_element(w_h.begin(), w_h.end()) -
      *std::min_element(w_h.begin(), w_h.end());
  if (spread_h < 1e-9 && fit_h.residual < 1e-15)
    throw DegenerateFit("slice widths do not vary across the stack");
  est.waist_focused_um = fit_h.waist_um;
  est.waist_unfocused_um = fit_t.waist_um;
  est.focus_height_focused_um = fit_h.focus_s_um * cos_tilt;
  est.focus_height_unfocused_um = fit_t.focus_s_um * cos_tilt;
  est.residual = std::max(fit_h.residual, fit_t.residual);
  return est;
}

/// Intensity samples along a line parallel to the trap axis (y) at fixed
/// height and x.
inline std::vector<std::pair<double, double>> axial_cut(
    const BeamField& beam, double z_um, double x_um,
    const std::vector<double>& ys_um) {
  std::vector<std::pair<double, double>> out;
  out.reserve(ys_um.size());
  for (double y : ys_um)
    out.emplace_back(y, intensity_at(beam, {x_um, y, z_um}));
  return out;
}

/// Gaussian fit of a cut: center and 1/e^2 diameter along y.
inline fit::GaussianFit fit_cut(
    const std::vector<std::pair<double, double>>& cut) {
  std::vector<double> ys, is;
  for (const auto& [y, i] : cut) {
    ys.push_back(y);
    is.push_back(i);
  }
  return fit::gaussian(ys, is);
}

}  // namespace iontwin
