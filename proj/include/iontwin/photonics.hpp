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
#include <string>
#include <utility>
#include <vector>

#include "iontwin/constants.hpp"
#include "iontwin/errors.hpp"

namespace iontwin {

/// Planar waveguide stack: core film between identical cladding
/// half-spaces, with a partial grating etch into the core.
///
/// Indices are taken as wavelength-independent by default (they are
/// specified at a single wavelength); `dispersion_per_nm` is a linear
/// hook for sensitivity studies and defaults to zero.
struct LayerStack {
  double core_index = 1.89;
  double clad_index = 1.5;
  double core_thickness_nm = 100.0;
  double etch_depth_nm = 40.0;
  double reference_wavelength_nm = 633.0;
  double core_dispersion_per_nm = 0.0;
  double clad_dispersion_per_nm = 0.0;

  double core_index_at(double wavelength_nm) const {
    return core_index +
           core_dispersion_per_nm * (wavelength_nm - reference_wavelength_nm);
  }
  double clad_index_at(double wavelength_nm) const {
    return clad_index +
           clad_dispersion_per_nm * (wavelength_nm - reference_wavelength_nm);
  }
};

enum class Polarization { TE, TM };

/// One out-coupling grating: phase-matching parameters plus the emitter
/// placement and orientation on the chip.  `transverse_focal_length_um`
/// is ray-level metadata consumed by the beam models; the gratings focus
/// only in the horizontal transverse direction.
struct GratingSpec {
  std::string name;
  double period_nm = 0.0;
  double n_eff_tooth = 0.0;
  double n_eff_gap = 0.0;
  double n_eff_grating = 0.0;  // duty-cycle-weighted
  double duty_cycle = 0.5;
  double emitter_width_um = 18.0;
  double transverse_focal_length_um = 0.0;
  Eigen::Vector3d position_um = Eigen::Vector3d::Zero();   // on chip, z = 0
  Eigen::Vector2d propagation_azimuth = Eigen::Vector2d::UnitX();
};

namespace detail {

/// Phase function for mode m of a symmetric slab:
///   kappa d - m pi - 2 atan(rho gamma / kappa) = 0,
/// strictly decreasing in n_eff on (n_clad, n_core).
inline double slab_phase(double n, double n_core, double n_clad,
                         double thickness_m, double wavelength_m,
                         Polarization pol, int mode) {
  const double k0 = 2.0 * constants::pi / wavelength_m;
  const double kappa = k0 * std::sqrt(std::max(n_core * n_core - n * n, 0.0));
  const double gamma = k0 * std::sqrt(std::max(n * n - n_clad * n_clad, 0.0));
  const double rho =
      pol == Polarization::TE ? 1.0 : (n_core * n_core) / (n_clad * n_clad);
  if (kappa == 0.0) return -mode * constants::pi - constants::pi;
  return kappa * thickness_m - mode * constants::pi -
         2.0 * std::atan(rho * gamma / kappa);
}

inline double solve_slab_mode(double n_core, double n_clad, double thickness_m,
                              double wavelength_m, Polarization pol, int mode) {
  if (!(n_core > n_clad))
    throw NoGuidedMode("core index must exceed cladding index");
  double lo = n_clad, hi = n_core;
  if (slab_phase(hi - 1e-15, n_core, n_clad, thickness_m, wavelength_m, pol,
                 mode) > 0.0)
    throw NoGuidedMode("no bracketed slab solution");
  if (slab_phase(lo, n_core, n_clad, thickness_m, wavelength_m, pol, mode) <=
      0.0)
    throw NoGuidedMode("mode below cutoff");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (slab_phase(mid, n_core, n_clad, thickness_m, wavelength_m, pol, mode) >
        0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-14) break;
  }
  return 0.5 * (lo + hi);
}

/// Is mode m guided?  Cutoff of the symmetric slab is V = m pi.
inline bool slab_mode_guided(double n_core, double n_clad, double thickness_m,
                             double wavelength_m, int mode) {
  if (!(n_core > n_clad)) return false;
  const double k0 = 2.0 * constants::pi / wavelength_m;
  const double v =
      k0 * thickness_m * std::sqrt(n_core * n_core - n_clad * n_clad);
  return v > mode * constants::pi;
}

}  // namespace detail

/// Fundamental-mode effective index of the symmetric slab formed by a core
/// film of the given thickness.  Bracketed bisection on the dispersion
/// relation; the residual of the returned root is below 1e-10.
inline double slab_neff(const LayerStack& stack, double wavelength_nm,
                        double thickness_nm, Polarization pol) {
  if (thickness_nm <= 0.0) throw NoGuidedMode("non-positive thickness");
  return detail::solve_slab_mode(stack.core_index_at(wavelength_nm),
                                 stack.clad_index_at(wavelength_nm),
                                 thickness_nm * nm, wavelength_nm * nm, pol, 0);
}

struct WaveguideMode {
  double n_eff = 0.0;
  bool single_mode = true;
};

/// Effective index of the quasi-TE fundamental mode of a rectangular
/// strip, by the effective-index method: slab solve through the
/// thickness (TE), then through the width (TM) using the slab result as
/// the lateral core index.  Also reports whether a second lateral mode
/// is guided.
inline WaveguideMode waveguide_neff(const LayerStack& stack, double width_nm,
                                    double wavelength_nm) {
  if (width_nm <= 0.0) throw NoGuidedMode("non-positive width");
  const double n_clad = stack.clad_index_at(wavelength_nm);
  const double n_slab = slab_neff(stack, wavelength_nm,
                                  stack.core_thickness_nm, Polarization::TE);
  WaveguideMode mode;
  mode.n_eff = detail::solve_slab_mode(n_slab, n_clad, width_nm * nm,
                                       wavelength_nm * nm, Polarization::TM, 0);
  mode.single_mode = !detail::slab_mode_guided(n_slab, n_clad, width_nm * nm,
                                               wavelength_nm * nm, 1);
  return mode;
}

/// Effective index of the partially etched grating region: duty-cycle
/// weighted average of the tooth and gap slab indices.
inline GratingSpec make_grating(const LayerStack& stack, double wavelength_nm,
                                double duty_cycle = 0.5) {
  GratingSpec g;
  g.duty_cycle = duty_cycle;
  g.n_eff_tooth =
      slab_neff(stack, wavelength_nm, stack.core_thickness_nm, Polarization::TE);
  g.n_eff_gap = slab_neff(stack, wavelength_nm,
                          stack.core_thickness_nm - stack.etch_depth_nm,
                          Polarization::TE);
  g.n_eff_grating = duty_cycle * g.n_eff_tooth + (1.0 - duty_cycle) * g.n_eff_gap;
  return g;
}

/// Vacuum emission angle from the surface normal (deg, signed; positive
/// is forward along the propagation azimuth).  Phase matching in the
/// cladding followed by refraction at the surface collapses to
///   sin(theta_vac) = n_eff - m lambda / period.
inline double emission_angle_deg(const GratingSpec& g, double wavelength_nm,
                                 int order = 1) {
  if (g.period_nm <= 0.0) throw Evanescent("grating period not set");
  if (order < 1) throw Evanescent("diffraction order must be >= 1");
  const double s = g.n_eff_grating - order * wavelength_nm / g.period_nm;
  if (std::abs(s) > 1.0)
    throw Evanescent("order " + std::to_string(order) +
                     " does not propagate in vacuum");
  return rad_to_deg(std::asin(s));
}

/// Period placing first-order emission at the target vacuum angle.
inline double design_period_nm(double n_eff, double wavelength_nm,
                               double target_angle_deg, int order = 1) {
  const double s = std::sin(deg_to_rad(target_angle_deg));
  const double denom = n_eff - s;
  if (denom <= 0.0)
    throw Unreachable("target angle unreachable for this effective index");
  return order * wavelength_nm / denom;
}

/// All integer orders m >= 1 that propagate into vacuum, with angles.
inline std::vector<std::pair<int, double>> diffraction_orders(
    const GratingSpec& g, double wavelength_nm) {
  std::vector<std::pair<int, double>> out;
  if (g.period_nm <= 0.0) return out;
  for (int m = 1;; ++m) {
    const double s = g.n_eff_grating - m * wavelength_nm / g.period_nm;
    if (s < -1.0) break;
    if (s <= 1.0) out.emplace_back(m, rad_to_deg(std::asin(s)));
  }
  return out;
}

struct IntersectionResult {
  double height_um = 0.0;
  double dz_dn_um = 0.0;          // sensitivity of the height to index error
  double closest_approach_um = 0.0;  // skew distance between centerlines
};

namespace detail {

inline Eigen::Vector3d beam_direction(const GratingSpec& g, double angle_deg) {
  const double th = deg_to_rad(angle_deg);
  const Eigen::Vector2d az = g.propagation_azimuth.normalized();
  return {std::sin(th) * az.x(), std::sin(th) * az.y(), std::cos(th)};
}

inline double crossing_height_um(const GratingSpec& a, const GratingSpec& b,
                                 double lam_a_nm, double lam_b_nm,
                                 double index_error, double* gap_um) {
  GratingSpec ga = a, gb = b;
  ga.n_eff_grating += index_error;
  gb.n_eff_grating += index_error;
  const Eigen::Vector3d da =
      beam_direction(ga, emission_angle_deg(ga, lam_a_nm));
  const Eigen::Vector3d db =
      beam_direction(gb, emission_angle_deg(gb, lam_b_nm));
  const Eigen::Vector3d pa = a.position_um, pb = b.position_um;
  // Closest approach of the two centerlines.
  const Eigen::Vector3d w = pa - pb;
  const double aa = da.dot(da), bb = da.dot(db), cc = db.dot(db);
  const double dd = da.dot(w), ee = db.dot(w);
  const double den = aa * cc - bb * bb;
  if (den < 1e-12) throw NonIntersecting("beam centerlines are parallel");
  const double ta = (bb * ee - cc * dd) / den;
  const double tb = (aa * ee - bb * dd) / den;
  if (ta <= 0.0 || tb <= 0.0)
    throw NonIntersecting("beam centerlines diverge above the chip");
  const Eigen::Vector3d qa = pa + ta * da, qb = pb + tb * db;
  if (gap_um) *gap_um = (qa - qb).norm();
  return 0.5 * (qa.z() + qb.z());
}

}  // namespace detail

/// Ray-model crossing height of two grating beams above the chip, with a
/// common effective-index offset applied to both gratings, plus the
/// finite-difference sensitivity dz/d(index_error).
inline IntersectionResult intersection_height(const GratingSpec& a,
                                              const GratingSpec& b,
                                              double lam_a_nm, double lam_b_nm,
                                              double index_error = 0.0) {
  IntersectionResult r;
  r.height_um = detail::crossing_height_um(a, b, lam_a_nm, lam_b_nm,
                                           index_error, &r.closest_approach_um);
  const double eps = 1e-4;
  const double hp =
      detail::crossing_height_um(a, b, lam_a_nm, lam_b_nm, index_error + eps,
                                 nullptr);
  const double hm =
      detail::crossing_height_um(a, b, lam_a_nm, lam_b_nm, index_error - eps,
                                 nullptr);
  r.dz_dn_um = (hp - hm) / (2.0 * eps);
  return r;
}

}  // namespace iontwin
