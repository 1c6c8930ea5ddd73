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
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "iontwin/constants.hpp"
#include "iontwin/errors.hpp"

namespace iontwin {

enum class ElectrodeRole { RF, DC, Ground };

/// Rectangular electrode patch in the chip plane (z = 0).  All lengths
/// in meters.  `voltage` is the DC potential for DC patches and the
/// drive amplitude for RF patches.
struct ElectrodePatch {
  std::string name;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  ElectrodeRole role = ElectrodeRole::Ground;
  double voltage = 0.0;
};

struct TrapModel {
  std::vector<ElectrodePatch> patches;
  double rf_omega = 2.0 * constants::pi * 50e6;  // rad/s
  double ion_mass_kg = 88.0 * constants::amu;
  double ion_charge_c = constants::elementary_charge;
  Eigen::Vector3d stray_field = Eigen::Vector3d::Zero();  // V/m, uniform

  std::vector<std::size_t> dc_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < patches.size(); ++i)
      if (patches[i].role == ElectrodeRole::DC) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> rf_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < patches.size(); ++i)
      if (patches[i].role == ElectrodeRole::RF) out.push_back(i);
    return out;
  }
};

namespace trap_detail {

// Gapless-plane solution for a unit-voltage rectangle in the z = 0
// plane.  The potential in the half space z > 0 is a signed sum of
// arctan terms over the four corners; the gradient is closed-form.
inline double corner_term(double X, double Y, double z) {
  const double r = std::sqrt(X * X + Y * Y + z * z);
  return std::atan2(X * Y, z * r);
}

inline Eigen::Vector3d corner_grad(double X, double Y, double z) {
  const double r = std::sqrt(X * X + Y * Y + z * z);
  const double dX = z * Y / (r * (X * X + z * z));
  const double dY = z * X / (r * (Y * Y + z * z));
  const double dz = -X * Y * (r * r + z * z) /
                    (r * (X * X + z * z) * (Y * Y + z * z));
  return {dX, dY, dz};
}

}  // namespace trap_detail

/// Potential (volts) of one patch at a point with z > 0, unit-free in
/// the patch voltage.  Harmonic in the half space; approaches the patch
/// voltage directly above the interior and zero far away.
inline double patch_shape(const ElectrodePatch& p, const Eigen::Vector3d& r) {
  if (r.z() <= 0.0) throw OnSurface("patch potential evaluated at z <= 0");
  using trap_detail::corner_term;
  const double s = corner_term(r.x() - p.x2, r.y() - p.y2, r.z()) -
                   corner_term(r.x() - p.x1, r.y() - p.y2, r.z()) -
                   corner_term(r.x() - p.x2, r.y() - p.y1, r.z()) +
                   corner_term(r.x() - p.x1, r.y() - p.y1, r.z());
  return s / (2.0 * constants::pi);
}

inline double patch_potential(const ElectrodePatch& p,
                              const Eigen::Vector3d& r) {
  return p.voltage * patch_shape(p, r);
}

/// Analytic gradient of the unit-voltage patch shape (1/m).
inline Eigen::Vector3d patch_shape_gradient(const ElectrodePatch& p,
                                            const Eigen::Vector3d& r) {
  if (r.z() <= 0.0) throw OnSurface("patch gradient evaluated at z <= 0");
  using trap_detail::corner_grad;
  const Eigen::Vector3d g =
      corner_grad(r.x() - p.x2, r.y() - p.y2, r.z()) -
      corner_grad(r.x() - p.x1, r.y() - p.y2, r.z()) -
      corner_grad(r.x() - p.x2, r.y() - p.y1, r.z()) +
      corner_grad(r.x() - p.x1, r.y() - p.y1, r.z());
  return g / (2.0 * constants::pi);
}

inline Eigen::Vector3d patch_gradient(const ElectrodePatch& p,
                                      const Eigen::Vector3d& r) {
  return p.voltage * patch_shape_gradient(p, r);
}

/// RF potential amplitude and its gradient at a point.
inline double rf_potential(const TrapModel& t, const Eigen::Vector3d& r) {
  double v = 0.0;
  for (const auto& p : t.patches)
    if (p.role == ElectrodeRole::RF) v += patch_potential(p, r);
  return v;
}

inline Eigen::Vector3d rf_gradient(const TrapModel& t,
                                   const Eigen::Vector3d& r) {
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  for (const auto& p : t.patches)
    if (p.role == ElectrodeRole::RF) g += patch_gradient(p, r);
  return g;
}

inline double dc_potential(const TrapModel& t, const Eigen::Vector3d& r) {
  double v = 0.0;
  for (const auto& p : t.patches)
    if (p.role == ElectrodeRole::DC) v += patch_potential(p, r);
  return v - t.stray_field.dot(r);
}

inline Eigen::Vector3d dc_gradient(const TrapModel& t,
                                   const Eigen::Vector3d& r) {
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  for (const auto& p : t.patches)
    if (p.role == ElectrodeRole::DC) g += patch_gradient(p, r);
  return g - t.stray_field;
}

/// Ponderomotive (pseudo)potential in joules:
///   Phi_p = q^2 |grad V_RF|^2 / (4 m Omega^2).
inline double pseudopotential_j(const TrapModel& t, const Eigen::Vector3d& r) {
  const double q = t.ion_charge_c;
  return q * q * rf_gradient(t, r).squaredNorm() /
         (4.0 * t.ion_mass_kg * t.rf_omega * t.rf_omega);
}

inline double pseudopotential_ev(const TrapModel& t,
                                 const Eigen::Vector3d& r) {
  return pseudopotential_j(t, r) / constants::elementary_charge;
}

/// Total effective potential energy of the ion (joules).
inline double total_energy_j(const TrapModel& t, const Eigen::Vector3d& r) {
  return pseudopotential_j(t, r) + t.ion_charge_c * dc_potential(t, r);
}

inline Eigen::Vector3d total_energy_gradient_j(const TrapModel& t,
                                               const Eigen::Vector3d& r,
                                               double fd_step = 1e-9) {
  Eigen::Vector3d g = t.ion_charge_c * dc_gradient(t, r);
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d dp = r, dm = r;
    dp(k) += fd_step;
    dm(k) -= fd_step;
    g(k) += (pseudopotential_j(t, dp) - pseudopotential_j(t, dm)) /
            (2.0 * fd_step);
  }
  return g;
}

namespace trap_detail {

/// Jacobi eigensolver for a symmetric 3x3 matrix; rotations are applied
/// until the off-diagonal norm is below 1e-12 of the matrix scale.
inline void jacobi_eigen3(Eigen::Matrix3d a, Eigen::Vector3d& values,
                          Eigen::Matrix3d& vectors) {
  vectors.setIdentity();
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = std::sqrt(a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) +
                           a(1, 2) * a(1, 2));
    if (off < 1e-12 * scale) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double tt = (theta >= 0 ? 1.0 : -1.0) /
                          (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(tt * tt + 1.0), s = tt * c;
        Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = s;
        rot(q, p) = -s;
        a = rot.transpose() * a * rot;
        vectors = vectors * rot;
      }
  }
  values = a.diagonal();
}

}  // namespace trap_detail

/// Hessian of the total potential energy by central differences of the
/// gradient (default step 0.1 um), symmetrized.
inline Eigen::Matrix3d total_energy_hessian_j(const TrapModel& t,
                                              const Eigen::Vector3d& r,
                                              double step = 1e-7) {
  Eigen::Matrix3d h;
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d dp = r, dm = r;
    dp(k) += step;
    dm(k) -= step;
    h.col(k) = (total_energy_gradient_j(t, dp) -
                total_energy_gradient_j(t, dm)) /
               (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

/// RF-null point in the (x, z) plane at fixed y: Newton solve of
/// (dV/dx, dV/dz) = 0 from a coarse-grid seed.  Residual gradient norm
/// below 1e-8 of the characteristic field scale.
inline Eigen::Vector3d find_null_at_y(const TrapModel& t, double y) {
  if (t.rf_indices().empty()) throw NoNull("trap has no RF patches");
  // Characteristic scale: strongest field magnitude along the seed grid.
  double best = 1e300, field_scale = 0.0;
  double x0 = 0.0, z0 = 50e-6;
  for (int iz = 1; iz <= 120; ++iz)
    for (int ix = -20; ix <= 20; ++ix) {
      const Eigen::Vector3d p(ix * 5e-6, y, iz * 2.5e-6);
      const Eigen::Vector3d g = rf_gradient(t, p);
      const double m2 = g.x() * g.x() + g.z() * g.z();
      field_scale = std::max(field_scale, std::sqrt(m2));
      if (m2 < best) {
        best = m2;
        x0 = p.x();
        z0 = p.z();
      }
    }
  Eigen::Vector2d u(x0, z0);
  const double tol = 1e-8 * std::max(field_scale, 1e-30);
  const double h = 1e-9;
  for (int it = 0; it < 100; ++it) {
    const Eigen::Vector3d g = rf_gradient(t, {u.x(), y, u.y()});
    const Eigen::Vector2d f(g.x(), g.z());
    if (f.norm() < tol) return {u.x(), y, u.y()};
    Eigen::Matrix2d jac;
    for (int k = 0; k < 2; ++k) {
      Eigen::Vector2d up = u, um = u;
      up(k) += h;
      um(k) -= h;
      const Eigen::Vector3d gp = rf_gradient(t, {up.x(), y, up.y()});
      const Eigen::Vector3d gm = rf_gradient(t, {um.x(), y, um.y()});
      jac(0, k) = (gp.x() - gm.x()) / (2.0 * h);
      jac(1, k) = (gp.z() - gm.z()) / (2.0 * h);
    }
    Eigen::Vector2d step = jac.fullPivLu().solve(f);
    // Keep the iterate above the surface.
    while (u.y() - step.y() <= 0.0) step *= 0.5;
    u -= step;
  }
  throw NoNull("null search did not converge at y = " + std::to_string(y));
}

/// Samples of the RF-null curve over a y range.
inline std::vector<Eigen::Vector3d> find_null(const TrapModel& t,
                                              const std::vector<double>& ys) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(ys.size());
  for (double y : ys) out.push_back(find_null_at_y(t, y));
  return out;
}

/// Five-wire reconstruction: symmetric RF rails whose gapless-plane null
/// sits at the target height (sqrt of inner x outer edge), flanked by
/// segmented DC electrodes.  The RF amplitude is left at 1 V; scale it
/// to set the radial frequencies.
inline TrapModel design_geometry(double target_height_m,
                                 double rail_aspect = 2.0,
                                 double rail_length_m = 4e-3,
                                 int dc_segments_per_side = 5,
                                 double dc_pitch_m = 100e-6,
                                 double dc_width_m = 100e-6) {
  if (target_height_m <= 0.0) throw Unreachable("target height must be > 0");
  if (rail_aspect <= 1.0) throw Unreachable("rail aspect must exceed 1");
  TrapModel t;
  const double a = target_height_m / std::sqrt(rail_aspect);
  const double b = a * rail_aspect;
  const double half_len = 0.5 * rail_length_m;
  t.patches.push_back(
      {"rf+", a, b, -half_len, half_len, ElectrodeRole::RF, 1.0});
  t.patches.push_back(
      {"rf-", -b, -a, -half_len, half_len, ElectrodeRole::RF, 1.0});
  const double dc_x1 = b, dc_x2 = b + dc_width_m;
  const double y_lo = -0.5 * dc_segments_per_side * dc_pitch_m;
  for (int side = 0; side < 2; ++side)
    for (int i = 0; i < dc_segments_per_side; ++i) {
      ElectrodePatch p;
      p.name = (side == 0 ? "dcE" : "dcW") + std::to_string(i);
      p.x1 = side == 0 ? dc_x1 : -dc_x2;
      p.x2 = side == 0 ? dc_x2 : -dc_x1;
      p.y1 = y_lo + i * dc_pitch_m;
      p.y2 = p.y1 + dc_pitch_m;
      p.role = ElectrodeRole::DC;
      t.patches.push_back(p);
    }
  return t;
}

/// Scale the RF amplitude so the geometric-mean radial secular frequency
/// equals the target (secular frequencies are linear in the amplitude).
inline void set_radial_frequency(TrapModel& t, double target_omega) {
  const Eigen::Vector3d null = find_null_at_y(t, 0.0);
  const Eigen::Matrix3d h = total_energy_hessian_j(t, null);
  Eigen::Vector3d vals;
  Eigen::Matrix3d vecs;
  trap_detail::jacobi_eigen3(h, vals, vecs);
  // Radial modes: the two largest curvatures of the RF-only potential.
  std::vector<double> w;
  for (int i = 0; i < 3; ++i)
    if (vals(i) > 0.0) w.push_back(std::sqrt(vals(i) / t.ion_mass_kg));
  if (w.size() < 2) throw NoNull("radial curvature not positive at the null");
  std::sort(w.begin(), w.end());
  const double radial = std::sqrt(w[w.size() - 1] * w[w.size() - 2]);
  const double scale = target_omega / radial;
  for (auto& p : t.patches)
    if (p.role == ElectrodeRole::RF) p.voltage *= scale;
}

struct WellSolution {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // m
  Eigen::Vector3d secular_omega = Eigen::Vector3d::Zero();  // rad/s, (x,y,z)
  Eigen::Matrix3d principal_axes = Eigen::Matrix3d::Identity();  // columns
  std::vector<double> dc_voltages;  // one per DC patch, trap order
  double condition_number = 0.0;
};

/// Least-squares DC voltage set producing a harmonic well at
/// (x_null, target_y, z_null) with the requested axial curvature.
/// Constraints: zero total gradient (3) and the axial second derivative
/// (1); the minimum-norm solution is taken over all DC electrodes.
inline WellSolution solve_axial_well(const TrapModel& t, double target_y,
                                     double target_axial_omega) {
  const auto dc = t.dc_indices();
  if (dc.size() < 5)
    throw Infeasible("need >= 5 DC electrodes, have " +
                     std::to_string(dc.size()));
  const Eigen::Vector3d r0 = find_null_at_y(t, target_y);
  const double q = t.ion_charge_c;
  const double fd = 1e-7;  // 0.1 um curvature step

  Eigen::MatrixXd m(4, dc.size());
  for (std::size_t j = 0; j < dc.size(); ++j) {
    const auto& p = t.patches[dc[j]];
    const Eigen::Vector3d g = patch_shape_gradient(p, r0);
    m(0, j) = g.x();
    m(1, j) = g.y();
    m(2, j) = g.z();
    Eigen::Vector3d rp = r0, rm = r0;
    rp.y() += fd;
    rm.y() -= fd;
    m(3, j) = (patch_shape_gradient(p, rp).y() -
               patch_shape_gradient(p, rm).y()) /
              (2.0 * fd);
  }
  // Pseudopotential contribution (and stray field) to be cancelled.
  Eigen::Vector4d rhs;
  {
    Eigen::Vector3d gp = Eigen::Vector3d::Zero();
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d dp = r0, dm = r0;
      dp(k) += 1e-8;
      dm(k) -= 1e-8;
      gp(k) = (pseudopotential_j(t, dp) - pseudopotential_j(t, dm)) / 2e-8;
    }
    Eigen::Vector3d rp = r0, rm = r0;
    rp.y() += fd;
    rm.y() -= fd;
    double d2p = 0.0;
    {
      auto gy = [&](const Eigen::Vector3d& p) {
        Eigen::Vector3d yp = p, ym = p;
        yp.y() += 1e-8;
        ym.y() -= 1e-8;
        return (pseudopotential_j(t, yp) - pseudopotential_j(t, ym)) / 2e-8;
      };
      d2p = (gy(rp) - gy(rm)) / (2.0 * fd);
    }
    const double target_curv =
        t.ion_mass_kg * target_axial_omega * target_axial_omega;
    rhs << (-gp.x() + q * t.stray_field.x()) / q,
        (-gp.y() + q * t.stray_field.y()) / q,
        (-gp.z() + q * t.stray_field.z()) / q, (target_curv - d2p) / q;
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m);
  const Eigen::VectorXd v = cod.solve(rhs);
  const double resid = (m * v - rhs).norm();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const double cond = svd.singularValues()(0) /
                      svd.singularValues()(svd.singularValues().size() - 1);
  if (resid > 1e-6 * std::max(rhs.norm(), 1e-30))
    throw Infeasible("voltage least squares residual " + std::to_string(resid) +
                     ", condition number " + std::to_string(cond));

  TrapModel solved = t;
  for (std::size_t j = 0; j < dc.size(); ++j)
    solved.patches[dc[j]].voltage = v(j);

  // Refine the well position: Newton on the total-energy gradient.
  Eigen::Vector3d r = r0;
  for (int it = 0; it < 50; ++it) {
    const Eigen::Vector3d g = total_energy_gradient_j(solved, r);
    const Eigen::Matrix3d h = total_energy_hessian_j(solved, r);
    const Eigen::Vector3d step = h.fullPivLu().solve(g);
    r -= step;
    if (step.norm() < 1e-12) break;
  }

  const Eigen::Matrix3d h = total_energy_hessian_j(solved, r);
  Eigen::Vector3d vals;
  Eigen::Matrix3d vecs;
  trap_detail::jacobi_eigen3(h, vals, vecs);
  for (int i = 0; i < 3; ++i)
    if (!(vals(i) > 0.0))
      throw Infeasible("well Hessian not positive definite at y = " +
                       std::to_string(target_y));

  // Order modes by dominant coordinate axis.
  WellSolution w;
  w.position = r;
  w.condition_number = cond;
  w.dc_voltages.assign(v.data(), v.data() + v.size());
  std::array<int, 3> pick{-1, -1, -1};
  std::array<bool, 3> used{false, false, false};
  for (int axis = 0; axis < 3; ++axis) {
    double bestproj = -1.0;
    for (int i = 0; i < 3; ++i) {
      if (used[i]) continue;
      const double proj = std::abs(vecs(axis, i));
      if (proj > bestproj) {
        bestproj = proj;
        pick[axis] = i;
      }
    }
    used[pick[axis]] = true;
  }
  for (int axis = 0; axis < 3; ++axis) {
    w.secular_omega(axis) = std::sqrt(vals(pick[axis]) / t.ion_mass_kg);
    w.principal_axes.col(axis) = vecs.col(pick[axis]);
  }

  const double achieved = w.secular_omega(1);
  if (std::abs(achieved - target_axial_omega) > 0.01 * target_axial_omega)
    throw Infeasible("axial frequency missed target by " +
                     std::to_string(std::abs(achieved / target_axial_omega - 1.0)) +
                     " relative, condition number " + std::to_string(cond));
  return w;
}

/// Re-solve the well along a list of axial positions.
inline std::vector<WellSolution> shuttle_scan(const TrapModel& t,
                                              const std::vector<double>& ys,
                                              double axial_omega) {
  std::vector<WellSolution> out;
  out.reserve(ys.size());
  for (double y : ys) {
    try {
      out.push_back(solve_axial_well(t, y, axial_omega));
    } catch (const Infeasible& e) {
      throw Infeasible("shuttle point y = " + std::to_string(y) + ": " +
                       e.what());
    }
  }
  return out;
}

}  // namespace iontwin
