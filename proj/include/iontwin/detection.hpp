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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "iontwin/errors.hpp"
#include "iontwin/rng.hpp"

namespace iontwin {

/// Photon-counting model for one detection window.
struct DetectionModel {
  double ion_rate_per_s = 4540.0;        // bright-state counts at detector
  double background_rate_per_s = 967.0;
  double window_s = 5e-3;
  double d_lifetime_s = 0.390;
};

/// Discrete photon-count distribution, truncated where the tail mass is
/// below 1e-12 and normalized to 1e-9.
struct CountHistogram {
  std::vector<double> p;  // p[k], k = 0..p.size()-1

  double mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) m += double(k) * p[k];
    return m;
  }
  double sum() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
  }
};

namespace detection_detail {

inline std::size_t support_bound(double max_mean) {
  return std::size_t(std::ceil(max_mean + 15.0 * std::sqrt(max_mean) + 25.0));
}

/// Poisson pmf over k = 0..kmax by upward recurrence.
inline void poisson_pmf(double mean, std::vector<double>& out) {
  out[0] = std::exp(-mean);
  for (std::size_t k = 1; k < out.size(); ++k)
    out[k] = out[k - 1] * mean / double(k);
}

inline void truncate_tail(CountHistogram& h) {
  double tail = 0.0;
  std::size_t cut = h.p.size();
  while (cut > 1 && tail + h.p[cut - 1] < 1e-12) {
    tail += h.p[cut - 1];
    --cut;
  }
  h.p.resize(cut);
  const double s = h.sum();
  if (std::abs(s - 1.0) > 1e-6)
    throw ModelError("histogram normalization drifted: sum = " +
                     std::to_string(s));
  for (double& v : h.p) v /= s;
}

}  // namespace detection_detail

/// Bright-state histogram: Poisson with mean (R_ion + R_bg) T.
inline CountHistogram bright_histogram(const DetectionModel& m) {
  const double mean = (m.ion_rate_per_s + m.background_rate_per_s) * m.window_s;
  CountHistogram h;
  h.p.resize(detection_detail::support_bound(std::max(mean, 1.0)));
  detection_detail::poisson_pmf(mean, h.p);
  detection_detail::truncate_tail(h);
  return h;
}

/// Dark-state histogram including decay during the window:
///   P(k) = e^{-T/tau} Pois(k; R_bg T)
///        + int_0^T (1/tau) e^{-t/tau}
///              [Pois(.; R_bg T) (*) Pois(.; (R_ion + R_bg)(T-t))](k) dt.
/// After decay the ion follows the bright histogram for the remaining
/// time, which includes the background, while background accrues over
/// the whole window; this is the convolution described in the paper's
/// count-rate analysis.  The two Poisson branches collapse to a single
/// Poisson with summed mean.  The no-decay atom is handled exactly; the
/// smooth part uses composite Simpson quadrature.
inline CountHistogram dark_histogram_with_decay(const DetectionModel& m,
                                                int quadrature_nodes = 201) {
  if (quadrature_nodes < 201) quadrature_nodes = 201;
  if (quadrature_nodes % 2 == 0) ++quadrature_nodes;
  const double T = m.window_s, tau = m.d_lifetime_s;
  const double max_mean =
      (m.ion_rate_per_s + 2.0 * m.background_rate_per_s) * T;
  const std::size_t kmax =
      detection_detail::support_bound(std::max(max_mean, 1.0));

  CountHistogram h;
  h.p.assign(kmax, 0.0);
  std::vector<double> pois(kmax);

  // Atom: no decay during the window.
  detection_detail::poisson_pmf(m.background_rate_per_s * T, pois);
  const double atom = std::exp(-T / tau);
  for (std::size_t k = 0; k < kmax; ++k) h.p[k] = atom * pois[k];

  // Simpson over the decay time.
  const int n = quadrature_nodes - 1;  // even number of intervals
  const double dt = T / n;
  for (int i = 0; i <= n; ++i) {
    const double t = i * dt;
    const double weight = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double density = std::exp(-t / tau) / tau;
    const double mean =
        m.background_rate_per_s * T +
        (m.ion_rate_per_s + m.background_rate_per_s) * (T - t);
    detection_detail::poisson_pmf(mean, pois);
    const double w = weight * density * dt / 3.0;
    for (std::size_t k = 0; k < kmax; ++k) h.p[k] += w * pois[k];
  }
  detection_detail::truncate_tail(h);
  return h;
}

/// Closed form for the first moment of the dark-with-decay histogram.
inline double dark_histogram_mean_analytic(const DetectionModel& m) {
  const double T = m.window_s, tau = m.d_lifetime_s;
  return m.background_rate_per_s * T +
         (m.ion_rate_per_s + m.background_rate_per_s) *
             (T - tau * (1.0 - std::exp(-T / tau)));
}

/// Monte Carlo sampler of the same model: draw a decay time, then the
/// background and post-decay Poisson counts.  Counter-based RNG keyed by
/// (seed, shot) so the result is schedule-invariant.
inline CountHistogram sample_dark_histogram(const DetectionModel& m,
                                            std::uint64_t shots,
                                            std::uint64_t seed) {
  const double T = m.window_s, tau = m.d_lifetime_s;
  std::vector<std::uint64_t> counts(
      detection_detail::support_bound(std::max(
          (m.ion_rate_per_s + 2.0 * m.background_rate_per_s) * T, 1.0)) +
          64,
      0);
  for (std::uint64_t shot = 0; shot < shots; ++shot) {
    CounterRng rng(seed, shot);
    const double t_decay = rng.exponential(tau);
    long k = rng.poisson(m.background_rate_per_s * T);
    if (t_decay < T)
      k += rng.poisson((m.ion_rate_per_s + m.background_rate_per_s) *
                       (T - t_decay));
    if (std::size_t(k) >= counts.size()) counts.resize(k + 1, 0);
    ++counts[k];
  }
  CountHistogram h;
  h.p.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k)
    h.p[k] = double(counts[k]) / double(shots);
  return h;
}

inline double total_variation(const CountHistogram& a,
                              const CountHistogram& b) {
  const std::size_t n = std::max(a.p.size(), b.p.size());
  double tv = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double pa = k < a.p.size() ? a.p[k] : 0.0;
    const double pb = k < b.p.size() ? b.p[k] : 0.0;
    tv += std::abs(pa - pb);
  }
  return 0.5 * tv;
}

struct FidelityResult {
  long threshold = 0;   // classify dark when k <= threshold
  double eps_d = 0.0;   // dark measured as bright
  double eps_b = 0.0;   // bright measured as dark
  double mean_fidelity = 0.0;  // 1 - (eps_d + eps_b)/2
};

/// Integer threshold minimizing the mean error (eps_d + eps_b)/2.
inline FidelityResult fidelity(const CountHistogram& bright,
                               const CountHistogram& dark) {
  const std::size_t n = std::max(bright.p.size(), dark.p.size());
  FidelityResult best;
  double best_err = 1e300;
  double bright_below = 0.0, dark_below = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    bright_below += k < bright.p.size() ? bright.p[k] : 0.0;
    dark_below += k < dark.p.size() ? dark.p[k] : 0.0;
    const double eps_b = bright_below;          // bright read as dark
    const double eps_d = 1.0 - dark_below;      // dark read as bright
    const double err = 0.5 * (eps_b + eps_d);
    if (err < best_err) {
      best_err = err;
      best.threshold = long(k);
      best.eps_b = eps_b;
      best.eps_d = std::max(eps_d, 0.0);
    }
  }
  best.mean_fidelity = 1.0 - best_err;
  return best;
}

/// Fidelity as a function of the detection window.
inline std::vector<std::pair<double, double>> fidelity_vs_window(
    const DetectionModel& m, const std::vector<double>& windows_s) {
  std::vector<std::pair<double, double>> out;
  out.reserve(windows_s.size());
  for (double T : windows_s) {
    if (T <= 0.0) throw ModelError("detection window must be > 0");
    DetectionModel mm = m;
    mm.window_s = T;
    out.emplace_back(
        T, fidelity(bright_histogram(mm), dark_histogram_with_decay(mm))
               .mean_fidelity);
  }
  return out;
}

}  // namespace iontwin
