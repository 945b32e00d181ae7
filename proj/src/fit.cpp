/* Copyright 2026 The pdmr-sim Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "pdmr/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "pdmr/constants.hpp"
#include "pdmr/errors.hpp"

namespace pdmr::fit {

namespace {

double gaussian_peak(double delta, double fwhm) {
  const double u = delta / fwhm;
  return std::exp(-4.0 * kLn2 * u * u);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

// Discrete spectral peak of the detrended samples; the lowest bin wins on
// exact magnitude ties.
double spectral_peak_frequency(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = ys.size();
  if (n < 4) return 0.0;
  double mean = 0.0;
  for (double y : ys) mean += y;
  mean /= static_cast<double>(n);
  const double span = xs.back() - xs.front();
  if (!(span > 0.0)) return 0.0;
  const double dx = span / static_cast<double>(n - 1);

  std::size_t best_k = 1;
  double best_mag = -1.0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double w = -kTwoPi * static_cast<double>(k) * static_cast<double>(j) /
                       static_cast<double>(n);
      acc += (ys[j] - mean) * std::complex<double>(std::cos(w), std::sin(w));
    }
    const double mag = std::norm(acc);
    if (mag > best_mag) {
      best_mag = mag;
      best_k = k;
    }
  }
  return static_cast<double>(best_k) / (static_cast<double>(n) * dx);
}

std::vector<double> guess_gaussian(std::span<const double> xs,
                                   std::span<const double> ys, bool two_dips) {
  const std::size_t n = xs.size();
  const double offset = median(std::vector<double>(ys.begin(), ys.end()));

  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = std::abs(ys[i] - offset);
  const std::size_t i1 =
      static_cast<std::size_t>(std::max_element(dev.begin(), dev.end()) - dev.begin());
  const double amplitude = ys[i1] - offset;

  // Local half-maximum walk around the extremum; a global span would bridge
  // a resolved doublet and overestimate the width.
  std::size_t lo = i1, hi = i1;
  while (lo > 0 && dev[lo - 1] >= 0.5 * dev[i1]) --lo;
  while (hi + 1 < n && dev[hi + 1] >= 0.5 * dev[i1]) ++hi;
  double fwhm = xs[hi] - xs[lo];
  if (!(fwhm > 0.0)) fwhm = (xs.back() - xs.front()) / 6.0;

  if (!two_dips) {
    return {offset, amplitude, xs[i1], fwhm};
  }

  // Mask the first feature, then look for the second one.
  std::vector<double> masked = dev;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(xs[i] - xs[i1]) <= 1.5 * fwhm) masked[i] = 0.0;
  }
  const std::size_t i2 = static_cast<std::size_t>(
      std::max_element(masked.begin(), masked.end()) - masked.begin());
  double c1 = xs[i1], c2 = xs[i2];
  if (masked[i2] < 0.35 * dev[i1]) {
    c2 = c1 + fwhm;  // no clearly resolved second feature; assume a small split
  }
  if (c1 > c2) std::swap(c1, c2);
  return {offset, amplitude, 0.5 * (c1 + c2), std::max(c2 - c1, 0.25 * fwhm), fwhm};
}

}  // namespace

std::string_view model_name(Model m) {
  switch (m) {
    case Model::linear: return "linear";
    case Model::saturation: return "saturation";
    case Model::exp_decay: return "exp_decay";
    case Model::damped_sine: return "damped_sine";
    case Model::lowpass: return "lowpass";
    case Model::gaussian_dip: return "gaussian_dip";
    case Model::gaussian_dips: return "gaussian_dips";
  }
  return "?";
}

std::vector<std::string> parameter_names(Model m) {
  switch (m) {
    case Model::linear: return {"intercept", "slope"};
    case Model::saturation: return {"alpha", "beta"};
    case Model::exp_decay: return {"amplitude", "tau", "offset"};
    case Model::damped_sine: return {"offset", "amplitude", "frequency", "tau", "phase"};
    case Model::lowpass: return {"i0", "f0"};
    case Model::gaussian_dip: return {"offset", "amplitude", "center", "fwhm"};
    case Model::gaussian_dips: return {"offset", "amplitude", "center", "split", "fwhm"};
  }
  return {};
}

std::size_t parameter_count(Model m) { return parameter_names(m).size(); }

double eval_model(Model m, std::span<const double> p, double x) {
  switch (m) {
    case Model::linear:
      return p[0] + p[1] * x;
    case Model::saturation: {
      const double denom = 1.0 + p[1] * x;
      if (denom <= 1e-9) return 1e30;
      return p[0] * x * x / denom;
    }
    case Model::exp_decay:
      return p[0] * std::exp(-x / p[1]) + p[2];
    case Model::damped_sine:
      return p[0] + p[1] * std::exp(-x / p[3]) * std::cos(kTwoPi * p[2] * x + p[4]);
    case Model::lowpass: {
      const double denom = 1.0 + x / p[1];
      if (std::abs(denom) <= 1e-12) return 1e30;
      return p[0] / denom;
    }
    case Model::gaussian_dip:
      return p[0] + p[1] * gaussian_peak(x - p[2], p[3]);
    case Model::gaussian_dips:
      return p[0] + p[1] * (gaussian_peak(x - (p[2] - 0.5 * p[3]), p[4]) +
                            gaussian_peak(x - (p[2] + 0.5 * p[3]), p[4]));
  }
  return 0.0;
}

std::vector<double> initial_guess(Model m, std::span<const double> xs,
                                  std::span<const double> ys) {
  const std::size_t n = xs.size();
  const auto [min_it, max_it] = std::minmax_element(ys.begin(), ys.end());
  const double y_min = *min_it, y_max = *max_it;
  const double span_x = xs.back() - xs.front();

  switch (m) {
    case Model::linear: {
      // Closed-form least squares.
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
      }
      const double d = static_cast<double>(n) * sxx - sx * sx;
      if (std::abs(d) < 1e-300) return {sy / static_cast<double>(n), 0.0};
      const double slope = (static_cast<double>(n) * sxy - sx * sy) / d;
      return {(sy - slope * sx) / static_cast<double>(n), slope};
    }
    case Model::saturation: {
      std::vector<double> ratios;
      for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(xs[i]) > 1e-12) ratios.push_back(ys[i] / (xs[i] * xs[i]));
      }
      return {ratios.empty() ? 1.0 : median(std::move(ratios)), 0.0};
    }
    case Model::exp_decay: {
      // Tail mean as the offset, log-linear regression for tau.
      double tail = 0.0;
      const std::size_t tail_n = std::max<std::size_t>(1, n / 4);
      for (std::size_t i = n - tail_n; i < n; ++i) tail += ys[i];
      tail /= static_cast<double>(tail_n);
      const double amp = ys[0] - tail;
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      std::size_t used = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = (ys[i] - tail) / (amp == 0.0 ? 1.0 : amp);
        if (v > 0.05) {
          const double ly = std::log(v);
          sx += xs[i];
          sy += ly;
          sxx += xs[i] * xs[i];
          sxy += xs[i] * ly;
          ++used;
        }
      }
      double tau = span_x / 3.0;
      if (used >= 2) {
        const double d = static_cast<double>(used) * sxx - sx * sx;
        if (std::abs(d) > 1e-300) {
          const double slope = (static_cast<double>(used) * sxy - sx * sy) / d;
          if (slope < -1e-300) tau = -1.0 / slope;
        }
      }
      return {amp, tau, tail};
    }
    case Model::damped_sine: {
      double mean = 0.0;
      for (double y : ys) mean += y;
      mean /= static_cast<double>(n);
      double amp = ys[0] - mean;
      if (std::abs(amp) < 0.25 * 0.5 * (y_max - y_min)) {
        amp = 0.5 * (y_max - y_min);
      }
      double f = spectral_peak_frequency(xs, ys);
      if (!(f > 0.0)) f = 2.0 / span_x;
      return {mean, amp, f, span_x / 2.0, 0.0};
    }
    case Model::lowpass: {
      const double i0 = ys[0];
      double f0 = median(std::vector<double>(xs.begin(), xs.end()));
      for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(ys[i]) <= 0.5 * std::abs(i0)) {
          f0 = xs[i];
          break;
        }
      }
      return {i0, f0};
    }
    case Model::gaussian_dip:
      return guess_gaussian(xs, ys, false);
    case Model::gaussian_dips:
      return guess_gaussian(xs, ys, true);
  }
  return {};
}

FitReport curve_fit(Model m, std::span<const double> xs,
                    std::span<const double> ys, std::span<const double> sigma,
                    std::vector<double> guess) {
  const std::size_t n = xs.size();
  const std::size_t p = parameter_count(m);
  if (ys.size() != n || (!sigma.empty() && sigma.size() != n)) {
    throw ValidationError("curve_fit: input lengths differ");
  }
  if (n < p + 1) {
    throw ValidationError("curve_fit: need at least " + std::to_string(p + 1) + " points");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw ValidationError("curve_fit: inputs must be finite");
    }
  }

  // Unit-weight fits are normalized by the data scale so the convergence
  // thresholds below are scale invariant; a common sigma leaves the
  // minimizer and the residual-scaled uncertainties unchanged.
  std::vector<double> weights(n, 1.0);
  if (sigma.empty()) {
    double scale = 0.0;
    for (double y : ys) scale = std::max(scale, std::abs(y));
    if (scale > 0.0) {
      for (double& w : weights) w = 1.0 / scale;
    }
  } else {
    double min_pos = std::numeric_limits<double>::infinity();
    for (double s : sigma) {
      if (std::isfinite(s) && s > 0.0) min_pos = std::min(min_pos, s);
    }
    if (!std::isfinite(min_pos)) min_pos = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = (std::isfinite(sigma[i]) && sigma[i] > 0.0) ? sigma[i] : min_pos;
      weights[i] = 1.0 / s;
    }
  }

  if (guess.empty()) {
    guess = initial_guess(m, xs, ys);
  }
  if (guess.size() != p) {
    throw ValidationError("curve_fit: initial guess has the wrong length");
  }

  // Internal parameter scaling keeps the curvature well conditioned when
  // parameters span many decades (GHz centres next to radian phases).
  std::vector<double> scale(p);
  for (std::size_t j = 0; j < p; ++j) {
    scale[j] = std::abs(guess[j]) > 1e-12 ? std::abs(guess[j]) : 1.0;
  }

  std::vector<double> params(p);
  auto residuals = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r) {
    for (std::size_t j = 0; j < p; ++j) params[j] = q[static_cast<Eigen::Index>(j)] * scale[j];
    double chi2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = eval_model(m, params, xs[i]);
      const double ri = (ys[i] - f) * weights[i];
      if (!std::isfinite(ri)) {
        return std::numeric_limits<double>::infinity();
      }
      r[static_cast<Eigen::Index>(i)] = ri;
      chi2 += ri * ri;
    }
    return chi2;
  };

  Eigen::VectorXd q(p);
  for (std::size_t j = 0; j < p; ++j) q[static_cast<Eigen::Index>(j)] = guess[j] / scale[j];

  Eigen::VectorXd r(n), r_trial(n);
  double chi2 = residuals(q, r);

  FitReport report;
  report.model = m;
  report.residual_history.push_back(chi2);

  Eigen::MatrixXd jac(n, p);
  auto compute_jacobian = [&](const Eigen::VectorXd& at) {
    Eigen::VectorXd rp(n), rm(n);
    Eigen::VectorXd qp = at, qm = at;
    for (std::size_t j = 0; j < p; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double h = 6e-6 * std::max(std::abs(at[jj]), 1.0);
      qp[jj] = at[jj] + h;
      qm[jj] = at[jj] - h;
      residuals(qp, rp);
      residuals(qm, rm);
      jac.col(jj) = (rp - rm) / (2.0 * h);
      qp[jj] = at[jj];
      qm[jj] = at[jj];
    }
  };

  constexpr int kMaxIterations = 500;
  constexpr double kResidualTol = 1e-10;
  constexpr double kGradientTol = 1e-12;
  double lambda = 1e-3;
  int iter = 0;
  bool converged = false;
  std::string message;

  if (!std::isfinite(chi2)) {
    message = "initial point not evaluable";
  } else {
    for (iter = 0; iter < kMaxIterations; ++iter) {
      compute_jacobian(q);
      const Eigen::MatrixXd jtj = jac.transpose() * jac;
      const Eigen::VectorXd grad = jac.transpose() * r;
      if (grad.lpNorm<Eigen::Infinity>() < kGradientTol) {
        converged = true;
        break;
      }

      bool accepted = false;
      while (lambda <= 1e14) {
        Eigen::MatrixXd damped = jtj;
        const double floor = 1e-12 * (jtj.trace() / static_cast<double>(p) + 1e-300);
        for (std::size_t j = 0; j < p; ++j) {
          const auto jj = static_cast<Eigen::Index>(j);
          damped(jj, jj) += lambda * (jtj(jj, jj) + floor);
        }
        const Eigen::VectorXd delta = damped.ldlt().solve(grad);
        const Eigen::VectorXd q_trial = q - delta;
        const double chi2_trial = residuals(q_trial, r_trial);
        if (std::isfinite(chi2_trial) && chi2_trial < chi2) {
          const double drop = chi2 - chi2_trial;
          q = q_trial;
          r = r_trial;
          chi2 = chi2_trial;
          report.residual_history.push_back(chi2);
          lambda = std::max(lambda / 3.0, 1e-14);
          accepted = true;
          if (drop <= kResidualTol * std::max(chi2, 1e-300)) {
            converged = true;
          }
          break;
        }
        lambda *= 10.0;
      }
      if (!accepted) {
        converged = true;  // no descent direction left; treat as stationary
        message = "step size collapsed";
        break;
      }
      if (converged) break;
    }
    if (!converged && message.empty()) {
      message = "maximum iterations reached";
    }
  }

  for (std::size_t j = 0; j < p; ++j) {
    report.parameters.push_back(q[static_cast<Eigen::Index>(j)] * scale[j]);
  }
  report.residual_norm = std::isfinite(chi2) ? std::sqrt(chi2) : chi2;
  report.converged = converged;
  report.iterations = iter;
  report.message = message;

  // Uncertainties from the residual-scaled inverse curvature. The curvature
  // is equilibrated to correlation form first; raw column norms span many
  // decades and would defeat a relative rank threshold.
  residuals(q, r);
  compute_jacobian(q);
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  const Eigen::VectorXd diag = jtj.diagonal();
  report.uncertainties.assign(p, 0.0);
  bool dead_column = false;
  for (std::size_t j = 0; j < p; ++j) {
    const double d = diag[static_cast<Eigen::Index>(j)];
    if (!(d > 0.0) || !std::isfinite(d)) dead_column = true;
  }
  if (!dead_column) {
    const Eigen::VectorXd inv_sqrt = diag.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd correlation =
        inv_sqrt.asDiagonal() * jtj * inv_sqrt.asDiagonal();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(correlation);
    lu.setThreshold(1e-10);
    if (lu.rank() < static_cast<Eigen::Index>(p)) {
      dead_column = true;
    } else {
      const double dof = static_cast<double>(n) - static_cast<double>(p);
      const double variance = dof > 0.0 ? chi2 / dof : 0.0;
      const Eigen::MatrixXd inv_correlation = lu.inverse();
      for (std::size_t j = 0; j < p; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double v = inv_correlation(jj, jj) / diag[jj] * variance;
        report.uncertainties[j] = v > 0.0 ? std::sqrt(v) * scale[j] : 0.0;
      }
    }
  }
  if (dead_column) {
    report.rank_deficient = true;
    if (report.message.empty()) report.message = "rank-deficient curvature";
  }
  return report;
}

}  // namespace pdmr::fit
