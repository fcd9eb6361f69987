#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "spinbath/errors.hpp"
#include "spinbath/quadrature.hpp"
#include "spinbath/redfield.hpp"
#include "spinbath/spectral.hpp"

namespace spinbath {

/// Exact solution of the single decohering-bath (sigma^z) model. The
/// coherence envelope is exp(Gamma(t)) with
///   Gamma(t) = -4 Int_0^inf dw J(w) coth(w/2T) (1 - cos wt) / w^2  <= 0,
/// and <sigma^x(t)> = exp(Gamma(t)) cos(2 Delta t) for the symmetric
/// superposition initial state. Serves as ground truth for convergence tests
/// of the reaction-coordinate pipeline.
class DephasingKernel {
 public:
  DephasingKernel(const BathSpec& zbath, double delta)
      : bath_(zbath), delta_(delta), j_(make_density(zbath)) {
    bath_.validate();
    if (bath_.axis != BathAxis::Z)
      throw std::invalid_argument("DephasingKernel: bath must couple along z");
    if (bath_.temperature <= 0.0)
      throw std::invalid_argument("DephasingKernel: temperature must be > 0");
    w_max_ = find_upper_limit();
  }

  double delta() const { return delta_; }
  double upper_limit() const { return w_max_; }

  double gamma(double t) const {
    if (t < 0.0) throw std::invalid_argument("DephasingKernel: t must be >= 0");
    if (t == 0.0) return 0.0;
    const double T = bath_.temperature;
    const double beta = 1.0 / T;
    const double slope = j_.slope_at_zero();
    const double w_eps = 1e-6 * T;

    auto integrand = [&](double w) {
      // (1 - cos wt)/w^2 evaluated as t^2 * (1-cos x)/x^2 with x = wt.
      const double osc = t * t * one_minus_cos_over_x2(w * t);
      if (w < w_eps) {
        // coth(beta w/2) ~ 2T/w + beta w/6 cancels the small-w behavior of
        // J(w) ~ slope * w analytically.
        return slope * (2.0 * T + beta * w * w / 6.0) * osc;
      }
      return j_(w) / std::tanh(0.5 * beta * w) * osc;
    };

    // Geometric bands keep the adaptive refinement focused where J lives.
    double value = 0.0;
    double lo = 0.0;
    double hi = band_scale();
    while (lo < w_max_) {
      hi = std::min(hi, w_max_);
      value += adaptive_integrate(integrand, lo, hi, 2.5e-10, 1e-9, 20000, 64).value;
      lo = hi;
      hi *= 4.0;
    }
    return -4.0 * value;
  }

  double sigma_x(double t) const { return std::exp(gamma(t)) * std::cos(2.0 * delta_ * t); }

  /// Closed-form trajectory: coherence rotates at 2*Delta and decays by
  /// exp(Gamma); populations are frozen.
  Trajectory trajectory(const std::vector<double>& times,
                        const Eigen::Matrix2cd& rho0 = default_initial_state()) const {
    Trajectory out;
    const Complex r12_0 = rho0(1, 0);
    for (double t : times) {
      const double env = std::exp(gamma(t));
      const Complex phase(std::cos(2.0 * delta_ * t), std::sin(2.0 * delta_ * t));
      Eigen::Matrix2cd q;
      q(0, 0) = rho0(0, 0);
      q(1, 1) = rho0(1, 1);
      q(1, 0) = r12_0 * env * phase;
      q(0, 1) = std::conj(q(1, 0));
      record_qubit_point(out, t, q, 0.0);
    }
    return out;
  }

  static Eigen::Matrix2cd default_initial_state() {
    Eigen::Matrix2cd m;
    m << 0.5, 0.5, 0.5, 0.5;
    return m;
  }

 private:
  static SpectralDensity make_density(const BathSpec& b) {
    return SpectralDensity::brownian(b.lambda, b.omega, b.gamma);
  }

  double band_scale() const { return std::max({bath_.omega, bath_.temperature, 1.0}); }

  // Extends the window until the analytic tail bound (J ~ 4 gamma Omega^2
  // lambda^2 / w^3 for the Brownian family) falls below 1e-12.
  double find_upper_limit() const {
    const double T = bath_.temperature;
    double w = 8.0 * band_scale();
    for (int i = 0; i < 200; ++i) {
      const double coth = 1.0 / std::tanh(0.5 * w / T);
      const double c = 4.0 * bath_.gamma * bath_.omega * bath_.omega * bath_.lambda * bath_.lambda;
      const double tail = 2.0 * c * coth / (4.0 * w * w * w * w);
      if (tail < 1e-12) return w;
      w *= 2.0;
    }
    throw NumericalError("DephasingKernel: tail bound did not converge");
  }

  BathSpec bath_;
  double delta_;
  SpectralDensity j_;
  double w_max_ = 0.0;
};

}  // namespace spinbath
