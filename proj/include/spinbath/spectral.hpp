#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "spinbath/errors.hpp"
#include "spinbath/qcore.hpp"
#include "spinbath/quadrature.hpp"

namespace spinbath {

/// One bosonic bath attached to a single spin axis. `lambda` and `omega` are
/// the peak coupling and peak frequency of the Brownian spectral density;
/// `gamma` doubles as its width and as the residual Ohmic coupling after the
/// reaction-coordinate mapping; `cutoff` is the residual Ohmic cutoff.
struct BathSpec {
  BathAxis axis = BathAxis::Z;
  double lambda = 0.0;
  double omega = 8.0;
  double gamma = 0.05 / M_PI;
  double temperature = 1.0;
  double cutoff = 1000.0;

  double epsilon() const { return lambda / omega; }

  void validate() const {
    if (lambda < 0.0) throw std::invalid_argument("BathSpec: lambda must be >= 0");
    if (omega <= 0.0) throw std::invalid_argument("BathSpec: omega must be > 0");
    if (gamma <= 0.0) throw std::invalid_argument("BathSpec: gamma must be > 0");
    if (temperature < 0.0) throw std::invalid_argument("BathSpec: temperature must be >= 0");
    if (cutoff <= 0.0) throw std::invalid_argument("BathSpec: cutoff must be > 0");
  }
};

inline double brownian_j(double w, double lambda, double omega, double gamma) {
  const double d1 = w * w - omega * omega;
  const double d2 = 2.0 * M_PI * gamma * omega * w;
  return 4.0 * gamma * omega * omega * lambda * lambda * w / (d1 * d1 + d2 * d2);
}

inline double ohmic_j(double w, double gamma, double cutoff) {
  return gamma * w * std::exp(-w / cutoff);
}

inline double effective_j(double w, double eps, double gamma, double cutoff) {
  return 4.0 * eps * eps * ohmic_j(w, gamma, cutoff);
}

/// Bose-Einstein occupation 1/(e^{w/T} - 1) for w > 0, T > 0.
inline double bose_einstein(double w, double temperature) {
  if (w <= 0.0) throw std::invalid_argument("bose_einstein: frequency must be > 0");
  if (temperature <= 0.0) throw std::invalid_argument("bose_einstein: temperature must be > 0");
  return 1.0 / std::expm1(w / temperature);
}

enum class SpectralKind { Brownian, Ohmic, EffectiveOhmic };

/// One of the three spectral density families used by the solver tiers.
class SpectralDensity {
 public:
  static SpectralDensity brownian(double lambda, double omega, double gamma) {
    SpectralDensity j;
    j.kind_ = SpectralKind::Brownian;
    j.lambda_ = lambda;
    j.omega_ = omega;
    j.gamma_ = gamma;
    if (omega <= 0.0 || gamma <= 0.0 || lambda < 0.0)
      throw std::invalid_argument("SpectralDensity::brownian: bad parameters");
    return j;
  }

  static SpectralDensity ohmic(double gamma, double cutoff) {
    SpectralDensity j;
    j.kind_ = SpectralKind::Ohmic;
    j.gamma_ = gamma;
    j.cutoff_ = cutoff;
    if (gamma <= 0.0 || cutoff <= 0.0)
      throw std::invalid_argument("SpectralDensity::ohmic: bad parameters");
    return j;
  }

  static SpectralDensity effective_ohmic(double eps, double gamma, double cutoff) {
    SpectralDensity j;
    j.kind_ = SpectralKind::EffectiveOhmic;
    j.eps_ = eps;
    j.gamma_ = gamma;
    j.cutoff_ = cutoff;
    if (eps < 0.0 || gamma <= 0.0 || cutoff <= 0.0)
      throw std::invalid_argument("SpectralDensity::effective_ohmic: bad parameters");
    return j;
  }

  double operator()(double w) const {
    switch (kind_) {
      case SpectralKind::Brownian: return brownian_j(w, lambda_, omega_, gamma_);
      case SpectralKind::Ohmic: return ohmic_j(w, gamma_, cutoff_);
      case SpectralKind::EffectiveOhmic: return effective_j(w, eps_, gamma_, cutoff_);
    }
    return 0.0;
  }

  /// J(w)/w as w -> 0.
  double slope_at_zero() const {
    switch (kind_) {
      case SpectralKind::Brownian: return 4.0 * gamma_ * lambda_ * lambda_ / (omega_ * omega_);
      case SpectralKind::Ohmic: return gamma_;
      case SpectralKind::EffectiveOhmic: return 4.0 * eps_ * eps_ * gamma_;
    }
    return 0.0;
  }

  /// lim_{w->0} pi * J(w) * n(w) = pi * slope * T, in closed form per kind.
  double zero_frequency_rate(double temperature) const {
    return M_PI * slope_at_zero() * temperature;
  }

  SpectralKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  double omega() const { return omega_; }
  double gamma() const { return gamma_; }
  double cutoff() const { return cutoff_; }
  double eps() const { return eps_; }

 private:
  SpectralKind kind_ = SpectralKind::Ohmic;
  double lambda_ = 0.0, omega_ = 0.0, gamma_ = 0.0, cutoff_ = 0.0, eps_ = 0.0;
};

/// Half-Fourier symmetric rate of the bath correlation function:
/// pi J(|w|) n(|w|) on the absorption side (w < 0), pi J(w) (n(w)+1) on the
/// emission side (w > 0), and the analytic w -> 0 limit in between.
inline double rate_gamma(const SpectralDensity& j, double w, double temperature) {
  if (temperature <= 0.0) throw std::invalid_argument("rate_gamma: temperature must be > 0");
  if (w == 0.0) return j.zero_frequency_rate(temperature);
  const double aw = std::abs(w);
  const double n = bose_einstein(aw, temperature);
  return (w > 0.0) ? M_PI * j(aw) * (n + 1.0) : M_PI * j(aw) * n;
}

struct RcParameters {
  double lambda;
  double omega;
};

/// Reaction-coordinate frequency and coupling from the first and third
/// frequency moments of a spectral density:
///   lambda^2 = (1/Omega) Int w J dw,  Omega^2 = Int w^3 J dw / Int w J dw.
/// Signals non-convergence when doubling the integration window moves either
/// moment by more than 0.1%.
inline RcParameters rc_parameters(const std::function<double(double)>& j, double upper) {
  if (upper <= 0.0) throw std::invalid_argument("rc_parameters: bad integration limit");
  auto moments = [&](double lim) {
    const double m1 =
        adaptive_integrate([&](double w) { return w * j(w); }, 0.0, lim, 1e-12, 1e-10, 8000, 64)
            .value;
    const double m3 =
        adaptive_integrate([&](double w) { return w * w * w * j(w); }, 0.0, lim, 1e-12, 1e-10,
                           8000, 64)
            .value;
    return std::pair<double, double>(m1, m3);
  };
  const auto [m1a, m3a] = moments(upper);
  const auto [m1b, m3b] = moments(2.0 * upper);
  if (m1b <= 0.0 || m3b <= 0.0) throw NumericalError("rc_parameters: degenerate moments");
  if (std::abs(m1b - m1a) > 1e-3 * std::abs(m1b) || std::abs(m3b - m3a) > 1e-3 * std::abs(m3b))
    throw NumericalError("rc_parameters: moment integrals did not converge in the window");
  const double omega = std::sqrt(m3b / m1b);
  const double lambda = std::sqrt(m1b / omega);
  return {lambda, omega};
}

/// The Brownian family maps onto a reaction coordinate with exactly its own
/// (lambda, omega); its third moment diverges, so it never takes the numeric
/// route. Other kinds go through the moment integrals.
inline RcParameters rc_parameters(const SpectralDensity& j, double upper) {
  if (j.kind() == SpectralKind::Brownian) return {j.lambda(), j.omega()};
  return rc_parameters([&](double w) { return j(w); }, upper);
}

}  // namespace spinbath
