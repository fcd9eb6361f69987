#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "spinbath/errors.hpp"
#include "spinbath/qcore.hpp"
#include "spinbath/spectral.hpp"

namespace spinbath {

/// A coupling operator paired with its bath spectrum and temperature.
struct BathCoupling {
  ComplexMatrix coupling;
  SpectralDensity spectrum;
  double temperature;
};

/// Time series of qubit observables along a propagated trajectory.
/// rho12 is the matrix element <ground|rho|excited> of the reduced qubit
/// state in the sigma^z basis (ground = lower level for positive splitting).
struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::Matrix2cd> states;
  std::vector<double> sx, sz, re_rho12, im_rho12, trace_err;

  std::size_t size() const { return times.size(); }
};

inline void record_qubit_point(Trajectory& out, double t, const ComplexMatrix& qubit,
                               double trace_err) {
  out.times.push_back(t);
  out.states.push_back(qubit);
  out.re_rho12.push_back(qubit(1, 0).real());
  out.im_rho12.push_back(qubit(1, 0).imag());
  out.sx.push_back(2.0 * qubit(1, 0).real());
  out.sz.push_back((qubit(0, 0) - qubit(1, 1)).real());
  out.trace_err.push_back(trace_err);
}

/// Nonsecular Redfield generator for a Hermitian Hamiltonian and a set of
/// Hermitian coupling operators, each attached to a thermal bath through its
/// spectral density. The Lamb shift is zero, so the half-Fourier rates are
/// real. Application is matrix-free: the d^2 x d^2 superoperator is never
/// materialized and one application costs O(d^3).
class RedfieldGenerator {
 public:
  static RedfieldGenerator build(const ComplexMatrix& hamiltonian,
                                 const std::vector<BathCoupling>& baths) {
    if (hamiltonian.rows() != hamiltonian.cols())
      throw std::invalid_argument("RedfieldGenerator: Hamiltonian must be square");
    if (!is_hermitian(hamiltonian))
      throw std::invalid_argument("RedfieldGenerator: Hamiltonian must be Hermitian");
    for (const auto& b : baths) {
      if (b.coupling.rows() != hamiltonian.rows() || b.coupling.cols() != hamiltonian.cols())
        throw std::invalid_argument("RedfieldGenerator: coupling dimension mismatch");
      if (!is_hermitian(b.coupling))
        throw std::invalid_argument("RedfieldGenerator: coupling must be Hermitian");
    }

    RedfieldGenerator g;
    const Eigen::Index d = hamiltonian.rows();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hamiltonian);
    g.omega_ = es.eigenvalues();
    g.v_ = es.eigenvectors();

    // Deterministic eigenvector phases: the largest-magnitude component of
    // each column is made real positive.
    for (Eigen::Index c = 0; c < d; ++c) {
      Eigen::Index k = 0;
      double best = -1.0;
      for (Eigen::Index r = 0; r < d; ++r) {
        const double m = std::abs(g.v_(r, c));
        if (m > best + 1e-15) {
          best = m;
          k = r;
        }
      }
      const Complex ph = g.v_(k, c) / std::abs(g.v_(k, c));
      g.v_.col(c) *= std::conj(ph);
    }

    // Bohr frequency table with near-degenerate gaps snapped to exactly zero
    // so the w -> 0 rate limit is used instead of a 0/0 evaluation.
    const double span = g.omega_(d - 1) - g.omega_(0);
    const double snap = 1e-10 * std::max(1.0, span);
    Eigen::MatrixXd bohr(d, d);
    for (Eigen::Index m = 0; m < d; ++m)
      for (Eigen::Index n = 0; n < d; ++n) {
        const double w = g.omega_(m) - g.omega_(n);
        bohr(m, n) = (std::abs(w) < snap) ? 0.0 : w;
      }
    g.bohr_ = std::move(bohr);

    g.k_diss_ = ComplexMatrix::Zero(d, d);
    for (const auto& b : baths) {
      ComplexMatrix s = g.v_.adjoint() * b.coupling * g.v_;
      s = 0.5 * (s + s.adjoint().eval());
      Eigen::MatrixXd rates(d, d);
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index l = 0; l < d; ++l)
          rates(j, l) = rate_gamma(b.spectrum, g.bohr_(l, j), b.temperature);
      ComplexMatrix a = s.cwiseProduct(rates.cast<Complex>());
      g.k_diss_ -= s * a;
      g.s_eig_.push_back(std::move(s));
      g.a_eig_.push_back(std::move(a));
      g.rates_.push_back(std::move(rates));
    }
    g.norm_est_ = g.estimate_norm();
    return g;
  }

  Eigen::Index dim() const { return omega_.size(); }
  const Eigen::VectorXd& eigenvalues() const { return omega_; }
  const ComplexMatrix& eigenvectors() const { return v_; }
  const std::vector<Eigen::MatrixXd>& rate_tables() const { return rates_; }
  double norm_estimate() const { return norm_est_; }

  ComplexMatrix to_eigenbasis(const ComplexMatrix& m) const { return v_.adjoint() * m * v_; }
  ComplexMatrix from_eigenbasis(const ComplexMatrix& m) const { return v_ * m * v_.adjoint(); }

  /// d rho / dt in the original basis, valid for any (not necessarily
  /// Hermitian) input.
  ComplexMatrix apply(const ComplexMatrix& rho) const {
    if (rho.rows() != dim() || rho.cols() != dim())
      throw std::invalid_argument("RedfieldGenerator::apply: dimension mismatch");
    return from_eigenbasis(apply_eigenbasis(to_eigenbasis(rho)));
  }

  /// General-input application in the eigenbasis.
  ComplexMatrix apply_eigenbasis(const ComplexMatrix& rho) const {
    ComplexMatrix out = Complex(0.0, -1.0) * bohr_.cast<Complex>().cwiseProduct(rho);
    out += k_diss_ * rho + rho * k_diss_.adjoint();
    for (std::size_t b = 0; b < s_eig_.size(); ++b) {
      out += (a_eig_[b] * rho) * s_eig_[b];
      out += s_eig_[b] * (rho * a_eig_[b].adjoint());
    }
    return out;
  }

  /// Hermitian-input application in the eigenbasis; builds the result as
  /// M + M^dagger, so Hermiticity is preserved to rounding.
  ComplexMatrix apply_eigenbasis_hermitian(const ComplexMatrix& rho) const {
    ComplexMatrix half = k_diss_ * rho;
    for (std::size_t b = 0; b < s_eig_.size(); ++b) half += (a_eig_[b] * rho) * s_eig_[b];
    ComplexMatrix out = half + half.adjoint().eval();
    out += Complex(0.0, -1.0) * bohr_.cast<Complex>().cwiseProduct(rho);
    return out;
  }

 private:
  double estimate_norm() const {
    const Eigen::Index d = dim();
    // Deterministic seeded Hermitian start for the power iteration.
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    auto next = [&state]() {
      state ^= state << 13;
      state ^= state >> 7;
      state ^= state << 17;
      return 2.0 * (double(state >> 11) / 9007199254740992.0) - 1.0;
    };
    ComplexMatrix x(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) x(i, j) = Complex(next(), next());
    x = (x + x.adjoint().eval()) * 0.5;
    x /= x.norm();
    double r = 0.0;
    for (int it = 0; it < 20; ++it) {
      ComplexMatrix y = apply_eigenbasis(x);
      r = y.norm();
      if (r == 0.0) break;
      x = y / r;
    }
    const double fastest = bohr_.cwiseAbs().maxCoeff();
    return 1.25 * std::max(r, fastest);
  }

  Eigen::VectorXd omega_;
  ComplexMatrix v_;
  Eigen::MatrixXd bohr_;  // bohr_(m, n) = omega_m - omega_n
  std::vector<ComplexMatrix> s_eig_, a_eig_;
  std::vector<Eigen::MatrixXd> rates_;  // rates_[b](j, l) = Gamma_b(omega_l - omega_j)
  ComplexMatrix k_diss_;                // -sum_b S_b A_b
  double norm_est_ = 0.0;
};

namespace detail {

/// Classic fixed-step RK4 over one interval in the eigenbasis,
/// Hermitian-preserving RHS.
inline void rk4_advance(const RedfieldGenerator& g, ComplexMatrix& rho, double dt, int steps) {
  for (int s = 0; s < steps; ++s) {
    const ComplexMatrix k1 = g.apply_eigenbasis_hermitian(rho);
    const ComplexMatrix k2 = g.apply_eigenbasis_hermitian(rho + (0.5 * dt) * k1);
    const ComplexMatrix k3 = g.apply_eigenbasis_hermitian(rho + (0.5 * dt) * k2);
    const ComplexMatrix k4 = g.apply_eigenbasis_hermitian(rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

inline double min_eigenvalue(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace detail

/// Fixed-step RK4 propagation of `rho0` through `times` (starting at 0),
/// recording the reduced qubit state at every requested time. The step is
/// min(dt_max, 0.1 / |L|_est), subdivided to land exactly on output times.
/// Fails when the trace drifts beyond 1e-6 or positivity of the full state
/// dips below -1e-4.
inline Trajectory propagate(const RedfieldGenerator& g, const DensityMatrix& rho0,
                            const std::vector<double>& times, double dt_max = 1e-2) {
  if (times.empty()) throw std::invalid_argument("propagate: empty time grid");
  if (std::abs(times.front()) > 1e-12)
    throw std::invalid_argument("propagate: time grid must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] <= times[i - 1])
      throw std::invalid_argument("propagate: time grid must be strictly increasing");
  if (rho0.dims.empty() || rho0.dims[0] != 2)
    throw std::invalid_argument("propagate: leading subsystem must be the qubit");
  if (rho0.dim() != g.dim()) throw std::invalid_argument("propagate: dimension mismatch");

  const double h0 = std::min(dt_max, 0.1 / std::max(g.norm_estimate(), 1e-12));
  ComplexMatrix rho = g.to_eigenbasis(rho0.matrix);
  rho = 0.5 * (rho + rho.adjoint().eval());

  Trajectory out;
  auto record = [&](double t) {
    const ComplexMatrix full = g.from_eigenbasis(rho);
    const double terr = std::abs(full.trace() - Complex(1.0, 0.0));
    if (terr > 1e-6) throw NumericalError("propagate: trace error exceeded 1e-6");
    if (detail::min_eigenvalue(full) < -1e-4)
      throw NumericalError("propagate: positivity violated beyond -1e-4");
    record_qubit_point(out, t, reduce_to_qubit(full, rho0.dims), terr);
  };

  record(times[0]);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double span = times[i] - times[i - 1];
    const int steps = std::max(1, int(std::ceil(span / h0)));
    detail::rk4_advance(g, rho, span / steps, steps);
    record(times[i]);
  }
  return out;
}

/// Long-time limit of the generator, found by propagating two well-separated
/// initial states until |L(rho)| <= 1e-8 and checking they coincide.
/// Signals non-uniqueness when they settle onto different states (e.g. pure
/// dephasing, where populations are conserved).
inline DensityMatrix steady_state(const RedfieldGenerator& g) {
  const Eigen::Index d = g.dim();
  const double h = std::min(1e-2, 0.1 / std::max(g.norm_estimate(), 1e-12));

  auto relax = [&](ComplexMatrix rho_eig) {
    const int steps_per_chunk = 2000;
    for (int chunk = 0; chunk < 5000; ++chunk) {
      const double residual = g.apply_eigenbasis_hermitian(rho_eig).cwiseAbs().maxCoeff();
      if (residual <= 1e-8) return rho_eig;
      detail::rk4_advance(g, rho_eig, h, steps_per_chunk);
    }
    throw NumericalError("steady_state: no stationary state within the time budget");
  };

  ComplexMatrix ground = ComplexMatrix::Zero(d, d);
  ground(0, 0) = 1.0;  // lowest-energy projector in the eigenbasis
  const ComplexMatrix a = relax(ground);
  const ComplexMatrix b = relax(ComplexMatrix::Identity(d, d) / double(d));
  if ((a - b).cwiseAbs().maxCoeff() > 1e-6)
    throw NumericalError("steady_state: stationary state is not unique");
  return DensityMatrix(g.from_eigenbasis(a), {d});
}

}  // namespace spinbath
