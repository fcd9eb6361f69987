#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "spinbath/errors.hpp"
#include "spinbath/qcore.hpp"
#include "spinbath/redfield.hpp"
#include "spinbath/spectral.hpp"

namespace spinbath {

/// Physical scenario: qubit splitting and tunneling plus up to three baths
/// coupling along distinct spin axes.
struct ModelConfig {
  double delta = 1.0;
  double tunneling = 0.0;
  std::vector<BathSpec> baths;

  void validate() const {
    if (delta < 0.0) throw std::invalid_argument("ModelConfig: delta must be >= 0");
    if (baths.empty()) throw std::invalid_argument("ModelConfig: at least one bath required");
    if (baths.size() > 3) throw std::invalid_argument("ModelConfig: at most three baths");
    for (std::size_t i = 0; i < baths.size(); ++i) {
      baths[i].validate();
      for (std::size_t j = i + 1; j < baths.size(); ++j)
        if (baths[i].axis == baths[j].axis)
          throw std::invalid_argument("ModelConfig: bath axes must be distinct");
    }
  }

  const BathSpec* find_bath(BathAxis axis) const {
    for (const auto& b : baths)
      if (b.axis == axis) return &b;
    return nullptr;
  }

  double epsilon(BathAxis axis) const {
    const BathSpec* b = find_bath(axis);
    return b ? b->epsilon() : 0.0;
  }
};

/// Qubit plus one truncated reaction coordinate per coupled bath, with the
/// residual Ohmic couplings ready to feed the Redfield builder.
struct ExtendedSystem {
  ComplexMatrix hamiltonian;
  std::vector<Eigen::Index> dims;        // {2, M, M, ...}
  std::vector<BathCoupling> residual;    // S = a^dag + a embedded, Ohmic spectrum
  std::vector<BathSpec> active_baths;    // the lambda > 0 baths, in slot order
};

/// H = Delta sz + E sx + sum_a [Omega_a n_a + lambda_a s^a (a^dag + a)].
/// Baths with lambda = 0 decouple entirely and receive no slot.
inline ExtendedSystem build_extended(const ModelConfig& model, Eigen::Index levels) {
  model.validate();
  if (levels < 1) throw std::invalid_argument("build_extended: levels must be >= 1");

  ExtendedSystem ext;
  for (const auto& b : model.baths)
    if (b.lambda > 0.0) ext.active_baths.push_back(b);

  ext.dims.push_back(2);
  Eigen::Index d = 2;
  for (std::size_t s = 0; s < ext.active_baths.size(); ++s) {
    ext.dims.push_back(levels);
    d *= levels;
    if (d > 1024) throw std::invalid_argument("build_extended: dimension exceeds 1024");
  }

  ComplexMatrix h = model.delta * embed(pauli(BathAxis::Z), 0, ext.dims);
  if (model.tunneling != 0.0) h += model.tunneling * embed(pauli(BathAxis::X), 0, ext.dims);
  const ComplexMatrix a = annihilation(levels);
  const ComplexMatrix number = (a.adjoint() * a).eval();
  const ComplexMatrix displacement = (a.adjoint() + a).eval();
  for (std::size_t s = 0; s < ext.active_baths.size(); ++s) {
    const BathSpec& b = ext.active_baths[s];
    const std::size_t slot = s + 1;
    h += b.omega * embed(number, slot, ext.dims);
    h += b.lambda * (embed(pauli(b.axis), 0, ext.dims) * embed(displacement, slot, ext.dims));
    ext.residual.push_back({embed(displacement, slot, ext.dims),
                            SpectralDensity::ohmic(b.gamma, b.cutoff), b.temperature});
  }
  ext.hamiltonian = std::move(h);
  return ext;
}

/// qubit state (x) thermal reaction coordinates.
inline DensityMatrix initial_extended_state(const ModelConfig& model, Eigen::Index levels,
                                            const Eigen::Matrix2cd& rho_qubit) {
  const ExtendedSystem ext = build_extended(model, levels);
  ComplexMatrix state = rho_qubit;
  for (const auto& b : ext.active_baths)
    state = kron(state, thermal_rc_state(b.omega, b.temperature, levels).matrix);
  return DensityMatrix(std::move(state), ext.dims);
}

/// End-to-end embedded-Markovian run: build the extended system, attach the
/// residual Ohmic baths, propagate under the nonsecular Redfield generator,
/// and reduce every recorded state to the qubit.
inline Trajectory simulate_rc_qme(const ModelConfig& model, Eigen::Index levels,
                                  const Eigen::Matrix2cd& rho_qubit,
                                  const std::vector<double>& times, double dt_max = 1e-2) {
  const ExtendedSystem ext = build_extended(model, levels);
  const DensityMatrix rho0 = initial_extended_state(model, levels, rho_qubit);
  const RedfieldGenerator gen = RedfieldGenerator::build(ext.hamiltonian, ext.residual);
  return propagate(gen, rho0, times, dt_max);
}

}  // namespace spinbath
