#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "spinbath/errors.hpp"

namespace spinbath {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

enum class BathAxis { X, Y, Z };

inline char axis_name(BathAxis a) {
  switch (a) {
    case BathAxis::X: return 'x';
    case BathAxis::Y: return 'y';
    case BathAxis::Z: return 'z';
  }
  return '?';
}

inline BathAxis axis_from_name(const std::string& s) {
  if (s == "x" || s == "X") return BathAxis::X;
  if (s == "y" || s == "Y") return BathAxis::Y;
  if (s == "z" || s == "Z") return BathAxis::Z;
  throw std::invalid_argument("unknown bath axis: " + s);
}

inline ComplexMatrix pauli(BathAxis a) {
  ComplexMatrix m(2, 2);
  const Complex i(0.0, 1.0);
  switch (a) {
    case BathAxis::X:
      m << 0, 1, 1, 0;
      break;
    case BathAxis::Y:
      m << 0, -i, i, 0;
      break;
    case BathAxis::Z:
      m << 1, 0, 0, -1;
      break;
  }
  return m;
}

/// Bosonic annihilation operator truncated to `levels` Fock states:
/// a[n-1, n] = sqrt(n).
inline ComplexMatrix annihilation(Eigen::Index levels) {
  if (levels < 1) throw std::invalid_argument("annihilation: levels must be >= 1");
  ComplexMatrix a = ComplexMatrix::Zero(levels, levels);
  for (Eigen::Index n = 1; n < levels; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Places `op` on subsystem `slot` of the composite space described by
/// `dims` (qubit first, then one reaction coordinate per bath), identity on
/// every other slot.
inline ComplexMatrix embed(const ComplexMatrix& op, std::size_t slot,
                           const std::vector<Eigen::Index>& dims) {
  if (slot >= dims.size()) throw std::invalid_argument("embed: slot out of range");
  if (op.rows() != dims[slot] || op.cols() != dims[slot])
    throw std::invalid_argument("embed: operator dimension does not match slot");
  ComplexMatrix out = (slot == 0) ? op : ComplexMatrix::Identity(dims[0], dims[0]);
  for (std::size_t s = 1; s < dims.size(); ++s)
    out = kron(out, s == slot ? op : ComplexMatrix::Identity(dims[s], dims[s]));
  return out;
}

inline double hermiticity_defect(const ComplexMatrix& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix& a, double tol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return hermiticity_defect(a) <= tol * scale;
}

/// tr(op * rho) without forming the product.
inline Complex expectation(const ComplexMatrix& op, const ComplexMatrix& rho) {
  if (op.rows() != rho.rows() || op.cols() != rho.cols())
    throw std::invalid_argument("expectation: dimension mismatch");
  return op.cwiseProduct(rho.transpose()).sum();
}

/// Density matrix over an ordered list of subsystem dimensions.
/// Construction validates trace, Hermiticity and positivity (the small
/// negative tolerance absorbs transient Redfield violations).
struct DensityMatrix {
  ComplexMatrix matrix;
  std::vector<Eigen::Index> dims;

  static constexpr double kTraceTol = 1e-10;
  static constexpr double kHermTol = 1e-10;
  static constexpr double kEigTol = -1e-8;

  DensityMatrix(ComplexMatrix m, std::vector<Eigen::Index> d)
      : matrix(std::move(m)), dims(std::move(d)) {
    Eigen::Index total = 1;
    for (Eigen::Index k : dims) {
      if (k < 1) throw std::invalid_argument("DensityMatrix: dims must be positive");
      total *= k;
    }
    if (matrix.rows() != total || matrix.cols() != total)
      throw std::invalid_argument("DensityMatrix: matrix does not match dims");
    if (std::abs(matrix.trace() - Complex(1.0, 0.0)) > kTraceTol)
      throw std::invalid_argument("DensityMatrix: trace differs from 1");
    if (hermiticity_defect(matrix) > kHermTol)
      throw std::invalid_argument("DensityMatrix: not Hermitian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(matrix, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < kEigTol)
      throw std::invalid_argument("DensityMatrix: negative eigenvalue beyond tolerance");
  }

  Eigen::Index dim() const { return matrix.rows(); }
};

/// Thermal state of a truncated harmonic mode, p_n ~ exp(-n*omega/T)
/// renormalized over the retained levels; ground-state projector at T = 0.
inline DensityMatrix thermal_rc_state(double omega, double temperature, Eigen::Index levels) {
  if (omega <= 0.0) throw std::invalid_argument("thermal_rc_state: omega must be > 0");
  if (temperature < 0.0) throw std::invalid_argument("thermal_rc_state: temperature must be >= 0");
  if (levels < 1) throw std::invalid_argument("thermal_rc_state: levels must be >= 1");
  ComplexMatrix m = ComplexMatrix::Zero(levels, levels);
  if (temperature == 0.0) {
    m(0, 0) = 1.0;
  } else {
    double norm = 0.0;
    for (Eigen::Index n = 0; n < levels; ++n) {
      const double p = std::exp(-double(n) * omega / temperature);
      m(n, n) = p;
      norm += p;
    }
    m /= norm;
  }
  return DensityMatrix(std::move(m), {levels});
}

/// Traces out every slot after the first; `dims` must start with the qubit.
inline ComplexMatrix reduce_to_qubit(const ComplexMatrix& rho,
                                     const std::vector<Eigen::Index>& dims) {
  if (dims.empty() || dims[0] != 2)
    throw std::invalid_argument("reduce_to_qubit: leading subsystem must be the qubit");
  Eigen::Index rest = 1;
  for (std::size_t s = 1; s < dims.size(); ++s) rest *= dims[s];
  ComplexMatrix out = ComplexMatrix::Zero(2, 2);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j)
      for (Eigen::Index r = 0; r < rest; ++r) out(i, j) += rho(i * rest + r, j * rest + r);
  return out;
}

inline DensityMatrix partial_trace_to_qubit(const DensityMatrix& rho) {
  return DensityMatrix(reduce_to_qubit(rho.matrix, rho.dims), {2});
}

}  // namespace spinbath
