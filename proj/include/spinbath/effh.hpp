#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <thread>
#include <vector>

#include "spinbath/dawson.hpp"
#include "spinbath/errors.hpp"
#include "spinbath/qcore.hpp"
#include "spinbath/quadrature.hpp"
#include "spinbath/rcmap.hpp"
#include "spinbath/redfield.hpp"
#include "spinbath/spectral.hpp"

namespace spinbath {

// ---------------------------------------------------------------------------
// Polaron dressing factors
//
// Averaging the polaron-rotated Pauli operators over the Gaussian ground
// state of the reaction coordinates multiplies each sigma^alpha by a scalar
// kappa_alpha(eps_x, eps_y, eps_z), eps = lambda/Omega. For two coupled axes
// the three factors reduce to radial-angular integrals h (own axis), g (the
// other coupled axis, g(a,b) = h(b,a)) and f (the uncoupled axis).
// ---------------------------------------------------------------------------

struct PairDressing {
  double h, f, g;
  double err_h, err_f, err_g;
};

namespace detail {

constexpr double kRadialCut = 8.5;  // exp(-r^2) < 1e-31 beyond the cut

struct TripleValues {
  double x, y, z;
};

inline void pair_panel_counts(double a, double b, int level, int& r_panels, int& th_panels) {
  const double kmax = std::max(a, b);
  const double phase = kRadialCut * 2.0 * std::sqrt(2.0) * kmax;
  r_panels = std::max(12, int(std::ceil(phase / 6.0))) << level;
  th_panels = std::max(8, int(std::ceil(4.0 * std::abs(a - b)))) << level;
}

inline PairDressing kappa_pair_level(double a, double b, int level) {
  int r_panels, th_panels;
  pair_panel_counts(a, b, level, r_panels, th_panels);
  const GaussLegendre rule(16);
  const double rc = 2.0 * std::sqrt(2.0);

  // Radial nodes with weight r exp(-r^2) folded in.
  std::vector<double> rn, rw;
  const double rstep = kRadialCut / r_panels;
  for (int p = 0; p < r_panels; ++p) {
    const double mid = (p + 0.5) * rstep;
    const double half = 0.5 * rstep;
    for (int i = 0; i < rule.size(); ++i) {
      const double r = mid + half * rule.nodes()[i];
      rn.push_back(r);
      rw.push_back(half * rule.weights()[i] * r * std::exp(-r * r));
    }
  }

  double sh = 0.0, sf = 0.0, sg = 0.0;
  const double tstep = 2.0 * M_PI / th_panels;
  for (int p = 0; p < th_panels; ++p) {
    const double mid = (p + 0.5) * tstep;
    const double half = 0.5 * tstep;
    for (int i = 0; i < rule.size(); ++i) {
      const double theta = mid + half * rule.nodes()[i];
      const double wt = half * rule.weights()[i] / M_PI;
      const double sa = a * std::cos(theta);
      const double sb = b * std::sin(theta);
      const double k = std::sqrt(sa * sa + sb * sb);
      double ph = 0.0, pf = 0.0, pg = 0.0;
      for (std::size_t q = 0; q < rn.size(); ++q) {
        const double x = rc * rn[q] * k;
        const double cosx = std::cos(x);
        const double omc = 8.0 * rn[q] * rn[q] * one_minus_cos_over_x2(x);
        ph += rw[q] * (1.0 - sb * sb * omc);
        pg += rw[q] * (1.0 - sa * sa * omc);
        pf += rw[q] * cosx;
      }
      sh += wt * ph;
      sf += wt * pf;
      sg += wt * pg;
    }
  }
  return {sh, sf, sg, 0.0, 0.0, 0.0};
}

inline TripleValues kappa_triple_level(double ex, double ey, double ez, int level) {
  const double dmax = std::max({ex, ey, ez});
  const double spread = dmax - std::min({ex, ey, ez});
  const double rc = 2.0 * std::sqrt(2.0);
  const int r_panels =
      std::max(12, int(std::ceil(kRadialCut * rc * dmax / 6.0))) << level;
  const int ang_panels = std::max(6, int(std::ceil(4.0 * spread))) << level;
  const GaussLegendre rule(16);

  std::vector<double> rn, rw;
  const double rstep = kRadialCut / r_panels;
  for (int p = 0; p < r_panels; ++p) {
    const double mid = (p + 0.5) * rstep;
    const double half = 0.5 * rstep;
    for (int i = 0; i < rule.size(); ++i) {
      const double r = mid + half * rule.nodes()[i];
      rn.push_back(r);
      rw.push_back(half * rule.weights()[i] * r * r * std::exp(-r * r));
    }
  }

  const double ex2 = ex * ex, ey2 = ey * ey, ez2 = ez * ez;
  double sx = 0.0, sy = 0.0, sz = 0.0;
  const double tstep = M_PI / ang_panels;
  const double pstep = 2.0 * M_PI / ang_panels;
  const double norm = 1.0 / std::pow(M_PI, 1.5);
  for (int pt = 0; pt < ang_panels; ++pt) {
    const double tmid = (pt + 0.5) * tstep;
    const double thalf = 0.5 * tstep;
    for (int it = 0; it < rule.size(); ++it) {
      const double theta = tmid + thalf * rule.nodes()[it];
      const double wt = thalf * rule.weights()[it] * std::sin(theta);
      const double st = std::sin(theta), ct = std::cos(theta);
      for (int pp = 0; pp < ang_panels; ++pp) {
        const double pmid = (pp + 0.5) * pstep;
        const double phalf = 0.5 * pstep;
        for (int ip = 0; ip < rule.size(); ++ip) {
          const double phi = pmid + phalf * rule.nodes()[ip];
          const double wp = phalf * rule.weights()[ip];
          const double ux = st * std::cos(phi), uy = st * std::sin(phi), uz = ct;
          const double nx = ux * ux * ex2, ny = uy * uy * ey2, nz = uz * uz * ez2;
          const double d2 = nx + ny + nz;
          const double d = std::sqrt(d2);
          const double w = wt * wp * norm;
          double ax = 0.0, ay = 0.0, az = 0.0;
          for (std::size_t q = 0; q < rn.size(); ++q) {
            const double x = rc * rn[q] * d;
            const double omc8 = 8.0 * rn[q] * rn[q] * one_minus_cos_over_x2(x);
            ax += rw[q] * (1.0 - (d2 - nx) * omc8);
            ay += rw[q] * (1.0 - (d2 - ny) * omc8);
            az += rw[q] * (1.0 - (d2 - nz) * omc8);
          }
          sx += w * ax;
          sy += w * ay;
          sz += w * az;
        }
      }
    }
  }
  return {sx, sy, sz};
}

/// Raw three-dimensional quadrature, no delegation. Exposed so tests can
/// cross-validate the cyclic-relabeling identities against the pair route.
inline TripleValues kappa_triple_generic(double ex, double ey, double ez, double tol = 1e-7,
                                         TripleValues* err_out = nullptr) {
  TripleValues prev = kappa_triple_level(ex, ey, ez, 0);
  for (int level = 1; level <= 3; ++level) {
    const TripleValues cur = kappa_triple_level(ex, ey, ez, level);
    const TripleValues err{std::abs(cur.x - prev.x), std::abs(cur.y - prev.y),
                           std::abs(cur.z - prev.z)};
    if (std::max({err.x, err.y, err.z}) <= tol) {
      if (err_out) *err_out = err;
      return cur;
    }
    prev = cur;
  }
  throw NumericalError("kappa_triple: quadrature did not converge");
}

}  // namespace detail

/// Dressing factors for two coupled axes with couplings (eps_a, eps_b):
/// h dresses the eps_a axis, g the eps_b axis, f the uncoupled one.
/// Node-doubled tensor quadrature with reported error estimates <= 1e-8.
inline PairDressing kappa_pair(double eps_a, double eps_b) {
  if (eps_a < 0.0 || eps_b < 0.0)
    throw std::invalid_argument("kappa_pair: couplings must be >= 0");
  PairDressing prev = detail::kappa_pair_level(eps_a, eps_b, 0);
  for (int level = 1; level <= 3; ++level) {
    PairDressing cur = detail::kappa_pair_level(eps_a, eps_b, level);
    cur.err_h = std::abs(cur.h - prev.h);
    cur.err_f = std::abs(cur.f - prev.f);
    cur.err_g = std::abs(cur.g - prev.g);
    if (std::max({cur.err_h, cur.err_f, cur.err_g}) <= 1e-8) return cur;
    prev = cur;
  }
  throw NumericalError("kappa_pair: quadrature did not converge");
}

/// kappa values per axis with absent baths recorded as eps = 0.
struct DressingSet {
  double kappa_x = 1.0, kappa_y = 1.0, kappa_z = 1.0;
  double eps_x = 0.0, eps_y = 0.0, eps_z = 0.0;
  double err_x = 0.0, err_y = 0.0, err_z = 0.0;

  double kappa(BathAxis a) const {
    switch (a) {
      case BathAxis::X: return kappa_x;
      case BathAxis::Y: return kappa_y;
      case BathAxis::Z: return kappa_z;
    }
    return 1.0;
  }
};

/// Dressing factors for up to three coupled axes. One zero coupling
/// delegates to the pair quadrature under the cyclic axis mapping; two zeros
/// reduce to the single-bath forms (own axis undressed, the others damped by
/// the pair function with one argument zero); the general case runs the
/// spherical tensor quadrature to an error estimate <= 1e-7.
inline DressingSet kappa_triple(double eps_x, double eps_y, double eps_z) {
  if (eps_x < 0.0 || eps_y < 0.0 || eps_z < 0.0)
    throw std::invalid_argument("kappa_triple: couplings must be >= 0");
  DressingSet out;
  out.eps_x = eps_x;
  out.eps_y = eps_y;
  out.eps_z = eps_z;
  double* kappa[3] = {&out.kappa_x, &out.kappa_y, &out.kappa_z};
  double* err[3] = {&out.err_x, &out.err_y, &out.err_z};
  const double eps[3] = {eps_x, eps_y, eps_z};

  int coupled[3];
  int n_coupled = 0;
  for (int i = 0; i < 3; ++i)
    if (eps[i] > 0.0) coupled[n_coupled++] = i;

  if (n_coupled == 0) return out;

  if (n_coupled == 1) {
    const int c = coupled[0];
    const PairDressing p = kappa_pair(0.0, eps[c]);
    for (int i = 0; i < 3; ++i) {
      *kappa[i] = (i == c) ? 1.0 : p.h;
      *err[i] = (i == c) ? 0.0 : p.err_h;
    }
    return out;
  }

  if (n_coupled == 2) {
    const int a = coupled[0], b = coupled[1];
    const int other = 3 - a - b;
    const PairDressing p = kappa_pair(eps[a], eps[b]);
    *kappa[a] = p.h;
    *err[a] = p.err_h;
    *kappa[b] = p.g;
    *err[b] = p.err_g;
    *kappa[other] = p.f;
    *err[other] = p.err_f;
    return out;
  }

  detail::TripleValues errs{};
  const detail::TripleValues v = detail::kappa_triple_generic(eps_x, eps_y, eps_z, 1e-7, &errs);
  out.kappa_x = v.x;
  out.kappa_y = v.y;
  out.kappa_z = v.z;
  out.err_x = errs.x;
  out.err_y = errs.y;
  out.err_z = errs.z;
  return out;
}

/// Closed equal-coupling forms: h = g = 1 - sqrt2 e F(sqrt2 e),
/// f = 1 - 2 sqrt2 e F(sqrt2 e) for two axes, and
/// (2/3) exp(-2e^2)(1 - 4e^2) + 1/3 for three.
inline double kappa_pair_equal_hg(double eps) {
  return 1.0 - std::sqrt(2.0) * eps * dawson(std::sqrt(2.0) * eps);
}
inline double kappa_pair_equal_f(double eps) {
  return 1.0 - 2.0 * std::sqrt(2.0) * eps * dawson(std::sqrt(2.0) * eps);
}
inline double kappa_triple_equal(double eps) {
  return (2.0 / 3.0) * std::exp(-2.0 * eps * eps) * (1.0 - 4.0 * eps * eps) + 1.0 / 3.0;
}

// ---------------------------------------------------------------------------
// Effective two-level rates and closed-form dynamics
// ---------------------------------------------------------------------------

/// Rate constants of the dressed two-level model. The dissipative baths (x,
/// y) act at the renormalized splitting omega21 = 2 kappa_z Delta; the
/// decohering bath (z) enters through the w -> 0 limit. gamma_d is the
/// coherence decay constant, (gamma_x + gamma_y + 2 gamma_z)/2.
struct EffhRates {
  double gamma_x = 0.0, gamma_y = 0.0, gamma_z = 0.0;
  double omega21 = 0.0;
  std::complex<double> theta{0.0, 0.0};
  double gamma_d = 0.0;
  double relaxation = 0.0;
  DressingSet dressing;
};

inline EffhRates effh_rates(const ModelConfig& model) {
  model.validate();
  if (model.tunneling != 0.0)
    throw std::invalid_argument("effh_rates: closed-form rates require zero tunneling");

  EffhRates r;
  r.dressing = kappa_triple(model.epsilon(BathAxis::X), model.epsilon(BathAxis::Y),
                            model.epsilon(BathAxis::Z));
  r.omega21 = 2.0 * r.dressing.kappa_z * model.delta;

  auto dissipative_rate = [&](BathAxis axis, double kappa) {
    const BathSpec* b = model.find_bath(axis);
    if (!b || b->lambda == 0.0) return 0.0;
    const SpectralDensity j = SpectralDensity::effective_ohmic(b->epsilon(), b->gamma, b->cutoff);
    return 2.0 * kappa * kappa *
           (rate_gamma(j, r.omega21, b->temperature) + rate_gamma(j, -r.omega21, b->temperature));
  };
  r.gamma_x = dissipative_rate(BathAxis::X, r.dressing.kappa_x);
  r.gamma_y = dissipative_rate(BathAxis::Y, r.dressing.kappa_y);

  if (const BathSpec* bz = model.find_bath(BathAxis::Z); bz && bz->lambda > 0.0) {
    const SpectralDensity j =
        SpectralDensity::effective_ohmic(bz->epsilon(), bz->gamma, bz->cutoff);
    r.gamma_z = 4.0 * r.dressing.kappa_z * r.dressing.kappa_z *
                rate_gamma(j, 0.0, bz->temperature);
  }

  r.gamma_d = 0.5 * (r.gamma_x + r.gamma_y) + r.gamma_z;
  r.relaxation = r.gamma_x + r.gamma_y;
  const double half_diff = 0.5 * (r.gamma_x - r.gamma_y);
  r.theta = std::sqrt(std::complex<double>(r.omega21 * r.omega21 - half_diff * half_diff, 0.0));
  return r;
}

/// Closed-form evolution of the dressed two-level model for an arbitrary
/// initial state. Coherences follow the damped-rotation pair
///   u = rho12 + rho21,  w = 2 Im rho12,
///   d/dt (u, w) = [[-gz-gy, -w21], [w21, -gz-gx]] (u, w),
/// populations relax at gamma_x + gamma_y toward the Gibbs ratio at omega21.
/// An overdamped theta switches to the hyperbolic branch of the same
/// analytic function, evaluated with combined exponents so the decaying
/// envelope never overflows.
class AnalyticSolution {
 public:
  AnalyticSolution(const EffhRates& rates, double beta, const Eigen::Matrix2cd& rho0)
      : rates_(rates), beta_(beta) {
    if (hermiticity_defect(rho0) > 1e-10)
      throw std::invalid_argument("AnalyticSolution: initial state must be Hermitian");
    gbar_ = 0.5 * (rates.gamma_x + rates.gamma_y) + rates.gamma_z;
    gdiff_ = 0.5 * (rates.gamma_x - rates.gamma_y);
    w21_ = rates.omega21;
    theta_sq_ = w21_ * w21_ - gdiff_ * gdiff_;
    u0_ = 2.0 * rho0(1, 0).real();
    w0_ = 2.0 * rho0(1, 0).imag();
    p0_ = rho0(1, 1).real();
    peq_ = 1.0 / (1.0 + std::exp(-beta * w21_));
  }

  /// Density matrix in the sigma^z basis; index (1,1) is the ground-state
  /// population for positive renormalized splitting.
  Eigen::Matrix2cd at(double t) const {
    const auto [ec, es] = damped_rotation(t);
    const double u = u0_ * ec + (gdiff_ * u0_ - w21_ * w0_) * es;
    const double w = w0_ * ec + (w21_ * u0_ - gdiff_ * w0_) * es;
    const double p11 = peq_ + (p0_ - peq_) * std::exp(-rates_.relaxation * t);
    Eigen::Matrix2cd m;
    m(1, 1) = p11;
    m(0, 0) = 1.0 - p11;
    m(1, 0) = 0.5 * Complex(u, w);
    m(0, 1) = std::conj(m(1, 0));
    return m;
  }

  std::complex<double> rho12(double t) const { return at(t)(1, 0); }

 private:
  // (exp(-gbar t) cos(theta t), exp(-gbar t) sin(theta t)/theta) for real or
  // imaginary theta.
  std::pair<double, double> damped_rotation(double t) const {
    const double e = std::exp(-gbar_ * t);
    if (theta_sq_ > 0.0) {
      const double th = std::sqrt(theta_sq_);
      if (th * t < 1e-8) return {e * std::cos(th * t), e * t * (1.0 - th * th * t * t / 6.0)};
      return {e * std::cos(th * t), e * std::sin(th * t) / th};
    }
    if (theta_sq_ < 0.0) {
      const double mu = std::sqrt(-theta_sq_);
      if (mu * t < 1e-8) return {e * std::cosh(mu * t), e * t * (1.0 + mu * mu * t * t / 6.0)};
      const double ep = std::exp((-gbar_ + mu) * t);
      const double em = std::exp((-gbar_ - mu) * t);
      return {0.5 * (ep + em), 0.5 * (ep - em) / mu};
    }
    return {e, e * t};
  }

  EffhRates rates_;
  double beta_;
  double gbar_, gdiff_, w21_, theta_sq_;
  double u0_, w0_, p0_, peq_;
};

inline Trajectory analytic_dynamics(const EffhRates& rates, double beta,
                                    const Eigen::Matrix2cd& rho0,
                                    const std::vector<double>& times) {
  const AnalyticSolution sol(rates, beta, rho0);
  Trajectory out;
  for (double t : times) record_qubit_point(out, t, sol.at(t), 0.0);
  return out;
}

/// Dressed two-level model ready for the Redfield builder: H = kappa_z Delta
/// sz + kappa_x E sx, one coupling kappa_a sigma^a per active bath with the
/// (2 eps)^2-rescaled residual Ohmic spectrum.
struct EffectiveModel {
  ComplexMatrix hamiltonian;
  std::vector<BathCoupling> couplings;
  DressingSet dressing;
};

inline EffectiveModel build_effective_model(const ModelConfig& model) {
  model.validate();
  EffectiveModel em;
  em.dressing = kappa_triple(model.epsilon(BathAxis::X), model.epsilon(BathAxis::Y),
                             model.epsilon(BathAxis::Z));
  em.hamiltonian = model.delta * em.dressing.kappa_z * pauli(BathAxis::Z);
  if (model.tunneling != 0.0)
    em.hamiltonian += model.tunneling * em.dressing.kappa_x * pauli(BathAxis::X);
  for (const auto& b : model.baths) {
    if (b.lambda == 0.0) continue;
    em.couplings.push_back(
        {em.dressing.kappa(b.axis) * pauli(b.axis),
         SpectralDensity::effective_ohmic(b.epsilon(), b.gamma, b.cutoff), b.temperature});
  }
  return em;
}

// ---------------------------------------------------------------------------
// Decoherence-rate maps over the (eps_x, eps_z) plane
// ---------------------------------------------------------------------------

struct RateMapCell {
  double eps_x, eps_z;
  double gamma_d, gamma_x, gamma_z;
  double kappa_x, kappa_y, kappa_z;
};

struct RateMap {
  std::vector<double> eps_x, eps_z;
  std::vector<RateMapCell> cells;  // row-major, eps_z outer

  const RateMapCell& at(std::size_t ix, std::size_t iz) const {
    return cells[iz * eps_x.size() + ix];
  }
};

/// Evaluates the dressed rates over a coupling grid, lambda_a = eps_a *
/// Omega_a, reusing the template's spectra and temperatures. Cells are
/// independent; `jobs` > 1 fans them out over a worker pool with indexed
/// writes, so assembly is deterministic.
inline RateMap rate_map(const ModelConfig& model_template, const std::vector<double>& grid_x,
                        const std::vector<double>& grid_z, int jobs = 1) {
  if (grid_x.empty() || grid_z.empty())
    throw std::invalid_argument("rate_map: grids must be nonempty");
  for (const auto* g : {&grid_x, &grid_z})
    for (std::size_t i = 1; i < g->size(); ++i)
      if ((*g)[i] <= (*g)[i - 1])
        throw std::invalid_argument("rate_map: grids must be ascending");
  const BathSpec* bx = model_template.find_bath(BathAxis::X);
  const BathSpec* bz = model_template.find_bath(BathAxis::Z);
  if (!bx || !bz || model_template.find_bath(BathAxis::Y))
    throw std::invalid_argument("rate_map: template must couple exactly the x and z axes");

  RateMap map;
  map.eps_x = grid_x;
  map.eps_z = grid_z;
  map.cells.resize(grid_x.size() * grid_z.size());

  auto run_cell = [&](std::size_t idx) {
    const std::size_t iz = idx / grid_x.size();
    const std::size_t ix = idx % grid_x.size();
    ModelConfig m = model_template;
    for (auto& b : m.baths) {
      if (b.axis == BathAxis::X) b.lambda = grid_x[ix] * b.omega;
      if (b.axis == BathAxis::Z) b.lambda = grid_z[iz] * b.omega;
    }
    const EffhRates r = effh_rates(m);
    map.cells[idx] = {grid_x[ix],        grid_z[iz],        r.gamma_d,
                      r.gamma_x,         r.gamma_z,         r.dressing.kappa_x,
                      r.dressing.kappa_y, r.dressing.kappa_z};
  };

  const std::size_t total = map.cells.size();
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < total; ++i) run_cell(i);
    return map;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
        try {
          run_cell(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return map;
}

}  // namespace spinbath
