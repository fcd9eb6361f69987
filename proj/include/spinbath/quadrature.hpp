#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <queue>
#include <utility>
#include <vector>

#include "spinbath/errors.hpp"

namespace spinbath {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// generated by Newton iteration on the Legendre recurrence.
class GaussLegendre {
 public:
  explicit GaussLegendre(int n) : x_(n), w_(n) {
    if (n < 1) throw std::invalid_argument("GaussLegendre: order must be >= 1");
    for (int k = 0; k < (n + 1) / 2; ++k) {
      double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
      double dp = 1.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (int j = 2; j <= n; ++j) {
          const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
          p0 = p1;
          p1 = p2;
        }
        dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      x_[k] = -x;
      w_[k] = w;
      x_[n - 1 - k] = x;
      w_[n - 1 - k] = w;
    }
    if (n % 2 == 1) x_[n / 2] = 0.0;
  }

  int size() const { return static_cast<int>(x_.size()); }
  const std::vector<double>& nodes() const { return x_; }
  const std::vector<double>& weights() const { return w_; }

  template <typename F>
  double integrate(F&& f, double a, double b) const {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) sum += w_[i] * f(mid + half * x_[i]);
    return half * sum;
  }

 private:
  std::vector<double> x_;
  std::vector<double> w_;
};

/// Composite rule: `panels` equal Gauss-Legendre panels over [a, b].
template <typename F>
double integrate_panels(F&& f, double a, double b, int panels, const GaussLegendre& rule) {
  double sum = 0.0;
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) sum += rule.integrate(f, a + p * w, a + (p + 1) * w);
  return sum;
}

struct QuadratureResult {
  double value;
  double error;
};

/// Globally adaptive integration over [a, b] with an embedded 15/31-point
/// Gauss pair for local error estimates and worst-interval-first bisection.
/// Throws NumericalError when the interval budget is exhausted before the
/// tolerance max(atol, rtol*|I|) is met.
inline QuadratureResult adaptive_integrate(const std::function<double(double)>& f, double a,
                                           double b, double atol = 1e-10, double rtol = 1e-8,
                                           int max_intervals = 8000, int initial_segments = 16) {
  static const GaussLegendre coarse(15);
  static const GaussLegendre fine(31);
  if (!(b > a)) {
    if (b == a) return {0.0, 0.0};
    throw std::invalid_argument("adaptive_integrate: bad interval");
  }

  struct Segment {
    double a, b, value, error;
    long seq;
  };
  struct WorstFirst {
    bool operator()(const Segment& p, const Segment& q) const {
      if (p.error != q.error) return p.error < q.error;
      return p.seq > q.seq;  // deterministic tie-break
    }
  };

  long seq = 0;
  auto make_segment = [&](double lo, double hi) {
    const double v = fine.integrate(f, lo, hi);
    const double e = std::abs(v - coarse.integrate(f, lo, hi));
    return Segment{lo, hi, v, e, seq++};
  };

  std::priority_queue<Segment, std::vector<Segment>, WorstFirst> heap;
  double total = 0.0;
  double total_err = 0.0;
  initial_segments = std::max(1, initial_segments);
  const double seg_w = (b - a) / initial_segments;
  for (int i = 0; i < initial_segments; ++i) {
    Segment s = make_segment(a + i * seg_w, a + (i + 1) * seg_w);
    total += s.value;
    total_err += s.error;
    heap.push(s);
  }

  int used = initial_segments;
  const double min_width = 1e-14 * (b - a);
  while (total_err > std::max(atol, rtol * std::abs(total))) {
    if (used >= max_intervals) {
      throw NumericalError("adaptive_integrate: interval budget exhausted");
    }
    Segment worst = heap.top();
    heap.pop();
    if (worst.b - worst.a < min_width) {
      throw NumericalError("adaptive_integrate: interval underflow");
    }
    total -= worst.value;
    total_err -= worst.error;
    const double mid = 0.5 * (worst.a + worst.b);
    for (Segment s : {make_segment(worst.a, mid), make_segment(mid, worst.b)}) {
      total += s.value;
      total_err += s.error;
      heap.push(s);
    }
    ++used;
  }
  return {total, total_err};
}

/// (1 - cos x) / x^2, stable near x = 0.
inline double one_minus_cos_over_x2(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-4) {
    const double x2 = x * x;
    return 0.5 - x2 / 24.0 + x2 * x2 / 720.0;
  }
  const double s = std::sin(0.5 * x);
  return 2.0 * s * s / (x * x);
}

}  // namespace spinbath
