#pragma once

#include <cmath>

namespace spinbath {

/// Dawson integral F(x) = exp(-x^2) * Int_0^x exp(t^2) dt.
///
/// For |x| <= 6 the defining integral's Maclaurin series is summed with all
/// positive terms and multiplied by exp(-x^2), which avoids the cancellation
/// of the alternating series for F itself. Beyond 6 the asymptotic expansion
/// F ~ 1/(2x) * sum_k (2k-1)!!/(2x^2)^k is truncated at its smallest term.
/// Absolute accuracy is ~1e-15 over the whole line; F is odd.
inline double dawson(double x) {
  const double ax = std::abs(x);
  if (ax == 0.0) return 0.0;
  double result;
  if (ax <= 6.0) {
    // Int_0^x e^{t^2} dt = sum_n x^{2n+1} / (n! (2n+1)), positive terms only.
    const double x2 = ax * ax;
    double power = ax;  // x^{2n+1} / n!
    double sum = ax;
    for (int n = 1; n < 400; ++n) {
      power *= x2 / n;
      const double term = power / (2 * n + 1);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    result = std::exp(-x2) * sum;
  } else {
    const double inv2x2 = 0.5 / (ax * ax);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
      const double next = term * (2 * k - 1) * inv2x2;
      if (next >= term) break;  // past the smallest term of the expansion
      term = next;
      sum += term;
      if (term < sum * 1e-18) break;
    }
    result = sum / (2.0 * ax);
  }
  return std::copysign(result, x);
}

}  // namespace spinbath
