#pragma once

#include <cmath>
#include <stdexcept>

namespace satnoma {

// Bessel function of the first kind, integer order 0..3. Two regimes:
//
//  - |x| <= 12: direct power series
//        J_n(x) = sum_m (-1)^m / (m! (m+n)!) (x/2)^{2m+n}
//    accumulated in extended precision. The alternating terms stay small
//    enough here that cancellation costs at most a couple of digits.
//
//  - 12 < |x| < 50: the series terms grow to ~e^x before cancelling down to
//    O(1), which destroys the result, so instead run the classic backward
//    three-term recurrence (Miller's algorithm): start high above the
//    turning point with J_{N+1} = 0, J_N = tiny, recur
//        J_{k-1} = (2k/x) J_k - J_{k+1}
//    downward (numerically stable in this direction), then normalize with
//    the even-order identity J_0 + 2 sum_{k>=1} J_{2k} = 1.
//
// Domain |x| < 50 keeps the recurrence start index small and bounded; the
// caller gets an error instead of a quietly wrong value outside it.
inline double bessel_j(int order, double x) {
  if (order < 0 || order > 3) throw std::domain_error("bessel_j: order must be 0..3");
  if (!(std::abs(x) < 50.0)) throw std::domain_error("bessel_j: |x| must be < 50");

  // J_n(-x) = (-1)^n J_n(x)
  double sign = 1.0;
  if (x < 0.0) {
    x = -x;
    if (order % 2 == 1) sign = -1.0;
  }
  if (x == 0.0) return order == 0 ? 1.0 : 0.0;

  if (x <= 12.0) {
    const long double half = static_cast<long double>(x) / 2.0L;
    const long double ratio_x2 = half * half;

    // leading term: (x/2)^n / n!
    long double term = 1.0L;
    for (int i = 1; i <= order; ++i) term *= half / i;

    long double sum = term;
    for (int m = 1; m < 400; ++m) {
      term *= -ratio_x2 / (static_cast<long double>(m) * (m + order));
      sum += term;
      // stop only in the decaying regime, where |t_{m+1}| < |t_m|
      const bool decaying =
          ratio_x2 < static_cast<long double>(m + 1) * (m + 1 + order);
      if (decaying && std::abs(static_cast<double>(term)) <=
                          1e-15 * std::abs(static_cast<double>(sum)))
        break;
    }
    return sign * static_cast<double>(sum);
  }

  // Backward recurrence. Starting ~x + 15 x^(1/3) + 20 orders above the
  // turning point leaves the contamination from the arbitrary start values
  // far below double precision by the time the recursion reaches order 3.
  const long double lx = static_cast<long double>(x);
  int start = static_cast<int>(x + 15.0 * std::cbrt(x)) + 20;
  long double j_above = 0.0L;      // J_{k+1}, unnormalized
  long double j_cur = 1e-30L;      // J_k, unnormalized
  long double even_sum = 0.0L;     // sum of even orders >= 2
  long double out = 0.0L;
  for (int k = start; k >= 1; --k) {
    const long double j_below = (2.0L * k / lx) * j_cur - j_above;
    j_above = j_cur;
    j_cur = j_below;  // now holds J_{k-1}
    const int n = k - 1;
    if (n >= 2 && n % 2 == 0) even_sum += j_cur;
    if (n == order) out = j_cur;
    if (std::abs(static_cast<double>(j_cur)) > 1e250) {  // rescale, same scale all
      j_cur *= 1e-250L;
      j_above *= 1e-250L;
      even_sum *= 1e-250L;
      out *= 1e-250L;
    }
  }
  const long double norm = j_cur + 2.0L * even_sum;  // j_cur is now J_0
  return sign * static_cast<double>(out / norm);
}

}  // namespace satnoma
