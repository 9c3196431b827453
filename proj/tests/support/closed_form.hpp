#pragma once

// Closed-form scalar blocks in d = 2 and d = 4 from Gauss hypergeometric
// functions, summed directly. Independent of the radial recursion.

#include <complex>

namespace fixture {

using cplx = std::complex<long double>;

inline cplx hyp2f1(long double a, long double b, long double c, cplx x) {
  cplx term = 1, sum = 1;
  for (int n = 0; n < 2000; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (n + 1.0L)) * x;
    sum += term;
    if (std::abs(term) < 1e-24L * std::abs(sum) && n > 10) break;
  }
  return sum;
}

// x^{beta/2} 2F1(beta/2 + a, beta/2 + b; beta; x)
inline cplx k_beta(long double beta, long double a, long double b, cplx x) {
  return std::pow(x, beta / 2) * hyp2f1(beta / 2 + a, beta / 2 + b, beta, x);
}

inline cplx block_d2(long double delta, int l, long double a, long double b, cplx z, cplx zb) {
  return (k_beta(delta + l, a, b, z) * k_beta(delta - l, a, b, zb) +
          k_beta(delta - l, a, b, z) * k_beta(delta + l, a, b, zb)) / 2.0L;
}

inline cplx block_d4(long double delta, int l, long double a, long double b, cplx z, cplx zb) {
  cplx num = k_beta(delta + l, a, b, z) * k_beta(delta - l - 2, a, b, zb) -
             k_beta(delta - l - 2, a, b, z) * k_beta(delta + l, a, b, zb);
  return z * zb / (z - zb) * num / (l + 1.0L);
}

}  // namespace fixture
