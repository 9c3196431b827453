#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/float128.hpp>

namespace crossbound {

// Working precision (64-bit mantissa) and the elevated precision used by
// certificate checks (113-bit mantissa).
using Real = long double;
using Quad = boost::multiprecision::float128;

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class T>
inline T to(Real x) {
  return static_cast<T>(x);
}

template <class T>
inline Real to_real(const T& x) {
  return static_cast<Real>(x);
}

template <class T>
inline T tpow(const T& a, const T& b) {
  using std::pow;
  return pow(a, b);
}

template <class T>
inline T tabs(const T& a) {
  using std::abs;
  return abs(a);
}

template <class T>
inline T tsqrt(const T& a) {
  using std::sqrt;
  return sqrt(a);
}

template <class T>
inline T tlog(const T& a) {
  using std::log;
  return log(a);
}

// Generalized binomial coefficient binom(p, k).
template <class T>
inline T binom(const T& p, int k) {
  T r(1);
  for (int i = 0; i < k; ++i) r = r * (p - T(i)) / T(i + 1);
  return r;
}

inline Real factorial(int n) {
  Real r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// 12 significant digits, the precision of every printed number.
inline std::string fmt12(Real x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12Lg", x);
  return buf;
}

}  // namespace crossbound
