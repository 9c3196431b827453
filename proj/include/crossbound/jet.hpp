#pragma once

// Truncated bivariate Taylor series in (du, dv): coefficient t(m, n) of
// du^m dv^n, kept for m + n <= order.

#include <algorithm>
#include <cstddef>
#include <vector>

#include "crossbound/numeric.hpp"

namespace crossbound {

template <class T>
class Jet {
 public:
  Jet() = default;
  explicit Jet(int order, T c0 = T(0)) : order_(order), c_(size(order), T(0)) { c_[0] = c0; }

  static std::size_t size(int order) { return std::size_t(order + 1) * (order + 2) / 2; }
  static std::size_t index(int m, int n) {
    std::size_t k = m + n;
    return k * (k + 1) / 2 + n;
  }

  int order() const { return order_; }
  T& operator()(int m, int n) { return c_[index(m, n)]; }
  const T& operator()(int m, int n) const { return c_[index(m, n)]; }
  const T& value() const { return c_[0]; }
  std::vector<T>& data() { return c_; }
  const std::vector<T>& data() const { return c_; }

  static Jet variable_u(int order, T u0) {
    Jet j(order, u0);
    if (order > 0) j(1, 0) = T(1);
    return j;
  }
  static Jet variable_v(int order, T v0) {
    Jet j(order, v0);
    if (order > 0) j(0, 1) = T(1);
    return j;
  }

  Jet& operator+=(const Jet& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator*=(const T& s) {
    for (auto& x : c_) x *= s;
    return *this;
  }
  // this += s * o
  void axpy(const T& s, const Jet& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += s * o.c_[i];
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, const T& s) { return a *= s; }
  friend Jet operator*(const T& s, Jet a) { return a *= s; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    const int L = std::min(a.order_, b.order_);
    Jet r(L);
    for (int k = 0; k <= L; ++k) {
      for (int n = 0; n <= k; ++n) {
        const int m = k - n;
        T s(0);
        for (int m1 = 0; m1 <= m; ++m1)
          for (int n1 = 0; n1 <= n; ++n1) s += a(m1, n1) * b(m - m1, n - n1);
        r(m, n) = s;
      }
    }
    return r;
  }

  // f(u, v) -> f(v, u)
  Jet swapped() const {
    Jet r(order_);
    for (int k = 0; k <= order_; ++k)
      for (int n = 0; n <= k; ++n) r(k - n, n) = (*this)(n, k - n);
    return r;
  }

  T max_abs() const {
    T m(0);
    for (const auto& x : c_) m = std::max(m, tabs(x));
    return m;
  }

  template <class U>
  Jet<U> cast() const {
    Jet<U> r(order_);
    for (std::size_t i = 0; i < c_.size(); ++i) r.data()[i] = static_cast<U>(c_[i]);
    return r;
  }

 private:
  int order_ = 0;
  std::vector<T> c_;
};

// sum_k phi[k] g^k with g(0, 0) = 0.
template <class T>
Jet<T> compose(const std::vector<T>& phi, const Jet<T>& g) {
  const int L = g.order();
  const int K = std::min<int>(L, int(phi.size()) - 1);
  Jet<T> r(L, K >= 0 ? phi[K] : T(0));
  for (int k = K - 1; k >= 0; --k) {
    r = r * g;
    r.data()[0] += phi[k];
  }
  return r;
}

// f^p for f(0, 0) > 0.
template <class T>
Jet<T> power(const Jet<T>& f, const T& p) {
  const T f0 = f.value();
  Jet<T> g = f * (T(1) / f0);
  g.data()[0] -= T(1);
  std::vector<T> phi(f.order() + 1);
  for (int k = 0; k <= f.order(); ++k) phi[k] = binom(p, k);
  return compose(phi, g) * tpow(f0, p);
}

template <class T>
Jet<T> reciprocal(const Jet<T>& f) {
  const T f0 = f.value();
  Jet<T> g = f * (T(1) / f0);
  g.data()[0] -= T(1);
  std::vector<T> phi(f.order() + 1);
  for (int k = 0; k <= f.order(); ++k) phi[k] = (k % 2 ? T(-1) : T(1));
  return compose(phi, g) * (T(1) / f0);
}

// g times a series in one variable, a[k] the coefficient of du^k (or dv^k).
template <class T>
Jet<T> mul_univariate(const Jet<T>& g, const std::vector<T>& a, bool in_v) {
  const int L = g.order();
  Jet<T> r(L);
  for (int m = 0; m <= L; ++m)
    for (int n = 0; m + n <= L; ++n) {
      T s(0);
      const int top = in_v ? n : m;
      for (int k = 0; k <= top; ++k) s += a[k] * (in_v ? g(m, n - k) : g(m - k, n));
      r(m, n) = s;
    }
  return r;
}

// Taylor coefficients of (x0 + dx)^p up to degree order.
template <class T>
std::vector<T> power_series(int order, const T& x0, const T& p) {
  std::vector<T> c(order + 1);
  c[0] = tpow(x0, p);
  for (int k = 0; k < order; ++k) c[k + 1] = c[k] * (p - T(k)) / (T(k + 1) * x0);
  return c;
}

// (x0 + dx)^p as a jet in one of the two variables.
template <class T>
Jet<T> monomial_power(int order, const T& x0, const T& p, bool in_v) {
  Jet<T> r(order);
  T c = tpow(x0, p);
  for (int k = 0; k <= order; ++k) {
    if (in_v) r(0, k) = c; else r(k, 0) = c;
    c = c * (p - T(k)) / (T(k + 1) * x0);
  }
  return r;
}

}  // namespace crossbound
