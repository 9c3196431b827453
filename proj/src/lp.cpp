#include "crossbound/lp.hpp"

#include <algorithm>
#include <cmath>

namespace crossbound {

namespace {

constexpr Real kOptTol = 1e-14L;
constexpr Real kPivTol = 1e-11L;
constexpr Real kFeasTol = 1e-16L;
constexpr int kRefactorEvery = 64;
constexpr int kDegenerateLimit = 60;

}  // namespace

ConeLP::ConeLP(const std::vector<Real>& b, Real perturbation) : n_(b.size()), b_(b) {
  if (n_ == 0) throw ConfigError("empty functional space");
  Real scale = 0;
  for (Real x : b) scale = std::max(scale, std::fabs(x));
  if (scale == 0) scale = 1;
  bp_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    // fixed pseudo-random factors in [1, 2)
    const Real f = 1 + std::fmod(Real(i + 1) * 0.6180339887498948482L, Real(1));
    const Real s = b[i] < 0 ? -1 : 1;
    bp_[i] = b[i] + s * perturbation * scale * f;
  }
  std::vector<Real> col(n_, 0);
  for (std::size_t i = 0; i < n_; ++i) {
    col[i] = 1;
    add_column(col.data(), 1);
    col[i] = -1;
    add_column(col.data(), 1);
    col[i] = 0;
  }
  head_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    head_[i] = 2 * i + (bp_[i] < 0 ? 1 : 0);
    basic_[head_[i]] = 1;
  }
  binv_.assign(n_ * n_, 0);
  for (std::size_t i = 0; i < n_; ++i) binv_[i * n_ + i] = bp_[i] < 0 ? -1 : 1;
  alpha_.assign(n_, 0);
}

std::size_t ConeLP::add_column(const Real* a, Real cost) {
  a_.insert(a_.end(), a, a + n_);
  for (std::size_t i = 0; i < n_; ++i) ad_.push_back(double(a[i]));
  cost_.push_back(cost);
  basic_.push_back(0);
  return cols_++;
}

std::size_t ConeLP::add_generator(const std::vector<Real>& g) {
  if (g.size() != n_) throw ConfigError("generator dimension mismatch");
  return add_column(g.data(), 0) - 2 * n_;
}

template <class T>
void ConeLP::Phase<T>::refactor(const ConeLP& lp) {
  // Gauss-Jordan on [B | I] with partial pivoting
  const std::size_t m = lp.n_;
  const std::vector<T>& A = lp.columns<T>();
  std::vector<T> B(m * m);
  for (std::size_t k = 0; k < m; ++k) {
    const T* c = A.data() + lp.head_[k] * m;
    for (std::size_t i = 0; i < m; ++i) B[i * m + k] = c[i];
  }
  std::vector<T> inv(m * m, 0);
  for (std::size_t i = 0; i < m; ++i) inv[i * m + i] = 1;
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < m; ++i)
      if (std::fabs(B[i * m + k]) > std::fabs(B[p * m + k])) p = i;
    if (std::fabs(B[p * m + k]) < T(1e-30L)) throw SolverFailure("singular basis");
    if (p != k) {
      std::swap_ranges(B.begin() + p * m, B.begin() + p * m + m, B.begin() + k * m);
      std::swap_ranges(inv.begin() + p * m, inv.begin() + p * m + m, inv.begin() + k * m);
    }
    const T piv = B[k * m + k];
    for (std::size_t j = k; j < m; ++j) B[k * m + j] /= piv;
    for (std::size_t j = 0; j < m; ++j) inv[k * m + j] /= piv;
    T* bk = B.data() + k * m;
    T* ik = inv.data() + k * m;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == k) continue;
      const T f = B[i * m + k];
      if (f == 0) continue;
      T* bi = B.data() + i * m;
      T* ii = inv.data() + i * m;
#pragma omp simd
      for (std::size_t j = k; j < m; ++j) bi[j] -= f * bk[j];
#pragma omp simd
      for (std::size_t j = 0; j < m; ++j) ii[j] -= f * ik[j];
    }
  }
  binv = std::move(inv);
  xb.assign(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    T x = 0;
    for (std::size_t k = 0; k < m; ++k) x += binv[i * m + k] * T(lp.bp_[k]);
    xb[i] = x;
  }
  since_refactor = 0;
}

template <class T>
void ConeLP::Phase<T>::duals(const ConeLP& lp) {
  const std::size_t m = lp.n_;
  y.assign(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const T c = T(lp.cost_[lp.head_[i]]);
    if (c == 0) continue;
    const T* row = binv.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) y[j] += c * row[j];
  }
}

// Primal simplex in precision T from the current basis. Returns false when the
// iteration budget runs out. With devex the reduced costs are updated from the
// pivot row and priced against approximate edge norms; otherwise Dantzig.
template <class T>
bool ConeLP::Phase<T>::run(ConeLP& lp, long& budget, T opt_tol, T piv_tol, T feas_tol, bool devex) {
  const std::size_t m = lp.n_;
  const std::vector<T>& A = lp.columns<T>();
  std::vector<T> w(m), rho(m), d, gamma;
  int degenerate = 0;
  bool verified = false;
  auto reprice = [&] {
    duals(lp);
    d.assign(lp.cols_, 0);
    for (std::size_t j = 0; j < lp.cols_; ++j) {
      if (lp.basic_[j]) continue;
      const T* c = A.data() + j * m;
      T s = 0;
#pragma omp simd reduction(+ : s)
      for (std::size_t i = 0; i < m; ++i) s += y[i] * c[i];
      d[j] = T(lp.cost_[j]) - s;
    }
  };
  refactor(lp);
  if (devex) {
    gamma.assign(lp.cols_, 1);
    reprice();
  }
  for (;;) {
    if (budget <= 0) return false;
    if (since_refactor >= kRefactorEvery) {
      refactor(lp);
      if (devex) reprice();
    }
    const bool bland = degenerate > kDegenerateLimit;
    std::size_t q = lp.cols_;
    T best = -opt_tol;
    if (devex && !bland) {
      T score = 0;
      for (std::size_t j = 0; j < lp.cols_; ++j) {
        if (lp.basic_[j] || !(d[j] < -opt_tol)) continue;
        const T sc = d[j] * d[j] / gamma[j];
        if (sc > score) {
          score = sc;
          q = j;
        }
      }
      if (q != lp.cols_) best = d[q];
    } else {
      // Dantzig pricing, Bland's rule after a long degenerate run
      duals(lp);
      for (std::size_t j = 0; j < lp.cols_; ++j) {
        if (lp.basic_[j]) continue;
        const T* c = A.data() + j * m;
        T s = 0;
#pragma omp simd reduction(+ : s)
        for (std::size_t i = 0; i < m; ++i) s += y[i] * c[i];
        const T dj = T(lp.cost_[j]) - s;
        if (dj < best) {
          best = dj;
          q = j;
          if (bland) break;
        }
      }
    }
    if (q == lp.cols_) {
      if (!verified && since_refactor > 0) {
        refactor(lp);
        if (devex) reprice();
        verified = true;
        continue;
      }
      return true;
    }
    verified = false;

    const T* aq = A.data() + q * m;
    for (std::size_t i = 0; i < m; ++i) {
      const T* row = binv.data() + i * m;
      T s = 0;
#pragma omp simd reduction(+ : s)
      for (std::size_t k = 0; k < m; ++k) s += row[k] * aq[k];
      w[i] = s;
    }

    std::size_t r = m;
    if (bland) {
      T best_ratio = T(INFINITY);
      for (std::size_t i = 0; i < m; ++i) {
        if (w[i] <= piv_tol) continue;
        const T ratio = std::max<T>(xb[i], 0) / w[i];
        if (ratio < best_ratio || (ratio == best_ratio && lp.head_[i] < lp.head_[r])) {
          best_ratio = ratio;
          r = i;
        }
      }
    } else {
      // Harris: largest pivot among rows within the relaxed ratio bound
      T theta_max = T(INFINITY);
      for (std::size_t i = 0; i < m; ++i)
        if (w[i] > piv_tol) theta_max = std::min(theta_max, (std::max<T>(xb[i], 0) + feas_tol) / w[i]);
      T rbest = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (w[i] <= piv_tol || std::max<T>(xb[i], 0) / w[i] > theta_max) continue;
        if (w[i] > rbest) {
          rbest = w[i];
          r = i;
        }
      }
    }
    if (r == m) throw SolverFailure("unbounded phase-one program");
    const T theta = std::max<T>(xb[r], 0) / w[r];
    degenerate = theta * -best <= T(1e-22L) ? degenerate + 1 : 0;
    const std::size_t leave = lp.head_[r];

    if (devex) {
      std::copy(binv.begin() + r * m, binv.begin() + (r + 1) * m, rho.begin());
      const T ratio = d[q] / w[r], gq = gamma[q];
      for (std::size_t j = 0; j < lp.cols_; ++j) {
        if (lp.basic_[j] || j == q) continue;
        const T* c = A.data() + j * m;
        T s = 0;
#pragma omp simd reduction(+ : s)
        for (std::size_t i = 0; i < m; ++i) s += rho[i] * c[i];
        if (s == 0) continue;
        d[j] -= ratio * s;
        const T g = s / w[r];
        gamma[j] = std::max(gamma[j], g * g * gq);
      }
      d[q] = 0;
      d[leave] = -ratio;
      gamma[leave] = std::max<T>(gq / (w[r] * w[r]), 1);
    }

    for (std::size_t i = 0; i < m; ++i) xb[i] -= theta * w[i];
    xb[r] = theta;
    lp.basic_[leave] = 0;
    lp.head_[r] = q;
    lp.basic_[q] = 1;

    T* pr = binv.data() + r * m;
    const T piv = w[r];
    for (std::size_t k = 0; k < m; ++k) pr[k] /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r || w[i] == 0) continue;
      T* row = binv.data() + i * m;
      const T f = w[i];
#pragma omp simd
      for (std::size_t k = 0; k < m; ++k) row[k] -= f * pr[k];
    }
    ++since_refactor;
    ++lp.iterations_;
    --budget;
  }
}

template <>
const std::vector<double>& ConeLP::columns<double>() const {
  return ad_;
}

template <>
const std::vector<Real>& ConeLP::columns<Real>() const {
  return a_;
}

LpStatus ConeLP::solve(long max_iterations) {
  long budget = max_iterations;
  // bulk of the pivots in double, then polish the same basis in Real
  Phase<double> fast;
  if (!fast.run(*this, budget, 1e-11, 1e-9, 1e-13, true)) return LpStatus::IterationLimit;
  Phase<Real> exact;
  if (!exact.run(*this, budget, kOptTol, kPivTol, kFeasTol, false)) return LpStatus::IterationLimit;
  exact.duals(*this);
  residual_ = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    alpha_[i] = -exact.y[i];
    residual_ += exact.y[i] * b_[i];
  }
  binv_ = std::move(exact.binv);
  return LpStatus::Optimal;
}

std::vector<Real> ConeLP::weights() const {
  std::vector<Real> wts(cols_ - 2 * n_, 0);
  for (std::size_t i = 0; i < n_; ++i) {
    if (head_[i] < 2 * n_) continue;
    Real x = 0;
    for (std::size_t k = 0; k < n_; ++k) x += binv_[i * n_ + k] * b_[k];
    wts[head_[i] - 2 * n_] = x;
  }
  return wts;
}

}  // namespace crossbound
