#include "crossbound/blocks.hpp"

#include <complex>
#include <functional>
#include <type_traits>
#include <cstdio>

namespace crossbound {

namespace {

// Casimir recursion stencil. Entry (p, q) multiplies c_{i,j} in the equation
// for target (i + p, j + q); its coefficient is a polynomial in
// x = alpha + i, y = alpha + j with monomials {1, x, y, x^2, y^2}, each
// linear in {1, C, ab, a + b, d}.
struct StencilEntry {
  int p, q;
  int k[5][5];
};

constexpr StencilEntry kStencil[] = {
    {0, 1, {{0, 1, 0, 0, 0}, {-2, 0, 0, 0, 2}, {2, 0, 0, 0, 0}, {-2, 0, 0, 0, 0}, {-2, 0, 0, 0, 0}}},
    {0, 2, {{0, 1, 8, 0, 0}, {-2, 0, 0, 0, 2}, {2, 0, 0, 8, 0}, {-2, 0, 0, 0, 0}, {-2, 0, 0, 0, 0}}},
    {0, 3, {{0, -1, -8, 0, 0}, {2, 0, 0, 0, -2}, {2, 0, 0, 8, 0}, {2, 0, 0, 0, 0}, {2, 0, 0, 0, 0}}},
    {0, 4, {{0, -1, 0, 0, 0}, {2, 0, 0, 0, -2}, {2, 0, 0, 0, 0}, {2, 0, 0, 0, 0}, {2, 0, 0, 0, 0}}},
    {1, 0, {{0, -1, 0, 0, 0}, {-2, 0, 0, 0, 0}, {2, 0, 0, 0, -2}, {2, 0, 0, 0, 0}, {2, 0, 0, 0, 0}}},
    {1, 1, {{0, 0, 0, 0, 0}, {-4, 0, 0, 8, 2}, {4, 0, 0, -8, -2}, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}}},
    {1, 2, {{0, 1, 24, 0, 0}, {-2, 0, 0, 8, 2}, {-10, 0, 0, 0, 4}, {-2, 0, 0, 0, 0}, {-2, 0, 0, 0, 0}}},
    {1, 3, {{0, -1, -24, 0, 0}, {2, 0, 0, -8, -2}, {-10, 0, 0, 0, 4}, {2, 0, 0, 0, 0}, {2, 0, 0, 0, 0}}},
    {1, 4, {{0, 0, 0, 0, 0}, {4, 0, 0, -8, -2}, {4, 0, 0, -8, -2}, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}}},
    {1, 5, {{0, 1, 0, 0, 0}, {2, 0, 0, 0, 0}, {2, 0, 0, 0, -2}, {-2, 0, 0, 0, 0}, {-2, 0, 0, 0, 0}}},
    {2, 0, {{0, -1, -8, 0, 0}, {-2, 0, 0, -8, 0}, {2, 0, 0, 0, -2}, {2, 0, 0, 0, 0}, {2, 0, 0, 0, 0}}},
    {2, 1, {{0, -1, -24, 0, 0}, {10, 0, 0, 0, -4}, {2, 0, 0, -8, -2}, {2, 0, 0, 0, 0}, {2, 0, 0, 0, 0}}},
    {2, 2, {{0, 0, 0, 0, 0}, {12, 0, 0, 8, -4}, {-12, 0, 0, -8, 4}, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}}},
    {2, 3, {{0, 0, 0, 0, 0}, {-12, 0, 0, -8, 4}, {-12, 0, 0, -8, 4}, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}}},
    {2, 4, {{0, 1, 24, 0, 0}, {-10, 0, 0, 0, 4}, {2, 0, 0, -8, -2}, {-2, 0, 0, 0, 0}, {-2, 0, 0, 0, 0}}},
    {2, 5, {{0, 1, 8, 0, 0}, {2, 0, 0, 8, 0}, {2, 0, 0, 0, -2}, {-2, 0, 0, 0, 0}, {-2, 0, 0, 0, 0}}},
    {3, 0, {{0, 1, 8, 0, 0}, {-2, 0, 0, -8, 0}, {-2, 0, 0, 0, 2}, {-2, 0, 0, 0, 0}, {-2, 0, 0, 0, 0}}},
    {3, 1, {{0, 1, 24, 0, 0}, {10, 0, 0, 0, -4}, {-2, 0, 0, 8, 2}, {-2, 0, 0, 0, 0}, {-2, 0, 0, 0, 0}}},
    {3, 2, {{0, 0, 0, 0, 0}, {12, 0, 0, 8, -4}, {12, 0, 0, 8, -4}, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}}},
    {3, 3, {{0, 0, 0, 0, 0}, {-12, 0, 0, -8, 4}, {12, 0, 0, 8, -4}, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}}},
    {3, 4, {{0, -1, -24, 0, 0}, {-10, 0, 0, 0, 4}, {-2, 0, 0, 8, 2}, {2, 0, 0, 0, 0}, {2, 0, 0, 0, 0}}},
    {3, 5, {{0, -1, -8, 0, 0}, {2, 0, 0, 8, 0}, {-2, 0, 0, 0, 2}, {2, 0, 0, 0, 0}, {2, 0, 0, 0, 0}}},
    {4, 0, {{0, 1, 0, 0, 0}, {-2, 0, 0, 0, 0}, {-2, 0, 0, 0, 2}, {-2, 0, 0, 0, 0}, {-2, 0, 0, 0, 0}}},
    {4, 1, {{0, 0, 0, 0, 0}, {-4, 0, 0, 8, 2}, {-4, 0, 0, 8, 2}, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}}},
    {4, 2, {{0, -1, -24, 0, 0}, {-2, 0, 0, 8, 2}, {10, 0, 0, 0, -4}, {2, 0, 0, 0, 0}, {2, 0, 0, 0, 0}}},
    {4, 3, {{0, 1, 24, 0, 0}, {2, 0, 0, -8, -2}, {10, 0, 0, 0, -4}, {-2, 0, 0, 0, 0}, {-2, 0, 0, 0, 0}}},
    {4, 4, {{0, 0, 0, 0, 0}, {4, 0, 0, -8, -2}, {-4, 0, 0, 8, 2}, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}}},
    {4, 5, {{0, -1, 0, 0, 0}, {2, 0, 0, 0, 0}, {-2, 0, 0, 0, 2}, {2, 0, 0, 0, 0}, {2, 0, 0, 0, 0}}},
    {5, 1, {{0, -1, 0, 0, 0}, {-2, 0, 0, 0, 2}, {-2, 0, 0, 0, 0}, {2, 0, 0, 0, 0}, {2, 0, 0, 0, 0}}},
    {5, 2, {{0, -1, -8, 0, 0}, {-2, 0, 0, 0, 2}, {-2, 0, 0, -8, 0}, {2, 0, 0, 0, 0}, {2, 0, 0, 0, 0}}},
    {5, 3, {{0, 1, 8, 0, 0}, {2, 0, 0, 0, -2}, {-2, 0, 0, -8, 0}, {-2, 0, 0, 0, 0}, {-2, 0, 0, 0, 0}}},
    {5, 4, {{0, 1, 0, 0, 0}, {2, 0, 0, 0, -2}, {-2, 0, 0, 0, 0}, {-2, 0, 0, 0, 0}, {-2, 0, 0, 0, 0}}},
};

template <class T>
struct Coef {
  int p, q;
  T k0, kx, ky, kxx, kyy;
  T operator()(const T& x, const T& y) const { return k0 + x * (kx + kxx * x) + y * (ky + kyy * y); }
};

struct RhoPair {
  std::complex<long double> rho, rhob;
};

RhoPair rho_pair(Real u, Real v) {
  using C = std::complex<long double>;
  const long double s = 1 + u - v, p = u;
  const C sq = std::sqrt(C(s * s - 4 * p, 0));
  const C z = (s + sq) / 2.0L, zb = (s - sq) / 2.0L;
  auto rho = [](C w) {
    C t = 1.0L + std::sqrt(1.0L - w);
    return w / (t * t);
  };
  return {rho(z), rho(zb)};
}

bool is_identity(const BlockParams& p) { return p.delta == 0 && p.spin == 0; }

}  // namespace

Real unitarity_min(Real d, int spin) { return spin == 0 ? (d - 2) / 2 : spin + d - 2; }

Real radial_modulus(const CrossingPoint& p) {
  if (!(p.u0 > 0) || !(p.v0 > 0)) return 1;
  RhoPair r = rho_pair(p.u0, p.v0);
  return std::max(std::abs(r.rho), std::abs(r.rhob));
}

bool in_convergence_region(const CrossingPoint& p) { return radial_modulus(p) < 1; }

bool in_crossing_region(const CrossingPoint& p) {
  return in_convergence_region(p) && in_convergence_region(p.mirrored());
}

void require_crossing_region(const CrossingPoint& p) {
  if (!in_crossing_region(p)) throw DomainError("crossing point outside the convergence region of both channels");
}

template <class T>
RadialSeries<T> radial_series(const BlockParams& bp, int levels) {
  const int l = bp.spin;
  const T d = to<T>(bp.d), delta = to<T>(bp.delta);
  const T a = -to<T>(bp.d12) / 2, b = to<T>(bp.d34) / 2;
  const T C = delta * (delta - d) + T(l) * (T(l) + d - T(2));

  RadialSeries<T> s;
  s.spin = l;
  s.levels = levels;
  s.alpha = (delta - T(l)) / 2;
  s.stride = l + levels + 2;
  s.c.assign(std::size_t(s.stride) * s.stride, T(0));

  const T par[5] = {T(1), C, a * b, a + b, d};
  std::vector<Coef<T>> st;
  Coef<T> k01{}, k10{};
  for (const auto& e : kStencil) {
    T m[5];
    for (int i = 0; i < 5; ++i) {
      m[i] = T(0);
      for (int j = 0; j < 5; ++j)
        if (e.k[i][j]) m[i] += T(e.k[i][j]) * par[j];
    }
    Coef<T> c{e.p, e.q, m[0], m[1], m[2], m[3], m[4]};
    if (e.p == 0 && e.q == 1) k01 = c;
    else if (e.p == 1 && e.q == 0) k10 = c;
    else st.push_back(c);
  }

  // leading level: Fourier coefficients of the Gegenbauer polynomial
  const T nu = d / 2 - T(1);
  if (tabs(nu) < T(1e-30L)) {
    s.at(0, l) += T(1) / 2;
    s.at(l, 0) += T(1) / 2;
  } else {
    std::vector<T> w(l + 1);
    T tot(0);
    for (int k = 0; k <= l; ++k) {
      T x(1);
      for (int i = 0; i < k; ++i) x = x * (nu + T(i)) / T(i + 1);
      for (int i = 0; i < l - k; ++i) x = x * (nu + T(i)) / T(i + 1);
      w[k] = x;
      tot += x;
    }
    for (int k = 0; k <= l; ++k) s.at(k, l - k) = w[k] / tot;
  }

  const T al = s.alpha;
  const T tiny_rel = std::is_same_v<T, Real> ? T(1e-7L) : T(1e-14L);
  const int ns = int(st.size());
  std::vector<int> sp(ns), sq(ns);
  std::vector<T> K0(ns), KX(ns), KY(ns), KXX(ns), KYY(ns);
  for (int e = 0; e < ns; ++e) {
    sp[e] = st[e].p;
    sq[e] = st[e].q;
    K0[e] = st[e].k0;
    KX[e] = st[e].kx;
    KY[e] = st[e].ky;
    KXX[e] = st[e].kxx;
    KYY[e] = st[e].kyy;
  }
  // X[i] = alpha + i, X2[i] = X[i]^2
  std::vector<T> X(s.stride + 1), X2(s.stride + 1);
  for (int i = 0; i <= s.stride; ++i) {
    X[i] = al + T(i);
    X2[i] = X[i] * X[i];
  }
  const T* cc = s.c.data();
  const int stride = s.stride;
  std::vector<T> A, B, r, u;
  for (int n = 1; n <= levels; ++n) {
    const int D = l + n, M = D / 2;
    const bool odd = D % 2;
    const int ne = odd ? M + 2 : M + 1;
    A.assign(ne, T(0));
    B.assign(ne, T(0));
    r.assign(ne, T(0));
    u.assign(M + 1, T(0));
    const T scale = T(1) + tabs(C) + (tabs(al) + T(D)) * (tabs(al) + T(D)) + tabs(par[2]) + tabs(par[3]) * T(D);
    for (int I = 0; I < ne; ++I) {
      const int J = D + 1 - I;
      T acc(0);
      for (int e = 0; e < ns; ++e) {
        const int i = I - sp[e], j = J - sq[e];
        if (i < 0 || j < 0 || i + j < l) continue;
        const T& cij = cc[i * stride + j];
        acc += (K0[e] + KX[e] * X[i] + KXX[e] * X2[i] + KY[e] * X[j] + KYY[e] * X2[j]) * cij;
      }
      r[I] = -acc;
      if (I >= 1) A[I] = k10(X[I - 1], X[J]);
      B[I] = k01(X[I], X[J - 1]);
    }
    int bad = -1;
    for (int I = 0; I <= M; ++I) {
      if (tabs(B[I]) < tiny_rel * scale) {
        bad = I;
        break;
      }
      u[I] = (r[I] - (I ? A[I] * u[I - 1] : T(0))) / B[I];
    }
    if (bad >= 0) {
      // zero pivot: close the chain from the diagonal equation instead
      const T den = odd ? A[M + 1] + B[M + 1] : T(0);
      if (!odd || tabs(den) < tiny_rel * scale) {
        s.pole = true;
        for (int I = bad; I <= M; ++I) u[I] = (r[I] - (I ? A[I] * u[I - 1] : T(0))) / B[I];
      } else {
        u[M] = r[M + 1] / den;
        for (int I = M; I > bad; --I) {
          if (tabs(A[I]) < tiny_rel * scale) s.pole = true;
          u[I - 1] = (r[I] - B[I] * u[I]) / A[I];
        }
      }
    }
    for (int I = 0; I <= M; ++I) {
      s.at(I, D - I) = u[I];
      s.at(D - I, I) = u[I];
    }
  }
  return s;
}

template <class T>
PointBasis<T>::PointBasis(const CrossingPoint& p, int order, int max_degree)
    : point_(p), order_(order), max_degree_(max_degree) {
  if (!in_convergence_region(p)) throw DomainError("point outside the block convergence region");
  RhoPair rp = rho_pair(p.u0, p.v0);
  radius_ = to<T>(std::max(std::abs(rp.rho), std::abs(rp.rhob)));
  T S0 = to<T>(std::real(rp.rho + rp.rhob));
  T R0 = to<T>(std::real(rp.rho * rp.rhob));
  const T s0 = T(1) + to<T>(p.u0) - to<T>(p.v0), p0 = to<T>(p.u0);

  auto jac = [](const T& S, const T& R, T J[2][2], T F[2]) {
    const T W = T(1) + S + R, W3 = W * W * W, N = S + T(4) * R + R * S;
    F[0] = T(4) * N / (W * W);
    F[1] = T(16) * R / (W * W);
    J[0][0] = T(4) * ((T(1) + R) * W - T(2) * N) / W3;
    J[0][1] = T(4) * ((T(4) + S) * W - T(2) * N) / W3;
    J[1][0] = T(-32) * R / W3;
    J[1][1] = T(16) * (W - T(2) * R) / W3;
  };
  T J[2][2], F[2];
  for (int it = 0; it < 6; ++it) {
    jac(S0, R0, J, F);
    const T det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    const T e0 = F[0] - s0, e1 = F[1] - p0;
    S0 -= (J[1][1] * e0 - J[0][1] * e1) / det;
    R0 -= (-J[1][0] * e0 + J[0][0] * e1) / det;
  }
  jac(S0, R0, J, F);
  const T det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
  const T Ji[2][2] = {{J[1][1] / det, -J[0][1] / det}, {-J[1][0] / det, J[0][0] / det}};

  Jet<T> ts(order, s0), tp(order, p0);
  if (order > 0) {
    ts(1, 0) = T(1);
    ts(0, 1) = T(-1);
    tp(1, 0) = T(1);
  }
  S_ = Jet<T>(order, S0);
  R_ = Jet<T>(order, R0);
  for (int it = 0; it <= order; ++it) {
    Jet<T> W = S_ + R_;
    W.data()[0] += T(1);
    Jet<T> iw = reciprocal(W);
    Jet<T> iw2 = iw * iw;
    Jet<T> N = S_ + R_ * T(4) + R_ * S_;
    Jet<T> Fs = (N * iw2) * T(4) - ts;
    Jet<T> Fp = (R_ * iw2) * T(16) - tp;
    Jet<T> dS = Fs * Ji[0][0] + Fp * Ji[0][1];
    Jet<T> dR = Fs * Ji[1][0] + Fp * Ji[1][1];
    S_ -= dS;
    R_ -= dR;
  }

  Jet<T> g = R_ * (T(1) / R0);
  g.data()[0] -= T(1);
  gpow_.push_back(Jet<T>(order, T(1)));
  for (int k = 1; k <= order; ++k) gpow_.push_back(gpow_.back() * g);

  std::vector<Jet<T>> P;
  entries_ = Jet<T>::size(order);
  P.push_back(Jet<T>(order, T(2)));
  P.push_back(S_);
  for (int k = 2; k <= max_degree; ++k) P.push_back(S_ * P[k - 1] - R_ * P[k - 2]);
  Jet<T> Rj(order, T(1));
  for (int j = 0; 2 * j <= max_degree; ++j) {
    offset_.push_back(basis_.size() / entries_);
    for (int k = 0; 2 * j + k <= max_degree; ++k) {
      Jet<T> b = j ? Rj * P[k] : P[k];
      basis_.insert(basis_.end(), b.data().begin(), b.data().end());
    }
    Rj = Rj * R_;
  }
}

template <class T>
Jet<T> PointBasis<T>::level_sum(const RadialSeries<T>& s, int first, int last) const {
  if (last > max_degree_) throw ConfigError("series degree exceeds the precomputed basis");
  Jet<T> acc(order_);
  T* out = acc.data().data();
  const std::size_t E = entries_;
  for (int D = first; D <= last; ++D) {
    for (int j = 0; 2 * j <= D; ++j) {
      const int k = D - 2 * j;
      T c = s.at(D - j, j);
      if (c == T(0)) continue;
      if (k == 0) c /= 2;
      const T* b = basis(j, k);
      for (std::size_t e = 0; e < E; ++e) out[e] += c * b[e];
    }
  }
  return acc;
}

template <class T>
Jet<T> PointBasis<T>::radial_power(const T& alpha) const {
  Jet<T> r(order_);
  for (int k = 0; k <= order_; ++k) r.axpy(binom(alpha, k), gpow_[k]);
  return r * tpow(R_.value(), alpha);
}

template <class T>
Jet<T> PointBasis<T>::block(const BlockParams& p, const RadialSeries<T>& s, T* tail) const {
  const int l = s.spin, top = l + s.levels;
  Jet<T> sum = level_sum(s, l, top);
  Jet<T> ra = radial_power(s.alpha);
  const T pre = tpow(T(4), to<T>(p.delta));
  if (tail) *tail = level_sum(s, top, top).max_abs() * tabs(ra.value()) * pre * radius_ / (T(1) - radius_);
  return (sum * ra) * pre;
}

template <class T>
BlockEngine<T>::BlockEngine(const CrossingPoint& p, int order, int series_order, int max_spin)
    : point_(p), order_(order), series_order_(series_order), max_spin_(max_spin) {
  if (order < 0 || series_order < 0) throw ConfigError("negative order");
  direct_ = std::make_shared<const PointBasis<T>>(p, order, max_spin + series_order);
  mirror_ = p.symmetric() ? direct_ : std::make_shared<const PointBasis<T>>(p.mirrored(), order, max_spin + series_order);
}

template <class T>
BlockJets<T> BlockEngine<T>::compute(const BlockParams& p) const {
  BlockJets<T> out = compute_series(p);
  if (!out.pole && std::isfinite(double(to_real(out.direct.max_abs())))) return out;
  // Zero pivot in the recursion. Where the block is regular (vanishing
  // residue) take the Richardson limit of symmetric averages.
  const Real eta = std::is_same_v<T, Real> ? 2e-4L : 1e-6L;
  auto at = [&](Real dd) {
    BlockParams q = p;
    q.delta = p.delta + dd;
    return compute_series(q);
  };
  const BlockJets<T> p1 = at(eta), m1 = at(-eta), p2 = at(2 * eta), m2 = at(-2 * eta);
  for (const auto* b : {&p1, &m1, &p2, &m2})
    if (b->pole) return out;
  const T avg = (p1.direct + m1.direct).max_abs() / 2;
  if ((p1.direct - m1.direct).max_abs() > T(0.05L) * avg) return out;
  auto lim = [](const Jet<T>& a1, const Jet<T>& b1, const Jet<T>& a2, const Jet<T>& b2) {
    return ((a1 + b1) * T(4) - (a2 + b2)) * (T(1) / T(6));
  };
  out.direct = lim(p1.direct, m1.direct, p2.direct, m2.direct);
  out.mirror = lim(p1.mirror, m1.mirror, p2.mirror, m2.mirror);
  out.truncation_error = std::max(p1.truncation_error, m1.truncation_error);
  out.pole = false;
  return out;
}

template <class T>
BlockJets<T> BlockEngine<T>::compute_series(const BlockParams& p) const {
  if (p.spin < 0 || p.spin > max_spin_) throw ConfigError("spin outside the engine range");
  BlockJets<T> out;
  out.below_unitarity = p.delta < unitarity_min(p.d, p.spin) - 1e-12L;
  if (is_identity(p)) {
    out.direct = Jet<T>(order_, T(1));
    out.mirror = out.direct;
    return out;
  }
  RadialSeries<T> s = radial_series<T>(p, series_order_);
  out.pole = s.pole;
  T tail(0), tail2(0);
  out.direct = direct_->block(p, s, &tail);
  if (point_.symmetric()) {
    out.mirror = out.direct.swapped();
  } else {
    out.mirror = mirror_->block(p, s, &tail2).swapped();
  }
  out.truncation_error = tail > tail2 ? tail : tail2;
  return out;
}

namespace {

// Position of the rightmost pole in Delta of the level sums.
Real highest_pole(const BlockParams& p) {
  if (p.spin == 0) return (p.d - 2) / 2;
  if (p.d12 != 0 || p.d34 != 0) return p.spin + p.d - 2;
  return p.spin + p.d - 3;
}

template <class T>
struct Cheb {
  Real lo, hi;
  std::vector<Real> x;  // nodes in [lo, hi]
  std::vector<T> w;
  std::vector<Jet<T>> f, g;  // direct and mirror level sums

  static std::vector<Real> nodes(Real lo, Real hi, int K) {
    std::vector<Real> x(K + 1);
    const Real pi = 3.14159265358979323846264338327950288L;
    for (int j = 0; j <= K; ++j) x[j] = (lo + hi) / 2 + (hi - lo) / 2 * std::cos(pi * j / K);
    return x;
  }

  template <class F>
  Jet<T> eval(const std::vector<Jet<T>>& vals, Real t) const {
    const int K = int(x.size()) - 1;
    for (int j = 0; j <= K; ++j)
      if (t == x[j]) return vals[j];
    std::vector<T> c(K + 1);
    T den(0);
    for (int j = 0; j <= K; ++j) {
      c[j] = w[j] / (to<T>(t) - to<T>(x[j]));
      den += c[j];
    }
    Jet<T> r(vals[0].order());
    for (int j = 0; j <= K; ++j) r.axpy(c[j] / den, vals[j]);
    return r;
  }
};

template <class T>
constexpr int cheb_degree() {
  return std::is_same_v<T, Real> ? 26 : 40;
}

template <class T>
T cheb_tolerance() {
  return std::is_same_v<T, Real> ? T(1e-15L) : T(1e-22L);
}

}  // namespace

template <class T>
std::vector<BlockJets<T>> BlockEngine<T>::family(const BlockParams& proto, const std::vector<Real>& deltas) const {
  std::vector<BlockJets<T>> out(deltas.size());
  if (deltas.empty()) return out;
  const int K = cheb_degree<T>();
  const int top = proto.spin + series_order_;
  const Real pole = highest_pole(proto);

  auto exact = [&](std::size_t i) {
    BlockParams p = proto;
    p.delta = deltas[i];
    out[i] = compute(p);
  };
  auto finish = [&](std::size_t i, const Jet<T>& sd, const Jet<T>& sm, T tail, bool pole_hit) {
    BlockParams p = proto;
    p.delta = deltas[i];
    const T alpha = (to<T>(p.delta) - T(p.spin)) / 2;
    const T pre = tpow(T(4), to<T>(p.delta));
    BlockJets<T> b;
    b.direct = (sd * direct_->radial_power(alpha)) * pre;
    b.mirror = point_.symmetric() ? b.direct.swapped() : ((sm * mirror_->radial_power(alpha)) * pre).swapped();
    b.truncation_error = tail;
    b.below_unitarity = p.delta < unitarity_min(p.d, p.spin) - 1e-12L;
    b.pole = pole_hit;
    out[i] = std::move(b);
  };

  // Interpolate on [lo, hi] covering deltas[i0, i1); returns false if validation fails.
  auto interpolate = [&](Real lo, Real hi, std::size_t i0, std::size_t i1) -> bool {
    Cheb<T> cb;
    cb.lo = lo;
    cb.hi = hi;
    cb.x = Cheb<T>::nodes(lo, hi, K);
    cb.w.resize(K + 1);
    for (int j = 0; j <= K; ++j) cb.w[j] = T((j % 2 ? -1 : 1)) * ((j == 0 || j == K) ? T(1) / 2 : T(1));
    T tail(0);
    for (int j = 0; j <= K; ++j) {
      BlockParams p = proto;
      p.delta = cb.x[j];
      RadialSeries<T> s = radial_series<T>(p, series_order_);
      if (s.pole) return false;
      cb.f.push_back(direct_->level_sum(s, p.spin, top));
      if (!std::isfinite(double(to_real(cb.f.back().max_abs())))) return false;
      if (!point_.symmetric()) cb.g.push_back(mirror_->level_sum(s, p.spin, top));
      T t = direct_->level_sum(s, top, top).max_abs() / cb.f.back().max_abs();
      if (t > tail) tail = t;
    }
    // validation point away from the nodes
    const Real tv = lo + (hi - lo) * 0.4603L;
    BlockParams p = proto;
    p.delta = tv;
    RadialSeries<T> s = radial_series<T>(p, series_order_);
    Jet<T> ex = direct_->level_sum(s, p.spin, top);
    Jet<T> ip = cb.template eval<T>(cb.f, tv);
    T err(0);
    for (std::size_t e = 0; e < ex.data().size(); ++e) err = std::max(err, tabs(ex.data()[e] - ip.data()[e]));
    if (!(err <= cheb_tolerance<T>() * ex.max_abs())) return false;
    for (std::size_t i = i0; i < i1; ++i) {
      Jet<T> sd = cb.template eval<T>(cb.f, deltas[i]);
      Jet<T> sm = point_.symmetric() ? Jet<T>() : cb.template eval<T>(cb.g, deltas[i]);
      const T alpha = (to<T>(deltas[i]) - T(proto.spin)) / 2;
      const T scale = tpow(T(4), to<T>(deltas[i])) * tabs(direct_->radial_power(alpha).value()) * sd.max_abs();
      finish(i, sd, sm, tail * scale * direct_->radius() / (T(1) - direct_->radius()), false);
    }
    return true;
  };

  std::function<void(Real, Real, std::size_t, std::size_t, int)> cover;
  cover = [&](Real lo, Real hi, std::size_t i0, std::size_t i1, int depth) {
    if (i1 <= i0) return;
    if (i1 - i0 <= std::size_t(K + 3) || depth > 4 || lo <= pole) {
      for (std::size_t i = i0; i < i1; ++i) exact(i);
      return;
    }
    if (interpolate(lo, hi, i0, i1)) return;
    const Real mid = (lo + hi) / 2;
    std::size_t im = i0;
    while (im < i1 && deltas[im] <= mid) ++im;
    cover(lo, mid, i0, im, depth + 1);
    cover(mid, hi, im, i1, depth + 1);
  };

  std::size_t i = 0;
  while (i < deltas.size()) {
    const Real lo = deltas[i];
    const Real dist = lo - pole;
    if (!(dist > 0)) {
      exact(i++);
      continue;
    }
    const Real hi_target = pole + 2 * dist;
    std::size_t j = i;
    while (j < deltas.size() && deltas[j] <= hi_target) ++j;
    const Real hi = deltas[j - 1];
    if (hi <= lo) {
      exact(i++);
      continue;
    }
    cover(lo, hi, i, j, 0);
    i = j;
  }
  return out;
}

template RadialSeries<Real> radial_series<Real>(const BlockParams&, int);
template RadialSeries<Quad> radial_series<Quad>(const BlockParams&, int);
template class PointBasis<Real>;
template class PointBasis<Quad>;
template class BlockEngine<Real>;
template class BlockEngine<Quad>;

std::vector<std::tuple<int, int, Real>> BlockTable::entries() const {
  std::vector<std::tuple<int, int, Real>> out;
  for (int k = 0; k <= order; ++k)
    for (int n = 0; n <= k; ++n) out.emplace_back(k - n, n, derivative(k - n, n));
  return out;
}

Real eval_block(const BlockParams& p, const CrossingPoint& pt, int series_order, bool* below_unitarity) {
  if (series_order < 0) throw ConfigError("series_order must be non-negative");
  if (!in_convergence_region(pt)) throw DomainError("point outside the block convergence region");
  if (below_unitarity) *below_unitarity = p.delta < unitarity_min(p.d, p.spin) - 1e-12L;
  if (is_identity(p)) return 1;
  RadialSeries<Real> s = radial_series<Real>(p, series_order);
  RhoPair rp = rho_pair(pt.u0, pt.v0);
  const Real S = std::real(rp.rho + rp.rhob), R = std::real(rp.rho * rp.rhob);
  const int top = p.spin + series_order;
  std::vector<Real> P(top + 1), Rp(top / 2 + 1);
  P[0] = 2;
  if (top >= 1) P[1] = S;
  for (int k = 2; k <= top; ++k) P[k] = S * P[k - 1] - R * P[k - 2];
  Rp[0] = 1;
  for (std::size_t j = 1; j < Rp.size(); ++j) Rp[j] = Rp[j - 1] * R;
  Real sum = 0;
  for (int D = p.spin; D <= top; ++D)
    for (int j = 0; 2 * j <= D; ++j) {
      Real c = s.at(D - j, j);
      if (D == 2 * j) c /= 2;
      sum += c * Rp[j] * P[D - 2 * j];
    }
  return std::pow(4.0L, p.delta) * std::pow(R, s.alpha) * sum;
}

BlockTable block_table(const BlockParams& p, const CrossingPoint& pt, int order, int series_order, int max_order) {
  if (order > max_order) throw ConfigError("derivative order exceeds the configured maximum");
  if (order < 0) throw ConfigError("derivative order must be non-negative");
  require_crossing_region(pt);
  BlockEngine<Real> eng(pt, order, series_order, p.spin);
  BlockJets<Real> j = eng.compute(p);
  BlockTable t;
  t.params = p;
  t.point = pt;
  t.order = order;
  t.taylor = std::move(j.direct);
  t.mirror_taylor = std::move(j.mirror);
  t.truncation_error = j.truncation_error;
  t.below_unitarity = j.below_unitarity;
  return t;
}

Real casimir_residual(const BlockParams& p, const CrossingPoint& pt, int series_order) {
  if (!in_convergence_region(pt)) throw DomainError("point outside the block convergence region");
  if (is_identity(p)) return 0;
  PointBasis<Real> basis(pt, 2, p.spin + series_order);
  RadialSeries<Real> s = radial_series<Real>(p, series_order);
  Jet<Real> g = basis.block(p, s);
  const Real u = pt.u0, v = pt.v0, sz = 1 + u - v, pz = u;
  const Real a = -p.d12 / 2, b = p.d34 / 2, d = p.d;
  const Real f = g(0, 0), fu = g(1, 0), fv = g(0, 1), fuu = 2 * g(2, 0), fuv = g(1, 1), fvv = 2 * g(0, 2);
  const Real q = pz * sz - sz * sz + 2 * pz;
  const Real Dg = -u * ((a + b + 1) * sz + d - 2) * fu - (a + b + 1) * q * fv - u * u * (sz - 2) * fuu -
                  2 * u * v * sz * fuv - v * q * fvv - a * b * sz * f;
  const Real C = p.delta * (p.delta - d) + p.spin * (p.spin + d - 2);
  return std::abs(2 * Dg - C * f) / std::abs(f);
}

void write_block_csv(const BlockTable& t, std::ostream& os) {
  os << "m,n,value\n";
  char buf[64];
  for (auto [m, n, v] : t.entries()) {
    std::snprintf(buf, sizeof buf, "%.12Lg", v);
    os << m << ',' << n << ',' << buf << '\n';
  }
}

}  // namespace crossbound
