#include "crossbound/crossing.hpp"

namespace crossbound {

std::vector<std::tuple<int, int, Real>> CrossingVector::entries() const {
  std::vector<std::tuple<int, int, Real>> out;
  for (int k = 0; k <= order(); ++k)
    for (int n = 0; n <= k; ++n) out.emplace_back(k - n, n, derivative(k - n, n));
  return out;
}

template <class T>
Jet<T> crossed(const Jet<T>& g, const Jet<T>& g_mirror, const T& p, const CrossingPoint& pt, int sign) {
  const int L = g.order();
  Jet<T> a = mul_univariate(g, power_series(L, to<T>(pt.u0), -p), false);
  Jet<T> b = mul_univariate(g_mirror, power_series(L, to<T>(pt.v0), -p), true);
  if (sign < 0) a -= b; else a += b;
  return a;
}

CrossingVector build_h(Real delta1, const CrossingPoint& pt, int order) {
  require_crossing_region(pt);
  CrossingVector h;
  h.kind = VectorKind::HSingle;
  h.delta1 = delta1;
  h.tag = "h";
  h.taylor = monomial_power<Real>(order, pt.v0, -delta1, true) - monomial_power<Real>(order, pt.u0, -delta1, false);
  return h;
}

CrossingVector build_F(Real delta1, const BlockTable& block) {
  if (block.mirror_taylor.order() != block.taylor.order()) throw ConfigError("block table order mismatch");
  CrossingVector f;
  f.kind = VectorKind::FSingle;
  f.delta1 = delta1;
  f.tag = "F";
  f.taylor = crossed<Real>(block.taylor, block.mirror_taylor, delta1, block.point, -1);
  return f;
}

const char* MultiSystem::component_name(int c) {
  static const char* names[] = {"ssss", "eeee", "sese", "ssee-esse", "ssee+esse"};
  return names[c];
}

template <class T>
std::array<MultiVectorT<T>, 3> multi_even(const Jet<T>& g, const Jet<T>& gm, const T& d1, const T& d2,
                                          const CrossingPoint& pt) {
  const int L = g.order();
  const T pp = (d1 + d2) / 2;
  std::array<MultiVectorT<T>, 3> v;
  for (auto& e : v)
    for (auto& c : e) c = Jet<T>(L);
  v[0][0] = crossed(g, gm, d1, pt, -1);
  v[2][1] = crossed(g, gm, d2, pt, -1);
  v[1][3] = crossed(g, gm, pp, pt, -1) * T(0.5L);
  v[1][4] = crossed(g, gm, pp, pt, +1) * T(0.5L);
  return v;
}

template <class T>
MultiVectorT<T> multi_odd(const Jet<T>& g3, const Jet<T>& g3m, const Jet<T>& g4, const Jet<T>& g4m, int spin,
                          const T& d1, const T& d2, const CrossingPoint& pt) {
  const int L = g3.order();
  const T pp = (d1 + d2) / 2, dl = (d1 - d2) / 2;
  MultiVectorT<T> v;
  for (auto& c : v) c = Jet<T>(L);
  v[2] = crossed(g3, g3m, pp, pt, -1) * T(spin % 2 ? -1 : 1);
  Jet<T> hat = mul_univariate(g4, power_series(L, to<T>(pt.v0), dl), true);
  Jet<T> hatm = mul_univariate(g4m, power_series(L, to<T>(pt.u0), dl), false);
  v[3] = crossed(hat, hatm, pp, pt, -1);
  v[4] = crossed(hat, hatm, pp, pt, +1) * T(-1);
  return v;
}

BlockParams odd_block_self(Real d, Real d1, Real d2, int spin, Real delta) {
  return {d, delta, spin, d1 - d2, d1 - d2};
}

BlockParams odd_block_hat(Real d, Real d1, Real d2, int spin, Real delta) {
  return {d, delta, spin, d2 - d1, d1 - d2};
}

MultiSystem build_multi_system(Real delta1, Real delta2, const BlockParams& ex, Parity sector,
                               const CrossingPoint& pt, int order, int series_order) {
  require_crossing_region(pt);
  if (ex.d12 != 0 || ex.d34 != 0) throw DomainError("exchanged block parameters must not carry external differences");
  if (sector == Parity::Even && ex.spin % 2) throw DomainError("odd spin in a Z2-even identical-scalar channel");
  MultiSystem s;
  s.delta1 = delta1;
  s.delta2 = delta2;
  s.sector = sector;
  s.exchanged = ex;
  BlockEngine<Real> eng(pt, order, series_order, ex.spin);
  if (sector == Parity::Even) {
    s.matrix_shape = 2;
    BlockJets<Real> g = eng.compute(ex);
    auto v = multi_even<Real>(g.direct, g.mirror, delta1, delta2, pt);
    s.entries.assign(v.begin(), v.end());
  } else {
    s.matrix_shape = 1;
    BlockJets<Real> g3 = eng.compute(odd_block_self(ex.d, delta1, delta2, ex.spin, ex.delta));
    BlockJets<Real> g4 = eng.compute(odd_block_hat(ex.d, delta1, delta2, ex.spin, ex.delta));
    s.entries.push_back(multi_odd<Real>(g3.direct, g3.mirror, g4.direct, g4.mirror, ex.spin, delta1, delta2, pt));
  }
  return s;
}

MultiVector multi_identity(Real delta1, Real delta2, const CrossingPoint& pt, int order) {
  Jet<Real> one(order, 1);
  auto v = multi_even<Real>(one, one, delta1, delta2, pt);
  MultiVector r;
  for (int c = 0; c < kMultiComponents; ++c) r[c] = v[0][c] + v[1][c] * Real(2) + v[2][c];
  return r;
}

MultiSystem relabel(const MultiSystem& s) {
  MultiSystem r = s;
  std::swap(r.delta1, r.delta2);
  for (auto& e : r.entries) std::swap(e[0], e[1]);
  if (r.matrix_shape == 2) std::swap(r.entries[0], r.entries[2]);
  return r;
}

std::vector<std::pair<int, int>> independent_rows(int order, bool symmetric_point, bool antisymmetric) {
  std::vector<std::pair<int, int>> rows;
  for (int k = 0; k <= order; ++k)
    for (int n = 0; n <= k; ++n) {
      const int m = k - n;
      if (symmetric_point && (antisymmetric ? m <= n : m < n)) continue;
      rows.emplace_back(m, n);
    }
  return rows;
}

template Jet<Real> crossed<Real>(const Jet<Real>&, const Jet<Real>&, const Real&, const CrossingPoint&, int);
template Jet<Quad> crossed<Quad>(const Jet<Quad>&, const Jet<Quad>&, const Quad&, const CrossingPoint&, int);
template std::array<MultiVectorT<Real>, 3> multi_even<Real>(const Jet<Real>&, const Jet<Real>&, const Real&,
                                                            const Real&, const CrossingPoint&);
template std::array<MultiVectorT<Quad>, 3> multi_even<Quad>(const Jet<Quad>&, const Jet<Quad>&, const Quad&,
                                                            const Quad&, const CrossingPoint&);
template MultiVectorT<Real> multi_odd<Real>(const Jet<Real>&, const Jet<Real>&, const Jet<Real>&, const Jet<Real>&,
                                            int, const Real&, const Real&, const CrossingPoint&);
template MultiVectorT<Quad> multi_odd<Quad>(const Jet<Quad>&, const Jet<Quad>&, const Jet<Quad>&, const Jet<Quad>&,
                                            int, const Quad&, const Quad&, const CrossingPoint&);

}  // namespace crossbound
