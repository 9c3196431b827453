#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <tuple>

#include "crossbound/crossing.hpp"
#include "support/gff.hpp"

using namespace crossbound;

namespace {

Real max_abs(const Jet<Real>& j) { return j.max_abs(); }

Real diff(const Jet<Real>& a, const Jet<Real>& b) { return (a - b).max_abs(); }

}  // namespace

TEST_CASE("identity exchange gives F = -h") {
  const CrossingPoint pt{0.25L, 0.25L};
  auto h = build_h(0.518L, pt, 7);
  auto f = build_F(0.518L, block_table({3, 0, 0}, pt, 7));
  CHECK(diff(f.taylor, h.taylor * Real(-1)) == 0);
  CHECK(h.kind == VectorKind::HSingle);
  CHECK(f.kind == VectorKind::FSingle);
}

TEST_CASE("antisymmetry at the symmetric point") {
  const CrossingPoint pt{0.25L, 0.25L};
  auto f = build_F(0.55L, block_table({3, 2.3L, 2}, pt, 9));
  auto h = build_h(0.55L, pt, 9);
  for (int k = 0; k <= 9; ++k)
    for (int n = 0; n <= k; ++n) {
      CHECK(std::fabs(f.taylor(k - n, n) + f.taylor(n, k - n)) <= 1e-15L * max_abs(f.taylor));
      CHECK(std::fabs(h.taylor(k - n, n) + h.taylor(n, k - n)) <= 1e-15L * max_abs(h.taylor));
    }
  auto rows = independent_rows(9, true, true);
  CHECK(rows.size() == 25);
  CHECK(independent_rows(9, true, false).size() == 30);
  CHECK(independent_rows(9, false, true).size() == 55);
}

TEST_CASE("F value against direct evaluation off the symmetric point") {
  const CrossingPoint pt{0.2L, 0.3L};
  BlockParams bp{3, 1.7L, 0};
  auto f = build_F(0.6L, block_table(bp, pt, 3));
  Real ref = std::pow(pt.u0, -0.6L) * eval_block(bp, pt) - std::pow(pt.v0, -0.6L) * eval_block(bp, pt.mirrored());
  CHECK(std::fabs(f.taylor.value() - ref) < 1e-15L * std::fabs(ref));
}

TEST_CASE("single GFF solves crossing") {
  const Real ds = 0.55L;
  const CrossingPoint pt{0.25L, 0.25L};
  const int L = 7;
  BlockEngine<Real> eng(pt, L, kDefaultSeriesOrder, 40);
  Jet<Real> total = build_h(ds, pt, L).taylor * Real(-1);
  for (const auto& c : fixture::gff_single(ds, 3, 40)) {
    if (c.spin % 2) continue;
    auto g = eng.compute({3, c.delta, c.spin});
    total.axpy(c.coeff, crossed<Real>(g.direct, g.mirror, ds, pt, -1));
  }
  CHECK(total.max_abs() < 1e-5L * build_h(ds, pt, L).taylor.max_abs());
}

TEST_CASE("mixed system reduces to the single system at equal dimensions") {
  const CrossingPoint pt{0.25L, 0.25L};
  const Real d1 = 0.7L;
  auto f = build_F(d1, block_table({3, 2.2L, 2}, pt, 5)).taylor;
  auto ev = build_multi_system(d1, d1, {3, 2.2L, 2}, Parity::Even, pt, 5);
  REQUIRE(ev.entries.size() == 3);
  CHECK(diff(ev.entries[0][0], f) < 1e-16L);
  CHECK(diff(ev.entries[2][1], f) < 1e-16L);
  CHECK(diff(ev.entries[1][3] * Real(2), f) < 1e-16L);
  auto od = build_multi_system(d1, d1, {3, 2.2L, 2}, Parity::Odd, pt, 5);
  REQUIRE(od.entries.size() == 1);
  CHECK(diff(od.entries[0][2], f) < 1e-16L);
  CHECK(diff(od.entries[0][3], f) < 1e-16L);
  CHECK(od.entries[0][0].max_abs() == 0);
  auto od3 = build_multi_system(d1, d1, {3, 3.2L, 3}, Parity::Odd, pt, 5);
  auto f3 = build_F(d1, block_table({3, 3.2L, 3}, pt, 5)).taylor;
  CHECK(diff(od3.entries[0][2], f3 * Real(-1)) < 1e-16L);
  CHECK(diff(od3.entries[0][3], f3) < 1e-16L);
}

TEST_CASE("relabeling swaps the two external scalars") {
  const CrossingPoint pt{0.25L, 0.25L};
  auto a = build_multi_system(0.52L, 1.41L, {3, 3.5L, 0}, Parity::Even, pt, 5);
  auto b = build_multi_system(1.41L, 0.52L, {3, 3.5L, 0}, Parity::Even, pt, 5);
  auto r = relabel(a);
  for (int e = 0; e < 3; ++e)
    for (int c = 0; c < kMultiComponents; ++c) CHECK(diff(r.entries[e][c], b.entries[e][c]) < 1e-14L);
  auto rr = relabel(r);
  for (int e = 0; e < 3; ++e)
    for (int c = 0; c < kMultiComponents; ++c) CHECK(diff(rr.entries[e][c], a.entries[e][c]) == 0);
  auto i1 = multi_identity(0.52L, 1.41L, pt, 5), i2 = multi_identity(1.41L, 0.52L, pt, 5);
  CHECK(diff(i1[0], i2[1]) == 0);
  CHECK(diff(i1[3], i2[3]) == 0);
  CHECK(diff(i1[4], i2[4]) == 0);
  CHECK_THROWS_AS(build_multi_system(0.52L, 1.41L, {3, 3.5L, 1}, Parity::Even, pt, 5), DomainError);
}

TEST_CASE("mixed GFF solves all five crossing components") {
  const Real D = 0.55L, dim = 3, top = 40;
  const CrossingPoint pt{0.25L, 0.25L};
  const int L = 5;
  using fixture::decompose;
  auto ssss = decompose({{1, D, 0}, {1, D, -D}}, 2 * D, dim, 0, 0, top);
  auto ssee = decompose({{2, D, 0}, {2, D, -D}}, 2 * D, dim, 0, 0, top);
  auto eeee2 = decompose({{4, D, 0}, {4, D, -D}}, 2 * D, dim, 0, 0, top);
  auto eeee4 = decompose({{1, 2 * D, 0}, {1, 2 * D, -2 * D}, {4, 2 * D, -D}}, 4 * D, dim, 0, 0, top);
  auto sese1 = decompose({{2, D / 2, 0}}, D, dim, -D, -D, top);
  auto esse1 = decompose({{2, D / 2, 0}}, D, dim, D, -D, top);
  auto sese3 = decompose({{1, 3 * D / 2, 0}, {2, 3 * D / 2, -D}}, 3 * D, dim, -D, -D, top);
  auto esse3 = decompose({{2, 3 * D / 2, 0}, {1, 3 * D / 2, -D}}, 3 * D, dim, D, -D, top);

  // the s e channel below 3D holds only the external scalar itself
  for (std::size_t i = 0; i < sese1.size(); ++i) {
    const Real want = i == 0 ? 2 : 0;
    CHECK(std::fabs(sese1[i].coeff - want) < 1e-12L);
    CHECK(std::fabs(esse1[i].coeff - want) < 1e-12L);
  }
  REQUIRE(sese3.size() == esse3.size());
  for (std::size_t i = 0; i < sese3.size(); ++i) {
    const Real sign = sese3[i].spin % 2 ? -1 : 1;
    CHECK(std::fabs(sese3[i].coeff - sign * esse3[i].coeff) < 1e-10L * (1 + std::fabs(esse3[i].coeff)));
    CHECK(esse3[i].coeff > -1e-12L);
  }

  BlockEngine<Real> eng(pt, L, kDefaultSeriesOrder, 40);
  MultiVector total = multi_identity(D, 2 * D, pt, L);
  auto add = [&](const MultiVectorT<Real>& v, Real w) {
    for (int c = 0; c < kMultiComponents; ++c) total[c].axpy(w, v[c]);
  };
  for (std::size_t i = 0; i < ssss.size(); ++i) {
    if (ssss[i].spin % 2) continue;
    auto g = eng.compute({dim, ssss[i].delta, ssss[i].spin});
    auto v = multi_even<Real>(g.direct, g.mirror, D, 2 * D, pt);
    add(v[0], ssss[i].coeff);
    add(v[1], 2 * ssee[i].coeff);
    add(v[2], eeee2[i].coeff);
  }
  for (const auto& c : eeee4) {
    if (c.spin % 2) continue;
    auto g = eng.compute({dim, c.delta, c.spin});
    add(multi_even<Real>(g.direct, g.mirror, D, 2 * D, pt)[2], c.coeff);
  }
  auto odd = [&](Real delta, int spin, Real w) {
    auto g3 = eng.compute(odd_block_self(dim, D, 2 * D, spin, delta));
    auto g4 = eng.compute(odd_block_hat(dim, D, 2 * D, spin, delta));
    add(multi_odd<Real>(g3.direct, g3.mirror, g4.direct, g4.mirror, spin, D, 2 * D, pt), w);
  };
  odd(D, 0, 2);
  for (const auto& c : esse3) odd(c.delta, c.spin, c.coeff);

  auto id = multi_identity(D, 2 * D, pt, L);
  Real scale = 0;
  for (const auto& j : id) scale = std::max(scale, j.max_abs());
  for (int c = 0; c < kMultiComponents; ++c) {
    INFO("component " << std::string(MultiSystem::component_name(c)));
    CHECK(total[c].max_abs() < 1e-5L * scale);
  }
}

TEST_CASE("h derivative by hand") {
  // h = v^{-1} - u^{-1} at D1 = 1, so d_u h = u^{-2}
  const CrossingPoint pt{0.25L, 0.25L};
  auto h = build_h(1, pt, 5);
  CHECK(std::fabs(h.derivative(1, 0) - 16) < 1e-15L);
  CHECK(std::fabs(h.derivative(0, 1) + 16) < 1e-15L);
  CHECK(std::fabs(h.derivative(2, 0) + 128) < 1e-14L);
  CHECK(h.derivative(0, 0) == 0);
  CHECK(h.derivative(1, 1) == 0);
}

TEST_CASE("F derivatives against finite differences") {
  const Real p = 0.518L;
  const BlockParams bp{3, 3, 0};
  const CrossingPoint pt{0.25L, 0.25L};
  auto F = [&](Real u, Real v) {
    return std::pow(u, -p) * eval_block(bp, {u, v}) - std::pow(v, -p) * eval_block(bp, {v, u});
  };
  auto f = build_F(p, block_table(bp, pt, 4));
  const Real u = pt.u0, v = pt.v0;
  const Real e = 1e-4L;
  const Real du = (F(u + e, v) - F(u - e, v)) / (2 * e);
  const Real dv = (F(u, v + e) - F(u, v - e)) / (2 * e);
  const Real duv = (F(u + e, v + e) - F(u + e, v - e) - F(u - e, v + e) + F(u - e, v - e)) / (4 * e * e);
  const Real duu = (F(u + e, v) - 2 * F(u, v) + F(u - e, v)) / (e * e);
  CHECK(std::fabs(du - f.derivative(1, 0)) < 1e-6L * std::fabs(du));
  CHECK(std::fabs(dv - f.derivative(0, 1)) < 1e-6L * std::fabs(dv));
  CHECK(std::fabs(duu - f.derivative(2, 0)) < 1e-6L * std::fabs(duu));
  if (std::fabs(duv) > 1e-8L) CHECK(std::fabs(duv - f.derivative(1, 1)) < 1e-6L * std::fabs(duv));
  CHECK(std::fabs(f.derivative(0, 0)) < 1e-15L * std::fabs(du));
}

TEST_CASE("antisymmetry off the symmetric point") {
  // F(u, v) = -F(v, u), so expanding at the mirrored point swaps and negates
  const CrossingPoint pt{0.27L, 0.23L};
  for (auto [D, l] : {std::pair<Real, int>{1.4L, 0}, {4.2L, 2}, {6.5L, 5}}) {
    const BlockParams bp{3, D, l};
    auto a = build_F(0.52L, block_table(bp, pt, 7));
    auto b = build_F(0.52L, block_table(bp, pt.mirrored(), 7));
    const Real scale = a.taylor.max_abs();
    for (int k = 0; k <= 7; ++k)
      for (int n = 0; n <= k; ++n) CHECK(std::fabs(a.taylor(k - n, n) + b.taylor(n, k - n)) < 1e-10L * scale);
    auto ha = build_h(0.52L, pt, 7), hb = build_h(0.52L, pt.mirrored(), 7);
    for (int k = 0; k <= 7; ++k)
      for (int n = 0; n <= k; ++n)
        CHECK(std::fabs(ha.taylor(k - n, n) + hb.taylor(n, k - n)) < 1e-10L * ha.taylor.max_abs());
  }
}

TEST_CASE("F is linear in the block") {
  const CrossingPoint pt{0.25L, 0.25L};
  auto t1 = block_table({3, 2.1L, 0}, pt, 7);
  auto t2 = block_table({3, 5.3L, 2}, pt, 7);
  BlockTable mix = t1;
  mix.taylor = t1.taylor * Real(0.3L) + t2.taylor * Real(-1.7L);
  mix.mirror_taylor = t1.mirror_taylor * Real(0.3L) + t2.mirror_taylor * Real(-1.7L);
  auto f = build_F(0.6L, mix);
  auto ref = build_F(0.6L, t1).taylor * Real(0.3L) + build_F(0.6L, t2).taylor * Real(-1.7L);
  CHECK(diff(f.taylor, ref) < 1e-15L * ref.max_abs());
}
