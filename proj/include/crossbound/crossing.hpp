#pragma once

// Crossing vectors at a point.
//
// Single correlator <s s s s>:
//   F_Delta = u^{-D1} G(u,v) - v^{-D1} G(v,u),  h = v^{-D1} - u^{-D1},
//   sum_O p_O F_O = h  (the unit operator contributes F_0 = -h).
//
// Mixed system {<s s s s>, <s s e e>, <e e e e>}, with D1 = dim s, D2 = dim e,
// p' = (D1 + D2)/2 and delta = (D1 - D2)/2. Components, in this fixed order:
//   0  <s s s s>                     antisymmetric under u <-> v
//   1  <e e e e>                     antisymmetric
//   2  <s e s e> self-crossing       antisymmetric
//   3  <s s e e> - <e s s e>         antisymmetric
//   4  <s s e e> + <e s s e>         symmetric
// Z2-even exchange enters as tr(P V) with P = [[l_ss^2, l_ss l_ee], [., l_ee^2]],
// Z2-odd exchange as l_se^2 V. Odd blocks use G^{-delta,delta} for component 2
// (weighted by (-1)^l) and Ghat(u,v) = v^delta G^{delta,delta}(u,v) for 3, 4.

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "crossbound/blocks.hpp"

namespace crossbound {

enum class VectorKind { FSingle, HSingle, MultiComponent };
enum class Parity { Even, Odd };

constexpr int kMultiComponents = 5;

struct CrossingVector {
  VectorKind kind = VectorKind::FSingle;
  Real delta1 = 0;
  std::string tag;
  Jet<Real> taylor;

  int order() const { return taylor.order(); }
  Real derivative(int m, int n) const { return taylor(m, n) * factorial(m) * factorial(n); }
  std::vector<std::tuple<int, int, Real>> entries() const;
};

// u^{-p} g(u,v) + sign v^{-p} g(v,u), given jets of g(u,v) and g(v,u).
template <class T>
Jet<T> crossed(const Jet<T>& g, const Jet<T>& g_mirror, const T& p, const CrossingPoint& pt, int sign);

CrossingVector build_h(Real delta1, const CrossingPoint& pt, int order);
CrossingVector build_F(Real delta1, const BlockTable& block);

using MultiVector = std::array<Jet<Real>, kMultiComponents>;

struct MultiSystem {
  Real delta1 = 0, delta2 = 0;
  Parity sector = Parity::Even;
  BlockParams exchanged;
  int matrix_shape = 2;
  // even: {V11, V12, V22}; odd: {V}
  std::vector<MultiVector> entries;

  static const char* component_name(int c);
  static bool component_antisymmetric(int c) { return c != 4; }
};

template <class T>
using MultiVectorT = std::array<Jet<T>, kMultiComponents>;

// Even-sector matrix entries {V11, V12, V22} from G^{0,0} jets.
template <class T>
std::array<MultiVectorT<T>, 3> multi_even(const Jet<T>& g, const Jet<T>& gm, const T& d1, const T& d2,
                                          const CrossingPoint& pt);
// Odd-sector vector from jets of G^{-delta,delta} (g3) and G^{delta,delta} (g4).
template <class T>
MultiVectorT<T> multi_odd(const Jet<T>& g3, const Jet<T>& g3m, const Jet<T>& g4, const Jet<T>& g4m, int spin,
                          const T& d1, const T& d2, const CrossingPoint& pt);
// Block parameters for the two odd-sector block families.
BlockParams odd_block_self(Real d, Real d1, Real d2, int spin, Real delta);
BlockParams odd_block_hat(Real d, Real d1, Real d2, int spin, Real delta);

MultiSystem build_multi_system(Real delta1, Real delta2, const BlockParams& exchanged, Parity sector,
                               const CrossingPoint& pt, int order, int series_order = kDefaultSeriesOrder);
// Unit-operator contribution tr(P_0 V_0), P_0 = [[1,1],[1,1]].
MultiVector multi_identity(Real delta1, Real delta2, const CrossingPoint& pt, int order);
// Relabel 1 <-> 2: swap components 0 and 1 and the matrix indices.
MultiSystem relabel(const MultiSystem& s);

// Derivative multi-indices used as independent rows for a component.
std::vector<std::pair<int, int>> independent_rows(int order, bool symmetric_point, bool antisymmetric);

}  // namespace crossbound
