#pragma once

// Scalar-external conformal blocks G_{Delta,l}(u, v) in general dimension.
//
// Normalization: G -> |z|^Delta * C^nu_l(cos t) / C^nu_l(1) as z, zb -> 0,
// nu = d/2 - 1 (for d = 2 the angular factor is cos(l t)). Equivalently
// G ~ u^{Delta/2} with unit angular factor as u -> 0, v -> 1.
//
// Representation: G = 4^Delta (rho rhob)^{(Delta-l)/2} sum_{i,j} c_ij rho^i rhob^j,
// rho = z / (1 + sqrt(1 - z))^2, with c_ij = c_ji fixed by the quadratic
// Casimir equation level by level (i + j = l, ..., l + N).
//
// External dimensions enter through a = -d12/2, b = d34/2.

#include <memory>
#include <ostream>
#include <tuple>
#include <vector>

#include "crossbound/jet.hpp"

namespace crossbound {

constexpr int kDefaultSeriesOrder = 44;
constexpr int kDefaultMaxLambda = 21;

struct BlockParams {
  Real d = 3;
  Real delta = 0;
  int spin = 0;
  Real d12 = 0;
  Real d34 = 0;
};

struct CrossingPoint {
  Real u0 = 0.25L;
  Real v0 = 0.25L;
  bool symmetric() const { return u0 == v0; }
  CrossingPoint mirrored() const { return {v0, u0}; }
};

Real unitarity_min(Real d, int spin);

// |rho| at the point for the s-channel expansion; >= 1 means divergent.
Real radial_modulus(const CrossingPoint& p);
bool in_convergence_region(const CrossingPoint& p);
// Both channels of the crossing equation converge at p.
bool in_crossing_region(const CrossingPoint& p);
void require_crossing_region(const CrossingPoint& p);

template <class T>
struct RadialSeries {
  int spin = 0;
  int levels = 0;
  T alpha = T(0);
  bool pole = false;
  int stride = 0;
  std::vector<T> c;  // dense c(i, j), i, j < stride

  const T& at(int i, int j) const { return c[std::size_t(i) * stride + j]; }
  T& at(int i, int j) { return c[std::size_t(i) * stride + j]; }
};

template <class T>
RadialSeries<T> radial_series(const BlockParams& p, int levels);

// Point-specific jets in (du, dv): S = rho + rhob, R = rho rhob, and the
// basis R^j P_k (P_k = rho^k + rhob^k) shared by every block at the point.
template <class T>
class PointBasis {
 public:
  PointBasis(const CrossingPoint& p, int order, int max_degree);

  int order() const { return order_; }
  int max_degree() const { return max_degree_; }
  const CrossingPoint& point() const { return point_; }
  const T& radius() const { return radius_; }
  const Jet<T>& S() const { return S_; }
  const Jet<T>& R() const { return R_; }

  // sum over degrees [first, last] of c_ij rho^i rhob^j
  Jet<T> level_sum(const RadialSeries<T>& s, int first, int last) const;
  Jet<T> radial_power(const T& alpha) const;  // R^alpha
  // Full block jet including 4^Delta R^alpha; optional tail (last level).
  Jet<T> block(const BlockParams& p, const RadialSeries<T>& s, T* tail = nullptr) const;

 private:
  const T* basis(int j, int k) const { return basis_.data() + (offset_[j] + k) * entries_; }

  CrossingPoint point_;
  int order_;
  int max_degree_;
  T radius_;
  Jet<T> S_, R_;
  std::vector<Jet<T>> gpow_;  // (R/R0 - 1)^k
  std::vector<std::size_t> offset_;
  std::size_t entries_ = 0;
  std::vector<T> basis_;  // flattened jets R^j P_k
};

// Taylor jets of G(u, v) around (u0, v0) and of G(v, u) around the same point.
template <class T>
struct BlockJets {
  Jet<T> direct;
  Jet<T> mirror;
  T truncation_error = T(0);
  bool below_unitarity = false;
  bool pole = false;
};

// Immutable after construction; safe for concurrent compute() calls.
template <class T>
class BlockEngine {
 public:
  BlockEngine(const CrossingPoint& p, int order, int series_order, int max_spin);

  int order() const { return order_; }
  int series_order() const { return series_order_; }
  int max_spin() const { return max_spin_; }
  const CrossingPoint& point() const { return point_; }
  const PointBasis<T>& basis() const { return *direct_; }
  const PointBasis<T>& mirror_basis() const { return *mirror_; }

  // Removable zeros of the recursion (e.g. conserved currents) are resolved
  // by a limit in Delta; genuine poles keep pole = true.
  BlockJets<T> compute(const BlockParams& p) const;

  // Blocks for one (spin, d12, d34) at many ascending Delta values. Level sums
  // are interpolated in Delta between exactly evaluated Chebyshev nodes on
  // intervals that grow geometrically away from the highest pole; each
  // interval is validated against an exact evaluation and split on failure.
  std::vector<BlockJets<T>> family(const BlockParams& proto, const std::vector<Real>& deltas) const;

 private:
  BlockJets<T> compute_series(const BlockParams& p) const;

  CrossingPoint point_;
  int order_, series_order_, max_spin_;
  std::shared_ptr<const PointBasis<T>> direct_, mirror_;
};

class BlockTable {
 public:
  BlockParams params;
  CrossingPoint point;
  int order = 0;
  Jet<Real> taylor;         // Taylor coefficients of G(u, v)
  Jet<Real> mirror_taylor;  // Taylor coefficients of G(v, u)
  Real truncation_error = 0;
  bool below_unitarity = false;

  Real derivative(int m, int n) const { return taylor(m, n) * factorial(m) * factorial(n); }
  std::vector<std::tuple<int, int, Real>> entries() const;
};

Real eval_block(const BlockParams& p, const CrossingPoint& pt, int series_order = kDefaultSeriesOrder,
                bool* below_unitarity = nullptr);

BlockTable block_table(const BlockParams& p, const CrossingPoint& pt, int order,
                       int series_order = kDefaultSeriesOrder, int max_order = kDefaultMaxLambda);

// |(Casimir - C) G| / |G| with C = Delta(Delta - d) + l(l + d - 2).
Real casimir_residual(const BlockParams& p, const CrossingPoint& pt, int series_order = kDefaultSeriesOrder);

void write_block_csv(const BlockTable& t, std::ostream& os);

}  // namespace crossbound
