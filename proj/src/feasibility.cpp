#include "crossbound/feasibility.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <list>
#include <memory>
#include <mutex>
#include <sstream>
#include <tuple>

#include "crossbound/lp.hpp"

namespace crossbound {

const char* mode_name(Mode m) { return m == Mode::Single ? "single" : "multi"; }

const char* status_name(Status s) {
  switch (s) {
    case Status::Excluded: return "excluded";
    case Status::NotExcluded: return "not_excluded";
    default: return "solver_failure";
  }
}

const char* parity_name(Parity p) { return p == Parity::Even ? "even" : "odd"; }

Mode parse_mode(const std::string& s) {
  if (s == "single") return Mode::Single;
  if (s == "multi") return Mode::Multi;
  throw ConfigError("unknown mode '" + s + "' (expected single or multi)");
}

namespace {

Parity parse_parity(const std::string& s) {
  if (s == "even") return Parity::Even;
  if (s == "odd") return Parity::Odd;
  throw ConfigError("unknown parity '" + s + "'");
}

}  // namespace

void DiscretizationGrid::validate() const {
  if (!(delta_step > 0)) throw ConfigError("grid delta_step must be positive");
  if (!(delta_max > 0)) throw ConfigError("grid delta_max must be positive");
  if (spin_max < 2) throw ConfigError("grid spin_max must be at least 2");
}

std::vector<Real> DiscretizationGrid::points(Real min_delta) const {
  std::vector<Real> out;
  if (min_delta > delta_max) return out;
  out.push_back(min_delta);
  long k = long(std::floor(min_delta / delta_step)) + 1;
  for (;; ++k) {
    const Real x = k * delta_step;
    if (x > delta_max + 1e-9L) break;
    if (x > min_delta + 1e-9L) out.push_back(x);
  }
  return out;
}

Real GapAssumptions::continuum_start(Parity p, int spin, Real d) const {
  for (const auto& s : sectors)
    if (s.parity == p && s.spin == spin) return s.min_delta;
  return unitarity_min(d, spin);
}

void GapAssumptions::validate(Real d, const DiscretizationGrid& grid) const {
  for (const auto& s : sectors)
    if (s.min_delta < unitarity_min(d, s.spin) - 1e-12L)
      throw DomainError("sector minimum below the unitarity bound");
  for (const auto& op : isolated) {
    if (op.delta < unitarity_min(d, op.spin) - 1e-12L) throw DomainError("isolated operator below the unitarity bound");
    if (op.delta > continuum_start(op.parity, op.spin, d) + 1e-12L)
      throw DomainError("isolated operator above its sector continuum start");
    if (op.delta >= grid.delta_max) throw DomainError("grid delta_max must exceed every isolated dimension");
  }
}

GapAssumptions GapAssumptions::standard(Mode mode, Real delta1, Real delta2, Real d, int spin_max, Real irrelevant) {
  if (irrelevant < 0) irrelevant = d;
  GapAssumptions g;
  g.isolated.push_back({Parity::Even, 0, delta2});
  if (mode == Mode::Multi) g.isolated.push_back({Parity::Odd, 0, delta1});
  for (int l = 0; l <= spin_max; ++l) {
    const Real m = std::max(irrelevant, unitarity_min(d, l));
    if (l % 2 == 0) g.sectors.push_back({Parity::Even, l, m});
    if (mode == Mode::Multi) g.sectors.push_back({Parity::Odd, l, m});
  }
  return g;
}

bool Functional::nonzero() const {
  for (const auto& c : coeffs)
    for (const auto& [k, v] : c)
      if (v != 0) return true;
  return false;
}

namespace {

// ---------------------------------------------------------------- layout

struct Layout {
  int comps = 1;
  std::vector<std::vector<std::pair<int, int>>> rows;
  std::vector<int> off;
  int n = 0;

  Layout(Mode mode, int lambda, const CrossingPoint& pt) {
    comps = mode == Mode::Single ? 1 : kMultiComponents;
    off.push_back(0);
    for (int c = 0; c < comps; ++c) {
      const bool anti = mode == Mode::Single || MultiSystem::component_antisymmetric(c);
      rows.push_back(independent_rows(lambda, pt.symmetric(), anti));
      off.push_back(off.back() + int(rows.back().size()));
    }
    n = off.back();
  }

  template <class T>
  void put(int c, const Jet<T>& j, T* out) const {
    for (std::size_t k = 0; k < rows[c].size(); ++k) out[off[c] + k] = j(rows[c][k].first, rows[c][k].second);
  }
};

std::vector<std::string> component_names(Mode mode) {
  if (mode == Mode::Single) return {"ssss"};
  std::vector<std::string> out;
  for (int c = 0; c < kMultiComponents; ++c) out.push_back(MultiSystem::component_name(c));
  return out;
}

// ---------------------------------------------------------------- caches

template <class T>
constexpr int precision_tag() {
  return std::is_same_v<T, Real> ? 64 : 113;
}

using EngineKey = std::tuple<int, Real, Real, int, int, int>;

template <class T>
std::shared_ptr<const BlockEngine<T>> engine_for(const CrossingPoint& pt, int order, int series, int max_spin) {
  static std::mutex mu;
  static std::map<EngineKey, std::shared_ptr<const BlockEngine<T>>> cache;
  EngineKey key{precision_tag<T>(), pt.u0, pt.v0, order, series, max_spin};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto eng = std::make_shared<const BlockEngine<T>>(pt, order, series, max_spin);
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() > 16) cache.clear();
  return cache.emplace(key, eng).first->second;
}

using FamilyKey = std::tuple<int, Real, Real, int, int, int, Real, int, Real, Real, std::vector<Real>>;

struct FamilyCache {
  std::mutex mu;
  std::map<FamilyKey, std::pair<std::shared_ptr<const void>, std::size_t>> entries;
  std::list<FamilyKey> order;  // least recently used first
  std::size_t bytes = 0;
  static constexpr std::size_t kLimit = std::size_t(768) << 20;

  void clear() {
    std::lock_guard<std::mutex> lock(mu);
    entries.clear();
    order.clear();
    bytes = 0;
  }
};

FamilyCache& family_cache() {
  static FamilyCache c;
  return c;
}

template <class T>
std::shared_ptr<const std::vector<BlockJets<T>>> cached_family(const BlockEngine<T>& eng, const BlockParams& proto,
                                                               const std::vector<Real>& deltas) {
  auto& fc = family_cache();
  const CrossingPoint& pt = eng.point();
  FamilyKey key{precision_tag<T>(), pt.u0, pt.v0, eng.order(), eng.series_order(), eng.max_spin(),
                proto.d, proto.spin, proto.d12, proto.d34, deltas};
  {
    std::lock_guard<std::mutex> lock(fc.mu);
    auto it = fc.entries.find(key);
    if (it != fc.entries.end()) {
      fc.order.remove(key);
      fc.order.push_back(key);
      return std::static_pointer_cast<const std::vector<BlockJets<T>>>(it->second.first);
    }
  }
  auto fam = std::make_shared<const std::vector<BlockJets<T>>>(eng.family(proto, deltas));
  const std::size_t sz = deltas.size() * 2 * Jet<T>::size(eng.order()) * sizeof(T) + 256;
  std::lock_guard<std::mutex> lock(fc.mu);
  if (fc.entries.count(key)) return fam;
  while (!fc.order.empty() && fc.bytes + sz > FamilyCache::kLimit) {
    auto it = fc.entries.find(fc.order.front());
    fc.bytes -= it->second.second;
    fc.entries.erase(it);
    fc.order.pop_front();
  }
  fc.entries.emplace(key, std::make_pair(std::static_pointer_cast<const void>(fam), sz));
  fc.order.push_back(key);
  fc.bytes += sz;
  return fam;
}

// ---------------------------------------------------------------- generators

struct Context {
  Mode mode;
  Real d;
  Real delta1, delta2;
  GapAssumptions gaps;
  DiscretizationGrid grid;
  int lambda;
  CrossingPoint point;
  int series_order;
};

struct GenMeta {
  Parity parity;
  int spin;
  Real delta;
  bool isolated;
  bool asymptotic;
  bool matrix;
  int group;
};

template <class T>
struct GenVec {
  std::vector<T> v[3];
  int count = 1;
  explicit GenVec(int n) {
    for (auto& x : v) x.assign(n, T(0));
  }
  void zero() {
    for (auto& x : v) std::fill(x.begin(), x.end(), T(0));
  }
};

bool odd_sector_has_pole(const Context& cx) { return cx.mode == Mode::Multi && cx.delta1 != cx.delta2; }

// Jets of the top-degree large-Delta behaviour: A(m, n) = a^m b^n / (m! n!)
// on m + n = lambda, with a, b the logarithmic derivatives of sqrt(R).
template <class T>
Jet<T> asymptotic_jet(const BlockEngine<T>& eng) {
  const auto& R = eng.basis().R();
  const int L = eng.order();
  const T a = R(1, 0) / (2 * R.value()), b = R(0, 1) / (2 * R.value());
  Jet<T> A(L);
  for (int m = 0; m <= L; ++m) A(m, L - m) = tpow(a, T(m)) * tpow(b, T(L - m)) / (to<T>(factorial(m)) * to<T>(factorial(L - m)));
  return A;
}

template <class T>
void fill_h(const Context& cx, const Layout& lay, std::vector<T>& h) {
  h.assign(lay.n, T(0));
  const int L = cx.lambda;
  const T d1 = to<T>(cx.delta1), d2 = to<T>(cx.delta2);
  if (cx.mode == Mode::Single) {
    Jet<T> one(L, T(1));
    Jet<T> f = crossed(one, one, d1, cx.point, -1);  // identity exchange, equals -h
    lay.put(0, f * T(-1), h.data());
  } else {
    Jet<T> one(L, T(1));
    auto v = multi_even<T>(one, one, d1, d2, cx.point);
    for (int c = 0; c < kMultiComponents; ++c) {
      Jet<T> id = v[0][c] + v[1][c] * T(2) + v[2][c];
      lay.put(c, id * T(-1), h.data());
    }
  }
}

template <class T>
void fill_even(const Context& cx, const Layout& lay, const BlockJets<T>& g, GenVec<T>& out) {
  const T d1 = to<T>(cx.delta1), d2 = to<T>(cx.delta2);
  out.zero();
  if (cx.mode == Mode::Single) {
    out.count = 1;
    lay.put(0, crossed(g.direct, g.mirror, d1, cx.point, -1), out.v[0].data());
    return;
  }
  out.count = 3;
  auto v = multi_even<T>(g.direct, g.mirror, d1, d2, cx.point);
  for (int e = 0; e < 3; ++e)
    for (int c = 0; c < kMultiComponents; ++c)
      if (c == (e == 0 ? 0 : e == 2 ? 1 : 3) || (e == 1 && c == 4)) lay.put(c, v[e][c], out.v[e].data());
}

template <class T>
void fill_odd(const Context& cx, const Layout& lay, int spin, const BlockJets<T>& g3, const BlockJets<T>& g4,
              GenVec<T>& out) {
  out.zero();
  out.count = 1;
  auto v = multi_odd<T>(g3.direct, g3.mirror, g4.direct, g4.mirror, spin, to<T>(cx.delta1), to<T>(cx.delta2),
                        cx.point);
  for (int c = 2; c < kMultiComponents; ++c) lay.put(c, v[c], out.v[0].data());
}

template <class T>
void fill_asymptotic(const Context& cx, const Layout& lay, Parity parity, int spin, const Jet<T>& A,
                     GenVec<T>& out) {
  out.zero();
  const Jet<T> anti = A - A.swapped(), sym = A + A.swapped();
  const T u0 = to<T>(cx.point.u0);
  const T w1 = tpow(u0, -to<T>(cx.delta1)), w2 = tpow(u0, -to<T>(cx.delta2));
  const T wp = tpow(u0, -to<T>((cx.delta1 + cx.delta2) / 2));
  if (cx.mode == Mode::Single) {
    out.count = 1;
    lay.put(0, anti * w1, out.v[0].data());
  } else if (parity == Parity::Even) {
    out.count = 3;
    lay.put(0, anti * w1, out.v[0].data());
    lay.put(3, anti * (wp / 2), out.v[1].data());
    lay.put(4, sym * (wp / 2), out.v[1].data());
    lay.put(1, anti * w2, out.v[2].data());
  } else {
    out.count = 1;
    lay.put(2, anti * (spin % 2 ? -wp : wp), out.v[0].data());
    lay.put(3, anti * wp, out.v[0].data());
    lay.put(4, sym * (-wp), out.v[0].data());
  }
}

// Vectors of one generator computed directly (no interpolation).
template <class T>
void fill_meta(const Context& cx, const Layout& lay, const BlockEngine<T>& eng, const GenMeta& m, GenVec<T>& buf) {
  if (m.asymptotic) {
    fill_asymptotic(cx, lay, m.parity, m.spin, asymptotic_jet(eng), buf);
  } else if (m.parity == Parity::Even) {
    if (m.spin % 2) throw DomainError("odd spin in the even identical-scalar channel");
    fill_even(cx, lay, eng.compute({cx.d, m.delta, m.spin}), buf);
  } else {
    if (cx.mode == Mode::Single) throw DomainError("odd sector is absent in the single-correlator system");
    fill_odd(cx, lay, m.spin, eng.compute(odd_block_self(cx.d, cx.delta1, cx.delta2, m.spin, m.delta)),
             eng.compute(odd_block_hat(cx.d, cx.delta1, cx.delta2, m.spin, m.delta)), buf);
  }
}

// Calls fn(meta, vectors) for every generator in a fixed order: isolated
// operators, then per sector and spin the grid points and the large-Delta
// generator.
template <class T, class Fn>
void enumerate(const Context& cx, const Layout& lay, Fn&& fn) {
  auto eng = engine_for<T>(cx.point, cx.lambda, cx.series_order, cx.grid.spin_max);
  GenVec<T> buf(lay.n);
  int group = 0;
  const bool multi = cx.mode == Mode::Multi;

  for (const auto& op : cx.gaps.isolated) {
    if (!multi && op.parity == Parity::Odd) continue;
    GenMeta meta{op.parity, op.spin, op.delta, true, false, false, group++};
    fill_meta(cx, lay, *eng, meta, buf);
    meta.matrix = buf.count == 3;
    fn(meta, buf);
  }

  const bool asym = cx.grid.asymptotic && cx.point.symmetric();
  Jet<T> A = asym ? asymptotic_jet(*eng) : Jet<T>();
  for (int pi = 0; pi < (multi ? 2 : 1); ++pi) {
    const Parity parity = pi == 0 ? Parity::Even : Parity::Odd;
    for (int l = 0; l <= cx.grid.spin_max; ++l) {
      if (parity == Parity::Even && l % 2) continue;
      std::vector<Real> deltas = cx.grid.points(cx.gaps.continuum_start(parity, l, cx.d));
      if (parity == Parity::Odd && l >= 1 && odd_sector_has_pole(cx)) {
        const Real pole = l + cx.d - 2;
        deltas.erase(std::remove_if(deltas.begin(), deltas.end(), [&](Real x) { return x <= pole + 1e-9L; }),
                     deltas.end());
      }
      const int gid = group++;
      if (!deltas.empty()) {
        if (parity == Parity::Even) {
          auto fam = cached_family<T>(*eng, {cx.d, 0, l}, deltas);
          for (std::size_t k = 0; k < deltas.size(); ++k) {
            fill_even(cx, lay, (*fam)[k], buf);
            fn(GenMeta{parity, l, deltas[k], false, false, buf.count == 3, gid}, buf);
          }
        } else {
          auto f3 = cached_family<T>(*eng, odd_block_self(cx.d, cx.delta1, cx.delta2, l, 0), deltas);
          auto f4 = cached_family<T>(*eng, odd_block_hat(cx.d, cx.delta1, cx.delta2, l, 0), deltas);
          for (std::size_t k = 0; k < deltas.size(); ++k) {
            fill_odd(cx, lay, l, (*f3)[k], (*f4)[k], buf);
            fn(GenMeta{parity, l, deltas[k], false, false, false, gid}, buf);
          }
        }
      }
      if (asym) {
        fill_asymptotic(cx, lay, parity, l, A, buf);
        fn(GenMeta{parity, l, INFINITY, false, true, buf.count == 3, group++}, buf);
      }
    }
  }
}

// ---------------------------------------------------------------- actions

template <class T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
  T s(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <class T>
T abs_dot(const std::vector<T>& a, const std::vector<T>& b) {
  T s(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += tabs(a[i] * b[i]);
  return s;
}

template <class T>
struct Eig2 {
  T lmin;
  T c, s;  // unit eigenvector of lmin
};

template <class T>
Eig2<T> eig2(const T& a, const T& b, const T& c) {
  const T mid = (a + c) / 2, half = (a - c) / 2;
  const T r = tsqrt(half * half + b * b);
  Eig2<T> e{mid - r, T(1), T(0)};
  if (r == T(0)) return e;
  T x = e.lmin - c, y = b;  // from the second row
  T x2 = b, y2 = e.lmin - a;
  if (tabs(x2) + tabs(y2) > tabs(x) + tabs(y)) {
    x = x2;
    y = y2;
  }
  const T nrm = tsqrt(x * x + y * y);
  e.c = x / nrm;
  e.s = y / nrm;
  return e;
}

// Normalized action: scalar (alpha.v) / sum|alpha_i v_i|, matrix the smallest
// eigenvalue over the largest of the three entry scales.
template <class T>
T normalized_action(const std::vector<T>& alpha, const GenVec<T>& g) {
  if (g.count == 1) {
    const T den = abs_dot(alpha, g.v[0]);
    return den == T(0) ? T(0) : dot(alpha, g.v[0]) / den;
  }
  const T a = dot(alpha, g.v[0]), b = dot(alpha, g.v[1]), c = dot(alpha, g.v[2]);
  T den = std::max(abs_dot(alpha, g.v[0]), std::max(abs_dot(alpha, g.v[1]), abs_dot(alpha, g.v[2])));
  if (den == T(0)) return T(0);
  return eig2(a, b, c).lmin / den;
}

Context context_of(const Functional& f) {
  return {f.mode, f.d, f.delta1, f.delta2, f.gaps, f.grid, f.lambda_order, f.point, f.series_order};
}

template <class T>
std::vector<T> alpha_of(const Functional& f, const Layout& lay) {
  if (f.components() != lay.comps) throw ConfigError("certificate component count does not match its mode");
  std::vector<T> a(lay.n, T(0));
  for (int c = 0; c < lay.comps; ++c) {
    for (const auto& [mn, v] : f.coeffs[c]) {
      auto it = std::find(lay.rows[c].begin(), lay.rows[c].end(), mn);
      if (it == lay.rows[c].end()) throw ConfigError("certificate coefficient outside the derivative basis");
      a[lay.off[c] + (it - lay.rows[c].begin())] =
          to<T>(v) * to<T>(factorial(mn.first)) * to<T>(factorial(mn.second));
    }
  }
  return a;
}

void validate_inputs(const Context& cx) {
  if (cx.lambda < 1 || cx.lambda > kDefaultMaxLambda) throw ConfigError("lambda order out of range");
  cx.grid.validate();
  require_crossing_region(cx.point);
  const Real lo = unitarity_min(cx.d, 0);
  for (Real x : {cx.delta1, cx.delta2})
    if (!(x >= lo - 1e-12L) || !(x <= cx.d + 1e-12L))
      throw DomainError("external dimensions must lie between the scalar unitarity bound and d");
  cx.gaps.validate(cx.d, cx.grid);
}

// Full pass in Real; generators whose action is within kRefine of zero and
// alpha[h] are then recomputed in T from exactly evaluated blocks. A clear
// violation in the Real pass needs no refinement.
constexpr Real kRefine = 1e-6L;

template <class T>
CheckReport check_impl(const Functional& cert, Real eps) {
  CheckReport rep;
  if (!cert.nonzero()) {
    rep.reason = "zero functional";
    return rep;
  }
  const Context cx = context_of(cert);
  validate_inputs(cx);
  const Layout lay(cx.mode, cx.lambda, cx.point);
  const std::vector<Real> alpha = alpha_of<Real>(cert, lay);
  Real worst = INFINITY;
  long count = 0;
  std::vector<GenMeta> close;
  enumerate<Real>(cx, lay, [&](const GenMeta& m, const GenVec<Real>& g) {
    const Real a = normalized_action(alpha, g);
    if (!std::is_same_v<T, Real> && std::fabs(a) < kRefine) close.push_back(m);
    else worst = std::min(worst, a);
    ++count;
  });
  const std::vector<T> alpha_t = alpha_of<T>(cert, lay);
  std::vector<T> h;
  fill_h(cx, lay, h);
  const T hden = abs_dot(alpha_t, h);
  rep.alpha_h = hden == T(0) ? 0 : to_real(dot(alpha_t, h) / hden);
  if (!close.empty() && !(worst < -kRefine)) {
    auto eng = engine_for<T>(cx.point, cx.lambda, cx.series_order, cx.grid.spin_max);
    GenVec<T> buf(lay.n);
    for (const auto& m : close) {
      fill_meta(cx, lay, *eng, m, buf);
      worst = std::min(worst, to_real(normalized_action(alpha_t, buf)));
    }
  }
  rep.generators = count;
  rep.min_action = count ? worst : 0;
  if (!(rep.alpha_h <= -eps)) {
    rep.reason = "alpha[h] is not negative";
  } else if (!(rep.min_action >= -eps)) {
    rep.reason = "negative action on a generator";
  } else {
    rep.passed = true;
    rep.reason = "ok";
  }
  return rep;
}

// ---------------------------------------------------------------- solver

struct StoredVec {
  std::size_t off;
  int r0, r1;
  Real norm;
};

struct StoredGen {
  GenMeta meta;
  int first;
  int count;
};

struct Store {
  int n = 0;
  std::vector<Real> data;
  std::vector<StoredVec> vecs;
  std::vector<StoredGen> gens;
  std::vector<Real> scale;

  void add(const GenMeta& meta, const GenVec<Real>& g) {
    gens.push_back({meta, int(vecs.size()), g.count});
    for (int e = 0; e < g.count; ++e) {
      const auto& v = g.v[e];
      int r0 = 0, r1 = n;
      while (r0 < n && v[r0] == 0) ++r0;
      while (r1 > r0 && v[r1 - 1] == 0) --r1;
      vecs.push_back({data.size(), r0, r1, 0});
      data.insert(data.end(), v.begin() + r0, v.begin() + r1);
    }
  }

  void renorm() {
    for (auto& v : vecs) {
      Real nm = 0;
      for (std::size_t k = v.off; k < v.off + (v.r1 - v.r0); ++k) nm = std::max(nm, std::fabs(data[k]));
      v.norm = nm;
    }
  }

  void scale_rows(const std::vector<Real>& f, std::vector<Real>& h) {
    for (int i = 0; i < n; ++i) {
      h[i] *= f[i];
      scale[i] *= f[i];
    }
    for (auto& v : vecs)
      for (int i = v.r0; i < v.r1; ++i) data[v.off + i - v.r0] *= f[i];
  }

  // Geometric row/column equilibration; columns are renormalized to unit max
  // when they enter the LP, so only the row factors are kept.
  void equilibrate(std::vector<Real>& h, int passes = 8) {
    scale.assign(n, 1);
    std::vector<Real> f(n);
    for (int pass = 0; pass <= passes; ++pass) {
      renorm();
      Real hn = 0;
      for (Real x : h) hn = std::max(hn, std::fabs(x));
      std::vector<Real> mx(n, 0);
      for (int i = 0; i < n; ++i) mx[i] = hn > 0 ? std::fabs(h[i]) / hn : 0;
      for (const auto& v : vecs) {
        if (!(v.norm > 0)) continue;
        for (int i = v.r0; i < v.r1; ++i) mx[i] = std::max(mx[i], std::fabs(data[v.off + i - v.r0]) / v.norm);
      }
      for (int i = 0; i < n; ++i) f[i] = mx[i] > 0 ? (pass == passes ? 1 / mx[i] : 1 / std::sqrt(mx[i])) : 1;
      scale_rows(f, h);
    }
    renorm();
  }

  Real dotv(const std::vector<Real>& a, const StoredVec& v) const {
    Real s = 0;
    const Real* p = data.data() + v.off;
    for (int i = v.r0; i < v.r1; ++i) s += a[i] * p[i - v.r0];
    return s;
  }

  void axpy(Real w, const StoredVec& v, std::vector<Real>& out) const {
    const Real* p = data.data() + v.off;
    for (int i = v.r0; i < v.r1; ++i) out[i] += w * p[i - v.r0];
  }

  // LP action: scalar alpha.v / |v|; matrix lmin / max entry norm.
  Real action(const std::vector<Real>& a, const StoredGen& g, Real* c = nullptr, Real* s = nullptr) const {
    if (g.count == 1) {
      const auto& v = vecs[g.first];
      return v.norm > 0 ? dotv(a, v) / v.norm : 0;
    }
    const auto &v11 = vecs[g.first], &v12 = vecs[g.first + 1], &v22 = vecs[g.first + 2];
    const Real den = std::max(v11.norm, std::max(v12.norm, v22.norm));
    auto e = eig2<Real>(dotv(a, v11), dotv(a, v12), dotv(a, v22));
    if (c) *c = e.c;
    if (s) *s = e.s;
    return den > 0 ? e.lmin / den : 0;
  }

  std::vector<Real> column(const StoredGen& g, Real c = 1, Real s = 0) const {
    std::vector<Real> col(n, 0);
    if (g.count == 1) {
      axpy(1, vecs[g.first], col);
    } else {
      axpy(c * c, vecs[g.first], col);
      axpy(2 * c * s, vecs[g.first + 1], col);
      axpy(s * s, vecs[g.first + 2], col);
    }
    Real nm = 0;
    for (Real x : col) nm = std::max(nm, std::fabs(x));
    if (nm > 0)
      for (Real& x : col) x /= nm;
    return col;
  }
};

Functional make_certificate(const Context& cx, const Layout& lay, const std::vector<Real>& alpha_scaled,
                            const std::vector<Real>& scale) {
  Functional f;
  f.mode = cx.mode;
  f.d = cx.d;
  f.lambda_order = cx.lambda;
  f.point = cx.point;
  f.series_order = cx.series_order;
  f.delta1 = cx.delta1;
  f.delta2 = cx.delta2;
  f.grid = cx.grid;
  f.gaps = cx.gaps;
  f.coeffs.resize(lay.comps);
  for (int c = 0; c < lay.comps; ++c)
    for (std::size_t k = 0; k < lay.rows[c].size(); ++k) {
      const int i = lay.off[c] + int(k);
      const auto [m, n] = lay.rows[c][k];
      f.coeffs[c][{m, n}] = alpha_scaled[i] * scale[i] / (factorial(m) * factorial(n));
    }
  return f;
}

Verdict solve(const Context& cx, const SolverOptions& opt) {
  validate_inputs(cx);
  const Layout lay(cx.mode, cx.lambda, cx.point);
  Store st;
  st.n = lay.n;
  enumerate<Real>(cx, lay, [&](const GenMeta& m, const GenVec<Real>& g) { st.add(m, g); });
  std::vector<Real> h;
  fill_h(cx, lay, h);
  st.equilibrate(h);
  Real hn = 0;
  for (Real x : h) hn = std::max(hn, std::fabs(x));
  for (Real& x : h) x /= hn;

  Verdict out;
  auto& dg = out.diagnostics;
  dg.generators = long(st.gens.size());
  dg.rows = lay.n;
  dg.delta_step = cx.grid.delta_step;
  dg.delta_max = cx.grid.delta_max;
  dg.spin_max = cx.grid.spin_max;

  ConeLP lp(h);
  // initial active set: geometric subsample of each group, four directions
  // for 2x2 entries
  const Real r2 = 1 / std::sqrt(Real(2));
  const Real dirs[4][2] = {{1, 0}, {0, 1}, {r2, r2}, {r2, -r2}};
  for (std::size_t j = 0; j < st.gens.size();) {
    std::size_t e = j;
    while (e < st.gens.size() && st.gens[e].meta.group == st.gens[j].meta.group) ++e;
    const std::size_t len = e - j;
    std::vector<std::size_t> pick;
    for (std::size_t k = 0; k < len; k = k ? 2 * k : 1) pick.push_back(j + k);
    if (len > 1) pick.push_back(e - 1);
    std::sort(pick.begin(), pick.end());
    pick.erase(std::unique(pick.begin(), pick.end()), pick.end());
    for (std::size_t k : pick) {
      const auto& g = st.gens[k];
      if (g.count == 1) lp.add_generator(st.column(g));
      else
        for (const auto& d : dirs) lp.add_generator(st.column(g, d[0], d[1]));
    }
    j = e;
  }

  // A functional whose normalized alpha[h] is above this cannot pass the
  // certificate check; h is then in the cone to working accuracy.
  const Real weak = -10 * opt.check_epsilon;
  std::vector<Real> act(st.gens.size());
  std::vector<Real> ec(st.gens.size()), es(st.gens.size());
  const auto start = std::chrono::steady_clock::now();
  try {
    for (int round = 0;; ++round) {
      if (round >= opt.max_rounds) throw SolverFailure("cut generation did not converge");
      if (opt.time_limit > 0 &&
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() > opt.time_limit)
        throw SolverFailure("time limit exceeded");
      if (lp.solve(opt.max_iterations) != LpStatus::Optimal) throw SolverFailure("simplex iteration limit reached");
      dg.rounds = round + 1;
      dg.iterations = lp.iterations();
      dg.active = long(lp.generators());
      dg.residual = lp.residual();
      const auto& alpha = lp.alpha();
      Real hd = 0, ha = 0;
      for (int i = 0; i < lay.n; ++i) {
        hd += alpha[i] * h[i];
        ha += std::fabs(alpha[i] * h[i]);
      }
      dg.alpha_h = ha > 0 ? hd / ha : 0;
      if (!(dg.alpha_h <= weak)) {
        out.status = Status::NotExcluded;
        dg.min_action = 0;
        dg.note = "not excluded at this lambda";
        return out;
      }
      Real worst = INFINITY;
      for (std::size_t j = 0; j < st.gens.size(); ++j) {
        act[j] = st.action(alpha, st.gens[j], &ec[j], &es[j]);
        worst = std::min(worst, act[j]);
      }
      dg.min_action = worst;
      if (worst >= -opt.margin) {
        out.status = Status::Excluded;
        out.certificate = make_certificate(cx, lay, alpha, st.scale);
        break;
      }
      // cuts at violated local minima within each group
      std::size_t added = 0;
      for (std::size_t j = 0; j < st.gens.size(); ++j) {
        if (act[j] >= -opt.margin) continue;
        const int gid = st.gens[j].meta.group;
        const bool left = j == 0 || st.gens[j - 1].meta.group != gid || act[j - 1] >= act[j];
        const bool right = j + 1 == st.gens.size() || st.gens[j + 1].meta.group != gid || act[j + 1] > act[j];
        if (!(left && right)) continue;
        lp.add_generator(st.column(st.gens[j], ec[j], es[j]));
        ++added;
      }
      if (added == 0) throw SolverFailure("no cut found for a violated generator");
    }
  } catch (const SolverFailure& e) {
    out.status = Status::SolverFailure;
    out.certificate.reset();
    dg.note = e.what();
    return out;
  }

  // re-verify the certificate independently of the LP data
  CheckOptions co;
  co.precision_bits = opt.precision_bits;
  co.epsilon = opt.check_epsilon;
  CheckReport rep = certificate_check(*out.certificate, co);
  if (!rep.passed) {
    out.status = Status::SolverFailure;
    out.certificate.reset();
    dg.note = "certificate rejected on re-check: " + rep.reason;
  } else {
    dg.note = "excluded modulo discretization";
  }
  return out;
}

}  // namespace

Verdict exclude(Mode mode, Real delta1, Real delta2, const GapAssumptions& gaps, int lambda,
                const DiscretizationGrid& grid, const SolverOptions& opt) {
  Context cx{mode, opt.d, delta1, delta2, gaps, grid, lambda, opt.point, opt.series_order};
  return solve(cx, opt);
}

Verdict exclude_single(Real delta1, Real delta2, const GapAssumptions& gaps, int lambda,
                       const DiscretizationGrid& grid, const SolverOptions& opt) {
  return exclude(Mode::Single, delta1, delta2, gaps, lambda, grid, opt);
}

Verdict exclude_multi(Real delta1, Real delta2, const GapAssumptions& gaps, int lambda,
                      const DiscretizationGrid& grid, const SolverOptions& opt) {
  return exclude(Mode::Multi, delta1, delta2, gaps, lambda, grid, opt);
}

CheckReport certificate_check(const Functional& cert, const CheckOptions& opt) {
  try {
    if (opt.precision_bits > 64) return check_impl<Quad>(cert, opt.epsilon);
    return check_impl<Real>(cert, opt.epsilon);
  } catch (const std::exception& e) {
    CheckReport r;
    r.reason = e.what();
    return r;
  }
}

bool certificate_check(const Functional& cert, const std::vector<CrossingVector>& generators, const CrossingVector& h,
                       Real epsilon) {
  if (!cert.nonzero() || cert.components() != 1) return false;
  auto action = [&](const Jet<Real>& j) {
    Real num = 0, den = 0;
    for (const auto& [mn, a] : cert.coeffs[0]) {
      if (mn.first + mn.second > j.order()) return Real(NAN);
      const Real x = a * factorial(mn.first) * factorial(mn.second) * j(mn.first, mn.second);
      num += x;
      den += std::fabs(x);
    }
    return den > 0 ? num / den : Real(0);
  };
  const Real ah = action(h.taylor);
  if (!(ah <= -epsilon)) return false;
  for (const auto& g : generators)
    if (!(action(g.taylor) >= -epsilon)) return false;
  return true;
}

Real functional_action(const Functional& cert, Parity parity, int spin, Real delta) {
  if (spin < 0 || (parity == Parity::Even && spin % 2 != 0)) throw DomainError("no such sector");
  if (parity == Parity::Odd && cert.mode == Mode::Single) throw DomainError("odd sector needs the mixed system");
  if (delta < unitarity_min(cert.d, spin) - 1e-12L) throw DomainError("dimension below the unitarity bound");
  const Context cx = context_of(cert);
  const Layout lay(cx.mode, cx.lambda, cx.point);
  const auto alpha = alpha_of<Real>(cert, lay);
  auto eng = engine_for<Real>(cx.point, cx.lambda, cx.series_order, std::max(cx.grid.spin_max, spin));
  GenVec<Real> buf(lay.n);
  fill_meta(cx, lay, *eng, GenMeta{parity, spin, delta, true, false, false, 0}, buf);
  return normalized_action(alpha, buf);
}

std::vector<Real> extremal_zeros(const Functional& cert, Parity parity, int spin, Real lo, Real hi) {
  std::vector<Real> roots;
  const Real step = cert.grid.delta_step;
  if (!(hi > lo)) return roots;
  auto f = [&](Real x) { return functional_action(cert, parity, spin, x); };
  Real x0 = lo, f0 = f(lo);
  while (x0 < hi) {
    const Real x1 = std::min(hi, x0 + step);
    const Real f1 = f(x1);
    if ((f0 < 0) != (f1 < 0)) {
      Real a = x0, b = x1, fa = f0;
      while (b - a > 1e-6L) {
        const Real m = (a + b) / 2, fm = f(m);
        if ((fm < 0) == (fa < 0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      roots.push_back((a + b) / 2);
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

void clear_block_cache() { family_cache().clear(); }

// ---------------------------------------------------------------- files

namespace {

std::string hex(Real x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%La", x);
  return buf;
}

Real parse_real(const std::string& s, int line) {
  char* end = nullptr;
  const Real x = std::strtold(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ConfigError("certificate line " + std::to_string(line) + ": bad number '" + s + "'");
  return x;
}

}  // namespace

void save_certificate(const Functional& f, std::ostream& os) {
  os << "crossbound-certificate 1\n";
  os << "mode " << mode_name(f.mode) << '\n';
  os << "d " << hex(f.d) << '\n';
  os << "lambda " << f.lambda_order << '\n';
  os << "point " << hex(f.point.u0) << ' ' << hex(f.point.v0) << '\n';
  os << "series_order " << f.series_order << '\n';
  os << "delta1 " << hex(f.delta1) << '\n';
  os << "delta2 " << hex(f.delta2) << '\n';
  os << "grid " << hex(f.grid.delta_step) << ' ' << hex(f.grid.delta_max) << ' ' << f.grid.spin_max << ' '
     << (f.grid.asymptotic ? 1 : 0) << '\n';
  for (const auto& s : f.gaps.sectors) os << "gap " << parity_name(s.parity) << ' ' << s.spin << ' ' << hex(s.min_delta) << '\n';
  for (const auto& op : f.gaps.isolated)
    os << "isolated " << parity_name(op.parity) << ' ' << op.spin << ' ' << hex(op.delta) << '\n';
  os << "normalization " << f.normalization << '\n';
  const auto names = component_names(f.mode);
  for (int c = 0; c < f.components(); ++c) {
    os << "component " << c << ' ' << (c < int(names.size()) ? names[c] : "?") << ' ' << f.coeffs[c].size() << '\n';
    for (const auto& [mn, v] : f.coeffs[c]) os << mn.first << ' ' << mn.second << ' ' << hex(v) << '\n';
  }
  os << "end\n";
}

Functional load_certificate(std::istream& is) {
  Functional f;
  f.gaps = {};
  std::string line;
  int ln = 0;
  bool header = false, ended = false;
  int comp = -1;
  std::size_t remaining = 0;
  auto fail = [&](const std::string& msg) { throw ConfigError("certificate line " + std::to_string(ln) + ": " + msg); };
  while (std::getline(is, line)) {
    ++ln;
    if (line.empty()) continue;
    std::istringstream ss(line);
    if (remaining > 0) {
      int m, n;
      std::string v, extra;
      if (!(ss >> m >> n >> v) || (ss >> extra)) fail("expected 'm n coefficient'");
      if (!f.coeffs[comp].emplace(std::make_pair(m, n), parse_real(v, ln)).second) fail("duplicate coefficient");
      --remaining;
      continue;
    }
    std::string key;
    ss >> key;
    if (!header) {
      int version = 0;
      if (key != "crossbound-certificate" || !(ss >> version) || version != 1) fail("not a certificate file");
      header = true;
      continue;
    }
    std::string a, b, c, e;
    if (key == "mode") {
      ss >> a;
      f.mode = parse_mode(a);
    } else if (key == "d") {
      ss >> a;
      f.d = parse_real(a, ln);
    } else if (key == "lambda") {
      if (!(ss >> f.lambda_order)) fail("bad lambda");
    } else if (key == "point") {
      ss >> a >> b;
      f.point = {parse_real(a, ln), parse_real(b, ln)};
    } else if (key == "series_order") {
      if (!(ss >> f.series_order)) fail("bad series_order");
    } else if (key == "delta1") {
      ss >> a;
      f.delta1 = parse_real(a, ln);
    } else if (key == "delta2") {
      ss >> a;
      f.delta2 = parse_real(a, ln);
    } else if (key == "grid") {
      int asym = 1;
      ss >> a >> b >> f.grid.spin_max >> asym;
      if (!ss) fail("bad grid line");
      f.grid.delta_step = parse_real(a, ln);
      f.grid.delta_max = parse_real(b, ln);
      f.grid.asymptotic = asym != 0;
    } else if (key == "gap" || key == "isolated") {
      int spin;
      ss >> a >> spin >> b;
      if (!ss) fail("bad " + key + " line");
      if (key == "gap") f.gaps.sectors.push_back({parse_parity(a), spin, parse_real(b, ln)});
      else f.gaps.isolated.push_back({parse_parity(a), spin, parse_real(b, ln)});
    } else if (key == "normalization") {
      std::getline(ss >> std::ws, f.normalization);
    } else if (key == "component") {
      int idx;
      std::size_t cnt;
      ss >> idx >> a >> cnt;
      if (!ss || idx != int(f.coeffs.size())) fail("bad component header");
      f.coeffs.emplace_back();
      comp = idx;
      remaining = cnt;
    } else if (key == "end") {
      ended = true;
      break;
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (!header) throw ConfigError("empty certificate");
  if (!ended || remaining > 0) throw ConfigError("truncated certificate");
  return f;
}

void save_certificate(const Functional& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  save_certificate(f, os);
}

Functional load_certificate_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path);
  return load_certificate(is);
}

}  // namespace crossbound
