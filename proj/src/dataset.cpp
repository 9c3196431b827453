#include "crossbound/dataset.hpp"
#include "crossbound/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace crossbound {

namespace {

std::array<int, 3> key_of(int i, int j, int k) {
  std::array<int, 3> a{i, j, k};
  std::sort(a.begin(), a.end());
  return a;
}

int parity_sign(Parity p) { return p == Parity::Even ? 1 : -1; }

Parity parse_parity(const std::string& s) {
  if (s == "even" || s == "+") return Parity::Even;
  if (s == "odd" || s == "-") return Parity::Odd;
  throw ConfigError("unknown parity '" + s + "'");
}

}  // namespace

CFTDataset::CFTDataset(Real d) : d_(d) {
  if (!(d >= 2)) throw DomainError("dimension must be at least 2");
  fields_[0] = Field{0, 0, 0, Parity::Even};
}

void CFTDataset::add_field(const Field& f) {
  if (f.index == 0) throw ConfigError("index 0 is reserved for the unit field");
  if (f.index < 0) throw ConfigError("field index must be positive");
  if (fields_.count(f.index)) throw ConfigError("field " + std::to_string(f.index) + " defined twice");
  if (f.spin < 0) throw ConfigError("negative spin");
  if (!std::isfinite(f.delta)) throw ConfigError("dimension is not finite");
  if (f.delta < unitarity_min(d_, f.spin) - 1e-12L)
    throw DomainError("field " + std::to_string(f.index) + " below the unitarity bound " +
                      fmt12(unitarity_min(d_, f.spin)));
  fields_[f.index] = f;
}

bool CFTDataset::has_field(int i) const { return fields_.count(i) != 0; }

const Field& CFTDataset::field(int i) const {
  auto it = fields_.find(i);
  if (it == fields_.end()) throw ConfigError("unknown field " + std::to_string(i));
  return it->second;
}

std::vector<int> CFTDataset::indices() const {
  std::vector<int> out;
  for (const auto& [i, f] : fields_) out.push_back(i);
  return out;
}

void CFTDataset::set_ope(int i, int j, int k, Real lambda) {
  const Field &fi = field(i), &fj = field(j), &fk = field(k);
  if (!std::isfinite(lambda)) throw ConfigError("coupling is not finite");
  int spinning = 0;
  for (const Field* f : {&fi, &fj, &fk}) spinning += f->spin != 0;
  if (spinning > 1) throw ConfigError("at most one spinning field per coupling");
  if (i == 0 || j == 0 || k == 0) {
    // lambda_ij0 = delta_ij
    const int a = i == 0 ? j : i, b = i == 0 ? k : (j == 0 ? k : j);
    const Real want = a == b ? 1 : 0;
    if (lambda != want)
      throw ConfigError("coupling to the unit field must be " + fmt12(want) + " for (" + std::to_string(a) + ", " +
                        std::to_string(b) + ")");
    return;
  }
  if (lambda != 0 && parity_sign(fi.parity) * parity_sign(fj.parity) * parity_sign(fk.parity) < 0)
    throw ConfigError("coupling violates Z2 parity");
  if (lambda != 0) {
    const Field* sp = fi.spin ? &fi : fj.spin ? &fj : fk.spin ? &fk : nullptr;
    if (sp && sp->spin % 2) {
      // the two scalars must differ for odd-spin exchange
      std::vector<int> scalars;
      for (int x : {i, j, k})
        if (x != sp->index) scalars.push_back(x);
      if (scalars.size() == 2 && scalars[0] == scalars[1])
        throw ConfigError("odd-spin exchange between identical scalars must vanish");
    }
  }
  const auto key = key_of(i, j, k);
  auto it = ope_.find(key);
  if (it != ope_.end() && it->second != lambda)
    throw ConfigError("asymmetric coupling: (" + std::to_string(i) + ", " + std::to_string(j) + ", " +
                      std::to_string(k) + ") given as " + fmt12(lambda) + " and " + fmt12(it->second));
  ope_[key] = lambda;
}

Real CFTDataset::ope(int i, int j, int k) const {
  if (i == 0) return j == k ? 1 : 0;
  if (j == 0) return i == k ? 1 : 0;
  if (k == 0) return i == j ? 1 : 0;
  auto it = ope_.find(key_of(i, j, k));
  if (it == ope_.end()) return 0;
  const Field& fk = field(k);
  return (fk.spin % 2 && i > j) ? -it->second : it->second;
}

CFTDataset load_dataset(std::istream& is, Real d) {
  CFTDataset ds(d);
  std::string line;
  int no = 0;
  bool in_ope = false;
  while (std::getline(is, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    try {
      if (kind == "field") {
        if (in_ope) throw ConfigError("field line after ope lines");
        Field f;
        std::string parity;
        if (!(ls >> f.index >> f.delta >> f.spin >> parity)) throw ConfigError("expected: field index delta spin parity");
        f.parity = parse_parity(parity);
        std::string extra;
        if (ls >> extra) throw ConfigError("trailing text '" + extra + "'");
        ds.add_field(f);
      } else if (kind == "ope") {
        in_ope = true;
        int i, j, k;
        Real lambda;
        if (!(ls >> i >> j >> k >> lambda)) throw ConfigError("expected: ope i j k lambda");
        std::string extra;
        if (ls >> extra) throw ConfigError("trailing text '" + extra + "'");
        ds.set_ope(i, j, k, lambda);
      } else {
        throw ConfigError("unknown record '" + kind + "'");
      }
    } catch (const std::runtime_error& e) {
      throw ConfigError("dataset line " + std::to_string(no) + ": " + e.what());
    }
  }
  return ds;
}

CFTDataset load_dataset_file(const std::string& path, Real d) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return load_dataset(in, d);
}

void save_dataset(const CFTDataset& ds, std::ostream& os) {
  char buf[64];
  for (int i : ds.indices()) {
    if (i == 0) continue;
    const Field& f = ds.field(i);
    std::snprintf(buf, sizeof buf, "%.21Lg", f.delta);
    os << "field " << i << ' ' << buf << ' ' << f.spin << ' ' << parity_name(f.parity) << '\n';
  }
  const auto idx = ds.indices();
  for (std::size_t a = 1; a < idx.size(); ++a)
    for (std::size_t b = a; b < idx.size(); ++b)
      for (std::size_t c = b; c < idx.size(); ++c) {
        const Real v = ds.ope(idx[a], idx[b], idx[c]);
        if (v == 0) continue;
        std::snprintf(buf, sizeof buf, "%.21Lg", v);
        os << "ope " << idx[a] << ' ' << idx[b] << ' ' << idx[c] << ' ' << buf << '\n';
      }
}

GrowthReport growth_check(const CFTDataset& ds, int i, int j, const std::vector<Real>& rho_samples,
                          const std::optional<TailRule>& tail) {
  ds.field(i);
  ds.field(j);
  if (tail) {
    if (!tail->lambda_sq || !(tail->b > 0) || !std::isfinite(tail->a))
      throw ConfigError("malformed tail rule: needs b > 0 and a coefficient function");
  }
  GrowthReport rep;
  // dominating ratio from the averaged root test far out in the tail
  auto log_term = [&](long k, Real rho) {
    const Real dk = tail->a + tail->b * k;
    const Real l2 = tail->lambda_sq(k, dk);
    if (!(l2 >= 0) || std::isnan(l2)) throw ConfigError("malformed tail rule: lambda^2 negative or undefined");
    return dk * std::log(4 * rho) + std::log(l2);
  };
  for (Real rho : rho_samples) {
    if (!(rho > 0 && rho < 1)) throw DomainError("rho samples must lie in (0, 1)");
    Real sum = 0;
    for (int k : ds.indices()) {
      const Real lam = ds.ope(i, j, k);
      if (lam != 0) sum += std::pow(4 * rho, ds.field(k).delta) * lam * lam;
    }
    if (tail) {
      constexpr long k1 = 1000, k2 = 2000;
      const Real a = log_term(k1, rho), b = log_term(k2, rho);
      const Real lr = std::isinf(a) && std::isinf(b) ? -INFINITY : (b - a) / Real(k2 - k1);
      rep.tail_ratio = std::max(rep.tail_ratio, std::exp(lr));
      if (!(lr < -1e-12L)) rep.converges = false;
      // partial sum of the tail up to the point where terms are negligible
      for (long k = 0; k <= k2; ++k) {
        const Real t = std::exp(log_term(k, rho));
        sum += t;
        if (k > 50 && lr < 0 && t < 1e-30L * sum) break;
      }
    }
    rep.partial_sums.push_back(sum);
  }
  return rep;
}

Reconstruction reconstruct_4pt(const CFTDataset& ds, int i, int j, int k, int l, Real u, Real v, Real truncation,
                               int series_order) {
  for (int x : {i, j, k, l})
    if (ds.field(x).spin != 0) throw DomainError("external fields must be scalars");
  const CrossingPoint pt{u, v};
  if (!(u > 0 && v > 0) || !in_convergence_region(pt)) throw DomainError("(u, v) outside the convergence region");
  const Real d12 = ds.field(i).delta - ds.field(j).delta;
  const Real d34 = ds.field(k).delta - ds.field(l).delta;
  Reconstruction r;
  for (int m : ds.indices()) {
    const Real c = ds.ope(i, j, m) * ds.ope(k, l, m);
    if (c == 0) continue;
    const Field& f = ds.field(m);
    if (f.delta > truncation) {
      r.truncated = true;
      continue;
    }
    ++r.terms;
    if (m == 0) {
      r.value += c;
      continue;
    }
    r.value += c * eval_block({ds.d(), f.delta, f.spin, d12, d34}, pt, series_order);
  }
  return r;
}

Real crossing_residual(const CFTDataset& ds, int i, int j, int k, int l, const std::vector<CrossingPoint>& points,
                       Real truncation, int series_order) {
  const Real di = ds.field(i).delta, dj = ds.field(j).delta, dk = ds.field(k).delta;
  Real worst = 0;
  for (const auto& p : points) {
    if (!(p.u0 > 0 && p.v0 > 0) || !in_crossing_region(p)) throw DomainError("point outside the crossing overlap");
    const Real lhs = std::pow(p.u0, -(di + dj) / 2) * reconstruct_4pt(ds, i, j, k, l, p.u0, p.v0, truncation, series_order).value;
    const Real rhs = std::pow(p.v0, -(dk + dj) / 2) * reconstruct_4pt(ds, k, j, i, l, p.v0, p.u0, truncation, series_order).value;
    worst = std::max(worst, std::fabs(lhs - rhs));
  }
  return worst;
}

namespace {

using Vec = std::array<Real, 3>;

Real norm(const Vec& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

Vec axpy(const Vec& x, Real t, const Vec& e) { return {x[0] + t * e[0], x[1] + t * e[1], x[2] + t * e[2]}; }

Vec sub(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Vec unit(const Vec& e) {
  const Real n = norm(e);
  if (!(n > 0)) throw DomainError("zero probe direction");
  return {e[0] / n, e[1] / n, e[2] / n};
}

// |u|^{Di + Dj - Dk} <A_i(x) A_j(x + t e) A_k(x3)> / c_ijk, with u = t e.
struct ThreePoint {
  Real di, dj, dk;
  Vec x, x3, e;
  Real reduced(Real t) const {
    const Vec y = axpy(x, t, e);
    const Real a = norm(sub(x, x3)), b = norm(sub(y, x3));
    return std::pow(a, -(di + dk - dj)) * std::pow(b, -(dj + dk - di));
  }
  // <A_k(x + s e) A_k(x3)>
  Real two_point(Real s) const { return std::pow(norm(sub(axpy(x, s, e), x3)), -2 * dk); }
};

// Richardson-extrapolated central differences of order `order` (1 or 2) at 0.
template <class F>
Real derivative_at_zero(const F& f, int order, Real h) {
  auto diff = [&](Real s) {
    return order == 1 ? (f(s) - f(-s)) / (2 * s) : (f(s) - 2 * f(0) + f(-s)) / (s * s);
  };
  Real t[4];
  for (int k = 0; k < 4; ++k) t[k] = diff(h / Real(1 << k));
  for (int lev = 1; lev < 4; ++lev) {
    const Real w = std::pow(Real(4), lev);
    for (int k = 0; k + lev < 4; ++k) t[k] = (w * t[k + 1] - t[k]) / (w - 1);
  }
  return t[0];
}

void check_match_inputs(Real di, Real dj, Real dk, Real d) {
  if (dk == 0) throw DomainError("unit-field exchange has no subleading coefficient");
  if (!(dk > 0)) throw DomainError("exchanged dimension must be positive");
  if (!(di > 0 && dj > 0)) throw DomainError("external dimensions must be positive");
  if (!(d > 0)) throw DomainError("dimension must be positive");
}

}  // namespace

OPESubleading match_s1(Real delta_i, Real delta_j, Real delta_k, Real d, const ProbeGeometry& probe) {
  check_match_inputs(delta_i, delta_j, delta_k, d);
  const ThreePoint tp{delta_i, delta_j, delta_k, probe.x, probe.x3, unit(probe.direction)};
  const Vec w = sub(probe.x, probe.x3);
  const Real cosang = std::fabs((w[0] * tp.e[0] + w[1] * tp.e[1] + w[2] * tp.e[2]) / norm(w));
  if (cosang < 0.05L) throw DomainError("probe direction nearly orthogonal to x - x3");
  const Real h = 1e-2L * norm(w);
  // leading orders: reduced(t) = f + s1 t e.df + O(t^2), f = <A_k A_k>
  const Real lhs = derivative_at_zero([&](Real t) { return tp.reduced(t); }, 1, h);
  const Real rhs = derivative_at_zero([&](Real s) { return tp.two_point(s); }, 1, h);
  OPESubleading out;
  out.s1 = lhs / rhs;
  out.delta_i = delta_i;
  out.delta_j = delta_j;
  out.delta_k = delta_k;
  out.d = d;
  return out;
}

std::pair<Real, Real> match_s2_s3_experimental(Real delta_i, Real delta_j, Real delta_k, Real d,
                                               const ProbeGeometry& probe) {
  check_match_inputs(delta_i, delta_j, delta_k, d);
  const Vec w = sub(probe.x, probe.x3);
  const Real r = norm(w);
  // two directions: the probe and its reflection across the plane normal to w
  const Vec e1 = unit(probe.direction);
  const Real proj = (e1[0] * w[0] + e1[1] * w[1] + e1[2] * w[2]) / (r * r);
  const Vec e2 = unit({e1[0] - 1.3L * proj * w[0], e1[1] - 1.3L * proj * w[1], e1[2] - 1.3L * proj * w[2]});
  // Laplacian of |w|^{-2 Dk} in d dimensions
  const Real lap = 2 * delta_k * (2 * delta_k + 2 - d) * std::pow(r, -2 * delta_k - 2);
  Real a[2][2], b[2];
  int row = 0;
  for (const Vec& e : {e1, e2}) {
    const ThreePoint tp{delta_i, delta_j, delta_k, probe.x, probe.x3, e};
    const Real h = 2e-2L * r;
    const Real f2 = derivative_at_zero([&](Real t) { return tp.reduced(t); }, 2, h) / 2;
    const Real dd = derivative_at_zero([&](Real s) { return tp.two_point(s); }, 2, h);
    a[row][0] = dd;
    a[row][1] = lap;
    b[row] = f2;
    ++row;
  }
  const Real det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  if (std::fabs(det) < 1e-12L * std::fabs(a[0][0] * a[1][1])) throw DomainError("degenerate probe directions");
  return {(b[0] * a[1][1] - a[0][1] * b[1]) / det, (a[0][0] * b[1] - b[0] * a[1][0]) / det};
}

}  // namespace crossbound
