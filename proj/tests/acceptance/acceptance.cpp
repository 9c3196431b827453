// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "crossbound/cli.hpp"
#include "crossbound/dataset.hpp"
#include "support/closed_form.hpp"
#include "support/gff_dataset.hpp"
#include "support/gff_gaps.hpp"

using namespace crossbound;
namespace fs = std::filesystem;

namespace {

constexpr Real kIsingS = 0.5181489L, kIsingE = 1.412625L;
// Lambda = 11 single-correlator bound at delta1 = kIsingS, default grid and
// tolerance, from the reference run.
constexpr Real kFrozenBound = 1.4134765625L;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string g6(Real x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6Lg", x);
  return b;
}

Outcome ac1() {
  const Exponents e = to_exponents(kIsingS, kIsingE, 3.82968L, 3);
  const bool ok = std::round(e.nu * 1e6L) == 629971 && std::round(e.eta * 1e6L) == 36298 && e.omega &&
                  std::round(*e.omega * 1e5L) == 82968;
  return {ok, "nu " + fmt12(e.nu) + " eta " + fmt12(e.eta) + " omega " + fmt12(e.omega.value_or(0))};
}

Outcome ac2() {
  Outcome o;
  DiscretizationGrid grid;
  int allowed = 0;
  for (Mode mode : {Mode::Single, Mode::Multi})
    for (int L : {5, 7, 9, 11}) {
      auto v = exclude(mode, kIsingS, kIsingE, GapAssumptions::standard(mode, kIsingS, kIsingE), L, grid);
      if (v.status == Status::NotExcluded) ++allowed;
      else {
        o.pass = false;
        o.detail += std::string(mode_name(mode)) + " L=" + std::to_string(L) + " " + status_name(v.status) + "; ";
      }
    }
  o.detail += std::to_string(allowed) + "/8 not excluded";
  return o;
}

Outcome ac3() {
  Outcome o;
  DiscretizationGrid grid;
  int allowed = 0, total = 0;
  for (Real ds : {0.52L, 0.55L, 0.60L, 0.65L})
    for (int L : {5, 7, 9, 11}) {
      auto s = exclude_single(ds, 2 * ds, GapAssumptions::standard(Mode::Single, ds, 2 * ds), L, grid);
      auto m = exclude_multi(ds, 2 * ds, fixture::gff_multi_gaps(ds), L, grid);
      total += 2;
      for (const auto* v : {&s, &m}) {
        if (v->status == Status::NotExcluded) ++allowed;
        else {
          o.pass = false;
          o.detail += g6(ds) + " L=" + std::to_string(L) + " " + status_name(v->status) + "; ";
        }
      }
    }
  const std::vector<CrossingPoint> pts{{0.25L, 0.25L}, {0.22L, 0.28L}, {0.28L, 0.22L}, {0.2L, 0.3L}};
  Real worst = 0;
  for (Real ds : {0.52L, 0.55L, 0.60L, 0.65L})
    worst = std::max(worst, crossing_residual(fixture::gff_dataset(ds, 3, 14), 1, 1, 1, 1, pts, 14));
  if (!(worst < 1e-5L)) o.pass = false;
  o.detail += std::to_string(allowed) + "/" + std::to_string(total) + " not excluded, GFF residual " + fmt12(worst);
  return o;
}

Outcome ac4() {
  Outcome o;
  BisectSettings bs;
  bs.scan.lambda = 11;
  const BisectResult r = bound_bisect(kIsingS, bs);
  o.pass = r.bound >= kIsingE && r.bound < 3 && std::fabs(r.bound - kFrozenBound) < 1e-9L && !r.all_excluded &&
           !r.no_exclusion;
  o.detail = "bound " + fmt12(r.bound) + " (frozen " + fmt12(kFrozenBound) + ")";
  const Real above = r.bound + 0.01L;
  auto v = exclude_single(kIsingS, above, GapAssumptions::standard(Mode::Single, kIsingS, above), 11,
                          DiscretizationGrid{});
  if (v.status != Status::Excluded || !v.certificate) {
    o.pass = false;
    o.detail += ", " + fmt12(above) + " " + status_name(v.status);
    return o;
  }
  const CheckReport c = certificate_check(*v.certificate, CheckOptions{113, 1e-10L});
  o.pass = o.pass && c.passed;
  o.detail += ", certificate at " + fmt12(above) + (c.passed ? " passes" : " fails") + " at 113 bits";
  return o;
}

Outcome ac5() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0, 1);
  Real cas = 0;
  for (int s = 0; s < 50; ++s) {
    const Real d = 2 + 3 * U(rng);
    const int l = int(U(rng) * 12);
    const Real delta = unitarity_min(d, l) + 0.01L + 10 * U(rng);
    const CrossingPoint pt{0.1L + 0.3L * U(rng), 0.1L + 0.3L * U(rng)};
    cas = std::max(cas, casimir_residual({d, delta, l}, pt));
  }
  Real closed = 0;
  for (int s = 0; s < 20; ++s) {
    const Real d = s % 2 ? 4 : 2;
    const int l = int(U(rng) * 7);
    const Real delta = unitarity_min(d, l) + 0.05L + 6 * U(rng);
    const fixture::cplx z(0.3L + 0.2L * U(rng), 0.15L + 0.2L * U(rng)), zb = std::conj(z);
    const Real ref = std::real(d == 2 ? fixture::block_d2(delta, l, 0, 0, z, zb) : fixture::block_d4(delta, l, 0, 0, z, zb));
    const Real got = eval_block({d, delta, l}, {std::real(z * zb), std::real((1.0L - z) * (1.0L - zb))}, 60);
    closed = std::max(closed, std::fabs(got - ref) / std::fabs(ref));
  }
  const bool unit = eval_block({3, 0, 0}, {0.25L, 0.25L}) == 1 && eval_block({2.6L, 0, 0}, {0.1L, 0.7L}) == 1;
  return {cas < 1e-8L && closed < 1e-10L && unit,
          "casimir " + fmt12(cas) + ", closed forms " + fmt12(closed) + ", identity " + (unit ? "1" : "not 1")};
}

Outcome ac6() {
  // implications: excluded at L => excluded at L + 2; excluded under a gap =>
  // excluded under any stronger gap
  const std::vector<Real> pts{kFrozenBound - 0.02L, kFrozenBound - 0.005L, kFrozenBound + 0.005L,
                              kFrozenBound + 0.02L, kFrozenBound + 0.05L};
  const std::vector<Real> gaps{2.8L, 3, 3.2L};
  const std::vector<int> orders{5, 7, 9, 11};
  DiscretizationGrid grid;
  int held = 0, total = 0, straddle_lo = 0, straddle_hi = 0;
  Outcome o;
  for (Real d2 : pts) {
    std::vector<std::vector<bool>> ex(gaps.size(), std::vector<bool>(orders.size()));
    for (std::size_t g = 0; g < gaps.size(); ++g)
      for (std::size_t k = 0; k < orders.size(); ++k)
        ex[g][k] = exclude_single(kIsingS, d2, GapAssumptions::standard(Mode::Single, kIsingS, d2, 3, 20, gaps[g]),
                                  orders[k], grid)
                       .status == Status::Excluded;
    (ex[1][3] ? straddle_hi : straddle_lo)++;
    auto imply = [&](bool a, bool b, const std::string& what) {
      ++total;
      if (!a || b) ++held;
      else {
        o.pass = false;
        o.detail += fmt12(d2) + " " + what + "; ";
      }
    };
    for (std::size_t g = 0; g < gaps.size(); ++g)
      for (std::size_t k = 0; k + 1 < orders.size(); ++k)
        imply(ex[g][k], ex[g][k + 1], "nesting L=" + std::to_string(orders[k]));
    for (std::size_t g = 0; g + 1 < gaps.size(); ++g)
      for (std::size_t k = 0; k < orders.size(); ++k)
        imply(ex[g][k], ex[g + 1][k], "gap " + fmt12(gaps[g]));
  }
  if (!straddle_lo || !straddle_hi) o.pass = false;
  o.detail += std::to_string(held) + "/" + std::to_string(total) + " implications, " + std::to_string(straddle_lo) +
              " allowed and " + std::to_string(straddle_hi) + " excluded at L=11";
  return o;
}

Outcome ac7() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> D(0.5, 4), K(0.3, 6), Dim(2.5, 6);
  Real worst = 0;
  for (int t = 0; t < 10; ++t) {
    const Real dj = D(rng), dk = K(rng), d = Dim(rng);
    worst = std::max(worst, std::fabs(match_s1(dj, dj, dk, d).s1 - 0.5L));
  }
  const Real di = 0.8L, dj = 1.7L, dk = 2.9L;
  const Real ref = match_s1(di, dj, dk).s1;
  std::normal_distribution<double> N(0, 1);
  Real spread = 0;
  for (int t = 0; t < 5;) {
    ProbeGeometry p;
    for (auto& x : p.direction) x = N(rng);
    for (auto& x : p.x3) x = 2 * N(rng);
    const Real c = p.x3[0] * p.direction[0] + p.x3[1] * p.direction[1] + p.x3[2] * p.direction[2];
    if (std::fabs(c) < 0.2L * std::hypot(p.x3[0], p.x3[1], p.x3[2]) *
                           std::hypot(p.direction[0], p.direction[1], p.direction[2]))
      continue;
    spread = std::max(spread, std::fabs(match_s1(di, dj, dk, 3, p).s1 - ref));
    ++t;
  }
  return {worst < 1e-8L && spread < 1e-8L, "equal externals " + fmt12(worst) + ", probe spread " + fmt12(spread)};
}

Outcome ac8() {
  const fs::path dir = fs::temp_directory_path() / "crossbound_acceptance";
  fs::create_directories(dir);
  RunConfig cfg;
  cfg.lambda = 7;
  cfg.delta1 = {0.51L, 0.55L, 0.01L};
  cfg.delta2 = {1.3L, 1.5L, 0.05L};
  auto run = [&](const std::string& name, int workers) {
    const fs::path p = dir / name;
    fs::remove(p);
    RunConfig c = cfg;
    c.output = p.string();
    c.workers = workers;
    std::ostringstream sink;
    cli::cmd_scan(c, sink);
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  const std::string a = run("a.csv", 1), b = run("b.csv", 1), c = run("c.csv", 4);
  const long rows = std::count(a.begin(), a.end(), '\n') - 1;
  return {rows == 25 && a == b && a == c,
          std::to_string(rows) + " rows, rerun " + (a == b ? "identical" : "differs") + ", workers 4 " +
              (a == c ? "identical" : "differs")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"exponent conversion", ac1},  {"Ising point safety", ac2}, {"GFF oracle", ac3},
      {"nontrivial exclusion", ac4}, {"block validity", ac5},     {"monotonicity suite", ac6},
      {"OPE matching", ac7},         {"scan determinism", ac8},
  };
  bool all = true;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), s);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
