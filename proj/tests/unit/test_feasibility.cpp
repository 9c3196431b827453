#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crossbound/feasibility.hpp"
#include "support/gff_gaps.hpp"

using namespace crossbound;

namespace {

constexpr Real kIsingS = 0.5181489L, kIsingE = 1.412625L;

const Functional& excluded_certificate() {
  static const Functional cert = [] {
    DiscretizationGrid grid;
    auto v = exclude_single(0.518L, 2.9L, GapAssumptions::standard(Mode::Single, 0.518L, 2.9L), 11, grid);
    REQUIRE(v.status == Status::Excluded);
    REQUIRE(v.certificate);
    return *v.certificate;
  }();
  return cert;
}

std::string saved(const Functional& f) {
  std::ostringstream os;
  save_certificate(f, os);
  return os.str();
}

}  // namespace

TEST_CASE("grid points are anchored at multiples of the step") {
  DiscretizationGrid g;
  g.delta_step = 0.25L;
  g.delta_max = 2;
  auto p = g.points(0.6L);
  REQUIRE(p.size() == 7);
  CHECK(p[0] == 0.6L);
  CHECK(p[1] == 0.75L);
  CHECK(p.back() == 2);
  // a higher start gives a subset of the lower one
  auto q = g.points(1.1L);
  for (std::size_t k = 1; k < q.size(); ++k) CHECK(std::find(p.begin(), p.end(), q[k]) != p.end());
  CHECK(g.points(3).empty());
  DiscretizationGrid bad;
  bad.delta_step = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.spin_max = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("standard gap assumptions") {
  auto s = GapAssumptions::standard(Mode::Single, kIsingS, kIsingE);
  REQUIRE(s.isolated.size() == 1);
  CHECK(s.isolated[0].delta == kIsingE);
  CHECK(s.continuum_start(Parity::Even, 0, 3) == 3);
  // spin l unitarity in d = 3 is l + 1
  CHECK(s.continuum_start(Parity::Even, 2, 3) == 3);
  CHECK(s.continuum_start(Parity::Even, 4, 3) == 5);
  auto m = GapAssumptions::standard(Mode::Multi, kIsingS, kIsingE);
  CHECK(m.isolated.size() == 2);
  CHECK(m.continuum_start(Parity::Odd, 1, 3) == 3);
  CHECK(m.continuum_start(Parity::Odd, 3, 3) == 4);

  DiscretizationGrid grid;
  GapAssumptions bad = s;
  bad.isolated[0].delta = 3.5L;  // above the continuum start
  CHECK_THROWS_AS(bad.validate(3, grid), DomainError);
  bad = s;
  bad.sectors[1].min_delta = 2.5L;  // spin 2 below unitarity
  CHECK_THROWS_AS(bad.validate(3, grid), DomainError);
  CHECK_NOTHROW(s.validate(3, grid));
}

TEST_CASE("domain errors") {
  DiscretizationGrid grid;
  CHECK_THROWS_AS(exclude_single(0.4L, 1.4L, GapAssumptions::standard(Mode::Single, 0.4L, 1.4L), 5, grid),
                  DomainError);
  CHECK_THROWS_AS(exclude_single(0.518L, 3.2L, GapAssumptions::standard(Mode::Single, 0.518L, 3.2L), 5, grid),
                  DomainError);
  CHECK_THROWS_AS(exclude_single(0.518L, 1.4L, GapAssumptions::standard(Mode::Single, 0.518L, 1.4L), 0, grid),
                  ConfigError);
  SolverOptions opt;
  opt.point = {0.05L, 2.0L};
  CHECK_THROWS_AS(exclude_single(0.518L, 1.4L, GapAssumptions::standard(Mode::Single, 0.518L, 1.4L), 5, grid, opt),
                  DomainError);
}

TEST_CASE("Ising point is allowed in both modes at low order") {
  DiscretizationGrid grid;
  for (Mode mode : {Mode::Single, Mode::Multi}) {
    auto v = exclude(mode, kIsingS, kIsingE, GapAssumptions::standard(mode, kIsingS, kIsingE), 5, grid);
    INFO(mode_name(mode));
    CHECK(v.status == Status::NotExcluded);
    CHECK(!v.certificate);
  }
}

TEST_CASE("free-field points are allowed") {
  DiscretizationGrid grid;
  for (Real ds : {0.52L, 0.6L}) {
    auto v = exclude_single(ds, 2 * ds, GapAssumptions::standard(Mode::Single, ds, 2 * ds), 7, grid);
    CHECK(v.status == Status::NotExcluded);
  }
  auto m = exclude_multi(0.55L, 1.1L, fixture::gff_multi_gaps(0.55L), 5, grid);
  CHECK(m.status == Status::NotExcluded);
}

TEST_CASE("a point far above the bound is excluded with a valid certificate") {
  const Functional& cert = excluded_certificate();
  CHECK(cert.mode == Mode::Single);
  CHECK(cert.lambda_order == 11);
  CHECK(cert.components() == 1);
  CHECK(cert.nonzero());
  // only independent antisymmetric derivatives m > n, m + n odd or even
  for (const auto& [mn, v] : cert.coeffs[0]) CHECK(mn.first > mn.second);

  auto quad = certificate_check(cert);
  CHECK(quad.passed);
  CHECK(quad.alpha_h < -1e-10L);
  CHECK(quad.min_action >= -1e-10L);
  CheckOptions lo;
  lo.precision_bits = 64;
  auto real = certificate_check(cert, lo);
  CHECK(real.passed);
  CHECK(real.generators == quad.generators);
}

TEST_CASE("certificate files round-trip bit-exactly") {
  const Functional& cert = excluded_certificate();
  const std::string text = saved(cert);
  std::istringstream is(text);
  Functional back = load_certificate(is);
  CHECK(saved(back) == text);
  REQUIRE(back.coeffs.size() == cert.coeffs.size());
  CHECK(back.coeffs[0] == cert.coeffs[0]);
  CHECK(back.delta1 == cert.delta1);
  CHECK(back.delta2 == cert.delta2);
  CHECK(back.grid.delta_step == cert.grid.delta_step);
  CHECK(back.point.u0 == cert.point.u0);

  std::istringstream bad1("crossbound-certificate 1\nmode triple\n");
  CHECK_THROWS_AS(load_certificate(bad1), ConfigError);
  std::istringstream bad2(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(load_certificate(bad2), ConfigError);
  std::istringstream bad3("hello\n");
  CHECK_THROWS_AS(load_certificate(bad3), ConfigError);
}

TEST_CASE("certificate check rejects bad functionals") {
  const Functional& cert = excluded_certificate();

  Functional zero = cert;
  for (auto& [k, v] : zero.coeffs[0]) v = 0;
  auto r0 = certificate_check(zero);
  CHECK(!r0.passed);
  CHECK(r0.reason == "zero functional");

  Functional flipped = cert;
  for (auto& [k, v] : flipped.coeffs[0]) v = -v;
  CHECK(!certificate_check(flipped).passed);

  // the same functional under a weaker gap meets the exchanged operators it
  // was built to exclude
  Functional weaker = cert;
  weaker.gaps.isolated.clear();
  for (auto& s : weaker.gaps.sectors)
    if (s.spin == 0) s.min_delta = 0.52L;
  auto rw = certificate_check(weaker);
  CHECK(!rw.passed);
  INFO(rw.reason);
  CHECK(rw.min_action < -1e-10L);

  // explicit vectors: the first u-derivative alone is positive on h
  const CrossingPoint pt;
  Functional du = cert;
  du.coeffs[0].clear();
  du.coeffs[0][{1, 0}] = 1;
  const CrossingVector h = build_h(0.518L, pt, 11);
  CHECK(h.derivative(1, 0) > 0);
  std::vector<CrossingVector> gens{build_F(0.518L, block_table({3, 3, 0}, pt, 11))};
  CHECK(!certificate_check(du, gens, h));
  du.coeffs[0][{1, 0}] = -1;
  CHECK(certificate_check(du, gens, h) == (-gens[0].derivative(1, 0) >= 0));
}

TEST_CASE("action and extremal zeros of the certificate") {
  const Functional& cert = excluded_certificate();
  // nonnegative across the scalar continuum, negative somewhere below the gap
  for (Real x : {3.0L, 3.5L, 5.0L, 12.0L}) CHECK(functional_action(cert, Parity::Even, 0, x) >= -1e-10L);
  for (Real x : {3.0L, 4.0L, 7.5L}) CHECK(functional_action(cert, Parity::Even, 2, x) >= -1e-10L);
  CHECK(functional_action(cert, Parity::Even, 0, 2.9L) >= -1e-10L);
  auto zeros = extremal_zeros(cert, Parity::Even, 0, 0.6L, 2.9L);
  REQUIRE(!zeros.empty());
  for (Real z : zeros) {
    CHECK(z > 0.6L);
    CHECK(z < 2.9L);
    const Real a = functional_action(cert, Parity::Even, 0, z - 1e-5L);
    const Real b = functional_action(cert, Parity::Even, 0, z + 1e-5L);
    CHECK(a * b <= 0);
  }
  CHECK_THROWS_AS(functional_action(cert, Parity::Odd, 1, 3), DomainError);
  CHECK_THROWS_AS(functional_action(cert, Parity::Even, 1, 3), DomainError);
}

TEST_CASE("exclusion is nested in lambda and monotone in the gap") {
  DiscretizationGrid grid;
  // excluded at low order stays excluded at higher order
  const Real d1 = 0.518L, d2 = 2.0L;
  auto g = GapAssumptions::standard(Mode::Single, d1, d2);
  auto v5 = exclude_single(d1, d2, g, 5, grid);
  auto v7 = exclude_single(d1, d2, g, 7, grid);
  if (v5.status == Status::Excluded) CHECK(v7.status == Status::Excluded);
  CHECK(v7.status == Status::Excluded);
  // a stronger gap excludes at least as much
  auto strong = GapAssumptions::standard(Mode::Single, d1, d2, 3, 20, 3.5L);
  CHECK(exclude_single(d1, d2, strong, 7, grid).status == Status::Excluded);
  // the allowed Ising point stays allowed under a weaker gap
  auto weak = GapAssumptions::standard(Mode::Single, kIsingS, kIsingE, 3, 20, 2.5L);
  CHECK(exclude_single(kIsingS, kIsingE, weak, 7, grid).status == Status::NotExcluded);
}
