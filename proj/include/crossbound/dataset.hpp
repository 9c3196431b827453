#pragma once

// Explicit trial CFT data {Delta_i, lambda_ijk}: loading, the OPE growth
// condition, block reconstruction of scalar four-point functions, crossing
// residuals, and numeric matching of subleading OPE coefficients.

#include <array>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crossbound/crossing.hpp"

namespace crossbound {

struct Field {
  int index = 0;
  Real delta = 0;
  int spin = 0;
  Parity parity = Parity::Even;
};

// Index 0 is the unit field (Delta = 0, lambda_ij0 = delta_ij), always present.
// lambda is stored once per unordered triple. For a spinning field m the stored
// value is lambda_ijm with i <= j; swapping i and j gives (-1)^spin.
class CFTDataset {
 public:
  explicit CFTDataset(Real d = 3);

  Real d() const { return d_; }
  void add_field(const Field& f);
  // Rejects a second, different value for the same triple, parity-violating
  // couplings, lambda_ij0 != delta_ij and odd-spin exchange between equal fields.
  void set_ope(int i, int j, int k, Real lambda);

  bool has_field(int i) const;
  const Field& field(int i) const;
  std::vector<int> indices() const;  // ascending, unit field first
  Real ope(int i, int j, int k) const;
  std::size_t ope_entries() const { return ope_.size(); }

 private:
  Real d_;
  std::map<int, Field> fields_;
  std::map<std::array<int, 3>, Real> ope_;
};

// `field index delta spin parity` lines, then `ope i j k lambda` lines; '#'
// starts a comment. Errors name the line.
CFTDataset load_dataset(std::istream& is, Real d = 3);
CFTDataset load_dataset_file(const std::string& path, Real d = 3);
void save_dataset(const CFTDataset& ds, std::ostream& os);

// Infinite family k = 0, 1, ...: Delta_k = a + b k with lambda^2 given by
// lambda_sq(k, Delta_k).
struct TailRule {
  Real a = 0, b = 0;
  std::function<Real(long, Real)> lambda_sq;
};

struct GrowthReport {
  bool converges = true;
  std::vector<Real> partial_sums;  // per rho sample, finite part plus tail terms summed
  Real tail_ratio = 0;             // asymptotic term ratio of the dominating series
};

// sum_k (4 rho)^{Delta_k} lambda_ijk^2 for each rho in (0, 1).
GrowthReport growth_check(const CFTDataset& ds, int i, int j, const std::vector<Real>& rho_samples,
                          const std::optional<TailRule>& tail = std::nullopt);

struct Reconstruction {
  Real value = 0;
  int terms = 0;
  bool truncated = false;  // a coupled field above the truncation was dropped
};

// g_ijkl(u, v) = sum_m lambda_ijm lambda_klm G_m(u, v) over Delta_m <= truncation.
Reconstruction reconstruct_4pt(const CFTDataset& ds, int i, int j, int k, int l, Real u, Real v, Real truncation,
                               int series_order = kDefaultSeriesOrder);

// max over points of |u^{-(Di+Dj)/2} g_ijkl(u,v) - v^{-(Dk+Dj)/2} g_kjil(v,u)|.
Real crossing_residual(const CFTDataset& ds, int i, int j, int k, int l, const std::vector<CrossingPoint>& points,
                       Real truncation, int series_order = kDefaultSeriesOrder);

// Positions for matching the three-point function against its OPE at
// x1 = x, x2 = x + t e. The direction must not be orthogonal to x - x3.
struct ProbeGeometry {
  std::array<Real, 3> x{0, 0, 0};
  std::array<Real, 3> x3{1.3L, -0.4L, 0.7L};
  std::array<Real, 3> direction{0.6L, 0.48L, -0.64L};
};

struct OPESubleading {
  Real s1 = 0;
  Real delta_i = 0, delta_j = 0, delta_k = 0, d = 3;
};

OPESubleading match_s1(Real delta_i, Real delta_j, Real delta_k, Real d = 3, const ProbeGeometry& probe = {});

// Experimental: second-order coefficients (s2 of u.u d d, s3 of u^2 Laplacian)
// from two probe directions, with the Laplacian taken in d dimensions.
std::pair<Real, Real> match_s2_s3_experimental(Real delta_i, Real delta_j, Real delta_k, Real d = 3,
                                               const ProbeGeometry& probe = {});

}  // namespace crossbound
