#pragma once

// Exclusion of (Delta1, Delta2) under gap assumptions: search for a functional
// alpha over derivatives at the crossing point with alpha[h] < 0 and
// alpha[F] >= 0 on every generator (alpha[V] positive semidefinite for the
// 2x2 even-sector entries of the mixed system).
//
// The continuum of generators is replaced by a grid in Delta per spin plus one
// large-Delta generator per spin. On an active subset the solver asks whether h
// lies in the cone of the generators (a crossing solution with positive
// coefficients); if not, the phase-one duals give a separating alpha.
// Violated grid generators (local minima of the action, or the eigenvector
// direction of a negative 2x2 action) are added as cuts until h is in the cone
// or alpha is nonnegative on every generator.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crossbound/crossing.hpp"

namespace crossbound {

enum class Mode { Single, Multi };
enum class Status { Excluded, NotExcluded, SolverFailure };

const char* mode_name(Mode m);
const char* status_name(Status s);
const char* parity_name(Parity p);
Mode parse_mode(const std::string& s);

struct DiscretizationGrid {
  Real delta_step = 0.02L;
  Real delta_max = 40;
  int spin_max = 20;
  bool asymptotic = true;  // one large-Delta generator per spin

  void validate() const;
  // min_delta, then every multiple of delta_step above it up to delta_max.
  std::vector<Real> points(Real min_delta) const;
};

struct SectorGap {
  Parity parity;
  int spin;
  Real min_delta;
};

struct IsolatedOp {
  Parity parity;
  int spin;
  Real delta;
};

struct GapAssumptions {
  std::vector<SectorGap> sectors;  // overrides; otherwise the unitarity minimum
  std::vector<IsolatedOp> isolated;

  Real continuum_start(Parity p, int spin, Real d) const;
  void validate(Real d, const DiscretizationGrid& grid) const;

  // Two relevant scalars: the odd external at delta1 (mixed system only) and
  // the even scalar at delta2; every other operator at or above `irrelevant`
  // (default d) or its unitarity bound, whichever is larger.
  static GapAssumptions standard(Mode mode, Real delta1, Real delta2, Real d = 3, int spin_max = 20,
                                 Real irrelevant = -1);
};

struct SolverOptions {
  Real d = 3;
  CrossingPoint point{0.25L, 0.25L};
  int series_order = kDefaultSeriesOrder;
  Real margin = 1e-12L;  // actions below -margin are violations
  int max_rounds = 400;
  long max_iterations = 400000;
  int precision_bits = 64;  // precision of the built-in certificate re-check
  Real check_epsilon = 1e-10L;
  double time_limit = 0;  // seconds of cut generation, 0 for none
};

struct Functional {
  Mode mode = Mode::Single;
  Real d = 3;
  int lambda_order = 0;
  CrossingPoint point;
  int series_order = kDefaultSeriesOrder;
  Real delta1 = 0, delta2 = 0;
  DiscretizationGrid grid;
  GapAssumptions gaps;
  std::string normalization = "alpha[h]=-1";
  // per crossing component: (m, n) -> coefficient of d_u^m d_v^n
  std::vector<std::map<std::pair<int, int>, Real>> coeffs;

  bool nonzero() const;
  int components() const { return int(coeffs.size()); }
};

void save_certificate(const Functional& f, std::ostream& os);
Functional load_certificate(std::istream& is);
void save_certificate(const Functional& f, const std::string& path);
Functional load_certificate_file(const std::string& path);

struct Diagnostics {
  Real min_action = 0;  // normalized minimum over the generator grid
  Real alpha_h = 0;     // normalized alpha[h]
  Real residual = 0;    // phase-one residual on the final active set
  long generators = 0;
  long active = 0;
  int rounds = 0;
  long iterations = 0;
  int rows = 0;
  Real delta_step = 0, delta_max = 0;
  int spin_max = 0;
  std::string note;
};

struct Verdict {
  Status status = Status::NotExcluded;
  std::optional<Functional> certificate;
  Diagnostics diagnostics;
};

Verdict exclude_single(Real delta1, Real delta2, const GapAssumptions& gaps, int lambda,
                       const DiscretizationGrid& grid, const SolverOptions& opt = {});
Verdict exclude_multi(Real delta1, Real delta2, const GapAssumptions& gaps, int lambda,
                      const DiscretizationGrid& grid, const SolverOptions& opt = {});
Verdict exclude(Mode mode, Real delta1, Real delta2, const GapAssumptions& gaps, int lambda,
                const DiscretizationGrid& grid, const SolverOptions& opt = {});

struct CheckOptions {
  int precision_bits = 113;
  Real epsilon = 1e-10L;
};

struct CheckReport {
  bool passed = false;
  Real min_action = 0;
  Real alpha_h = 0;
  long generators = 0;
  std::string reason;
};

// Rebuilds the generator grid recorded in the certificate at the requested
// precision and checks all signs: normalized alpha[h] <= -epsilon and every
// normalized action >= -epsilon (smallest eigenvalue for 2x2 entries).
CheckReport certificate_check(const Functional& cert, const CheckOptions& opt = {});

// Explicit single-correlator vectors; actions normalized by sum |alpha_i v_i|.
bool certificate_check(const Functional& cert, const std::vector<CrossingVector>& generators,
                       const CrossingVector& h, Real epsilon = 1e-10L);

// Normalized action of the certificate on one exchanged operator.
Real functional_action(const Functional& cert, Parity parity, int spin, Real delta);

// Sign changes of the action in [lo, hi] on the certificate's grid step,
// refined by bisection to 1e-6.
std::vector<Real> extremal_zeros(const Functional& cert, Parity parity, int spin, Real lo, Real hi);

void clear_block_cache();

}  // namespace crossbound
