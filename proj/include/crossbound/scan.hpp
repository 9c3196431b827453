#pragma once

// (Delta1, Delta2)-plane scans, upper-bound bisection in Delta2 and the
// conversion of dimensions to critical exponents.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "crossbound/feasibility.hpp"

namespace crossbound {

struct Range {
  Real lo = 0, hi = 0, step = 0;
  // lo + k step for k = 0, 1, ... while <= hi, each rounded to 12 digits so
  // that printed nodes are exactly the evaluated ones. Empty when hi < lo.
  std::vector<Real> values() const;
};

struct ScanSettings {
  Mode mode = Mode::Single;
  int lambda = 11;
  DiscretizationGrid grid;
  SolverOptions solver;
  Real irrelevant = -1;  // gap template, see GapAssumptions::standard
  int workers = 1;
  std::uint64_t seed = 1;
  bool record_time = false;  // wall time in the CSV; off keeps files byte-stable
  std::string certificate_dir;  // excluded nodes save certificates here if set

  GapAssumptions gaps(Real delta1, Real delta2) const;
  void validate() const;
};

struct ScanGrid {
  Range delta1, delta2;
  ScanSettings settings;

  void validate() const;
  // delta1 outer, delta2 inner
  std::vector<std::pair<Real, Real>> nodes() const;
};

struct ScanRow {
  Real delta1 = 0, delta2 = 0;
  Status status = Status::NotExcluded;
  int lambda = 0;
  Real grid_step = 0;
  long time_ms = 0;
  std::string certificate;  // path, when one was written
  std::string note;
};

struct ExclusionMap {
  std::vector<ScanRow> rows;
};

// Evaluates every node not already in `done` (matched on printed delta1,
// delta2, lambda and grid_step). Solver failures are recorded per node.
// `on_row` sees each fresh row once, serialized, in completion order.
ExclusionMap scan_plane(const ScanGrid& grid, const std::vector<ScanRow>& done = {},
                        const std::function<void(const ScanRow&)>& on_row = {});

ScanRow evaluate_node(Real delta1, Real delta2, const ScanSettings& s);

extern const char* const kScanHeader;
void write_scan_csv(const ExclusionMap& map, std::ostream& os);
std::string scan_csv_line(const ScanRow& r);
// Throws ConfigError naming the line on a malformed file.
std::vector<ScanRow> read_scan_csv(std::istream& is);
// gnuplot script plotting excluded and allowed nodes of `csv_path`.
void write_plot_script(const std::string& csv_path, std::ostream& os);

struct ScanRun {
  ExclusionMap map;
  long reused = 0, computed = 0;
  std::string plot_path;
};

// Resumable scan into a CSV file: rows already present are kept, fresh rows are
// appended as they finish, and the file is finally rewritten in node order.
// The plot script goes next to it with a .gp suffix.
ScanRun run_scan(const ScanGrid& grid, const std::string& csv_path);

struct BisectSettings {
  ScanSettings scan;
  Real tol = 1e-4L;
  // Known allowed start. By default the search steps down from hi by
  // descent_step until a node is not excluded, then bisects above it.
  Real lo = -1;
  Real hi = -1;  // default: d
  Real descent_step = 0.05L;
  int spot_checks = 3;
  Real column_step = 0.05L;  // used when a spot check fails
};

struct BisectResult {
  Real bound = 0;     // largest Delta2 found not excluded
  Real excluded = 0;  // smallest Delta2 found excluded, bound + tol at most
  bool no_exclusion = false;  // nothing excluded up to hi; bound = hi
  bool all_excluded = false;  // no allowed start found; bound = lowest node tried
  bool monotone = true;       // every spot check above the bound excluded
  bool downgraded = false;    // bound read off a full column instead
  std::vector<ScanRow> probes;  // every evaluation, in order
  std::vector<ScanRow> column;
};

// Upper edge of the allowed Delta2 set at fixed Delta1, by bisection between an
// allowed and an excluded node. The allowed set need not be an interval: with
// a gap on the second scalar, pieces near the free-field line and below the
// upper edge can be separated by excluded values, so the default start is the
// highest allowed node of a downward coarse scan. An allowed piece narrower
// than descent_step can be missed. A solver failure counts as not excluded.
BisectResult bound_bisect(Real delta1, const BisectSettings& settings);

struct Exponents {
  Real eta = 0, nu = 0;
  std::optional<Real> omega;
};

struct Dimensions {
  Real delta_sigma = 0, delta_epsilon = 0;
  std::optional<Real> delta3;
};

// eta = 2 Delta_sigma - (d - 2), nu = 1 / (d - Delta_epsilon), omega = Delta_3 - d.
Exponents to_exponents(Real delta_sigma, Real delta_epsilon, std::optional<Real> delta3 = {}, Real d = 3);
Dimensions from_exponents(const Exponents& e, Real d = 3);

}  // namespace crossbound
