#pragma once

// Run configuration: flat `key = value` text in [sections], '#' comments.
//
//   [run]     d lambda mode workers seed precision_bits
//   [point]   u v
//   [grid]    delta_step delta_max spin_max asymptotic
//   [solver]  series_order margin max_rounds max_iterations check_epsilon time_limit
//   [gaps]    irrelevant
//   [scan]    delta1_min delta1_max delta1_step delta2_min delta2_max delta2_step
//             output certificate_dir record_time
//   [exclude] certificate
//   [dataset] truncation rho points correlators
//
// Lists: rho = 0.1, 0.5, 0.9   points = 0.25 0.25; 0.2 0.3   correlators = 1 1 1 1; 1 1 2 2

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "crossbound/scan.hpp"

namespace crossbound {

struct RunConfig {
  Real d = 3;
  int lambda = 11;
  Mode mode = Mode::Single;
  CrossingPoint point{0.25L, 0.25L};
  DiscretizationGrid grid;
  int precision_bits = 113;  // certificate re-check: 64 or 113
  int workers = 1;
  std::uint64_t seed = 1;

  int series_order = kDefaultSeriesOrder;
  Real margin = 1e-12L;
  int max_rounds = 400;
  long max_iterations = 400000;
  Real check_epsilon = 1e-10L;
  double time_limit = 0;

  Real irrelevant = -1;

  Range delta1{0.5L, 0.7L, 0.05L};
  Range delta2{1, 3, 0.25L};
  std::string output = "scan.csv";
  std::string certificate_dir;
  bool record_time = false;

  std::string certificate;  // exclude: output path, derived from the point if empty

  Real truncation = 14;
  std::vector<Real> rho{0.1L, 0.5L, 0.9L};
  std::vector<CrossingPoint> points{{0.25L, 0.25L}, {0.22L, 0.28L}, {0.28L, 0.22L}, {0.2L, 0.3L}};
  std::vector<std::array<int, 4>> correlators;  // empty: every scalar <iiii>

  // `key` is section.name. Throws ConfigError on unknown keys and bad values.
  void set(const std::string& key, const std::string& value);
  void validate() const;

  SolverOptions solver() const;
  ScanSettings scan_settings() const;
  ScanGrid scan_grid() const;
};

std::vector<std::string> config_keys();

// Applies a config text on top of `cfg`. Errors name the line.
void read_config(std::istream& is, RunConfig& cfg, const std::string& name = "config");
void read_config_file(const std::string& path, RunConfig& cfg);

// Inverse of read_config, every key written.
void write_config(const RunConfig& cfg, std::ostream& os);

}  // namespace crossbound
