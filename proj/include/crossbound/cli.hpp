#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "crossbound/config.hpp"

namespace crossbound::cli {

extern const char* const kVersion;

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kConfig = 3,
  kDomain = 4,
  kSolver = 5,
};

// Each command prints a report to `out`. Errors propagate as exceptions;
// run() maps them to exit codes.
int cmd_exclude(const RunConfig& cfg, Real delta1, Real delta2, std::ostream& out);
int cmd_scan(const RunConfig& cfg, std::ostream& out);
int cmd_dataset_check(const RunConfig& cfg, const std::string& path, std::ostream& out);
int cmd_exponents(Real delta_sigma, Real delta_epsilon, std::optional<Real> delta3, Real d, std::ostream& out);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace crossbound::cli
