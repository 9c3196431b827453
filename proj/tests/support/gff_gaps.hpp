#pragma once

#include <algorithm>

#include "crossbound/feasibility.hpp"

namespace fixture {

// Mixed-system gaps compatible with the free field: sigma^4 (even) and
// sigma^3 (odd) are scalars below 3.
inline crossbound::GapAssumptions gff_multi_gaps(crossbound::Real ds) {
  using namespace crossbound;
  GapAssumptions g = GapAssumptions::standard(Mode::Multi, ds, 2 * ds);
  for (auto& s : g.sectors) {
    if (s.spin != 0) continue;
    s.min_delta = s.parity == Parity::Even ? std::min(4 * ds, 2 * ds + 2) : 3 * ds;
  }
  return g;
}

}  // namespace fixture
