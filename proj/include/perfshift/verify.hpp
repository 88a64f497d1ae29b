#pragma once

#include <iosfwd>

namespace perfshift::verify {

struct Options {
  int threads = 1;
};

/// Runs the full invariant suite against the bundled scenarios, printing one
/// PASS/FAIL line per criterion. Returns the number of failed criteria.
///
/// Expected values are recomputed here through a reference path that
/// materializes the joint distribution over (cell, decision, potential
/// outcomes) and sums it directly, independent of the closed-form oracle it
/// checks.
int run_all(std::ostream& out, const Options& opts = {});

}  // namespace perfshift::verify
