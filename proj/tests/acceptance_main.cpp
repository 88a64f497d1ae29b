// Dedicated acceptance runner: one PASS/FAIL line per criterion, nonzero
// exit on any failure. The same suite backs the `verify` CLI subcommand.

#include <iostream>

#include "perfshift/verify.hpp"

int main() {
  const int failures = perfshift::verify::run_all(std::cout, {/*threads=*/2});
  return failures == 0 ? 0 : 1;
}
