#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace perfshift {

/// Standard normal CDF, computed through the complementary error function
/// (absolute error well below 1e-12; no tabulated constants).
double normal_cdf(double x);

/// Identity of a deconfounding cell: group label, binary covariate, and the
/// binary partition of the continuous covariate.
struct CellKey {
  int a = 0;
  int x1 = 0;
  int x2bin = 0;
  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

std::string to_string(const CellKey& key);

/// One cell of the finite joint distribution over the deconfounding
/// variables, together with its outcome regressions and baseline propensity.
struct Cell {
  int a = 0;
  int x1 = 0;
  int x2bin = 0;
  double mass = 0.0;    ///< cell probability
  double mu0 = 0.0;     ///< outcome rate if untreated
  double mu1 = 0.0;     ///< outcome rate if treated
  double pi_pre = 0.0;  ///< baseline treatment propensity

  CellKey key() const { return {a, x1, x2bin}; }
};

/// Finite cell distribution. Construction validates that masses sum to 1
/// within 1e-12, that all cell probabilities lie in [0, 1], and that keys are
/// unique; cells are kept sorted by key.
class CellTable {
 public:
  CellTable() = default;
  explicit CellTable(std::vector<Cell> cells,
                     std::optional<double> x2_split = std::nullopt);

  const std::vector<Cell>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  /// Partition point defining x2bin, when known. Tables loaded from raw CSV
  /// carry none, which restricts them to the exact evaluation path.
  std::optional<double> x2_split() const { return x2_split_; }

  const Cell* find(const CellKey& key) const;
  const Cell& at(const CellKey& key) const;        // throws std::domain_error
  std::size_t index_of(const CellKey& key) const;  // throws std::domain_error

  /// CSV with header `a,x1,x2bin,mass,mu0,mu1,pi_pre`.
  static CellTable from_csv(const std::string& path);
  static CellTable from_csv(std::istream& in);
  void to_csv(std::ostream& out) const;

 private:
  std::vector<Cell> cells_;
  std::optional<double> x2_split_;
};

/// Parameters of the example data-generating process. Defaults reproduce the
/// bundled scenarios.
struct PopulationSpec {
  double p_a = 0.5;
  std::array<double, 2> p_x1_given_a{0.8, 0.6};  ///< P(x1=1 | a), indexed by a
  double x2_threshold = 0.5;
  std::array<double, 2> outcome_base{0.3, 0.8};  ///< untreated outcome rate per x1
  double treatment_odds_factor = 10.0;           ///< odds multiplier mu0 -> mu1
  std::array<double, 2> pi_pre_base{0.3, 0.8};   ///< baseline propensity per x1

  /// Throws ValidationError naming the offending field.
  void validate() const;

  static PopulationSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// One sampled unit. Both potential outcomes are carried; `d` and `y` stay -1
/// until a decision is applied via observe().
struct Individual {
  int a = 0;
  int x1 = 0;
  double x2 = 0.0;
  int y0 = 0;
  int y1 = 0;
  int d = -1;
  int y = -1;

  bool observed() const { return d >= 0; }
};

/// Expands a population spec into its 8 cells (2x2x2 over a, x1, x2bin).
CellTable build_example_population(const PopulationSpec& spec);

/// n i.i.d. draws from the population spec, without decisions. Deterministic
/// in (spec, n, seed); element i depends only on (seed, i).
std::vector<Individual> sample_individuals(const PopulationSpec& spec,
                                           std::size_t n, std::uint64_t seed);

/// Applies decision d and sets the observed outcome y = (1-d) y0 + d y1.
Individual observe(Individual ind, int d);

/// Cell the individual falls in, given the x2 partition point.
CellKey cell_key_of(const Individual& ind, double x2_split);

}  // namespace perfshift
