#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"
#include "perfshift/population.hpp"
#include "perfshift/predictor.hpp"
#include "perfshift/rng.hpp"

namespace perfshift {

/// Multiplies the odds of p by k: p -> k p / (1 - p + k p).
///
/// Fixed points 0 and 1 are preserved for every k, and k = 1 returns p
/// bit-exactly. Throws std::domain_error for k <= 0 or p outside [0, 1].
double odds_multiply(double p, double k);

/// Treatment propensity over cells at one time point. Immutable once built;
/// carries the x2 partition point of the table it was derived from so that
/// sampled individuals can be routed to their cell.
class DecisionPolicy {
 public:
  DecisionPolicy() = default;
  DecisionPolicy(const std::map<CellKey, double>& propensity, std::optional<double> x2_split);

  /// Propensity for a cell; throws std::domain_error for uncovered cells.
  double at(const CellKey& key) const;

  /// Sorted (key, propensity) entries.
  const std::vector<std::pair<CellKey, double>>& entries() const { return entries_; }
  std::optional<double> x2_split() const { return x2_split_; }

  CellKey cell_of(const Individual& ind) const;

  /// Throws std::domain_error if some cell of the table is uncovered.
  void require_covers(const CellTable& cells) const;

  friend bool operator==(const DecisionPolicy&, const DecisionPolicy&) = default;

 private:
  std::vector<std::pair<CellKey, double>> entries_;
  std::optional<double> x2_split_;
};

/// Which (group, prediction) stratum gets its treatment odds rescaled.
struct Intervention {
  std::optional<int> select_a;
  std::optional<int> select_r;
  double odds_factor = 1.0;

  /// odds_factor > 0 and at least one selector set.
  void validate() const;
  bool matches(const Cell& cell, int r) const;

  static Intervention from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Policy equal to each cell's baseline propensity.
DecisionPolicy baseline_policy(const CellTable& cells);

/// Applies the intervention: cells in the selected (a, r) stratum get their
/// propensity odds-multiplied, all other cells are copied unchanged. The
/// predictor must be constant per cell (checked via partition_on).
DecisionPolicy intervene(const DecisionPolicy& base, const Intervention& iv,
                         const Predictor& pred, const CellTable& cells);

/// Bernoulli realization of the individual's cell propensity. Pure in the
/// draw key; decisions depend on the cell only, never on potential outcomes.
int decide(const DecisionPolicy& policy, const Individual& ind, const rng::DrawKey& key);

}  // namespace perfshift
