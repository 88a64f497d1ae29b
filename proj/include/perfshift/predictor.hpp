#pragma once

#include <array>
#include <map>
#include <span>

#include "json.hpp"
#include "perfshift/population.hpp"

namespace perfshift {

enum class PredictorKind { plugin_table, x2_threshold };

/// Covariates a plug-in table is keyed on. An empty set means a single
/// global stratum (constant predictor).
struct FeatureSet {
  bool use_a = false;
  bool use_x1 = false;

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

/// Deterministic binary classifier over (a, x1, x2).
///
/// Two kinds are supported: a plug-in lookup table over {a, x1} strata, and a
/// threshold rule 1{x2 >= threshold}. Both are constant on any cell grid
/// whose partition point matches, which is what the exact evaluation path
/// requires.
class Predictor {
 public:
  /// Defaults to the threshold rule 1{x2 >= 0}.
  Predictor() = default;

  static Predictor make_threshold(double threshold);
  /// `table` maps (a, x1) strata to predictions; coordinates of unused
  /// features must be 0. The table must be total on the used strata.
  static Predictor make_plugin(FeatureSet features, const std::map<std::pair<int, int>, int>& table);

  PredictorKind kind() const { return kind_; }
  double threshold() const;
  FeatureSet features() const;

  int predict(int a, int x1, double x2) const;
  int predict(const Individual& ind) const;

  /// Per-cell constant prediction. Throws PartitionMismatchError if the
  /// predictor is not measurable with respect to the cell grid.
  std::map<CellKey, int> partition_on(const CellTable& cells) const;

  nlohmann::json to_json() const;
  static Predictor from_json(const nlohmann::json& j);

 private:
  PredictorKind kind_ = PredictorKind::x2_threshold;
  double threshold_ = 0.0;
  FeatureSet features_;
  std::array<int, 4> table_{};  // indexed by (a << 1) | x1 after masking unused features
};

/// Fits a plug-in table: each stratum predicts 1 iff the empirical mean of
/// the observed outcome reaches `threshold`. All samples must be observed and
/// every stratum nonempty.
Predictor fit_plugin(std::span<const Individual> samples, FeatureSet features, double threshold);

}  // namespace perfshift
