#pragma once

#include <map>
#include <optional>
#include <utility>

#include "perfshift/metrics.hpp"
#include "perfshift/policy.hpp"
#include "perfshift/population.hpp"
#include "perfshift/predictor.hpp"

namespace perfshift::oracle {

/// Everything the exact path needs: the cell distribution, the active
/// treatment policy, and the per-cell prediction. The policy and prediction
/// map must be total on the cells; `make` validates this.
struct Context {
  CellTable cells;
  DecisionPolicy policy;
  std::map<CellKey, int> rmap;

  static Context make(CellTable cells, DecisionPolicy policy, const Predictor& pred);
  static Context make(CellTable cells, DecisionPolicy policy, std::map<CellKey, int> rmap);
};

/// Outcome rate of a cell under the active policy:
/// (1 - pi) * mu0 + pi * mu1. With the baseline policy this is the
/// pre-deployment outcome rate; any change in pi moves it, which is exactly
/// the concept shift the exact path quantifies.
double cell_outcome_rate(const Context& ctx, const Cell& cell);

/// Outcome rate conditional on covariate values: the mass-weighted average
/// of cell_outcome_rate over cells consistent with (a, x1[, x2bin]). Throws
/// std::domain_error when the conditioning event has zero mass.
double conditional_outcome(const Context& ctx, int a, int x1,
                           std::optional<int> x2bin = std::nullopt);

/// P(r = 1 | group). Depends on the cell distribution and the prediction
/// map only, never on the policy, so it is identical at every time point.
double prediction_rate(const Context& ctx, int a);

/// (ppv, npv) for the group; a component is empty when its conditioning
/// stratum (predicted positive / predicted negative) has zero mass.
std::pair<MetricValue, MetricValue> predictive_values(const Context& ctx, int a);

/// (fpr, fnr) for the group; empty components when the outcome-negative /
/// outcome-positive mass is zero.
std::pair<MetricValue, MetricValue> error_rates(const Context& ctx, int a);

/// Mass-weighted agreement rate of prediction and outcome for the group.
double accuracy(const Context& ctx, int a);

/// All six metrics against the realized outcome distribution.
GroupMetrics observable_metrics(const Context& ctx, int a);

/// All six metrics against the untreated potential outcome: every formula
/// evaluated with mu0 in place of the policy-dependent outcome rate. The
/// result does not depend on ctx.policy at all.
GroupMetrics counterfactual_metrics(const Context& ctx, int a);

}  // namespace perfshift::oracle
