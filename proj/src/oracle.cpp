#include "perfshift/oracle.hpp"

#include <functional>

#include "perfshift/errors.hpp"

namespace perfshift::oracle {

Context Context::make(CellTable cells, DecisionPolicy policy, const Predictor& pred) {
  auto rmap = pred.partition_on(cells);
  return make(std::move(cells), std::move(policy), std::move(rmap));
}

Context Context::make(CellTable cells, DecisionPolicy policy, std::map<CellKey, int> rmap) {
  policy.require_covers(cells);
  for (const Cell& c : cells.cells()) {
    auto it = rmap.find(c.key());
    if (it == rmap.end()) {
      throw std::domain_error("prediction map does not cover cell " + to_string(c.key()));
    }
    if (it->second != 0 && it->second != 1) {
      throw ValidationError("prediction for cell " + to_string(c.key()) + " must be 0 or 1");
    }
  }
  return Context{std::move(cells), std::move(policy), std::move(rmap)};
}

double cell_outcome_rate(const Context& ctx, const Cell& cell) {
  const double pi = ctx.policy.at(cell.key());
  return (1.0 - pi) * cell.mu0 + pi * cell.mu1;
}

double conditional_outcome(const Context& ctx, int a, int x1, std::optional<int> x2bin) {
  double mass = 0.0;
  double weighted = 0.0;
  for (const Cell& c : ctx.cells.cells()) {
    if (c.a != a || c.x1 != x1) continue;
    if (x2bin.has_value() && c.x2bin != *x2bin) continue;
    mass += c.mass;
    weighted += c.mass * cell_outcome_rate(ctx, c);
  }
  if (mass <= 0.0) {
    throw std::domain_error("conditional_outcome: zero mass at (a=" + std::to_string(a) +
                            ",x1=" + std::to_string(x1) + ")");
  }
  return weighted / mass;
}

namespace {

/// Shared accumulator for the group-level metric formulas. `outcome` is the
/// per-cell outcome rate the metrics condition on: the policy-dependent rate
/// for the observable variant, mu0 for the counterfactual one.
GroupMetrics metrics_with_outcome(const Context& ctx, int a,
                                  const std::function<double(const Cell&)>& outcome,
                                  bool throw_on_empty_group) {
  double mass = 0.0;       // group mass
  double mass_r1 = 0.0;    // predicted positive
  double num_ppv = 0.0;    // mass * outcome on r=1
  double num_npv = 0.0;    // mass * outcome on r=0
  double mass_out1 = 0.0;  // mass * outcome
  double num_fnr = 0.0;    // mass * outcome on r=0
  double acc = 0.0;
  for (const Cell& c : ctx.cells.cells()) {
    if (c.a != a) continue;
    const int r = ctx.rmap.at(c.key());
    const double g = outcome(c);
    mass += c.mass;
    mass_out1 += c.mass * g;
    acc += c.mass * (r == 1 ? g : 1.0 - g);
    if (r == 1) {
      mass_r1 += c.mass;
      num_ppv += c.mass * g;
    } else {
      num_npv += c.mass * g;
      num_fnr += c.mass * g;
    }
  }
  if (mass <= 0.0) {
    if (throw_on_empty_group) {
      throw std::domain_error("group a=" + std::to_string(a) + " has zero mass");
    }
    return {};
  }
  const double mass_r0 = mass - mass_r1;
  const double mass_out0 = mass - mass_out1;

  GroupMetrics m;
  m.prediction_rate = mass_r1 / mass;
  if (mass_r1 > 0.0) m.ppv = num_ppv / mass_r1;
  if (mass_r0 > 0.0) m.npv = 1.0 - num_npv / mass_r0;
  if (mass_out0 > 0.0) m.fpr = (mass_r1 - num_ppv) / mass_out0;
  if (mass_out1 > 0.0) m.fnr = num_fnr / mass_out1;
  m.accuracy = acc / mass;
  return m;
}

double observable_rate(const Context& ctx, const Cell& c) { return cell_outcome_rate(ctx, c); }

}  // namespace

double prediction_rate(const Context& ctx, int a) {
  double mass = 0.0;
  double mass_r1 = 0.0;
  for (const Cell& c : ctx.cells.cells()) {
    if (c.a != a) continue;
    mass += c.mass;
    if (ctx.rmap.at(c.key()) == 1) mass_r1 += c.mass;
  }
  if (mass <= 0.0) throw std::domain_error("group a=" + std::to_string(a) + " has zero mass");
  return mass_r1 / mass;
}

std::pair<MetricValue, MetricValue> predictive_values(const Context& ctx, int a) {
  const GroupMetrics m =
      metrics_with_outcome(ctx, a, [&](const Cell& c) { return observable_rate(ctx, c); }, false);
  return {m.ppv, m.npv};
}

std::pair<MetricValue, MetricValue> error_rates(const Context& ctx, int a) {
  const GroupMetrics m =
      metrics_with_outcome(ctx, a, [&](const Cell& c) { return observable_rate(ctx, c); }, false);
  return {m.fpr, m.fnr};
}

double accuracy(const Context& ctx, int a) {
  const GroupMetrics m =
      metrics_with_outcome(ctx, a, [&](const Cell& c) { return observable_rate(ctx, c); }, true);
  return *m.accuracy;
}

GroupMetrics observable_metrics(const Context& ctx, int a) {
  return metrics_with_outcome(ctx, a, [&](const Cell& c) { return observable_rate(ctx, c); },
                              true);
}

GroupMetrics counterfactual_metrics(const Context& ctx, int a) {
  return metrics_with_outcome(ctx, a, [](const Cell& c) { return c.mu0; }, true);
}

}  // namespace perfshift::oracle
