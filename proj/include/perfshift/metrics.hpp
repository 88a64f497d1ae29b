#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perfshift/population.hpp"
#include "perfshift/predictor.hpp"

namespace perfshift {

/// A metric value; empty when the conditioning event has zero count/mass.
/// Degenerate strata are values, never errors, so reports stay emittable.
using MetricValue = std::optional<double>;

struct GroupMetrics {
  MetricValue prediction_rate;
  MetricValue ppv;
  MetricValue npv;
  MetricValue fpr;
  MetricValue fnr;
  MetricValue accuracy;

  friend bool operator==(const GroupMetrics&, const GroupMetrics&) = default;
};

/// Fixed metric column order used by every CSV surface.
inline constexpr std::array<const char*, 6> kMetricNames = {"prediction_rate", "ppv", "npv",
                                                            "fpr", "fnr", "accuracy"};

MetricValue metric_by_name(const GroupMetrics& m, const std::string& name);

/// Conditioning-set sizes behind a group's empirical metrics; feeds the
/// binomial tolerance rule.
struct GroupCounts {
  std::size_t n = 0;
  std::size_t n_r1 = 0;
  std::size_t n_r0 = 0;
  std::size_t n_out1 = 0;
  std::size_t n_out0 = 0;

  friend bool operator==(const GroupCounts&, const GroupCounts&) = default;
};

/// Which outcome the metrics condition on: the realized outcome, or the
/// baseline potential outcome that ignores the decision taken.
enum class OutcomeVariant { observable, counterfactual };

const char* to_string(OutcomeVariant v);
OutcomeVariant variant_from_string(const std::string& s);

struct MetricReport {
  OutcomeVariant variant = OutcomeVariant::observable;
  std::array<GroupMetrics, 2> group;  // indexed by the group label
  std::array<GroupCounts, 2> counts;
  GroupMetrics abs_diff;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

/// Group-wise metrics of the predictor on an observed sample.
/// The observable variant requires decisions applied; the counterfactual
/// variant scores against the untreated potential outcome.
MetricReport empirical_metrics(std::span<const Individual> samples, const Predictor& pred,
                               OutcomeVariant variant);

/// Per-metric |group0 - group1|; empty propagates.
GroupMetrics disparity(const MetricReport& report);

enum class Criterion { demographic_parity, equalized_odds, predictive_parity };

/// Pass/fail is only meaningful when every required disparity is defined;
/// otherwise the check is indeterminate.
enum class CheckStatus { pass, fail, indeterminate };

struct CriterionFinding {
  std::string metric;
  double magnitude = 0.0;
};

struct CriterionResult {
  CheckStatus status = CheckStatus::pass;
  std::vector<CriterionFinding> findings;  // offending metrics on failure
};

CriterionResult check_criterion(const MetricReport& report, Criterion criterion, double tol);

/// 4 binomial standard errors of the smallest conditioning set: the default
/// tolerance for criterion checks on empirical data.
double default_tolerance(const MetricReport& report);

/// Rows `variant,group,prediction_rate,ppv,npv,fpr,fnr,accuracy`: one per
/// group plus an abs_diff row; empty fields for undefined values.
void write_csv(const MetricReport& report, std::ostream& out);

}  // namespace perfshift
