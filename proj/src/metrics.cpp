#include "perfshift/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "perfshift/errors.hpp"

namespace perfshift {

const char* to_string(OutcomeVariant v) {
  return v == OutcomeVariant::observable ? "observable" : "counterfactual";
}

OutcomeVariant variant_from_string(const std::string& s) {
  if (s == "observable") return OutcomeVariant::observable;
  if (s == "counterfactual") return OutcomeVariant::counterfactual;
  throw ValidationError("unknown outcome variant '" + s +
                        "' (known: observable, counterfactual)");
}

MetricValue metric_by_name(const GroupMetrics& m, const std::string& name) {
  if (name == "prediction_rate") return m.prediction_rate;
  if (name == "ppv") return m.ppv;
  if (name == "npv") return m.npv;
  if (name == "fpr") return m.fpr;
  if (name == "fnr") return m.fnr;
  if (name == "accuracy") return m.accuracy;
  throw ValidationError("unknown metric '" + name +
                        "' (known: prediction_rate, ppv, npv, fpr, fnr, accuracy)");
}

namespace {

MetricValue ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricReport empirical_metrics(std::span<const Individual> samples, const Predictor& pred,
                               OutcomeVariant variant) {
  if (samples.empty()) throw ValidationError("empirical_metrics: empty sample");

  struct Tally {
    std::size_t n = 0, r1 = 0, out1 = 0, r1_out1 = 0, r0_out0 = 0;
  };
  std::array<Tally, 2> tally;

  for (const Individual& ind : samples) {
    int outcome;
    if (variant == OutcomeVariant::observable) {
      if (!ind.observed()) {
        throw ValidationError("empirical_metrics: observable variant requires observed samples");
      }
      outcome = ind.y;
    } else {
      outcome = ind.y0;
    }
    if (ind.a != 0 && ind.a != 1) {
      throw ValidationError("empirical_metrics: group label must be 0 or 1");
    }
    if (outcome != 0 && outcome != 1) {
      throw ValidationError("empirical_metrics: outcome not populated");
    }
    const int r = pred.predict(ind);
    Tally& t = tally[ind.a];
    ++t.n;
    t.r1 += static_cast<std::size_t>(r);
    t.out1 += static_cast<std::size_t>(outcome);
    t.r1_out1 += static_cast<std::size_t>(r & outcome);
    t.r0_out0 += static_cast<std::size_t>((1 - r) & (1 - outcome));
  }

  MetricReport report;
  report.variant = variant;
  for (int g = 0; g <= 1; ++g) {
    const Tally& t = tally[g];
    GroupCounts& c = report.counts[g];
    c.n = t.n;
    c.n_r1 = t.r1;
    c.n_r0 = t.n - t.r1;
    c.n_out1 = t.out1;
    c.n_out0 = t.n - t.out1;

    GroupMetrics& m = report.group[g];
    m.prediction_rate = ratio(t.r1, t.n);
    m.ppv = ratio(t.r1_out1, t.r1);
    m.npv = ratio(t.r0_out0, c.n_r0);
    m.fpr = ratio(t.r1 - t.r1_out1, c.n_out0);
    m.fnr = ratio(t.out1 - t.r1_out1, t.out1);
    m.accuracy = ratio(t.r1_out1 + t.r0_out0, t.n);
  }
  report.abs_diff = disparity(report);
  return report;
}

GroupMetrics disparity(const MetricReport& report) {
  auto diff = [](const MetricValue& lhs, const MetricValue& rhs) -> MetricValue {
    if (!lhs.has_value() || !rhs.has_value()) return std::nullopt;
    return std::abs(*lhs - *rhs);
  };
  const GroupMetrics& g0 = report.group[0];
  const GroupMetrics& g1 = report.group[1];
  GroupMetrics d;
  d.prediction_rate = diff(g0.prediction_rate, g1.prediction_rate);
  d.ppv = diff(g0.ppv, g1.ppv);
  d.npv = diff(g0.npv, g1.npv);
  d.fpr = diff(g0.fpr, g1.fpr);
  d.fnr = diff(g0.fnr, g1.fnr);
  d.accuracy = diff(g0.accuracy, g1.accuracy);
  return d;
}

CriterionResult check_criterion(const MetricReport& report, Criterion criterion, double tol) {
  if (!(tol >= 0.0)) throw std::domain_error("check_criterion: tol must be >= 0");
  const GroupMetrics d = disparity(report);

  std::vector<std::pair<const char*, MetricValue>> required;
  switch (criterion) {
    case Criterion::demographic_parity:
      required = {{"prediction_rate", d.prediction_rate}};
      break;
    case Criterion::equalized_odds:
      required = {{"fpr", d.fpr}, {"fnr", d.fnr}};
      break;
    case Criterion::predictive_parity:
      required = {{"ppv", d.ppv}, {"npv", d.npv}};
      break;
  }

  CriterionResult result;
  for (const auto& [name, value] : required) {
    if (!value.has_value()) {
      result.status = CheckStatus::indeterminate;
      result.findings.push_back({name, std::numeric_limits<double>::quiet_NaN()});
      return result;
    }
  }
  for (const auto& [name, value] : required) {
    if (*value > tol) result.findings.push_back({name, *value});
  }
  result.status = result.findings.empty() ? CheckStatus::pass : CheckStatus::fail;
  return result;
}

double default_tolerance(const MetricReport& report) {
  std::size_t n_min = std::numeric_limits<std::size_t>::max();
  for (const GroupCounts& c : report.counts) {
    for (std::size_t n : {c.n, c.n_r1, c.n_r0, c.n_out1, c.n_out0}) {
      if (n > 0) n_min = std::min(n_min, n);
    }
  }
  if (n_min == std::numeric_limits<std::size_t>::max()) {
    throw std::domain_error("default_tolerance: report has no nonempty conditioning set");
  }
  return 4.0 * std::sqrt(0.25 / static_cast<double>(n_min));
}

namespace {

void append_metric(std::string& line, const MetricValue& v) {
  line.push_back(',');
  if (v.has_value()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", *v);
    line += buf;
  }
}

void append_metrics_row(std::string& line, const GroupMetrics& m) {
  append_metric(line, m.prediction_rate);
  append_metric(line, m.ppv);
  append_metric(line, m.npv);
  append_metric(line, m.fpr);
  append_metric(line, m.fnr);
  append_metric(line, m.accuracy);
}

}  // namespace

void write_csv(const MetricReport& report, std::ostream& out) {
  out << "variant,group,prediction_rate,ppv,npv,fpr,fnr,accuracy\n";
  for (int g = 0; g <= 1; ++g) {
    std::string line = std::string(to_string(report.variant)) + "," + std::to_string(g);
    append_metrics_row(line, report.group[g]);
    out << line << "\n";
  }
  std::string line = std::string(to_string(report.variant)) + ",abs_diff";
  append_metrics_row(line, report.abs_diff);
  out << line << "\n";
}

}  // namespace perfshift
