#include "perfshift/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "perfshift/errors.hpp"
#include "perfshift/experiment.hpp"
#include "perfshift/metrics.hpp"
#include "perfshift/oracle.hpp"
#include "perfshift/policy.hpp"
#include "perfshift/population.hpp"
#include "perfshift/predictor.hpp"
#include "perfshift/rng.hpp"

namespace perfshift::verify {

namespace {

// ---------------------------------------------------------------------------
// Reference path. Expected values are recomputed by materializing the joint
// distribution over (cell, d, y0, y1) for the default population and summing
// it directly. Nothing here calls the closed-form oracle under test.
// ---------------------------------------------------------------------------

struct RefAtom {
  int a, x1, x2bin, d, y0, y1;
  int r, y;
  double p;
};

double ref_odds(double p, double k) { return k * p / (1.0 - p + k * p); }

double ref_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

using RefPolicy = std::function<double(int a, int x1, int x2bin)>;
using RefRule = std::function<int(int a, int x1, int x2bin)>;

std::vector<RefAtom> ref_joint(const RefPolicy& pi, const RefRule& rule) {
  const double p_hi = 1.0 - ref_normal_cdf(0.5);
  const double p_x1[2] = {0.8, 0.6};  // P(x1 = 1 | a)
  std::vector<RefAtom> atoms;
  for (int a = 0; a <= 1; ++a) {
    for (int x1 = 0; x1 <= 1; ++x1) {
      for (int b = 0; b <= 1; ++b) {
        const double mass =
            0.5 * (x1 == 1 ? p_x1[a] : 1.0 - p_x1[a]) * (b == 1 ? p_hi : 1.0 - p_hi);
        const double mu0 = 0.3 + 0.5 * x1;
        const double mu1 = ref_odds(mu0, 10.0);
        const double prop = pi(a, x1, b);
        for (int d = 0; d <= 1; ++d) {
          for (int y0 = 0; y0 <= 1; ++y0) {
            for (int y1 = 0; y1 <= 1; ++y1) {
              RefAtom atom;
              atom.a = a;
              atom.x1 = x1;
              atom.x2bin = b;
              atom.d = d;
              atom.y0 = y0;
              atom.y1 = y1;
              atom.r = rule(a, x1, b);
              atom.y = d == 0 ? y0 : y1;
              atom.p = mass * (d == 1 ? prop : 1.0 - prop) * (y0 == 1 ? mu0 : 1.0 - mu0) *
                       (y1 == 1 ? mu1 : 1.0 - mu1);
              atoms.push_back(atom);
            }
          }
        }
      }
    }
  }
  return atoms;
}

using AtomPred = std::function<bool(const RefAtom&)>;

double ref_cond(const std::vector<RefAtom>& atoms, const AtomPred& event, const AtomPred& given) {
  double num = 0.0, den = 0.0;
  for (const RefAtom& atom : atoms) {
    if (!given(atom)) continue;
    den += atom.p;
    if (event(atom)) num += atom.p;
  }
  return num / den;
}

struct RefMetrics {
  double prediction_rate, ppv, npv, fpr, fnr, accuracy;
};

RefMetrics ref_metrics(const std::vector<RefAtom>& atoms, int a) {
  auto in_group = [a](const RefAtom& t) { return t.a == a; };
  RefMetrics m;
  m.prediction_rate = ref_cond(atoms, [](const RefAtom& t) { return t.r == 1; }, in_group);
  m.ppv = ref_cond(atoms, [](const RefAtom& t) { return t.y == 1; },
                   [a](const RefAtom& t) { return t.a == a && t.r == 1; });
  m.npv = ref_cond(atoms, [](const RefAtom& t) { return t.y == 0; },
                   [a](const RefAtom& t) { return t.a == a && t.r == 0; });
  m.fpr = ref_cond(atoms, [](const RefAtom& t) { return t.r == 1; },
                   [a](const RefAtom& t) { return t.a == a && t.y == 0; });
  m.fnr = ref_cond(atoms, [](const RefAtom& t) { return t.r == 0; },
                   [a](const RefAtom& t) { return t.a == a && t.y == 1; });
  m.accuracy = ref_cond(atoms, [](const RefAtom& t) { return t.r == t.y; }, in_group);
  return m;
}

const RefPolicy kRefBaseline = [](int, int x1, int) { return 0.3 + 0.5 * x1; };

RefPolicy ref_post_policy(int select_a, int select_r, const RefRule& rule, double k) {
  return [=](int a, int x1, int b) {
    const double base = 0.3 + 0.5 * x1;
    return (a == select_a && rule(a, x1, b) == select_r) ? ref_odds(base, k) : base;
  };
}

const RefRule kRefRule1 = [](int, int x1, int) { return x1; };      // plug-in on x1
const RefRule kRefRule2 = [](int, int, int b) { return b; };        // threshold on x2

// ---------------------------------------------------------------------------
// Criterion harness
// ---------------------------------------------------------------------------

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& msg) {
    if (cond) return;
    ok = false;
    if (!detail.empty()) detail += "; ";
    detail += msg;
  }
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

bool nearly(double a, double b, double tol) { return std::abs(a - b) <= tol; }

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return true;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

struct Suite {
  ScenarioConfig cfg1, cfg2;
  SweepResult res1, res2;
  CellTable cells;
  DecisionPolicy base;
  Predictor pred1, pred2;
  int threads = 1;

  const SweepRow& row(const SweepResult& res, double k, OutcomeVariant variant,
                      Path path) const {
    const SweepRow* r = res.find(k, variant, path);
    if (r == nullptr) throw std::logic_error("missing sweep row");
    return *r;
  }

  std::vector<double> series(const SweepResult& res, const std::vector<double>& grid,
                             OutcomeVariant variant, Path path, int group,
                             const std::string& metric) const {
    std::vector<double> out;
    for (double k : grid) {
      const MetricValue v = metric_by_name(row(res, k, variant, path).group[group], metric);
      if (!v.has_value()) throw std::logic_error("unexpected undefined metric " + metric);
      out.push_back(*v);
    }
    return out;
  }

  std::vector<double> disparity_series(const SweepResult& res, const std::vector<double>& grid,
                                       OutcomeVariant variant, Path path,
                                       const std::string& metric) const {
    std::vector<double> out;
    for (double k : grid) {
      const MetricValue v = metric_by_name(row(res, k, variant, path).abs_diff, metric);
      if (!v.has_value()) throw std::logic_error("unexpected undefined disparity " + metric);
      out.push_back(*v);
    }
    return out;
  }

  oracle::Context post_context(const Predictor& pred, const Intervention& iv_template,
                               double k) const {
    Intervention iv = iv_template;
    iv.odds_factor = k;
    return oracle::Context::make(cells, intervene(base, iv, pred, cells), pred);
  }
};

// 1. Pre-deployment fairness by construction.
Check criterion_pre_deployment_fairness(const Suite& s) {
  Check c;
  const auto ctx1 = oracle::Context::make(s.cells, s.base, s.pred1);
  const auto ctx2 = oracle::Context::make(s.cells, s.base, s.pred2);
  const auto atoms1 = ref_joint(kRefBaseline, kRefRule1);
  const auto atoms2 = ref_joint(kRefBaseline, kRefRule2);
  for (int a = 0; a <= 1; ++a) {
    const auto [ppv, npv] = oracle::predictive_values(ctx1, a);
    const RefMetrics ref = ref_metrics(atoms1, a);
    c.require(ppv.has_value() && nearly(*ppv, ref.ppv, 1e-12),
              "plug-in ppv group " + std::to_string(a) + " = " + num(ppv.value_or(-1)) +
                  " != ref " + num(ref.ppv));
    c.require(npv.has_value() && nearly(*npv, ref.npv, 1e-12),
              "plug-in npv group " + std::to_string(a) + " = " + num(npv.value_or(-1)) +
                  " != ref " + num(ref.npv));
    c.require(nearly(*ppv, 0.9404878, 1e-7), "plug-in ppv != 0.9404878");
    c.require(nearly(*npv, 0.5467568, 1e-7), "plug-in npv != 0.5467568");

    const auto [fpr, fnr] = oracle::error_rates(ctx2, a);
    const RefMetrics ref2 = ref_metrics(atoms2, a);
    c.require(fpr.has_value() && nearly(*fpr, ref2.fpr, 1e-12),
              "threshold fpr group " + std::to_string(a) + " != ref");
    c.require(fnr.has_value() && nearly(*fnr, ref2.fnr, 1e-12),
              "threshold fnr group " + std::to_string(a) + " != ref");
    c.require(nearly(*fpr, 0.3085375, 1e-7), "threshold fpr != 0.3085375");
    c.require(nearly(*fnr, 0.6914625, 1e-7), "threshold fnr != 0.6914625");
  }
  auto disp = [](const MetricValue& lhs, const MetricValue& rhs) {
    return std::abs(*lhs - *rhs);
  };
  const auto pv0 = oracle::predictive_values(ctx1, 0);
  const auto pv1 = oracle::predictive_values(ctx1, 1);
  c.require(disp(pv0.first, pv1.first) <= 1e-12, "ppv disparity above 1e-12");
  c.require(disp(pv0.second, pv1.second) <= 1e-12, "npv disparity above 1e-12");
  const auto er0 = oracle::error_rates(ctx2, 0);
  const auto er1 = oracle::error_rates(ctx2, 1);
  c.require(disp(er0.first, er1.first) <= 1e-12, "fpr disparity above 1e-12");
  c.require(disp(er0.second, er1.second) <= 1e-12, "fnr disparity above 1e-12");
  return c;
}

// 2. Changing the propensity moves the conditional outcome (concept shift).
Check criterion_concept_shift(const Suite& s) {
  Check c;
  const auto pre_ctx = oracle::Context::make(s.cells, s.base, s.pred1);
  const double pre = oracle::conditional_outcome(pre_ctx, 1, 0);
  for (double k : s.cfg1.odds_grid) {
    if (k <= 1.0) continue;
    const auto post_ctx = s.post_context(s.pred1, s.cfg1.intervention, k);
    const double post = oracle::conditional_outcome(post_ctx, 1, 0);
    c.require(post != pre, "no shift at k=" + num(k));
  }
  const double k_max = s.cfg1.odds_grid.back();
  const auto post_ctx = s.post_context(s.pred1, s.cfg1.intervention, k_max);
  const double post = oracle::conditional_outcome(post_ctx, 1, 0);
  const auto ref_atoms =
      ref_joint(ref_post_policy(1, 0, kRefRule1, k_max), kRefRule1);
  const double ref_post = ref_cond(
      ref_atoms, [](const RefAtom& t) { return t.y == 1; },
      [](const RefAtom& t) { return t.a == 1 && t.x1 == 0; });
  c.require(nearly(post, ref_post, 1e-6),
            "post outcome " + num(post) + " != ref " + num(ref_post));
  const auto pre_atoms = ref_joint(kRefBaseline, kRefRule1);
  const double ref_pre = ref_cond(
      pre_atoms, [](const RefAtom& t) { return t.y == 1; },
      [](const RefAtom& t) { return t.a == 1 && t.x1 == 0; });
  c.require(nearly(pre, ref_pre, 1e-6), "pre outcome " + num(pre) + " != ref " + num(ref_pre));
  c.require(nearly(post, 0.8107, 5e-5), "post outcome != 0.8107");
  c.require(nearly(pre, 0.4532, 5e-5), "pre outcome != 0.4532");
  return c;
}

// 3. Prediction rates are identical pre vs post for every k.
Check criterion_prediction_rate_invariance(const Suite& s) {
  Check c;
  struct Case {
    const Predictor* pred;
    const ScenarioConfig* cfg;
  } cases[] = {{&s.pred1, &s.cfg1}, {&s.pred2, &s.cfg2}};
  for (const auto& [pred, cfg] : cases) {
    const auto pre_ctx = oracle::Context::make(s.cells, s.base, *pred);
    for (int a = 0; a <= 1; ++a) {
      const double pre = oracle::prediction_rate(pre_ctx, a);
      for (double k : cfg->odds_grid) {
        const auto post_ctx = s.post_context(*pred, cfg->intervention, k);
        const double post = oracle::prediction_rate(post_ctx, a);
        c.require(post == pre, "prediction rate moved at k=" + num(k));
      }
    }
  }
  return c;
}

// 4. Predictive-value / error-rate disparities grow with the multiplier.
Check criterion_disparity_growth(const Suite& s) {
  Check c;
  const auto& grid1 = s.cfg1.odds_grid;
  const auto npv_disp =
      s.disparity_series(s.res1, grid1, OutcomeVariant::observable, Path::oracle, "npv");
  c.require(strictly_increasing(npv_disp), "npv disparity not strictly increasing");
  const auto npv1 = s.series(s.res1, grid1, OutcomeVariant::observable, Path::oracle, 1, "npv");
  c.require(strictly_decreasing(npv1), "group-1 npv not strictly decreasing");
  c.require(npv_disp.back() >= 0.35, "npv disparity at k=1e4 below 0.35");
  c.require(nearly(npv_disp.back(), 0.3575676, 1e-3), "npv disparity far from saturation value");

  const auto& grid2 = s.cfg2.odds_grid;
  const auto fpr_disp =
      s.disparity_series(s.res2, grid2, OutcomeVariant::observable, Path::oracle, "fpr");
  const auto fnr_disp =
      s.disparity_series(s.res2, grid2, OutcomeVariant::observable, Path::oracle, "fnr");
  c.require(strictly_increasing(fpr_disp), "fpr disparity not strictly increasing");
  c.require(strictly_increasing(fnr_disp), "fnr disparity not strictly increasing");
  const auto fpr1 = s.series(s.res2, grid2, OutcomeVariant::observable, Path::oracle, 1, "fpr");
  const auto fnr1 = s.series(s.res2, grid2, OutcomeVariant::observable, Path::oracle, 1, "fnr");
  c.require(strictly_decreasing(fpr1), "group-1 fpr not strictly decreasing");
  c.require(strictly_decreasing(fnr1), "group-1 fnr not strictly decreasing");
  c.require(nearly(fpr1.back(), 0.1367, 1e-3),
            "group-1 fpr at k=1e4 = " + num(fpr1.back()) + " != 0.1367");

  // Dual-route check at the endpoint: direct joint enumeration.
  const double k_max = grid2.back();
  const auto atoms = ref_joint(ref_post_policy(1, 1, kRefRule2, k_max), kRefRule2);
  const double ref_fpr = ref_metrics(atoms, 1).fpr;
  c.require(nearly(fpr1.back(), ref_fpr, 1e-12),
            "group-1 fpr " + num(fpr1.back()) + " != ref " + num(ref_fpr));
  const auto group0 =
      s.series(s.res2, grid2, OutcomeVariant::observable, Path::oracle, 0, "fpr");
  c.require(group0.front() == group0.back(), "group-0 fpr moved");
  return c;
}

// 5. Accuracy diverges: down for the intervened group in scenario 1, up in
// scenario 2, flat for the untouched group.
Check criterion_accuracy_divergence(const Suite& s) {
  Check c;
  const auto acc1 =
      s.series(s.res1, s.cfg1.odds_grid, OutcomeVariant::observable, Path::oracle, 1, "accuracy");
  c.require(strictly_decreasing(acc1), "scenario-1 group-1 accuracy not strictly decreasing");
  const auto acc0 =
      s.series(s.res1, s.cfg1.odds_grid, OutcomeVariant::observable, Path::oracle, 0, "accuracy");
  c.require(std::equal(acc0.begin() + 1, acc0.end(), acc0.begin()),
            "scenario-1 group-0 accuracy not constant");
  const auto atoms = ref_joint(kRefBaseline, kRefRule1);
  const double ref_acc0 = ref_metrics(atoms, 0).accuracy;
  c.require(nearly(acc0.front(), ref_acc0, 1e-9),
            "group-0 accuracy " + num(acc0.front()) + " != ref " + num(ref_acc0));
  c.require(nearly(acc0.front(), 0.8617416, 1e-6), "group-0 accuracy != 0.8617416");
  const auto acc2 =
      s.series(s.res2, s.cfg2.odds_grid, OutcomeVariant::observable, Path::oracle, 1, "accuracy");
  c.require(strictly_increasing(acc2), "scenario-2 group-1 accuracy not strictly increasing");
  return c;
}

// 6. Counterfactual metrics are invariant to the deployment policy.
Check criterion_counterfactual_invariance(const Suite& s) {
  Check c;
  struct Case {
    const SweepResult* res;
    const ScenarioConfig* cfg;
  } cases[] = {{&s.res1, &s.cfg1}, {&s.res2, &s.cfg2}};
  for (const auto& [res, cfg] : cases) {
    const double mc_tol = 4.0 * std::sqrt(0.25 / static_cast<double>(cfg->eval.n_samples));
    for (Path path : {Path::oracle, Path::mc}) {
      const SweepRow& first =
          s.row(*res, cfg->odds_grid.front(), OutcomeVariant::counterfactual, path);
      for (double k : cfg->odds_grid) {
        const SweepRow& r = s.row(*res, k, OutcomeVariant::counterfactual, path);
        for (int a = 0; a <= 1; ++a) {
          for (const char* metric : {"ppv", "npv", "fpr", "fnr"}) {
            const MetricValue v = metric_by_name(r.group[a], metric);
            const MetricValue v0 = metric_by_name(first.group[a], metric);
            c.require(v.has_value() && v0.has_value(), "undefined counterfactual metric");
            if (!v.has_value() || !v0.has_value()) continue;
            if (path == Path::oracle) {
              c.require(*v == *v0, std::string("oracle counterfactual ") + metric +
                                       " moved at k=" + num(k));
            } else {
              c.require(nearly(*v, *v0, mc_tol), std::string("mc counterfactual ") + metric +
                                                     " moved at k=" + num(k));
            }
          }
        }
      }
    }
  }
  return c;
}

// 7. Monte Carlo agrees with the exact path within 4 binomial SEs.
Check criterion_oracle_mc_agreement(const Suite& s) {
  Check c;
  std::size_t comparisons = 0;
  std::size_t violations = 0;
  std::string first_violation;
  struct Case {
    const SweepResult* res;
    const ScenarioConfig* cfg;
  } cases[] = {{&s.res1, &s.cfg1}, {&s.res2, &s.cfg2}};
  for (const auto& [res, cfg] : cases) {
    for (double k : cfg->odds_grid) {
      for (OutcomeVariant variant : {OutcomeVariant::observable, OutcomeVariant::counterfactual}) {
        const SweepRow& orc = s.row(*res, k, variant, Path::oracle);
        const SweepRow& mc = s.row(*res, k, variant, Path::mc);
        for (int a = 0; a <= 1; ++a) {
          const GroupCounts& counts = mc.counts[a];
          const std::map<std::string, std::size_t> n_cond = {
              {"prediction_rate", counts.n}, {"ppv", counts.n_r1}, {"npv", counts.n_r0},
              {"fpr", counts.n_out0},        {"fnr", counts.n_out1}, {"accuracy", counts.n}};
          for (const char* metric : kMetricNames) {
            const MetricValue o = metric_by_name(orc.group[a], metric);
            const MetricValue m = metric_by_name(mc.group[a], metric);
            const std::size_t n = n_cond.at(metric);
            if (!o.has_value() || !m.has_value() || n == 0) continue;
            ++comparisons;
            const double se = std::sqrt(*o * (1.0 - *o) / static_cast<double>(n));
            if (std::abs(*m - *o) > 4.0 * se) {
              ++violations;
              if (first_violation.empty()) {
                first_violation = std::string(metric) + " group " + std::to_string(a) +
                                  " at k=" + num(k) + ": |" + num(*m) + " - " + num(*o) +
                                  "| > 4se=" + num(4.0 * se);
              }
            }
          }
        }
      }
    }
  }
  c.require(comparisons > 0, "no comparisons performed");
  const double rate =
      comparisons == 0 ? 1.0 : static_cast<double>(violations) / static_cast<double>(comparisons);
  c.require(rate <= 0.01, std::to_string(violations) + "/" + std::to_string(comparisons) +
                              " outside 4 binomial SEs; first: " + first_violation);
  return c;
}

// 8. Realized outcomes obey the consistency rule; with no treatment the
// observable and counterfactual views coincide bit for bit.
Check criterion_consistency(const Suite& s) {
  Check c;
  const auto& spec = std::get<PopulationSpec>(s.cfg1.population);
  const std::uint64_t seed = resolve_master_seed(s.cfg1) ^ 0xC0115157;
  auto sample = sample_individuals(spec, 1'000'000, seed);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const int d = decide(s.base, sample[i], {seed, rng::stream::decision_base, i});
    sample[i] = observe(sample[i], d);
  }
  std::size_t bad = 0;
  for (const Individual& ind : sample) {
    if (ind.y != (1 - ind.d) * ind.y0 + ind.d * ind.y1) ++bad;
  }
  c.require(bad == 0, std::to_string(bad) + " individuals violate the consistency rule");

  std::map<CellKey, double> zero;
  for (const Cell& cell : s.cells.cells()) zero[cell.key()] = 0.0;
  const DecisionPolicy zero_policy(zero, s.cells.x2_split());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const int d = decide(zero_policy, sample[i], {seed, rng::stream::decision_base + 1, i});
    sample[i] = observe(sample[i], d);
  }
  const MetricReport obs = empirical_metrics(sample, s.pred1, OutcomeVariant::observable);
  const MetricReport cf = empirical_metrics(sample, s.pred1, OutcomeVariant::counterfactual);
  c.require(obs.group == cf.group && obs.abs_diff == cf.abs_diff && obs.counts == cf.counts,
            "observable != counterfactual under the all-zero policy");
  return c;
}

// 9. The run subcommand is byte-deterministic, independent of threads.
Check criterion_run_determinism(const Suite& s) {
  Check c;
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("perfshift-verify-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  std::vector<std::string> outputs;
  for (const char* threads : {"1", "1", "4"}) {
    const fs::path out_dir = dir / (std::string("t") + threads + "-" +
                                    std::to_string(outputs.size()));
    fs::create_directories(out_dir);
    // Quiet the subcommand's progress line while the suite is printing.
    std::ostringstream sink;
    std::streambuf* saved = std::cout.rdbuf(sink.rdbuf());
    int rc = -1;
    try {
      rc = cli_main({"run", "--config", "predictor1.json", "--mode", "both", "--out",
                     out_dir.string(), "--threads", threads});
    } catch (...) {
      std::cout.rdbuf(saved);
      throw;
    }
    std::cout.rdbuf(saved);
    c.require(rc == 0, "run exited with " + std::to_string(rc));
    if (rc != 0) break;
    outputs.push_back(slurp(out_dir / "predictor1.csv"));
  }
  if (outputs.size() == 3) {
    c.require(!outputs[0].empty(), "empty csv output");
    c.require(outputs[0] == outputs[1], "two identical runs differ");
    c.require(outputs[0] == outputs[2], "4-thread run differs from 1-thread run");
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  return c;
}

}  // namespace

int run_all(std::ostream& out, const Options& opts) {
  Suite s;
  s.threads = opts.threads < 1 ? 1 : opts.threads;
  s.cfg1 = load_scenario("predictor1.json");
  s.cfg2 = load_scenario("predictor2.json");
  s.cells = build_example_population(PopulationSpec{});
  s.base = baseline_policy(s.cells);
  s.pred1 = Predictor::make_plugin(FeatureSet{false, true}, {{{0, 0}, 0}, {{0, 1}, 1}});
  s.pred2 = Predictor::make_threshold(0.5);
  s.res1 = run_scenario(s.cfg1, s.threads);
  s.res2 = run_scenario(s.cfg2, s.threads);

  const struct {
    const char* name;
    Check (*fn)(const Suite&);
  } criteria[] = {
      {"1 pre-deployment fairness by construction", criterion_pre_deployment_fairness},
      {"2 propensity change induces outcome shift", criterion_concept_shift},
      {"3 prediction rates identical pre vs post", criterion_prediction_rate_invariance},
      {"4 disparities grow with the odds multiplier", criterion_disparity_growth},
      {"5 accuracy diverges between groups", criterion_accuracy_divergence},
      {"6 counterfactual metrics policy-invariant", criterion_counterfactual_invariance},
      {"7 Monte Carlo matches the exact path", criterion_oracle_mc_agreement},
      {"8 consistency of realized outcomes", criterion_consistency},
      {"9 byte-deterministic runs across thread counts", criterion_run_determinism},
  };

  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    try {
      c = fn(s);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    if (c.ok) {
      out << "[PASS] " << name << "\n";
    } else {
      ++failures;
      out << "[FAIL] " << name << ": " << c.detail << "\n";
    }
    out.flush();
  }
  out << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
      << "\n";
  return failures;
}

}  // namespace perfshift::verify
