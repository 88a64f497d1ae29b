#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "perfshift/errors.hpp"
#include "perfshift/oracle.hpp"
#include "perfshift/policy.hpp"
#include "perfshift/population.hpp"
#include "perfshift/predictor.hpp"

using namespace perfshift;

namespace {

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Frozen reference values, derived by direct evaluation of the model
// parameters (odds(p,k) = kp/(1-p+kp), Phi = standard normal CDF):
//   odds(0.3,10)              = 0.8108108108108108
//   odds(0.8,10)              = 0.9756097560975610
//   rate(x1=0) = .7*.3+.3*odds(.3,10)   = 0.4532432432432432
//   rate(x1=1) = .2*.8+.8*odds(.8,10)   = 0.9404878048780488
//   1 - Phi(0.5)              = 0.3085375387259869
constexpr double kRateLo = 0.4532432432432432;
constexpr double kRateHi = 0.9404878048780488;
constexpr double kNpvPre = 0.5467567567567568;   // 1 - kRateLo
constexpr double kPredRate2 = 0.3085375387259869;
constexpr double kAcc0Pre = 0.8617415952537904;  // .8*kRateHi + .2*kNpvPre
constexpr double kAcc1Pre = 0.7829953856295320;  // .6*kRateHi + .4*kNpvPre

Predictor plugin_on_x1() {
  return Predictor::make_plugin(FeatureSet{false, true}, {{{0, 0}, 0}, {{0, 1}, 1}});
}

oracle::Context pre_context(const Predictor& pred) {
  const CellTable cells = build_example_population(PopulationSpec{});
  return oracle::Context::make(cells, baseline_policy(cells), pred);
}

oracle::Context post_context(const Predictor& pred, int select_a, int select_r, double k) {
  const CellTable cells = build_example_population(PopulationSpec{});
  const DecisionPolicy base = baseline_policy(cells);
  Intervention iv;
  iv.select_a = select_a;
  iv.select_r = select_r;
  iv.odds_factor = k;
  return oracle::Context::make(cells, intervene(base, iv, pred, cells), pred);
}

DecisionPolicy constant_policy(const CellTable& cells, double pi) {
  std::map<CellKey, double> prop;
  for (const Cell& c : cells.cells()) prop[c.key()] = pi;
  return DecisionPolicy(prop, cells.x2_split());
}

DecisionPolicy random_policy(const CellTable& cells, std::mt19937& gen) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::map<CellKey, double> prop;
  for (const Cell& c : cells.cells()) prop[c.key()] = unif(gen);
  return DecisionPolicy(prop, cells.x2_split());
}

}  // namespace

TEST_CASE("cell outcome rate interpolates the two regressions") {
  const CellTable cells = build_example_population(PopulationSpec{});
  const auto ctx0 =
      oracle::Context::make(cells, constant_policy(cells, 0.0), plugin_on_x1());
  const auto ctx1 =
      oracle::Context::make(cells, constant_policy(cells, 1.0), plugin_on_x1());
  for (const Cell& c : cells.cells()) {
    CHECK(oracle::cell_outcome_rate(ctx0, c) == c.mu0);  // bit-exact at the endpoints
    CHECK(oracle::cell_outcome_rate(ctx1, c) == c.mu1);
  }

  const auto pre = pre_context(plugin_on_x1());
  for (const Cell& c : pre.cells.cells()) {
    const double expected = c.x1 == 1 ? kRateHi : kRateLo;
    CHECK(near(oracle::cell_outcome_rate(pre, c), expected, 1e-12));
  }
}

TEST_CASE("conditional outcome marginalizes cells and shifts with the policy") {
  const auto pre = pre_context(plugin_on_x1());
  CHECK(near(oracle::conditional_outcome(pre, 0, 1), kRateHi, 1e-12));
  CHECK(near(oracle::conditional_outcome(pre, 1, 0, 0), kRateLo, 1e-12));
  CHECK(near(oracle::conditional_outcome(pre, 1, 0, 1), kRateLo, 1e-12));

  const auto post = post_context(plugin_on_x1(), 1, 0, 1e4);
  // odds(0.3,1e4)=0.9997667210984104; blend of mu0=0.3 and mu1=0.8108108...
  CHECK(near(oracle::conditional_outcome(post, 1, 0), 0.8106916494259448, 1e-12));
  CHECK(near(oracle::conditional_outcome(post, 0, 0), kRateLo, 1e-12));  // other group untouched

  CHECK_THROWS_AS(oracle::conditional_outcome(pre, 2, 0), std::domain_error);
}

TEST_CASE("outcome rate is policy-invariant when the regressions coincide") {
  PopulationSpec spec;
  spec.treatment_odds_factor = 1.0;  // mu1 == mu0
  const CellTable cells = build_example_population(spec);
  std::mt19937 gen(17);
  const auto pred = plugin_on_x1();
  const double before = oracle::conditional_outcome(
      oracle::Context::make(cells, random_policy(cells, gen), pred), 0, 1);
  const double after = oracle::conditional_outcome(
      oracle::Context::make(cells, random_policy(cells, gen), pred), 0, 1);
  CHECK(before == after);
}

TEST_CASE("prediction rates depend on the prediction map only") {
  const auto ctx1 = pre_context(plugin_on_x1());
  CHECK(near(oracle::prediction_rate(ctx1, 0), 0.8, 1e-12));
  CHECK(near(oracle::prediction_rate(ctx1, 1), 0.6, 1e-12));

  const auto ctx2 = pre_context(Predictor::make_threshold(0.5));
  CHECK(near(oracle::prediction_rate(ctx2, 0), kPredRate2, 1e-12));
  CHECK(near(oracle::prediction_rate(ctx2, 1), kPredRate2, 1e-12));

  std::mt19937 gen(23);
  const CellTable cells = build_example_population(PopulationSpec{});
  for (int trial = 0; trial < 20; ++trial) {
    const auto ctx =
        oracle::Context::make(cells, random_policy(cells, gen), Predictor::make_threshold(0.5));
    CHECK(oracle::prediction_rate(ctx, 0) == oracle::prediction_rate(ctx2, 0));
    CHECK(oracle::prediction_rate(ctx, 1) == oracle::prediction_rate(ctx2, 1));
  }
}

TEST_CASE("predictive values are equal across groups before deployment") {
  const auto pre = pre_context(plugin_on_x1());
  for (int a = 0; a <= 1; ++a) {
    const auto [ppv, npv] = oracle::predictive_values(pre, a);
    REQUIRE(ppv.has_value());
    REQUIRE(npv.has_value());
    CHECK(near(*ppv, kRateHi, 1e-12));
    CHECK(near(*npv, kNpvPre, 1e-12));
  }
  const auto [ppv0, npv0] = oracle::predictive_values(pre, 0);
  const auto [ppv1, npv1] = oracle::predictive_values(pre, 1);
  CHECK(std::abs(*ppv0 - *ppv1) <= 1e-12);
  CHECK(std::abs(*npv0 - *npv1) <= 1e-12);
}

TEST_CASE("saturated intervention drives the negative predictive value to its limit") {
  // pi -> 1 on the intervened (a=1, r=0) cells sends the group-1 npv to
  // 1 - odds(0.3,10) = 0.1891891891891892.
  const CellTable cells = build_example_population(PopulationSpec{});
  std::map<CellKey, double> prop;
  for (const Cell& c : cells.cells()) {
    prop[c.key()] = (c.a == 1 && c.x1 == 0) ? 1.0 : c.pi_pre;
  }
  const auto ctx =
      oracle::Context::make(cells, DecisionPolicy(prop, cells.x2_split()), plugin_on_x1());
  const auto [ppv1, npv1] = oracle::predictive_values(ctx, 1);
  CHECK(near(*npv1, 0.1891891891891892, 1e-12));
  const auto [ppv0, npv0] = oracle::predictive_values(ctx, 0);
  CHECK(near(*npv0 - *npv1, 0.3575675675675676, 1e-12));

  // At k=1e4 the sweep is within 1.3e-4 of that limit.
  const auto almost = post_context(plugin_on_x1(), 1, 0, 1e4);
  const auto [ppv_k, npv_k] = oracle::predictive_values(almost, 1);
  CHECK(near(*npv_k, 0.1893083505740552, 1e-12));

  // k=1 is the identity intervention: bitwise pre == post.
  const auto pre = pre_context(plugin_on_x1());
  const auto same = post_context(plugin_on_x1(), 1, 0, 1.0);
  CHECK(oracle::predictive_values(same, 1) == oracle::predictive_values(pre, 1));
}

TEST_CASE("error rates are equal across groups before deployment") {
  const auto pre = pre_context(Predictor::make_threshold(0.5));
  for (int a = 0; a <= 1; ++a) {
    const auto [fpr, fnr] = oracle::error_rates(pre, a);
    REQUIRE(fpr.has_value());
    REQUIRE(fnr.has_value());
    CHECK(near(*fpr, kPredRate2, 1e-12));
    CHECK(near(*fnr, 1.0 - kPredRate2, 1e-12));
  }
}

TEST_CASE("saturated intervention shrinks group-1 error rates") {
  // pi -> 1 on (a=1, x2bin=1): frozen values from direct enumeration.
  const CellTable cells = build_example_population(PopulationSpec{});
  std::map<CellKey, double> prop;
  for (const Cell& c : cells.cells()) {
    prop[c.key()] = (c.a == 1 && c.x2bin == 1) ? 1.0 : c.pi_pre;
  }
  const auto ctx = oracle::Context::make(cells, DecisionPolicy(prop, cells.x2_split()),
                                         Predictor::make_threshold(0.5));
  const auto [fpr1, fnr1] = oracle::error_rates(ctx, 1);
  CHECK(near(*fpr1, 0.1367362546124990, 1e-12));
  CHECK(near(*fnr1, 0.6474929065943487, 1e-12));

  // Group 0 still sees the baseline policy: pre values bit for bit.
  const auto pre = pre_context(Predictor::make_threshold(0.5));
  CHECK(oracle::error_rates(ctx, 0) == oracle::error_rates(pre, 0));
}

TEST_CASE("degenerate outcome rates force the error-rate formulas") {
  // mu0 = mu1 = 0 everywhere: no positives, so fnr is undefined and the fpr
  // equals the prediction rate.
  std::vector<Cell> cells;
  for (int x1 = 0; x1 <= 1; ++x1) {
    for (int b = 0; b <= 1; ++b) {
      Cell c;
      c.a = 0;
      c.x1 = x1;
      c.x2bin = b;
      c.mass = 0.25;
      c.mu0 = c.mu1 = 0.0;
      c.pi_pre = 0.5;
      cells.push_back(c);
    }
  }
  const CellTable table(cells, 0.5);
  const auto ctx = oracle::Context::make(table, baseline_policy(table),
                                         Predictor::make_threshold(0.5));
  const auto [fpr, fnr] = oracle::error_rates(ctx, 0);
  REQUIRE(fpr.has_value());
  CHECK(*fpr == oracle::prediction_rate(ctx, 0));
  CHECK(!fnr.has_value());

  CHECK_THROWS_AS(oracle::prediction_rate(ctx, 1), std::domain_error);  // no group-1 mass
}

TEST_CASE("accuracy matches direct enumeration") {
  const auto pre = pre_context(plugin_on_x1());
  CHECK(near(oracle::accuracy(pre, 0), kAcc0Pre, 1e-12));
  CHECK(near(oracle::accuracy(pre, 1), kAcc1Pre, 1e-12));

  // r == 1 everywhere and certain outcomes: accuracy 1.
  std::vector<Cell> cells;
  Cell c;
  c.mass = 1.0;
  c.mu0 = c.mu1 = 1.0;
  c.pi_pre = 0.3;
  cells.push_back(c);
  const CellTable table(cells, 0.5);
  const auto ctx = oracle::Context::make(
      table, baseline_policy(table),
      Predictor::make_plugin(FeatureSet{false, false}, {{{0, 0}, 1}}));
  CHECK(oracle::accuracy(ctx, 0) == 1.0);
}

TEST_CASE("accuracy decomposes into predictive values") {
  std::mt19937 gen(31);
  const CellTable cells = build_example_population(PopulationSpec{});
  for (const Predictor& pred : {plugin_on_x1(), Predictor::make_threshold(0.5)}) {
    for (int trial = 0; trial < 30; ++trial) {
      const auto ctx = oracle::Context::make(cells, random_policy(cells, gen), pred);
      for (int a = 0; a <= 1; ++a) {
        const double pr = oracle::prediction_rate(ctx, a);
        const auto [ppv, npv] = oracle::predictive_values(ctx, a);
        const double acc = oracle::accuracy(ctx, a);
        CHECK(near(acc, *ppv * pr + *npv * (1.0 - pr), 1e-12));
      }
    }
  }
}

TEST_CASE("counterfactual metrics are policy-invariant and hit the base rates") {
  const CellTable cells = build_example_population(PopulationSpec{});
  std::mt19937 gen(41);
  const auto pred1 = plugin_on_x1();

  const auto ctx_a = oracle::Context::make(cells, random_policy(cells, gen), pred1);
  const auto ctx_b = oracle::Context::make(cells, random_policy(cells, gen), pred1);
  for (int a = 0; a <= 1; ++a) {
    const GroupMetrics ma = oracle::counterfactual_metrics(ctx_a, a);
    const GroupMetrics mb = oracle::counterfactual_metrics(ctx_b, a);
    CHECK(ma == mb);  // identical, not merely close
    CHECK(near(*ma.ppv, 0.8, 1e-12));
    CHECK(near(*ma.npv, 0.7, 1e-12));
  }

  const auto pred2 = Predictor::make_threshold(0.5);
  const auto ctx2 = oracle::Context::make(cells, random_policy(cells, gen), pred2);
  for (int a = 0; a <= 1; ++a) {
    CHECK(near(*oracle::counterfactual_metrics(ctx2, a).fpr, kPredRate2, 1e-12));
  }
}

TEST_CASE("with a never-treat policy the observable view reduces to the counterfactual one") {
  const CellTable cells = build_example_population(PopulationSpec{});
  const auto ctx = oracle::Context::make(cells, constant_policy(cells, 0.0), plugin_on_x1());
  for (int a = 0; a <= 1; ++a) {
    CHECK(oracle::observable_metrics(ctx, a) == oracle::counterfactual_metrics(ctx, a));
  }
}

TEST_CASE("context construction validates totality") {
  const CellTable cells = build_example_population(PopulationSpec{});
  std::map<CellKey, double> partial;
  partial[{0, 0, 0}] = 0.5;
  CHECK_THROWS_AS(
      oracle::Context::make(cells, DecisionPolicy(partial, 0.5), plugin_on_x1()),
      std::domain_error);

  std::map<CellKey, int> bad_rmap;
  for (const Cell& c : cells.cells()) bad_rmap[c.key()] = 0;
  bad_rmap.erase({1, 1, 1});
  CHECK_THROWS_AS(oracle::Context::make(cells, baseline_policy(cells), std::move(bad_rmap)),
                  std::domain_error);
}
