#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "perfshift/errors.hpp"
#include "perfshift/policy.hpp"
#include "perfshift/population.hpp"

using namespace perfshift;

namespace {
bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// High-precision reference values, derived once from the model parameters
// (Phi is the standard normal CDF).
constexpr double kPhiHalf = 0.6914624612740131;             // Phi(0.5)
constexpr double kMass100 = 0.1382924922548026;             // 0.5 * 0.4 * Phi(0.5)
}  // namespace

TEST_CASE("normal_cdf matches reference values") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(near(normal_cdf(0.5), kPhiHalf, 1e-12));
  CHECK(near(normal_cdf(-0.5), 1.0 - kPhiHalf, 1e-12));
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> dist(-6.0, 6.0);
  for (int i = 0; i < 200; ++i) {
    const double x = dist(gen);
    CHECK(near(normal_cdf(x) + normal_cdf(-x), 1.0, 1e-14));
    CHECK(normal_cdf(x) <= normal_cdf(x + 0.1));
  }
}

TEST_CASE("example population expands to eight cells with product masses") {
  const CellTable cells = build_example_population(PopulationSpec{});
  CHECK(cells.size() == 8);
  CHECK(cells.x2_split() == 0.5);

  const Cell& c = cells.at({1, 0, 0});
  CHECK(near(c.mass, kMass100, 1e-12));
  CHECK(c.mu0 == 0.3);
  CHECK(c.pi_pre == 0.3);

  const Cell& hi = cells.at({0, 1, 0});
  CHECK(hi.mu0 == 0.8);
  CHECK(hi.pi_pre == 0.8);

  double total = 0.0;
  for (const Cell& cell : cells.cells()) total += cell.mass;
  CHECK(near(total, 1.0, 1e-12));
}

TEST_CASE("identity odds factor leaves outcome regressions untouched") {
  PopulationSpec spec;
  spec.treatment_odds_factor = 1.0;
  const CellTable cells = build_example_population(spec);
  for (const Cell& c : cells.cells()) CHECK(c.mu1 == c.mu0);
}

TEST_CASE("random valid specs always produce coherent tables") {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> prob(0.0, 1.0);
  std::uniform_real_distribution<double> odds(0.1, 50.0);
  std::uniform_real_distribution<double> thr(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    PopulationSpec spec;
    spec.p_a = prob(gen);
    spec.p_x1_given_a = {prob(gen), prob(gen)};
    spec.x2_threshold = thr(gen);
    spec.outcome_base = {prob(gen), prob(gen)};
    spec.treatment_odds_factor = odds(gen);
    spec.pi_pre_base = {prob(gen), prob(gen)};
    const CellTable cells = build_example_population(spec);
    double total = 0.0;
    for (const Cell& c : cells.cells()) {
      total += c.mass;
      CHECK(c.mu0 == spec.outcome_base[c.x1]);
      CHECK(c.mu1 == odds_multiply(c.mu0, spec.treatment_odds_factor));
      CHECK(c.pi_pre == spec.pi_pre_base[c.x1]);
    }
    CHECK(near(total, 1.0, 1e-12));
  }
}

TEST_CASE("invalid specs are rejected naming the field") {
  PopulationSpec spec;
  spec.p_a = 1.5;
  try {
    spec.validate();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("p_a") != std::string::npos);
  }

  PopulationSpec bad_odds;
  bad_odds.treatment_odds_factor = 0.0;
  CHECK_THROWS_AS(bad_odds.validate(), ValidationError);
}

TEST_CASE("sampling is deterministic and prefix-stable") {
  const PopulationSpec spec;
  const auto a = sample_individuals(spec, 1000, 42);
  const auto b = sample_individuals(spec, 1000, 42);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].a == b[i].a);
    CHECK(a[i].x1 == b[i].x1);
    CHECK(a[i].x2 == b[i].x2);
    CHECK(a[i].y0 == b[i].y0);
    CHECK(a[i].y1 == b[i].y1);
  }
  const auto longer = sample_individuals(spec, 5000, 42);
  CHECK(longer[7].x2 == a[7].x2);
  CHECK(longer[999].y0 == a[999].y0);

  const auto other_seed = sample_individuals(spec, 1000, 43);
  std::size_t diffs = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diffs += a[i].x2 != other_seed[i].x2;
  CHECK(diffs > 900);

  CHECK_THROWS_AS(sample_individuals(spec, 0, 42), ValidationError);
}

TEST_CASE("large samples match the generator marginals") {
  const PopulationSpec spec;
  const std::size_t n = 1'000'000;
  const auto sample = sample_individuals(spec, n, 20201);

  std::size_t a1 = 0, x1_count = 0, y0_given_x1 = 0;
  for (const Individual& ind : sample) {
    a1 += static_cast<std::size_t>(ind.a);
    if (ind.x1 == 1) {
      ++x1_count;
      y0_given_x1 += static_cast<std::size_t>(ind.y0);
    }
  }
  CHECK(near(static_cast<double>(a1) / n, 0.5, 0.002));
  CHECK(near(static_cast<double>(y0_given_x1) / x1_count, 0.8, 0.003));
}

TEST_CASE("empirical cell frequencies match the table masses") {
  const PopulationSpec spec;
  const CellTable cells = build_example_population(spec);
  const std::size_t n = 1'000'000;
  const auto sample = sample_individuals(spec, n, 555);

  std::map<CellKey, std::size_t> freq;
  for (const Individual& ind : sample) ++freq[cell_key_of(ind, spec.x2_threshold)];
  for (const Cell& c : cells.cells()) {
    const double observed = static_cast<double>(freq[c.key()]) / n;
    const double bound = 4.0 * std::sqrt(c.mass * (1.0 - c.mass) / n);
    CHECK(near(observed, c.mass, bound));
  }
}

TEST_CASE("observe applies the consistency rule") {
  Individual ind;
  ind.y0 = 1;
  ind.y1 = 0;
  CHECK(observe(ind, 0).y == 1);
  CHECK(observe(ind, 1).y == 0);

  ind.y1 = 1;
  CHECK(observe(ind, 0).y == 1);
  CHECK(observe(ind, 1).y == 1);

  CHECK_THROWS_AS(observe(ind, 2), std::domain_error);

  const auto sample = sample_individuals(PopulationSpec{}, 5000, 9);
  std::mt19937 gen(3);
  for (const Individual& raw : sample) {
    const int d = static_cast<int>(gen() & 1u);
    const Individual obs = observe(raw, d);
    CHECK(obs.y == (1 - d) * obs.y0 + d * obs.y1);
    CHECK(obs.x2 == raw.x2);
  }
}

TEST_CASE("cell tables round-trip through CSV") {
  const CellTable cells = build_example_population(PopulationSpec{});
  std::ostringstream out;
  cells.to_csv(out);

  std::istringstream in(out.str());
  const CellTable parsed = CellTable::from_csv(in);
  REQUIRE(parsed.size() == cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CHECK(parsed.cells()[i].key() == cells.cells()[i].key());
    CHECK(parsed.cells()[i].mass == cells.cells()[i].mass);
    CHECK(parsed.cells()[i].mu1 == cells.cells()[i].mu1);
  }
  // Raw CSV tables carry no partition point.
  CHECK(!parsed.x2_split().has_value());
}

TEST_CASE("cell CSV rejects malformed input") {
  std::istringstream bad_header("a,x1,x2bin,mass\n");
  CHECK_THROWS_AS(CellTable::from_csv(bad_header), ValidationError);

  std::istringstream bad_row("a,x1,x2bin,mass,mu0,mu1,pi_pre\n0,0,0,one,0.5,0.5,0.5\n");
  CHECK_THROWS_AS(CellTable::from_csv(bad_row), ValidationError);

  std::istringstream bad_mass("a,x1,x2bin,mass,mu0,mu1,pi_pre\n0,0,0,0.5,0.5,0.5,0.5\n");
  CHECK_THROWS_AS(CellTable::from_csv(bad_mass), ValidationError);  // masses must sum to 1
}

TEST_CASE("cell table validation") {
  CHECK_THROWS_AS(CellTable(std::vector<Cell>{}), ValidationError);

  Cell c;
  c.mass = 0.5;
  std::vector<Cell> dup{c, c};
  CHECK_THROWS_AS(CellTable{dup}, ValidationError);

  Cell bad = c;
  bad.mu0 = 1.5;
  bad.mass = 1.0;
  CHECK_THROWS_AS(CellTable(std::vector<Cell>{bad}), ValidationError);
}

TEST_CASE("population spec JSON round trip") {
  const PopulationSpec spec;
  const auto j = spec.to_json();
  const PopulationSpec back = PopulationSpec::from_json(j);
  CHECK(back.p_a == spec.p_a);
  CHECK(back.p_x1_given_a == spec.p_x1_given_a);
  CHECK(back.outcome_base == spec.outcome_base);
  CHECK(back.treatment_odds_factor == spec.treatment_odds_factor);

  CHECK_THROWS_AS(PopulationSpec::from_json(nlohmann::json{{"p_a", 2.0}}), ValidationError);
  CHECK_THROWS_AS(PopulationSpec::from_json(nlohmann::json{{"p_x1_given_a", {0.1}}}),
                  ValidationError);
}
