#include "perfshift/population.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "perfshift/errors.hpp"
#include "perfshift/policy.hpp"
#include "perfshift/rng.hpp"

namespace perfshift {

double normal_cdf(double x) {
  constexpr double inv_sqrt2 = 0.70710678118654752440084436210485;
  return 0.5 * std::erfc(-x * inv_sqrt2);
}

std::string to_string(const CellKey& key) {
  std::ostringstream out;
  out << "(a=" << key.a << ",x1=" << key.x1 << ",x2bin=" << key.x2bin << ")";
  return out.str();
}

namespace {

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

void require_binary(int v, const char* field) {
  if (v != 0 && v != 1) {
    throw ValidationError(std::string("cell field ") + field + " must be 0 or 1, got " +
                          std::to_string(v));
  }
}

}  // namespace

CellTable::CellTable(std::vector<Cell> cells, std::optional<double> x2_split)
    : cells_(std::move(cells)), x2_split_(x2_split) {
  std::sort(cells_.begin(), cells_.end(),
            [](const Cell& lhs, const Cell& rhs) { return lhs.key() < rhs.key(); });
  double total = 0.0;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const Cell& c = cells_[i];
    require_binary(c.a, "a");
    require_binary(c.x1, "x1");
    require_binary(c.x2bin, "x2bin");
    if (!is_probability(c.mass)) throw ValidationError("cell " + to_string(c.key()) + ": mass outside [0,1]");
    if (!is_probability(c.mu0)) throw ValidationError("cell " + to_string(c.key()) + ": mu0 outside [0,1]");
    if (!is_probability(c.mu1)) throw ValidationError("cell " + to_string(c.key()) + ": mu1 outside [0,1]");
    if (!is_probability(c.pi_pre)) throw ValidationError("cell " + to_string(c.key()) + ": pi_pre outside [0,1]");
    if (i > 0 && cells_[i - 1].key() == c.key()) {
      throw ValidationError("duplicate cell " + to_string(c.key()));
    }
    total += c.mass;
  }
  if (cells_.empty()) throw ValidationError("cell table is empty");
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("cell masses sum to " + std::to_string(total) + ", expected 1");
  }
}

const Cell* CellTable::find(const CellKey& key) const {
  auto it = std::lower_bound(cells_.begin(), cells_.end(), key,
                             [](const Cell& c, const CellKey& k) { return c.key() < k; });
  if (it == cells_.end() || !(it->key() == key)) return nullptr;
  return &*it;
}

const Cell& CellTable::at(const CellKey& key) const {
  const Cell* cell = find(key);
  if (cell == nullptr) throw std::domain_error("no cell " + to_string(key));
  return *cell;
}

std::size_t CellTable::index_of(const CellKey& key) const {
  const Cell* cell = find(key);
  if (cell == nullptr) throw std::domain_error("no cell " + to_string(key));
  return static_cast<std::size_t>(cell - cells_.data());
}

namespace {

constexpr char kCellCsvHeader[] = "a,x1,x2bin,mass,mu0,mu1,pi_pre";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

CellTable CellTable::from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("cell CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCellCsvHeader) {
    throw ValidationError("cell CSV: expected header '" + std::string(kCellCsvHeader) +
                          "', got '" + line + "'");
  }
  std::vector<Cell> cells;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 7) {
      throw ValidationError("cell CSV line " + std::to_string(lineno) + ": expected 7 fields, got " +
                            std::to_string(fields.size()));
    }
    try {
      Cell c;
      c.a = std::stoi(fields[0]);
      c.x1 = std::stoi(fields[1]);
      c.x2bin = std::stoi(fields[2]);
      c.mass = std::stod(fields[3]);
      c.mu0 = std::stod(fields[4]);
      c.mu1 = std::stod(fields[5]);
      c.pi_pre = std::stod(fields[6]);
      cells.push_back(c);
    } catch (const std::logic_error&) {
      throw ValidationError("cell CSV line " + std::to_string(lineno) + ": unparseable field");
    }
  }
  return CellTable(std::move(cells));
}

CellTable CellTable::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open cell CSV '" + path + "'");
  try {
    return from_csv(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void CellTable::to_csv(std::ostream& out) const {
  out << kCellCsvHeader << "\n";
  char buf[160];
  for (const Cell& c : cells_) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.17g,%.17g,%.17g,%.17g", c.a, c.x1, c.x2bin,
                  c.mass, c.mu0, c.mu1, c.pi_pre);
    out << buf << "\n";
  }
}

void PopulationSpec::validate() const {
  auto check = [](double p, const char* field) {
    if (!is_probability(p)) {
      throw ValidationError(std::string("population spec: ") + field + "=" + std::to_string(p) +
                            " outside [0,1]");
    }
  };
  check(p_a, "p_a");
  check(p_x1_given_a[0], "p_x1_given_a[0]");
  check(p_x1_given_a[1], "p_x1_given_a[1]");
  check(outcome_base[0], "outcome_base[0]");
  check(outcome_base[1], "outcome_base[1]");
  check(pi_pre_base[0], "pi_pre_base[0]");
  check(pi_pre_base[1], "pi_pre_base[1]");
  if (!std::isfinite(x2_threshold)) {
    throw ValidationError("population spec: x2_threshold is not finite");
  }
  if (!std::isfinite(treatment_odds_factor) || treatment_odds_factor <= 0.0) {
    throw ValidationError("population spec: treatment_odds_factor=" +
                          std::to_string(treatment_odds_factor) + " must be > 0");
  }
}

PopulationSpec PopulationSpec::from_json(const nlohmann::json& j) {
  PopulationSpec spec;
  auto pair_field = [&](const char* name, std::array<double, 2>& dst) {
    if (!j.contains(name)) return;
    const auto& v = j.at(name);
    if (!v.is_array() || v.size() != 2) {
      throw ValidationError(std::string("population spec: ") + name + " must be a 2-element array");
    }
    dst = {v[0].get<double>(), v[1].get<double>()};
  };
  if (j.contains("p_a")) spec.p_a = j.at("p_a").get<double>();
  pair_field("p_x1_given_a", spec.p_x1_given_a);
  if (j.contains("x2_threshold")) spec.x2_threshold = j.at("x2_threshold").get<double>();
  pair_field("outcome_base", spec.outcome_base);
  if (j.contains("treatment_odds_factor")) {
    spec.treatment_odds_factor = j.at("treatment_odds_factor").get<double>();
  }
  pair_field("pi_pre_base", spec.pi_pre_base);
  spec.validate();
  return spec;
}

nlohmann::json PopulationSpec::to_json() const {
  return nlohmann::json{{"p_a", p_a},
                        {"p_x1_given_a", p_x1_given_a},
                        {"x2_threshold", x2_threshold},
                        {"outcome_base", outcome_base},
                        {"treatment_odds_factor", treatment_odds_factor},
                        {"pi_pre_base", pi_pre_base}};
}

CellTable build_example_population(const PopulationSpec& spec) {
  spec.validate();
  const double p_hi = 1.0 - normal_cdf(spec.x2_threshold);  // P(x2bin = 1)
  std::vector<Cell> cells;
  cells.reserve(8);
  for (int a = 0; a <= 1; ++a) {
    for (int x1 = 0; x1 <= 1; ++x1) {
      for (int b = 0; b <= 1; ++b) {
        Cell c;
        c.a = a;
        c.x1 = x1;
        c.x2bin = b;
        const double pa = (a == 1) ? spec.p_a : 1.0 - spec.p_a;
        const double px1 = (x1 == 1) ? spec.p_x1_given_a[a] : 1.0 - spec.p_x1_given_a[a];
        const double pb = (b == 1) ? p_hi : 1.0 - p_hi;
        c.mass = pa * px1 * pb;
        c.mu0 = spec.outcome_base[x1];
        c.mu1 = odds_multiply(c.mu0, spec.treatment_odds_factor);
        c.pi_pre = spec.pi_pre_base[x1];
        cells.push_back(c);
      }
    }
  }
  return CellTable(std::move(cells), spec.x2_threshold);
}

std::vector<Individual> sample_individuals(const PopulationSpec& spec, std::size_t n,
                                           std::uint64_t seed) {
  spec.validate();
  if (n == 0) throw ValidationError("sample_individuals: n must be >= 1");
  std::vector<Individual> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Individual& ind = out[i];
    ind.a = rng::bernoulli({seed, rng::stream::group, i}, spec.p_a) ? 1 : 0;
    ind.x1 = rng::bernoulli({seed, rng::stream::x1, i}, spec.p_x1_given_a[ind.a]) ? 1 : 0;
    ind.x2 = rng::standard_normal({seed, rng::stream::x2, i});
    const double mu0 = spec.outcome_base[ind.x1];
    const double mu1 = odds_multiply(mu0, spec.treatment_odds_factor);
    ind.y0 = rng::bernoulli({seed, rng::stream::y0, i}, mu0) ? 1 : 0;
    ind.y1 = rng::bernoulli({seed, rng::stream::y1, i}, mu1) ? 1 : 0;
  }
  return out;
}

Individual observe(Individual ind, int d) {
  if (d != 0 && d != 1) throw std::domain_error("observe: d must be 0 or 1");
  if ((ind.y0 != 0 && ind.y0 != 1) || (ind.y1 != 0 && ind.y1 != 1)) {
    throw ValidationError("observe: potential outcomes not populated");
  }
  ind.d = d;
  ind.y = (d == 0) ? ind.y0 : ind.y1;
  return ind;
}

CellKey cell_key_of(const Individual& ind, double x2_split) {
  return {ind.a, ind.x1, ind.x2 >= x2_split ? 1 : 0};
}

}  // namespace perfshift
