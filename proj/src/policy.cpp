#include "perfshift/policy.hpp"

#include <algorithm>
#include <cmath>

#include "perfshift/errors.hpp"

namespace perfshift {

double odds_multiply(double p, double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw std::domain_error("odds_multiply: k must be a positive finite real, got " +
                            std::to_string(k));
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("odds_multiply: p must be in [0,1], got " + std::to_string(p));
  }
  if (k == 1.0) return p;
  return k * p / (1.0 - p + k * p);
}

DecisionPolicy::DecisionPolicy(const std::map<CellKey, double>& propensity,
                               std::optional<double> x2_split)
    : x2_split_(x2_split) {
  entries_.reserve(propensity.size());
  for (const auto& [key, value] : propensity) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw ValidationError("policy propensity for cell " + to_string(key) + " outside [0,1]");
    }
    entries_.emplace_back(key, value);
  }
}

double DecisionPolicy::at(const CellKey& key) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), key,
      [](const std::pair<CellKey, double>& e, const CellKey& k) { return e.first < k; });
  if (it == entries_.end() || !(it->first == key)) {
    throw std::domain_error("policy does not cover cell " + to_string(key));
  }
  return it->second;
}

CellKey DecisionPolicy::cell_of(const Individual& ind) const {
  if (!x2_split_.has_value()) {
    throw std::domain_error("policy has no x2 partition point; cannot place an individual");
  }
  return cell_key_of(ind, *x2_split_);
}

void DecisionPolicy::require_covers(const CellTable& cells) const {
  for (const Cell& c : cells.cells()) at(c.key());
}

void Intervention::validate() const {
  if (!(odds_factor > 0.0) || !std::isfinite(odds_factor)) {
    throw ValidationError("intervention: odds_factor must be > 0, got " +
                          std::to_string(odds_factor));
  }
  if (!select_a.has_value() && !select_r.has_value()) {
    throw ValidationError("intervention: at least one of select_a, select_r must be set");
  }
  for (const auto& [sel, name] : {std::pair{select_a, "select_a"}, {select_r, "select_r"}}) {
    if (sel.has_value() && *sel != 0 && *sel != 1) {
      throw ValidationError(std::string("intervention: ") + name + " must be 0 or 1");
    }
  }
}

bool Intervention::matches(const Cell& cell, int r) const {
  if (select_a.has_value() && cell.a != *select_a) return false;
  if (select_r.has_value() && r != *select_r) return false;
  return true;
}

Intervention Intervention::from_json(const nlohmann::json& j) {
  Intervention iv;
  if (j.contains("select_a") && !j.at("select_a").is_null()) {
    iv.select_a = j.at("select_a").get<int>();
  }
  if (j.contains("select_r") && !j.at("select_r").is_null()) {
    iv.select_r = j.at("select_r").get<int>();
  }
  if (j.contains("odds_factor")) iv.odds_factor = j.at("odds_factor").get<double>();
  return iv;
}

nlohmann::json Intervention::to_json() const {
  nlohmann::json j;
  if (select_a.has_value()) j["select_a"] = *select_a;
  if (select_r.has_value()) j["select_r"] = *select_r;
  j["odds_factor"] = odds_factor;
  return j;
}

DecisionPolicy baseline_policy(const CellTable& cells) {
  std::map<CellKey, double> propensity;
  for (const Cell& c : cells.cells()) propensity[c.key()] = c.pi_pre;
  return DecisionPolicy(propensity, cells.x2_split());
}

DecisionPolicy intervene(const DecisionPolicy& base, const Intervention& iv,
                         const Predictor& pred, const CellTable& cells) {
  iv.validate();
  base.require_covers(cells);
  const auto rmap = pred.partition_on(cells);
  std::map<CellKey, double> propensity;
  for (const Cell& c : cells.cells()) {
    const double pi = base.at(c.key());
    propensity[c.key()] =
        iv.matches(c, rmap.at(c.key())) ? odds_multiply(pi, iv.odds_factor) : pi;
  }
  return DecisionPolicy(propensity, base.x2_split());
}

int decide(const DecisionPolicy& policy, const Individual& ind, const rng::DrawKey& key) {
  const double pi = policy.at(policy.cell_of(ind));
  return rng::bernoulli(key, pi) ? 1 : 0;
}

}  // namespace perfshift
