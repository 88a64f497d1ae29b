#include "perfshift/predictor.hpp"

#include <cmath>
#include <sstream>

#include "perfshift/errors.hpp"

namespace perfshift {

namespace {

int slot_of(const FeatureSet& f, int a, int x1) {
  const int ea = f.use_a ? a : 0;
  const int ex1 = f.use_x1 ? x1 : 0;
  return (ea << 1) | ex1;
}

std::string stratum_name(const FeatureSet& f, int a, int x1) {
  std::ostringstream out;
  out << "(";
  bool first = true;
  if (f.use_a) {
    out << "a=" << a;
    first = false;
  }
  if (f.use_x1) {
    out << (first ? "" : ",") << "x1=" << x1;
    first = false;
  }
  if (first) out << "all";
  out << ")";
  return out.str();
}

}  // namespace

Predictor Predictor::make_threshold(double threshold) {
  if (!std::isfinite(threshold)) throw ValidationError("predictor threshold is not finite");
  Predictor p;
  p.kind_ = PredictorKind::x2_threshold;
  p.threshold_ = threshold;
  return p;
}

Predictor Predictor::make_plugin(FeatureSet features,
                                 const std::map<std::pair<int, int>, int>& table) {
  Predictor p;
  p.kind_ = PredictorKind::plugin_table;
  p.features_ = features;
  for (const auto& [key, value] : table) {
    const auto [a, x1] = key;
    if ((a != 0 && a != 1) || (x1 != 0 && x1 != 1)) {
      throw ValidationError("plugin table: stratum coordinates must be 0 or 1");
    }
    if ((!features.use_a && a != 0) || (!features.use_x1 && x1 != 0)) {
      throw ValidationError("plugin table: entry " + stratum_name({true, true}, a, x1) +
                            " keys a feature the table does not use");
    }
    if (value != 0 && value != 1) {
      throw ValidationError("plugin table: prediction must be 0 or 1");
    }
  }
  for (int a = 0; a <= (features.use_a ? 1 : 0); ++a) {
    for (int x1 = 0; x1 <= (features.use_x1 ? 1 : 0); ++x1) {
      auto it = table.find({a, x1});
      if (it == table.end()) {
        throw ValidationError("plugin table: missing stratum " + stratum_name(features, a, x1));
      }
      // Replicate across the unused dimensions so lookups are one load.
      for (int fa = 0; fa <= 1; ++fa) {
        for (int fx = 0; fx <= 1; ++fx) {
          if ((features.use_a && fa != a) || (features.use_x1 && fx != x1)) continue;
          p.table_[(fa << 1) | fx] = it->second;
        }
      }
    }
  }
  return p;
}

double Predictor::threshold() const {
  if (kind_ != PredictorKind::x2_threshold) {
    throw std::logic_error("threshold() on a plug-in predictor");
  }
  return threshold_;
}

FeatureSet Predictor::features() const {
  if (kind_ != PredictorKind::plugin_table) {
    throw std::logic_error("features() on a threshold predictor");
  }
  return features_;
}

int Predictor::predict(int a, int x1, double x2) const {
  if (kind_ == PredictorKind::x2_threshold) return x2 >= threshold_ ? 1 : 0;
  return table_[(a << 1) | x1];
}

int Predictor::predict(const Individual& ind) const { return predict(ind.a, ind.x1, ind.x2); }

std::map<CellKey, int> Predictor::partition_on(const CellTable& cells) const {
  if (kind_ == PredictorKind::x2_threshold) {
    if (!cells.x2_split().has_value()) {
      throw PartitionMismatchError(
          "threshold predictor on a cell table with no x2 partition point");
    }
    if (*cells.x2_split() != threshold_) {
      throw PartitionMismatchError("predictor threshold " + std::to_string(threshold_) +
                                   " does not align with the cell partition point " +
                                   std::to_string(*cells.x2_split()));
    }
  }
  std::map<CellKey, int> rmap;
  for (const Cell& c : cells.cells()) {
    const int r = (kind_ == PredictorKind::x2_threshold) ? c.x2bin : table_[(c.a << 1) | c.x1];
    rmap[c.key()] = r;
  }
  return rmap;
}

nlohmann::json Predictor::to_json() const {
  if (kind_ == PredictorKind::x2_threshold) {
    return nlohmann::json{{"kind", "x2_threshold"}, {"threshold", threshold_}};
  }
  nlohmann::json features = nlohmann::json::array();
  if (features_.use_a) features.push_back("a");
  if (features_.use_x1) features.push_back("x1");
  nlohmann::json table = nlohmann::json::array();
  for (int a = 0; a <= (features_.use_a ? 1 : 0); ++a) {
    for (int x1 = 0; x1 <= (features_.use_x1 ? 1 : 0); ++x1) {
      nlohmann::json entry;
      if (features_.use_a) entry["a"] = a;
      if (features_.use_x1) entry["x1"] = x1;
      entry["r"] = table_[(a << 1) | x1];
      table.push_back(entry);
    }
  }
  return nlohmann::json{{"kind", "plugin_table"}, {"features", features}, {"table", table}};
}

Predictor Predictor::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "x2_threshold") {
    return make_threshold(j.at("threshold").get<double>());
  }
  if (kind == "plugin_table") {
    FeatureSet features;
    for (const auto& f : j.at("features")) {
      const std::string name = f.get<std::string>();
      if (name == "a") {
        features.use_a = true;
      } else if (name == "x1") {
        features.use_x1 = true;
      } else {
        throw ValidationError("predictor: unknown feature '" + name + "' (known: a, x1)");
      }
    }
    std::map<std::pair<int, int>, int> table;
    for (const auto& entry : j.at("table")) {
      const int a = features.use_a ? entry.at("a").get<int>() : 0;
      const int x1 = features.use_x1 ? entry.at("x1").get<int>() : 0;
      table[{a, x1}] = entry.at("r").get<int>();
    }
    return make_plugin(features, table);
  }
  throw ValidationError("predictor: unknown kind '" + kind +
                        "' (known: plugin_table, x2_threshold)");
}

Predictor fit_plugin(std::span<const Individual> samples, FeatureSet features, double threshold) {
  if (samples.empty()) throw FitError("fit_plugin: empty sample");
  std::array<std::size_t, 4> count{};
  std::array<std::size_t, 4> positives{};
  for (const Individual& ind : samples) {
    if (!ind.observed()) throw FitError("fit_plugin: sample contains unobserved individuals");
    const int slot = slot_of(features, ind.a, ind.x1);
    ++count[slot];
    positives[slot] += static_cast<std::size_t>(ind.y);
  }
  std::map<std::pair<int, int>, int> table;
  for (int a = 0; a <= (features.use_a ? 1 : 0); ++a) {
    for (int x1 = 0; x1 <= (features.use_x1 ? 1 : 0); ++x1) {
      const int slot = (a << 1) | x1;
      if (count[slot] == 0) {
        throw FitError("fit_plugin: empty stratum " + stratum_name(features, a, x1));
      }
      const double mean = static_cast<double>(positives[slot]) / static_cast<double>(count[slot]);
      table[{a, x1}] = mean >= threshold ? 1 : 0;
    }
  }
  return Predictor::make_plugin(features, table);
}

}  // namespace perfshift
