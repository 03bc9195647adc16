#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "rxt/models.hpp"

namespace rxt {

using json = nlohmann::json;

struct ExperimentConfig {
  std::string tag;
  json model = json::object();   // {"family": ..., parameters}
  std::vector<int> n_grid;
  long reps = 1000;
  std::uint64_t master_seed = 0;
  std::string output;            // directory; empty means do not persist
  json params = json::object();  // tag-specific settings
  int workers = 1;

  static ExperimentConfig from_json(const json& j);
  json to_json() const;
};

// Model families: alpha-gamma {alpha, gamma}, skewed-pd {alpha, theta, lambda},
// dislocation {levels: [[{s: [...], w}]], c, k, index}, star.
Model parse_model(const json& j);

struct ResultBundle {
  json summary;
  std::map<std::string, std::string> tables;  // file name -> CSV text
  bool gate_failed = false;
};

ResultBundle run_experiment(const ExperimentConfig& cfg);
void write_bundle(const ResultBundle& b, const std::string& dir);

// Shortest round-trip decimal form.
std::string format_double(double v);

std::vector<std::string> experiment_tags();

}  // namespace rxt
