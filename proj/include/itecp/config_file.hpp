#pragma once

#include <map>
#include <string>
#include <vector>

#include "itecp/pipeline.hpp"

namespace itecp {

// Flat `key = value` lines grouped by bracketed [section] headers. '#' and ';'
// start comments. Unknown sections or keys are rejected so typos surface.
struct ConfigFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_text(const std::string& text, const std::string& origin);

  // Override syntax "section.key=value" (CLI flags take precedence over file values).
  void set_override(const std::string& assignment);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;

  // Canonical dump (sorted sections and keys) used for the manifest digest.
  std::string canonical() const;
};

std::uint64_t fnv1a64(const std::string& text);

// Settings for the weighting-scheme comparison command: which changepoint
// experiments to run and which schemes/psi values to apply to each.
struct CompareSettings {
  bool run_downward = true;
  bool run_outward = true;
  std::vector<WeightKind> schemes = {WeightKind::Equal, WeightKind::Decay};
  std::vector<double> psis = {0.7};
  int downward_points = 520;
  int downward_changepoint = 500;
  int outward_points = 90;
  int outward_horizon = 30;
  int outward_changepoint = 45;
};

SimConfig sim_from_config(const ConfigFile& file);
ExperimentConfig experiment_from_config(const ConfigFile& file);
CompareSettings compare_from_config(const ConfigFile& file);

}  // namespace itecp
