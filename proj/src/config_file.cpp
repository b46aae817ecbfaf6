#include "itecp/config_file.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "itecp/csv.hpp"
#include "itecp/error.hpp"

namespace itecp {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"data",
     {"source", "path", "n_individuals", "n_points", "n_covariates", "rho", "gamma",
      "gamma0", "cov_noise_var1", "cov_noise_var2", "beta", "beta0", "theta1", "theta2",
      "theta3", "theta4", "sigma_y", "noise_as_variance", "ar_coeff", "outcome",
      "changepoint", "seed"}},
    {"conformal", {"alpha", "learner", "scheme", "psi", "w_inf"}},
    {"run",
     {"mode", "train_frac", "seed", "train_horizon", "augment_cal_with_test_history"}},
    {"lambda",
     {"nuisance_grid_size", "nuisance_fixed", "quantile_grid_size", "quantile_fixed",
      "folds", "grid_ratio"}},
    {"compare",
     {"experiments", "schemes", "psis", "downward_points", "downward_changepoint",
      "outward_points", "outward_horizon", "outward_changepoint"}},
};

void check_known(const std::string& section, const std::string& key,
                 const std::string& origin) {
  const auto sec = kKnownKeys.find(section);
  if (sec == kKnownKeys.end()) {
    throw ConfigError(origin + ": unknown section [" + section + "]");
  }
  if (!sec->second.count(key)) {
    throw ConfigError(origin + ": unknown key '" + key + "' in section [" + section + "]");
  }
}

class Reader {
 public:
  explicit Reader(const ConfigFile& file) : file_(file) {}

  std::string str(const std::string& sec, const std::string& key,
                  const std::string& fallback) const {
    return file_.get(sec, key, fallback);
  }
  double num(const std::string& sec, const std::string& key, double fallback) const {
    if (!file_.has(sec, key)) return fallback;
    return parse_double(file_.get(sec, key, ""), "[" + sec + "] " + key);
  }
  long integer(const std::string& sec, const std::string& key, long fallback) const {
    if (!file_.has(sec, key)) return fallback;
    return parse_long(file_.get(sec, key, ""), "[" + sec + "] " + key);
  }
  bool flag(const std::string& sec, const std::string& key, bool fallback) const {
    if (!file_.has(sec, key)) return fallback;
    const std::string v = file_.get(sec, key, "");
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("[" + sec + "] " + key + ": expected a boolean, got '" + v + "'");
  }
  std::vector<double> numbers(const std::string& sec, const std::string& key,
                              std::vector<double> fallback) const {
    if (!file_.has(sec, key)) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(file_.get(sec, key, ""))) {
      out.push_back(parse_double(item, "[" + sec + "] " + key));
    }
    return out;
  }

 private:
  const ConfigFile& file_;
};

}  // namespace

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& origin) {
  ConfigFile file;
  std::istringstream in(text);
  std::string line;
  std::string section;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    if (section.empty()) throw ConfigError(where + ": key outside any [section]");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    check_known(section, key, where);
    file.sections[section][key] = value;
  }
  return file;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

void ConfigFile::set_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override must look like section.key=value: " + assignment);
  }
  const std::string section = trim(assignment.substr(0, dot));
  const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
  const std::string value = trim(assignment.substr(eq + 1));
  check_known(section, key, "--set " + assignment);
  sections[section][key] = value;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  const auto sec = sections.find(section);
  return sec != sections.end() && sec->second.count(key) > 0;
}

std::string ConfigFile::get(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
  const auto sec = sections.find(section);
  if (sec == sections.end()) return fallback;
  const auto it = sec->second.find(key);
  return it == sec->second.end() ? fallback : it->second;
}

std::string ConfigFile::canonical() const {
  std::ostringstream out;
  for (const auto& [section, entries] : sections) {
    out << '[' << section << "]\n";
    for (const auto& [key, value] : entries) out << key << '=' << value << '\n';
  }
  return out.str();
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

SimConfig sim_from_config(const ConfigFile& file) {
  const Reader read(file);
  SimConfig sim;
  sim.n_individuals = static_cast<int>(read.integer("data", "n_individuals", 2000));
  sim.n_points = static_cast<int>(read.integer("data", "n_points", 50));
  sim.n_covariates = static_cast<int>(read.integer("data", "n_covariates", 50));
  sim.rho = read.num("data", "rho", sim.rho);
  sim.gamma = read.num("data", "gamma", sim.gamma);
  sim.gamma0 = read.num("data", "gamma0", sim.gamma0);
  sim.cov_noise_var1 = read.num("data", "cov_noise_var1", sim.cov_noise_var1);
  sim.cov_noise_var2 = read.num("data", "cov_noise_var2", sim.cov_noise_var2);
  sim.beta = read.numbers("data", "beta", sim.beta);
  sim.beta0 = read.num("data", "beta0", sim.beta0);
  sim.theta1 = read.num("data", "theta1", sim.theta1);
  sim.theta2 = read.numbers("data", "theta2", sim.theta2);
  sim.theta3 = read.num("data", "theta3", sim.theta3);
  sim.theta4 = read.numbers("data", "theta4", sim.theta4);
  sim.sigma_y = read.num("data", "sigma_y", sim.sigma_y);
  sim.noise_as_variance = read.flag("data", "noise_as_variance", sim.noise_as_variance);
  sim.ar_coeff = read.num("data", "ar_coeff", sim.ar_coeff);
  const std::string outcome = read.str("data", "outcome", "linear");
  if (outcome == "linear") {
    sim.outcome_kind = OutcomeKind::Linear;
  } else if (outcome == "nonlinear") {
    sim.outcome_kind = OutcomeKind::NonLinear;
  } else {
    throw ConfigError("[data] outcome: expected linear or nonlinear, got '" + outcome + "'");
  }
  if (file.has("data", "changepoint")) {
    sim.changepoint = static_cast<int>(read.integer("data", "changepoint", 0));
  }
  sim.seed = static_cast<std::uint64_t>(read.integer("data", "seed", 1));
  sim.validate();
  return sim;
}

ExperimentConfig experiment_from_config(const ConfigFile& file) {
  const Reader read(file);
  ExperimentConfig cfg;

  const std::string source = read.str("data", "source", "synthetic");
  if (source == "synthetic") {
    cfg.sim = sim_from_config(file);
  } else if (source == "csv") {
    const std::string path = read.str("data", "path", "");
    if (path.empty()) throw ConfigError("[data] path is required when source = csv");
    cfg.csv_path = path;
  } else {
    throw ConfigError("[data] source: expected synthetic or csv, got '" + source + "'");
  }

  cfg.alpha = read.num("conformal", "alpha", cfg.alpha);
  const std::string learner = read.str("conformal", "learner", "dr");
  if (learner == "dr") {
    cfg.learner = Learner::DR;
  } else if (learner == "ipw") {
    cfg.learner = Learner::IPW;
  } else {
    throw ConfigError("[conformal] learner: expected ipw or dr, got '" + learner + "'");
  }
  cfg.weights.kind = parse_weight_kind(read.str("conformal", "scheme", "decay"));
  cfg.weights.psi = read.num("conformal", "psi", cfg.weights.psi);
  cfg.weights.w_inf = read.num("conformal", "w_inf", cfg.weights.w_inf);

  const std::string mode = read.str("run", "mode", "downward");
  if (mode == "downward") {
    cfg.mode = Mode::Downward;
  } else if (mode == "outward") {
    cfg.mode = Mode::Outward;
  } else {
    throw ConfigError("[run] mode: expected downward or outward, got '" + mode + "'");
  }
  cfg.train_frac = read.num("run", "train_frac", cfg.train_frac);
  cfg.seed = static_cast<std::uint64_t>(read.integer("run", "seed", 1));
  if (file.has("run", "train_horizon")) {
    cfg.train_horizon = static_cast<int>(read.integer("run", "train_horizon", 0));
  }
  cfg.augment_cal_with_test_history =
      read.flag("run", "augment_cal_with_test_history", false);

  cfg.nuisance_lambda.grid_size =
      static_cast<int>(read.integer("lambda", "nuisance_grid_size", 11));
  if (file.has("lambda", "nuisance_fixed")) {
    cfg.nuisance_lambda.fixed = read.num("lambda", "nuisance_fixed", 0.0);
  }
  cfg.quantile_lambda.grid_size =
      static_cast<int>(read.integer("lambda", "quantile_grid_size", 8));
  if (file.has("lambda", "quantile_fixed")) {
    cfg.quantile_lambda.fixed = read.num("lambda", "quantile_fixed", 0.0);
  }
  const int folds = static_cast<int>(read.integer("lambda", "folds", 5));
  const double ratio = read.num("lambda", "grid_ratio", 0.5);
  cfg.nuisance_lambda.folds = cfg.quantile_lambda.folds = folds;
  cfg.nuisance_lambda.grid_ratio = cfg.quantile_lambda.grid_ratio = ratio;

  cfg.validate();
  return cfg;
}

CompareSettings compare_from_config(const ConfigFile& file) {
  const Reader read(file);
  CompareSettings cmp;
  if (file.has("compare", "experiments")) {
    cmp.run_downward = cmp.run_outward = false;
    for (const auto& name : split_list(file.get("compare", "experiments", ""))) {
      if (name == "downward") {
        cmp.run_downward = true;
      } else if (name == "outward") {
        cmp.run_outward = true;
      } else {
        throw ConfigError("[compare] experiments: unknown experiment '" + name + "'");
      }
    }
  }
  if (file.has("compare", "schemes")) {
    cmp.schemes.clear();
    for (const auto& name : split_list(file.get("compare", "schemes", ""))) {
      cmp.schemes.push_back(parse_weight_kind(name));
    }
    if (cmp.schemes.empty()) throw ConfigError("[compare] schemes: empty list");
  }
  cmp.psis = read.numbers("compare", "psis", cmp.psis);
  cmp.downward_points =
      static_cast<int>(read.integer("compare", "downward_points", cmp.downward_points));
  cmp.downward_changepoint = static_cast<int>(
      read.integer("compare", "downward_changepoint", cmp.downward_changepoint));
  cmp.outward_points =
      static_cast<int>(read.integer("compare", "outward_points", cmp.outward_points));
  cmp.outward_horizon =
      static_cast<int>(read.integer("compare", "outward_horizon", cmp.outward_horizon));
  cmp.outward_changepoint = static_cast<int>(
      read.integer("compare", "outward_changepoint", cmp.outward_changepoint));
  return cmp;
}

}  // namespace itecp
