#include "itecp/panel.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "itecp/csv.hpp"
#include "itecp/error.hpp"
#include "itecp/rng.hpp"

namespace itecp {

namespace {

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(std::string("non-finite ") + what + " value");
  }
}

}  // namespace

PanelDataset::PanelDataset(int n, int t, int p, std::vector<double> covariates,
                           std::vector<std::int8_t> actions, std::vector<double> outcomes,
                           std::vector<double> propensities,
                           std::optional<PotentialOutcomes> potential_outcomes,
                           std::vector<std::string> labels)
    : n_(n),
      t_(t),
      p_(p),
      covariates_(std::move(covariates)),
      actions_(std::move(actions)),
      outcomes_(std::move(outcomes)),
      propensities_(std::move(propensities)),
      potential_(std::move(potential_outcomes)),
      labels_(std::move(labels)) {
  if (n_ <= 0 || t_ <= 0 || p_ <= 0) throw ConfigError("panel dimensions must be positive");
  const size_t cells = static_cast<size_t>(n_) * t_;
  if (covariates_.size() != cells * p_ || actions_.size() != cells ||
      outcomes_.size() != cells || propensities_.size() != cells) {
    throw ConfigError("panel matrices do not share the N x T shape");
  }
  if (labels_.empty()) {
    labels_.reserve(n_);
    for (int i = 0; i < n_; ++i) labels_.push_back(std::to_string(i));
  }
  if (static_cast<int>(labels_.size()) != n_) throw ConfigError("label count != N");
  check_finite(covariates_, "covariate");
  check_finite(outcomes_, "outcome");
  for (size_t k = 0; k < cells; ++k) {
    if (actions_[k] != 0 && actions_[k] != 1) throw SchemaError("non-binary action");
    const double pi = propensities_[k];
    if (!(pi > 0.0) || !(pi < 1.0)) {
      throw PositivityError("propensity " + format_double(pi) + " outside (0,1) at (" +
                            labels_[k / t_] + "," + std::to_string(k % t_ + 1) + ")");
    }
  }
  if (potential_) {
    if (potential_->y0.size() != cells || potential_->y1.size() != cells) {
      throw ConfigError("potential outcome matrices do not share the N x T shape");
    }
    check_finite(potential_->y0, "potential outcome");
    check_finite(potential_->y1, "potential outcome");
    for (size_t k = 0; k < cells; ++k) {
      const double chosen = actions_[k] ? potential_->y1[k] : potential_->y0[k];
      if (outcomes_[k] != chosen) {
        throw ConfigError("consistency violated: outcome differs from selected potential "
                          "outcome at (" + labels_[k / t_] + "," +
                          std::to_string(k % t_ + 1) + ")");
      }
    }
    true_ite_.resize(cells);
    for (size_t k = 0; k < cells; ++k) true_ite_[k] = potential_->y1[k] - potential_->y0[k];
  }
}

PanelDataset PanelDataset::with_scrambled_outcomes(std::span<const int> individuals,
                                                   int from_point, double value) const {
  std::vector<double> outcomes = outcomes_;
  for (int i : individuals) {
    for (int j = from_point; j <= t_; ++j) {
      outcomes[cell(i, j)] = value;
    }
  }
  return PanelDataset(n_, t_, p_, covariates_, actions_, std::move(outcomes),
                      propensities_, std::nullopt, labels_);
}

PanelDataset load_csv(const std::string& path, const ColumnSchema& schema) {
  const CsvTable table = read_csv_file(path);

  const int id_col = table.column(schema.individual_id);
  const int t_col = table.column(schema.decision_point);
  const int a_col = table.column(schema.action);
  const int y_col = table.column(schema.outcome);
  const int pi_col = table.column(schema.propensity);
  for (const auto& [name, col] :
       {std::pair{schema.individual_id, id_col}, {schema.decision_point, t_col},
        {schema.action, a_col}, {schema.outcome, y_col}, {schema.propensity, pi_col}}) {
    if (col < 0) throw SchemaError(path + ": missing column '" + name + "'");
  }

  // Covariates must be prefix1..prefixP with no gaps.
  std::vector<int> x_cols;
  for (int p = 1;; ++p) {
    const int col = table.column(schema.covariate_prefix + std::to_string(p));
    if (col < 0) break;
    x_cols.push_back(col);
  }
  if (x_cols.empty()) {
    throw SchemaError(path + ": no covariate columns '" + schema.covariate_prefix + "1..'");
  }
  for (const auto& name : table.header) {
    if (name.rfind(schema.covariate_prefix, 0) == 0 &&
        name.size() > schema.covariate_prefix.size()) {
      const std::string tail = name.substr(schema.covariate_prefix.size());
      if (tail.find_first_not_of("0123456789") == std::string::npos) {
        const long idx = parse_long(tail, path);
        if (idx < 1 || idx > static_cast<long>(x_cols.size())) {
          throw SchemaError(path + ": covariate columns are not contiguous (" + name + ")");
        }
      }
    }
  }
  const int p_count = static_cast<int>(x_cols.size());

  // First pass: dense individual ids in order of first appearance, max t.
  std::unordered_map<std::string, int> id_index;
  std::vector<std::string> labels;
  int t_max = 0;
  for (const auto& row : table.rows) {
    const std::string& id = row[id_col];
    if (id_index.emplace(id, static_cast<int>(labels.size())).second) labels.push_back(id);
    const long t = parse_long(row[t_col], path + " column " + schema.decision_point);
    if (t < 1) throw SchemaError(path + ": decision points must be 1..T, got " + row[t_col]);
    t_max = std::max<int>(t_max, static_cast<int>(t));
  }
  const int n = static_cast<int>(labels.size());
  if (n == 0) throw SchemaError(path + ": no data rows");
  const size_t cells = static_cast<size_t>(n) * t_max;

  std::vector<double> covariates(cells * p_count);
  std::vector<std::int8_t> actions(cells);
  std::vector<double> outcomes(cells);
  std::vector<double> propensities(cells);
  std::vector<std::uint8_t> seen(cells, 0);

  for (const auto& row : table.rows) {
    const int i = id_index.at(row[id_col]);
    const int j = static_cast<int>(parse_long(row[t_col], path));
    const size_t k = static_cast<size_t>(i) * t_max + (j - 1);
    if (seen[k]) {
      throw SchemaError(path + ": duplicate cell (" + row[id_col] + "," +
                        std::to_string(j) + ")");
    }
    seen[k] = 1;
    const std::string ctx = "(" + row[id_col] + "," + std::to_string(j) + ")";
    const double a = parse_double(row[a_col], "action at " + ctx);
    if (a != 0.0 && a != 1.0) throw SchemaError("non-binary action at " + ctx);
    actions[k] = static_cast<std::int8_t>(a);
    outcomes[k] = parse_double(row[y_col], "outcome at " + ctx);
    const double pi = parse_double(row[pi_col], "propensity at " + ctx);
    if (!(pi > 0.0) || !(pi < 1.0)) {
      throw PositivityError("propensity " + row[pi_col] + " outside (0,1) at " + ctx);
    }
    propensities[k] = pi;
    for (int p = 0; p < p_count; ++p) {
      covariates[k * p_count + p] =
          parse_double(row[x_cols[p]], "covariate x" + std::to_string(p + 1) + " at " + ctx);
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 1; j <= t_max; ++j) {
      if (!seen[static_cast<size_t>(i) * t_max + (j - 1)]) {
        throw IncompletePanelError(labels[i], j);
      }
    }
  }

  return PanelDataset(n, t_max, p_count, std::move(covariates), std::move(actions),
                      std::move(outcomes), std::move(propensities), std::nullopt,
                      std::move(labels));
}

void write_csv(const PanelDataset& data, const std::string& path,
               const ColumnSchema& schema) {
  std::vector<std::string> header = {schema.individual_id, schema.decision_point,
                                     schema.action, schema.outcome, schema.propensity};
  for (int p = 1; p <= data.n_covariates(); ++p) {
    header.push_back(schema.covariate_prefix + std::to_string(p));
  }
  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<size_t>(data.n_individuals()) * data.n_points());
  for (int i = 0; i < data.n_individuals(); ++i) {
    for (int j = 1; j <= data.n_points(); ++j) {
      std::vector<std::string> row;
      row.reserve(header.size());
      row.push_back(data.label(i));
      row.push_back(std::to_string(j));
      row.push_back(std::to_string(data.action(i, j)));
      row.push_back(format_double(data.outcome(i, j)));
      row.push_back(format_double(data.propensity(i, j)));
      for (int p = 0; p < data.n_covariates(); ++p) {
        row.push_back(format_double(data.covariate(i, j, p)));
      }
      rows.push_back(std::move(row));
    }
  }
  write_csv_file(path, header, rows);
}

void write_potential_outcomes_csv(const PanelDataset& data, const std::string& path) {
  if (!data.has_potential_outcomes()) {
    throw Error("dataset has no potential outcomes to write");
  }
  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<size_t>(data.n_individuals()) * data.n_points());
  for (int i = 0; i < data.n_individuals(); ++i) {
    for (int j = 1; j <= data.n_points(); ++j) {
      rows.push_back({data.label(i), std::to_string(j),
                      format_double(data.potential_outcome(i, j, 0)),
                      format_double(data.potential_outcome(i, j, 1))});
    }
  }
  write_csv_file(path, {"individual_id", "decision_point", "y0", "y1"}, rows);
}

PanelDataset attach_potential_outcomes(const PanelDataset& data, const std::string& path) {
  const CsvTable table = read_csv_file(path);
  const int id_col = table.column("individual_id");
  const int t_col = table.column("decision_point");
  const int y0_col = table.column("y0");
  const int y1_col = table.column("y1");
  if (id_col < 0 || t_col < 0 || y0_col < 0 || y1_col < 0) {
    throw SchemaError(path + ": expected columns individual_id, decision_point, y0, y1");
  }
  std::unordered_map<std::string, int> id_index;
  for (int i = 0; i < data.n_individuals(); ++i) id_index.emplace(data.label(i), i);

  const int n = data.n_individuals();
  const int t = data.n_points();
  const int p = data.n_covariates();
  PotentialOutcomes po;
  po.y0.assign(static_cast<size_t>(n) * t, 0.0);
  po.y1.assign(static_cast<size_t>(n) * t, 0.0);
  std::vector<std::uint8_t> seen(static_cast<size_t>(n) * t, 0);
  for (const auto& row : table.rows) {
    auto it = id_index.find(row[id_col]);
    if (it == id_index.end()) {
      throw SchemaError(path + ": unknown individual '" + row[id_col] + "'");
    }
    const int j = static_cast<int>(parse_long(row[t_col], path));
    if (j < 1 || j > t) throw SchemaError(path + ": decision point out of range");
    const size_t k = static_cast<size_t>(it->second) * t + (j - 1);
    seen[k] = 1;
    po.y0[k] = parse_double(row[y0_col], path);
    po.y1[k] = parse_double(row[y1_col], path);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 1; j <= t; ++j) {
      if (!seen[static_cast<size_t>(i) * t + (j - 1)]) {
        throw IncompletePanelError(data.label(i), j);
      }
    }
  }

  std::vector<double> covariates;
  covariates.reserve(static_cast<size_t>(n) * t * p);
  std::vector<std::int8_t> actions;
  std::vector<double> outcomes, propensities;
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) {
    labels.push_back(data.label(i));
    for (int j = 1; j <= t; ++j) {
      auto row = data.covariate_row(i, j);
      covariates.insert(covariates.end(), row.begin(), row.end());
      actions.push_back(static_cast<std::int8_t>(data.action(i, j)));
      outcomes.push_back(data.outcome(i, j));
      propensities.push_back(data.propensity(i, j));
    }
  }
  return PanelDataset(n, t, p, std::move(covariates), std::move(actions),
                      std::move(outcomes), std::move(propensities), std::move(po),
                      std::move(labels));
}

TrainingSplit split(const PanelDataset& data, const SplitFractions& fractions,
                    std::uint64_t seed, std::optional<int> horizon) {
  const int n = data.n_individuals();
  if (n < 4) throw ConfigError("split requires at least 4 individuals");
  if (!(fractions.train_frac > 0.0) || !(fractions.train_frac < 1.0)) {
    throw ConfigError("train_frac must be in (0,1)");
  }
  const int n_train = static_cast<int>(std::llround(fractions.train_frac * n));
  const int n_test = n - n_train;
  const int base = n_train / 3;
  const int rem = n_train % 3;
  const int sizes[3] = {base + (rem > 0 ? 1 : 0), base + (rem > 1 ? 1 : 0), base};
  if (sizes[2] == 0 || n_test == 0) {
    throw ConfigError("split produced an empty set (N=" + std::to_string(n) +
                      ", train_frac=" + format_double(fractions.train_frac) + ")");
  }

  Rng rng(derive_seed(seed, 0x5A11D));
  const std::vector<int> order = shuffled_indices(n, rng);

  TrainingSplit out;
  int pos = 0;
  auto take = [&](int count) {
    std::vector<int> ids(order.begin() + pos, order.begin() + pos + count);
    pos += count;
    std::sort(ids.begin(), ids.end());
    return ids;
  };
  out.nuisance_ids = take(sizes[0]);
  out.model_ids = take(sizes[1]);
  out.calibration_ids = take(sizes[2]);
  out.test_ids = take(n_test);

  out.train_horizon = horizon.value_or(data.n_points());
  if (out.train_horizon < 1 || out.train_horizon > data.n_points()) {
    throw ConfigError("train_horizon must be in 1..T");
  }
  return out;
}

}  // namespace itecp
