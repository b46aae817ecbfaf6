#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "itecp/pipeline.hpp"

namespace itecp {

enum class GroupBy { Overall, DecisionPoint };

// Coverage percentages and average length for one group of cells. Unbounded
// intervals count as covered and are excluded from the length average;
// collapsed intervals contribute zero length and are counted separately.
struct MetricsRow {
  int decision_point = -1;  // -1 means overall
  double cov_true = std::numeric_limits<double>::quiet_NaN();  // percent
  double cov_pseudo = std::numeric_limits<double>::quiet_NaN();
  double avg_length = std::numeric_limits<double>::quiet_NaN();
  long n_unbounded = 0;
  long n_cells = 0;
  long n_true_cells = 0;
  long n_collapsed = 0;
};

std::vector<MetricsRow> summarize(const IntervalBatch& batch, GroupBy group_by);

// Pools rows cell-weighted (every group key must match across inputs).
MetricsRow pool_overall(std::span<const MetricsRow> rows);

struct DominanceReport {
  bool fosd = false;  // V_phi first-order dominates V*
  bool sosd = false;  // V_phi <=_(2) V*
  bool mcx = false;   // V_phi >=_mcx V*
  std::optional<double> fosd_witness;  // first grid point violating the order
  std::optional<double> sosd_witness;
  std::optional<double> mcx_witness;
  double mean_phi = 0.0;
  double mean_star = 0.0;
};

// Empirical stochastic-ordering checks between observed and oracle conformity
// scores, evaluated on the pooled sample grid (or grid_size quantiles of it
// when 0 < grid_size < pooled size). FOSD/SOSD demand a strict inequality
// somewhere; MCX is the weak monotone-convex order, so identical samples pass.
DominanceReport check_dominance(std::span<const double> v_phi,
                                std::span<const double> v_star, int grid_size = 0);

std::string metrics_csv_header();
std::vector<std::string> metrics_csv_row(const MetricsRow& row, const std::string& group);

}  // namespace itecp
