#include "itecp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "itecp/csv.hpp"
#include "itecp/error.hpp"

namespace itecp {

namespace {

struct Accumulator {
  long n_cells = 0;
  long covered_pseudo = 0;
  long n_true = 0;
  long covered_true = 0;
  long n_unbounded = 0;
  long n_collapsed = 0;
  double length_sum = 0.0;
  long length_n = 0;

  void add(const IntervalRecord& rec) {
    ++n_cells;
    if (rec.covered_pseudo) ++covered_pseudo;
    if (rec.has_true) {
      ++n_true;
      if (rec.covered_true) ++covered_true;
    }
    if (rec.interval.unbounded) {
      ++n_unbounded;
    } else {
      length_sum += rec.length;
      ++length_n;
    }
    if (rec.interval.collapsed) ++n_collapsed;
  }

  MetricsRow row(int decision_point) const {
    MetricsRow out;
    out.decision_point = decision_point;
    out.n_cells = n_cells;
    out.n_true_cells = n_true;
    out.n_unbounded = n_unbounded;
    out.n_collapsed = n_collapsed;
    if (n_cells > 0) out.cov_pseudo = 100.0 * covered_pseudo / n_cells;
    if (n_true > 0) out.cov_true = 100.0 * covered_true / n_true;
    if (length_n > 0) out.avg_length = length_sum / length_n;
    return out;
  }
};

}  // namespace

std::vector<MetricsRow> summarize(const IntervalBatch& batch, GroupBy group_by) {
  if (group_by == GroupBy::Overall) {
    Accumulator acc;
    for (const auto& rec : batch.records) acc.add(rec);
    return {acc.row(-1)};
  }
  std::map<int, Accumulator> groups;
  for (const auto& rec : batch.records) groups[rec.decision_point].add(rec);
  std::vector<MetricsRow> rows;
  rows.reserve(groups.size());
  for (const auto& [t, acc] : groups) rows.push_back(acc.row(t));
  return rows;
}

MetricsRow pool_overall(std::span<const MetricsRow> rows) {
  MetricsRow out;
  double pseudo_sum = 0.0, true_sum = 0.0, len_sum = 0.0;
  long len_n = 0;
  for (const auto& r : rows) {
    out.n_cells += r.n_cells;
    out.n_true_cells += r.n_true_cells;
    out.n_unbounded += r.n_unbounded;
    out.n_collapsed += r.n_collapsed;
    if (r.n_cells > 0 && std::isfinite(r.cov_pseudo)) {
      pseudo_sum += r.cov_pseudo / 100.0 * r.n_cells;
    }
    if (r.n_true_cells > 0 && std::isfinite(r.cov_true)) {
      true_sum += r.cov_true / 100.0 * r.n_true_cells;
    }
    const long bounded = r.n_cells - r.n_unbounded;
    if (bounded > 0 && std::isfinite(r.avg_length)) {
      len_sum += r.avg_length * bounded;
      len_n += bounded;
    }
  }
  if (out.n_cells > 0) out.cov_pseudo = 100.0 * pseudo_sum / out.n_cells;
  if (out.n_true_cells > 0) out.cov_true = 100.0 * true_sum / out.n_true_cells;
  if (len_n > 0) out.avg_length = len_sum / len_n;
  return out;
}

namespace {

// E[(X - c)_+] for sorted sample with suffix sums; O(log n) per query.
double hinge_mean(const std::vector<double>& sorted, const std::vector<double>& suffix,
                  double c) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), c);
  const size_t k = static_cast<size_t>(it - sorted.begin());
  const size_t m = sorted.size() - k;
  if (m == 0) return 0.0;
  return (suffix[k] - c * static_cast<double>(m)) / static_cast<double>(sorted.size());
}

double ecdf(const std::vector<double>& sorted, double v) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), v);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

}  // namespace

DominanceReport check_dominance(std::span<const double> v_phi,
                                std::span<const double> v_star, int grid_size) {
  if (v_phi.empty() || v_star.empty()) throw Error("check_dominance: empty sample");
  std::vector<double> phi(v_phi.begin(), v_phi.end());
  std::vector<double> star(v_star.begin(), v_star.end());
  std::sort(phi.begin(), phi.end());
  std::sort(star.begin(), star.end());

  std::vector<double> grid;
  grid.reserve(phi.size() + star.size());
  std::merge(phi.begin(), phi.end(), star.begin(), star.end(), std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid_size > 0 && static_cast<size_t>(grid_size) < grid.size()) {
    std::vector<double> sub;
    sub.reserve(grid_size);
    for (int k = 0; k < grid_size; ++k) {
      const size_t idx = static_cast<size_t>(
          static_cast<double>(k) * (grid.size() - 1) / std::max(grid_size - 1, 1));
      sub.push_back(grid[idx]);
    }
    sub.erase(std::unique(sub.begin(), sub.end()), sub.end());
    grid = std::move(sub);
  }

  std::vector<double> phi_suffix(phi.size() + 1, 0.0);
  for (size_t k = phi.size(); k-- > 0;) phi_suffix[k] = phi_suffix[k + 1] + phi[k];
  std::vector<double> star_suffix(star.size() + 1, 0.0);
  for (size_t k = star.size(); k-- > 0;) star_suffix[k] = star_suffix[k + 1] + star[k];

  DominanceReport report;
  report.mean_phi = phi_suffix[0] / static_cast<double>(phi.size());
  report.mean_star = star_suffix[0] / static_cast<double>(star.size());

  constexpr double kTol = 1e-9;

  // FOSD: F_phi <= F_star everywhere on the grid, strictly below somewhere.
  {
    bool ok = true;
    bool strict = false;
    for (double v : grid) {
      const double d = ecdf(phi, v) - ecdf(star, v);
      if (d > kTol) {
        ok = false;
        report.fosd_witness = v;
        break;
      }
      if (d < -kTol) strict = true;
    }
    report.fosd = ok && strict;
  }

  // SOSD condition V_phi <=_(2) V*: the running integral of (F_phi - F_star)
  // stays non-negative, strictly positive somewhere.
  {
    bool ok = true;
    bool strict = false;
    double integral = 0.0;
    for (size_t k = 0; k + 1 <= grid.size(); ++k) {
      if (k > 0) {
        integral += (ecdf(phi, grid[k - 1]) - ecdf(star, grid[k - 1])) *
                    (grid[k] - grid[k - 1]);
      }
      if (integral < -kTol) {
        ok = false;
        report.sosd_witness = grid[k];
        break;
      }
      if (integral > kTol) strict = true;
    }
    report.sosd = ok && strict;
  }

  // MCX: E[(V_phi - c)_+] >= E[(V* - c)_+] for every grid c, and the means are
  // ordered. Weak inequalities: equality in distribution passes.
  {
    bool ok = report.mean_phi >= report.mean_star - kTol;
    if (!ok) report.mcx_witness = -std::numeric_limits<double>::infinity();
    if (ok) {
      for (double c : grid) {
        if (hinge_mean(phi, phi_suffix, c) < hinge_mean(star, star_suffix, c) - kTol) {
          ok = false;
          report.mcx_witness = c;
          break;
        }
      }
    }
    report.mcx = ok;
  }
  return report;
}

std::string metrics_csv_header() {
  return "group,cov_true,cov_pseudo,avg_length,n_unbounded,n_collapsed,n_cells";
}

namespace {
std::string metric_field(double v) {
  return std::isfinite(v) ? format_double(v) : std::string("NA");
}
}  // namespace

std::vector<std::string> metrics_csv_row(const MetricsRow& row, const std::string& group) {
  return {group,
          metric_field(row.cov_true),
          metric_field(row.cov_pseudo),
          metric_field(row.avg_length),
          std::to_string(row.n_unbounded),
          std::to_string(row.n_collapsed),
          std::to_string(row.n_cells)};
}

}  // namespace itecp
