#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <optional>

#include "itecp/config_file.hpp"
#include "itecp/csv.hpp"
#include "itecp/error.hpp"
#include "itecp/evaluation.hpp"
#include "itecp/parallel.hpp"
#include "itecp/pipeline.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace itecp;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<long> seed;
  int replicates = 1;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config file")->required();
  cmd->add_option("--out", args.out_dir, "output directory")->required();
  cmd->add_option("--seed", args.seed, "override both data and run seeds");
  cmd->add_option("--replicates", args.replicates, "number of replicate seeds (seed, seed+1, ...)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--set", args.overrides, "override a config value, section.key=value");
}

ConfigFile load_config(const CommonArgs& args) {
  ConfigFile file = ConfigFile::parse_file(args.config_path);
  for (const auto& assignment : args.overrides) file.set_override(assignment);
  return file;
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

struct RunStatus {
  std::string key;
  bool ok = false;
  std::string error;
};

class Manifest {
 public:
  Manifest(std::string command, const ConfigFile& config, std::string out_dir)
      : command_(std::move(command)), out_dir_(std::move(out_dir)) {
    char digest[32];
    std::snprintf(digest, sizeof(digest), "fnv1a:%016llx",
                  static_cast<unsigned long long>(fnv1a64(config.canonical())));
    digest_ = digest;
  }

  void set_seeds(const std::vector<std::uint64_t>& seeds) {
    for (auto s : seeds) seeds_.push_back(s);
  }
  void add_output(const std::string& name) { outputs_.push_back(name); }
  void add_run(RunStatus status) { runs_.push_back(std::move(status)); }

  bool all_ok() const {
    for (const auto& r : runs_) {
      if (!r.ok) return false;
    }
    return true;
  }

  void write() const {
    json doc;
    doc["command"] = command_;
    doc["config_digest"] = digest_;
    doc["out_dir"] = out_dir_;
    doc["seeds"] = seeds_;
    doc["outputs"] = outputs_;
    json runs = json::array();
    for (const auto& r : runs_) {
      json item;
      item["key"] = r.key;
      item["status"] = r.ok ? "ok" : "failed";
      if (!r.ok) item["error"] = r.error;
      runs.push_back(item);
    }
    doc["runs"] = runs;
    doc["status"] = all_ok() ? "ok" : "failed";
    write_text_atomic(fs::path(out_dir_) / "manifest.json", doc.dump(2) + "\n");
  }

 private:
  std::string command_, out_dir_, digest_;
  std::vector<std::uint64_t> seeds_;
  std::vector<std::string> outputs_;
  std::vector<RunStatus> runs_;
};

std::vector<std::uint64_t> replicate_seeds(std::uint64_t base, int replicates) {
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < replicates; ++k) seeds.push_back(base + static_cast<std::uint64_t>(k));
  return seeds;
}

int cmd_simulate(const CommonArgs& args) {
  const ConfigFile file = load_config(args);
  SimConfig sim = sim_from_config(file);
  if (args.seed) sim.seed = static_cast<std::uint64_t>(*args.seed);

  Manifest manifest("simulate", file, args.out_dir);
  manifest.set_seeds({sim.seed});
  const PanelDataset data = generate(sim, worker_count_from_env());
  write_csv(data, (fs::path(args.out_dir) / "panel.csv").string());
  write_potential_outcomes_csv(data,
                               (fs::path(args.out_dir) / "potential_outcomes.csv").string());
  manifest.add_output("panel.csv");
  manifest.add_output("potential_outcomes.csv");
  manifest.add_run({"seed=" + std::to_string(sim.seed), true, ""});
  manifest.write();
  return 0;
}

struct SeedResult {
  bool ok = false;
  std::string error;
  MetricsRow overall;
  std::vector<MetricsRow> by_point;
  std::optional<DominanceReport> dominance;
  std::vector<std::vector<std::string>> interval_rows;
};

std::string bound_field(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

int cmd_run(const CommonArgs& args) {
  const ConfigFile file = load_config(args);
  ExperimentConfig base = experiment_from_config(file);
  const bool reseed = args.seed.has_value() || args.replicates > 1;
  const std::uint64_t base_seed =
      args.seed ? static_cast<std::uint64_t>(*args.seed) : base.seed;
  const std::vector<std::uint64_t> seeds = replicate_seeds(base_seed, args.replicates);

  const int workers = worker_count_from_env();
  const int outer = std::min<int>(workers, static_cast<int>(seeds.size()));
  const int inner = static_cast<int>(seeds.size()) > 1 ? 1 : workers;

  std::vector<SeedResult> results(seeds.size());
  parallel_for(static_cast<int>(seeds.size()), outer, [&](int k) {
    SeedResult& res = results[k];
    try {
      ExperimentConfig cfg = base;
      cfg.n_threads = inner;
      if (reseed) {
        cfg.seed = seeds[k];
        if (cfg.sim) cfg.sim->seed = seeds[k];
      }
      const PipelineCore core = run_core(cfg);
      const IntervalBatch batch = apply_weights(core, cfg.weights, cfg.alpha);
      res.overall = summarize(batch, GroupBy::Overall).front();
      res.by_point = summarize(batch, GroupBy::DecisionPoint);
      if (!batch.scores_oracle.empty()) {
        res.dominance = check_dominance(batch.scores_phi, batch.scores_oracle);
      }
      const std::string seed_str = std::to_string(seeds[k]);
      res.interval_rows.reserve(batch.records.size());
      for (const auto& rec : batch.records) {
        res.interval_rows.push_back(
            {seed_str, core.data.label(rec.individual),
             std::to_string(rec.decision_point), bound_field(rec.interval.lower),
             bound_field(rec.interval.upper), bound_field(rec.interval.q_hat),
             format_double(rec.pseudo),
             rec.has_true ? format_double(rec.true_ite) : std::string("NA"),
             rec.covered_pseudo ? "1" : "0",
             rec.has_true ? (rec.covered_true ? "1" : "0") : std::string("NA"),
             bound_field(rec.length)});
      }
      res.ok = true;
    } catch (const std::exception& e) {
      res.error = e.what();
    }
  });

  Manifest manifest("run", file, args.out_dir);
  manifest.set_seeds(seeds);

  std::vector<std::vector<std::string>> summary_rows, by_point_rows, interval_rows,
      dominance_rows;
  std::vector<MetricsRow> pooled_overall;
  for (size_t k = 0; k < seeds.size(); ++k) {
    const auto& res = results[k];
    manifest.add_run({"seed=" + std::to_string(seeds[k]), res.ok, res.error});
    if (!res.ok) continue;
    const std::string seed_str = std::to_string(seeds[k]);
    {
      auto row = metrics_csv_row(res.overall, "overall");
      row.insert(row.begin(), seed_str);
      summary_rows.push_back(std::move(row));
    }
    pooled_overall.push_back(res.overall);
    for (const auto& m : res.by_point) {
      auto row = metrics_csv_row(m, std::to_string(m.decision_point));
      row.insert(row.begin(), seed_str);
      by_point_rows.push_back(std::move(row));
    }
    for (const auto& row : res.interval_rows) interval_rows.push_back(row);
    if (res.dominance) {
      const auto& d = *res.dominance;
      auto field = [](const std::optional<double>& w) {
        return w ? format_double(*w) : std::string("NA");
      };
      dominance_rows.push_back(
          {seed_str, "fosd", d.fosd ? "1" : "0", field(d.fosd_witness)});
      dominance_rows.push_back(
          {seed_str, "sosd", d.sosd ? "1" : "0", field(d.sosd_witness)});
      dominance_rows.push_back({seed_str, "mcx", d.mcx ? "1" : "0", field(d.mcx_witness)});
    }
  }
  if (!pooled_overall.empty()) {
    auto row = metrics_csv_row(pool_overall(pooled_overall), "overall");
    row.insert(row.begin(), "pooled");
    summary_rows.push_back(std::move(row));
  }

  const fs::path out(args.out_dir);
  const std::string metrics_header = metrics_csv_header();
  auto with_seed = [&](const std::string& header) {
    return "seed," + header;
  };
  write_csv_file((out / "summary.csv").string(),
                 {with_seed(metrics_header)}, summary_rows);
  write_csv_file((out / "by_decision_point.csv").string(),
                 {with_seed(metrics_header)}, by_point_rows);
  write_csv_file((out / "intervals.csv").string(),
                 {"seed,individual_id,decision_point,lower,upper,q_hat,pseudo_outcome,"
                  "true_ite,covered_pseudo,covered_true,length"},
                 interval_rows);
  manifest.add_output("summary.csv");
  manifest.add_output("by_decision_point.csv");
  manifest.add_output("intervals.csv");
  if (!dominance_rows.empty()) {
    write_csv_file((out / "dominance.csv").string(), {"seed,order,holds,witness"},
                   dominance_rows);
    manifest.add_output("dominance.csv");
  }
  manifest.add_output("manifest.json");
  manifest.write();
  return manifest.all_ok() ? 0 : 1;
}

struct SchemeChoice {
  WeightScheme scheme;
  std::string psi_label;  // empty for equal weights
};

int cmd_compare_weights(const CommonArgs& args) {
  const ConfigFile file = load_config(args);
  ExperimentConfig base = experiment_from_config(file);
  if (!base.sim) throw ConfigError("compare-weights requires a synthetic data source");
  const CompareSettings cmp = compare_from_config(file);

  std::vector<SchemeChoice> choices;
  for (WeightKind kind : cmp.schemes) {
    if (kind == WeightKind::Equal) {
      WeightScheme s{kind, base.weights.psi, base.weights.w_inf};
      choices.push_back({s, ""});
    } else {
      for (double psi : cmp.psis) {
        WeightScheme s{kind, psi, base.weights.w_inf};
        choices.push_back({s, format_double(psi)});
      }
    }
  }

  const std::uint64_t base_seed =
      args.seed ? static_cast<std::uint64_t>(*args.seed) : base.seed;
  const std::vector<std::uint64_t> seeds = replicate_seeds(base_seed, args.replicates);
  const int workers = worker_count_from_env();
  const int outer = std::min<int>(workers, static_cast<int>(seeds.size()));
  const int inner = static_cast<int>(seeds.size()) > 1 ? 1 : workers;

  Manifest manifest("compare-weights", file, args.out_dir);
  manifest.set_seeds(seeds);
  const fs::path out(args.out_dir);

  struct Experiment {
    std::string name;
    ExperimentConfig cfg;
  };
  std::vector<Experiment> experiments;
  if (cmp.run_downward) {
    ExperimentConfig cfg = base;
    cfg.mode = Mode::Downward;
    cfg.train_horizon.reset();
    cfg.sim->n_points = cmp.downward_points;
    cfg.sim->changepoint = cmp.downward_changepoint;
    experiments.push_back({"downward", cfg});
  }
  if (cmp.run_outward) {
    ExperimentConfig cfg = base;
    cfg.mode = Mode::Outward;
    cfg.train_horizon = cmp.outward_horizon;
    cfg.sim->n_points = cmp.outward_points;
    cfg.sim->changepoint = cmp.outward_changepoint;
    experiments.push_back({"outward", cfg});
  }

  bool any_rows = false;
  for (const auto& experiment : experiments) {
    struct PerSeed {
      bool core_ok = false;
      std::string core_error;
      // per choice: ok/error + metrics
      std::vector<RunStatus> statuses;
      std::vector<MetricsRow> overall;
      std::vector<std::vector<MetricsRow>> traces;
    };
    std::vector<PerSeed> per_seed(seeds.size());

    parallel_for(static_cast<int>(seeds.size()), outer, [&](int k) {
      PerSeed& slot = per_seed[k];
      slot.statuses.resize(choices.size());
      slot.overall.resize(choices.size());
      slot.traces.resize(choices.size());
      ExperimentConfig cfg = experiment.cfg;
      cfg.n_threads = inner;
      cfg.seed = seeds[k];
      cfg.sim->seed = seeds[k];
      std::optional<PipelineCore> core;
      try {
        core = run_core(cfg);
        slot.core_ok = true;
      } catch (const std::exception& e) {
        slot.core_error = e.what();
        return;
      }
      for (size_t c = 0; c < choices.size(); ++c) {
        const std::string key = experiment.name + "/seed=" + std::to_string(seeds[k]) +
                                "/scheme=" + weight_kind_name(choices[c].scheme.kind) +
                                (choices[c].psi_label.empty() ? ""
                                                              : "/psi=" + choices[c].psi_label);
        try {
          const IntervalBatch batch =
              apply_weights(*core, choices[c].scheme, cfg.alpha);
          slot.overall[c] = summarize(batch, GroupBy::Overall).front();
          slot.traces[c] = summarize(batch, GroupBy::DecisionPoint);
          slot.statuses[c] = {key, true, ""};
        } catch (const std::exception& e) {
          slot.statuses[c] = {key, false, e.what()};
        }
      }
    });

    for (size_t k = 0; k < seeds.size(); ++k) {
      const PerSeed& slot = per_seed[k];
      const std::string key = experiment.name + "/seed=" + std::to_string(seeds[k]);
      if (!slot.core_ok) {
        manifest.add_run({key, false, slot.core_error});
        continue;
      }
      for (const auto& status : slot.statuses) manifest.add_run(status);
    }

    std::vector<std::vector<std::string>> trace_rows, summary_rows;
    for (size_t c = 0; c < choices.size(); ++c) {
      const std::string scheme_name = weight_kind_name(choices[c].scheme.kind);
      std::vector<MetricsRow> pooled_overall;
      std::map<int, std::vector<MetricsRow>> pooled_by_t;
      for (size_t k = 0; k < seeds.size(); ++k) {
        const PerSeed& slot = per_seed[k];
        if (!slot.core_ok || !slot.statuses[c].ok) continue;
        const std::string seed_str = std::to_string(seeds[k]);
        {
          auto row = metrics_csv_row(slot.overall[c], "overall");
          row.insert(row.begin(), {scheme_name, choices[c].psi_label, seed_str});
          summary_rows.push_back(std::move(row));
        }
        pooled_overall.push_back(slot.overall[c]);
        for (const auto& m : slot.traces[c]) {
          auto row = metrics_csv_row(m, std::to_string(m.decision_point));
          row.insert(row.begin(), {scheme_name, choices[c].psi_label, seed_str});
          trace_rows.push_back(std::move(row));
          pooled_by_t[m.decision_point].push_back(m);
        }
      }
      if (!pooled_overall.empty()) {
        auto row = metrics_csv_row(pool_overall(pooled_overall), "overall");
        row.insert(row.begin(), {scheme_name, choices[c].psi_label, "pooled"});
        summary_rows.push_back(std::move(row));
      }
      for (const auto& [t, rows] : pooled_by_t) {
        auto row = metrics_csv_row(pool_overall(rows), std::to_string(t));
        row.insert(row.begin(), {scheme_name, choices[c].psi_label, "pooled"});
        trace_rows.push_back(std::move(row));
      }
    }

    const std::string header = "scheme,psi,seed," + metrics_csv_header();
    write_csv_file((out / ("trace_" + experiment.name + ".csv")).string(), {header},
                   trace_rows);
    write_csv_file((out / ("summary_" + experiment.name + ".csv")).string(), {header},
                   summary_rows);
    manifest.add_output("trace_" + experiment.name + ".csv");
    manifest.add_output("summary_" + experiment.name + ".csv");
    any_rows = any_rows || !trace_rows.empty();
  }

  manifest.add_output("manifest.json");
  manifest.write();
  if (!any_rows) return 1;
  return manifest.all_ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal prediction intervals for time-varying individual "
               "treatment effects in panel data"};
  app.require_subcommand(1);

  CommonArgs sim_args, run_args, cmp_args;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "generate a synthetic MRT panel and write it as CSV");
  add_common(sim_cmd, sim_args);
  CLI::App* run_cmd = app.add_subcommand(
      "run", "run the interval-construction pipeline and write metric tables");
  add_common(run_cmd, run_args);
  CLI::App* cmp_cmd = app.add_subcommand(
      "compare-weights", "changepoint experiments comparing calibration weighting schemes");
  add_common(cmp_cmd, cmp_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_cmd->parsed()) return cmd_simulate(sim_args);
    if (run_cmd->parsed()) return cmd_run(run_args);
    if (cmp_cmd->parsed()) return cmd_compare_weights(cmp_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
