#include "ilsched/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "ilsched/error.hpp"
#include "ilsched/exact.hpp"
#include "ilsched/experiment.hpp"
#include "ilsched/textio.hpp"

namespace ilsched {
namespace {

namespace fs = std::filesystem;
using textio::format_double;

struct Config {
  std::string platform = "G1";
  std::string workload;            // JSON workload file; empty = the 500-frame mix
  std::vector<std::string> dags;   // DAG files replacing the built-in applications
  std::vector<double> rates;       // absolute, frames/ms
  std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5};
  std::uint64_t seed = 1;
  double noise = 0.0;
  std::uint64_t noise_seed = 1;
  std::string objective = "performance";
  int pred_slots = 4;
  bool base_schema = false;
  std::string out;
  bool serial = false;

  ExecMode mode() const { return serial ? ExecMode::serial : ExecMode::parallel; }
  SimOptions sim() const {
    SimOptions s;
    s.noise_pct = noise;
    s.seed = noise_seed;
    return s;
  }
};

ArchitectureGraph resolve_platform(const std::string& name_or_file) {
  for (const auto& n : builtin_platform_names()) {
    if (n == name_or_file) return builtin_platform(n);
  }
  if (!fs::exists(name_or_file)) throw UnknownConfig("'" + name_or_file + "' is neither a built-in platform nor a file");
  return load_platform(textio::read_file(name_or_file));
}

std::vector<ApplicationGraph> resolve_apps(const Config& c) {
  if (c.dags.empty()) return builtin_suite();
  std::vector<ApplicationGraph> apps;
  for (const auto& f : c.dags) apps.push_back(load_dag(textio::read_file(f)));
  return apps;
}

WorkloadSpec resolve_workload(const Config& c) {
  if (c.workload.empty()) return mixed_workload(1.0, c.seed);
  WorkloadSpec w = load_workload(textio::read_file(c.workload));
  w.seed = c.seed;
  return w;
}

Pipeline resolve_pipeline(const Config& c, const std::string& platform) {
  auto apps = resolve_apps(c);
  WorkloadSpec mix = resolve_workload(c);
  std::vector<std::string> names;
  for (const auto& a : apps) names.push_back(a.name);
  for (const auto& e : mix.entries) {
    if (std::find(names.begin(), names.end(), e.app) == names.end()) {
      throw UnknownApp("workload references unknown application '" + e.app + "'");
    }
  }
  return build_pipeline(resolve_platform(platform), std::move(apps), std::move(mix), c.fractions, c.rates,
                        c.pred_slots, !c.base_schema);
}

fs::path out_dir(const Config& c) { return fs::path(c.out); }

// Writes, then reads back; any difference is an I/O failure.
void write_checked(const fs::path& path, const std::string& contents, std::ostream& out) {
  textio::write_file(path, contents);
  if (textio::read_file(path) != contents) throw IoError("read-back of " + path.string() + " differs");
  out << "wrote " << path.string() << "\n";
}

std::string pct(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << 100.0 * v << "%";
  return s.str();
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

void print_rates(const Pipeline& p, std::ostream& out) {
  out << "platform " << p.arch.name << ", saturation " << fixed(p.saturation, 3) << " frames/ms, rates";
  for (double r : p.rates) out << " " << fixed(r, 3);
  out << "\n";
}

// ---- gen-dataset ---------------------------------------------------------------------

int cmd_gen_dataset(const Config& c, const std::string& output, std::ostream& out) {
  const Pipeline p = resolve_pipeline(c, c.platform);
  const Objective obj = parse_objective(c.objective);
  print_rates(p, out);
  OracleRun run = oracle_dataset(p.arch, p.apps, p.traces, obj, p.schema, c.sim(), c.mode());
  if (run.dataset.rows.empty()) throw EmptyDataset("the oracle made no decisions");
  run.dataset.validate();
  const fs::path path = output.empty() ? out_dir(c) / "dataset.csv" : fs::path(output);
  write_checked(path, dump_dataset(run.dataset), out);

  out << "rows " << run.dataset.rows.size() << " features " << p.schema.size() << "\n";
  std::map<std::pair<int, int>, std::size_t> hist;
  for (const auto& r : run.dataset.rows) ++hist[{r.cluster, r.pe_index}];
  out << "label histogram (cluster.pe: rows)\n";
  for (const auto& [label, n] : hist) {
    out << "  " << p.schema.cluster_names[static_cast<std::size_t>(label.first)] << "." << label.second << ": " << n
        << "\n";
  }
  return 0;
}

// ---- train ----------------------------------------------------------------------------

struct TrainArgs {
  std::string dataset;
  double holdout = 0.2;
  std::uint64_t split_seed = 1;
  int cluster_depth = -1;
  int pe_depth = -1;
  int min_leaf = 4;
  bool allow_starving = false;
  bool flat = false;
};

PolicyParams resolve_params(const Config& c, const TrainArgs& t, Objective obj) {
  PolicyParams params = default_params(obj);
  if (t.cluster_depth >= 0) params.cluster_depth = t.cluster_depth;
  if (t.pe_depth >= 0) params.pe_depth = t.pe_depth;
  params.min_leaf = t.min_leaf;
  params.allow_starving = t.allow_starving || obj != Objective::performance;
  params.mode = c.mode();
  return params;
}

int cmd_train(const Config& c, const TrainArgs& t, std::ostream& out) {
  const Objective obj = parse_objective(c.objective);
  const Dataset data = load_dataset(textio::read_file(t.dataset));
  if (data.rows.empty()) throw EmptyDataset(t.dataset + " has no rows");
  if (t.holdout < 0.0 || t.holdout >= 1.0) throw ValidationError("holdout must be in [0, 1)");

  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> eval_rows;
  if (t.holdout > 0.0) {
    DataSplit split = stratified_split(data, t.holdout, t.split_seed);
    train_rows = std::move(split.train);
    eval_rows = std::move(split.test);
  } else {
    for (std::size_t i = 0; i < data.rows.size(); ++i) train_rows.push_back(i);
    eval_rows = train_rows;
  }
  const PolicyParams params = resolve_params(c, t, obj);
  const HierarchicalPolicy policy = train_hierarchical(data, obj, params, &train_rows);
  const std::string model = dump_policy(policy);
  load_policy(model);
  write_checked(out_dir(c) / "model.json", model, out);

  const AccuracyReport acc = evaluate_accuracy(policy, data, eval_rows);
  const std::string split_name = t.holdout > 0.0 ? "heldout" : "train";
  std::string csv = "# ilsched-accuracy format_version=1 split=" + split_name + " rows=" + std::to_string(acc.rows) + "\n";
  csv += "policy,rows,accuracy\n";
  csv += "cluster," + std::to_string(acc.rows) + "," + format_double(acc.cluster) + "\n";
  out << "policy        rows    accuracy (" << split_name << ")\n";
  out << "cluster       " << std::setw(7) << acc.rows << " " << pct(acc.cluster) << "\n";
  for (std::size_t k = 0; k < acc.pe.size(); ++k) {
    const std::string& name = policy.schema.cluster_names[k];
    csv += "pe:" + name + "," + std::to_string(acc.pe_rows[k]) + "," + format_double(acc.pe[k]) + "\n";
    out << std::left << std::setw(14) << ("pe:" + name) << std::right << std::setw(7) << acc.pe_rows[k] << " "
        << pct(acc.pe[k]) << (policy.pe_trees[k] ? "" : " (constant)") << "\n";
  }
  csv += "composite," + std::to_string(acc.rows) + "," + format_double(acc.composite) + "\n";
  out << "composite     " << std::setw(7) << acc.rows << " " << pct(acc.composite) << "\n";
  if (t.flat) {
    const FlatPolicy flat = train_flat(data, obj, params.cluster_depth, params.min_leaf, &train_rows, c.mode());
    const double fa = flat_accuracy(flat, data, eval_rows);
    csv += "flat," + std::to_string(acc.rows) + "," + format_double(fa) + "\n";
    out << "flat          " << std::setw(7) << acc.rows << " " << pct(fa) << "\n";
    write_checked(out_dir(c) / "flat_model.json", dump_flat_policy(flat), out);
  }
  write_checked(out_dir(c) / "accuracy.csv", csv, out);
  return 0;
}

// ---- dagger ---------------------------------------------------------------------------

struct DaggerArgs {
  std::string model;
  std::string dataset;
  int max_iters = 10;
  double target = 0.02;
  TrainArgs train;
};

int cmd_dagger(const Config& c, const DaggerArgs& a, std::ostream& out) {
  const HierarchicalPolicy initial = load_policy(textio::read_file(a.model));
  const Dataset data = load_dataset(textio::read_file(a.dataset));
  require_same_schema(initial.schema, data.schema);
  const Pipeline p = resolve_pipeline(c, c.platform);
  print_rates(p, out);

  DaggerOptions opts;
  opts.max_iters = a.max_iters;
  opts.target_pct = a.target;
  opts.params = initial.params;
  opts.params.allow_starving = opts.params.allow_starving || a.train.allow_starving;
  opts.sim = c.sim();
  opts.mode = c.mode();
  const DaggerResult r = dagger_run(initial, data, p.arch, p.apps, p.traces, opts);

  std::string csv = "# ilsched-dagger format_version=1 objective=" + std::string(objective_name(initial.objective)) +
                    " best_iteration=" + std::to_string(r.best_iteration) + " reached=" + (r.reached ? "1" : "0") + "\n";
  csv += "iteration,dataset_rows,decisions,cluster_mismatches,pe_mismatches,cluster_rows,pe_rows,gap";
  for (std::size_t i = 0; i < p.rates.size(); ++i) csv += ",ratio_" + std::to_string(i);
  csv += "\n";
  out << "iter  rows      cluster_rows  pe_rows  gap\n";
  for (const auto& it : r.iterations) {
    csv += std::to_string(it.iteration) + "," + std::to_string(it.dataset_rows) + "," + std::to_string(it.decisions) +
           "," + std::to_string(it.cluster_mismatches) + "," + std::to_string(it.pe_mismatches) + "," +
           std::to_string(it.cluster_rows) + "," + std::to_string(it.pe_rows) + "," + format_double(it.gap);
    for (double ratio : it.ratios) csv += "," + format_double(ratio);
    csv += "\n";
    out << std::setw(4) << it.iteration << "  " << std::left << std::setw(9) << it.dataset_rows << " " << std::setw(13)
        << it.cluster_rows << " " << std::setw(8) << it.pe_rows << std::right << " " << pct(it.gap) << "\n";
  }
  out << "best iteration " << r.best_iteration << ", gap vs oracle " << pct(r.best_gap)
      << (r.reached ? "" : " (target not reached)") << "\n";
  write_checked(out_dir(c) / "dagger.csv", csv, out);
  write_checked(out_dir(c) / "model_dagger.json", dump_policy(r.policy), out);
  write_checked(out_dir(c) / "dataset_dagger.csv", dump_dataset(r.dataset), out);
  return 0;
}

// ---- simulate --------------------------------------------------------------------------

struct SimulateArgs {
  std::string scheduler = "oracle";  // oracle | policy | flat | exact
  std::string model;
  std::string name;  // report file stem
  bool tasks = false;
  bool wallclock = true;
  double time_limit = 60.0;
  std::uint64_t node_limit = 0;
};

int cmd_exact(const Config& c, const SimulateArgs& a, std::ostream& out) {
  const ArchitectureGraph arch = resolve_platform(c.platform);
  const auto apps = resolve_apps(c);
  ExactOptions opts;
  opts.time_limit_s = a.time_limit;
  opts.node_limit = a.node_limit;
  std::string csv = "# ilsched-exact format_version=1 platform=" + arch.name + "\n";
  csv += "app,tasks,exact_makespan_us,etf_makespan_us,optimal,nodes\n";
  out << "app            tasks  exact_us     etf_us       optimal\n";
  for (const auto& app : apps) {
    const ExactResult r = exact_schedule(app, arch, opts);
    const double etf = etf_single_frame_makespan(app, arch);
    csv += app.name + "," + std::to_string(app.size()) + "," + format_double(r.makespan_us) + "," + format_double(etf) +
           "," + (r.optimal ? "1" : "0") + "," + std::to_string(r.nodes) + "\n";
    out << std::left << std::setw(14) << app.name << std::right << std::setw(6) << app.size() << "  " << std::setw(11)
        << fixed(r.makespan_us, 2) << "  " << std::setw(11) << fixed(etf, 2) << "  " << (r.optimal ? "yes" : "no") << "\n";
  }
  write_checked(out_dir(c) / ((a.name.empty() ? "exact" : a.name) + ".csv"), csv, out);
  return 0;
}

int cmd_simulate(const Config& c, const SimulateArgs& a, std::ostream& out) {
  if (a.scheduler == "exact") return cmd_exact(c, a, out);
  const Pipeline p = resolve_pipeline(c, c.platform);
  print_rates(p, out);

  SchedulerFactory factory;
  std::string stem = a.name;
  std::shared_ptr<HierarchicalPolicy> policy;
  std::shared_ptr<FlatPolicy> flat;
  if (a.scheduler == "oracle") {
    const Objective obj = parse_objective(c.objective);
    factory = [obj] { return std::make_unique<EtfScheduler>(obj); };
    if (stem.empty()) stem = "oracle_" + std::string(objective_name(obj));
  } else if (a.scheduler == "policy") {
    policy = std::make_shared<HierarchicalPolicy>(load_policy(textio::read_file(a.model)));
    factory = [policy, &p] { return std::make_unique<IlScheduler>(*policy, p.arch); };
    if (stem.empty()) stem = "policy";
  } else if (a.scheduler == "flat") {
    flat = std::make_shared<FlatPolicy>(load_flat_policy(textio::read_file(a.model)));
    factory = [flat, &p] { return std::make_unique<FlatScheduler>(*flat, p.arch); };
    if (stem.empty()) stem = "flat";
  } else {
    throw UnknownConfig("unknown scheduler '" + a.scheduler + "' (oracle, policy, flat, exact)");
  }
  SimOptions sim = c.sim();
  sim.record_tasks = a.tasks;
  std::vector<SimJob> jobs;
  for (std::size_t i = 0; i < p.traces.size(); ++i) jobs.push_back({&p.arch, &p.traces[i], factory, sim, p.rates[i]});
  const auto reports = run_jobs(p.apps, jobs, c.mode());

  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const std::string base = stem + "_r" + std::to_string(i);
    write_checked(out_dir(c) / (base + ".csv"), report_csv(r), out);
    write_checked(out_dir(c) / (base + ".json"), report_json(r, a.wallclock), out);
    if (a.tasks) write_checked(out_dir(c) / (base + "_tasks.csv"), tasks_csv(r), out);
  }
  out << "rate         frames  avg_latency_us  avg_energy_uj  fallbacks\n";
  for (const auto& r : reports) {
    out << std::left << std::setw(12) << fixed(r.injection_rate, 3) << std::right << std::setw(7) << r.frames.size()
        << std::setw(16) << fixed(r.avg_latency_us(), 2) << std::setw(15) << fixed(r.avg_energy_uj(), 2)
        << std::setw(11) << r.fallbacks << "\n";
  }
  return 0;
}

// ---- compare ---------------------------------------------------------------------------

int cmd_compare(const Config& c, const std::vector<std::string>& a_files, const std::vector<std::string>& b_files,
                const std::string& name, std::ostream& out) {
  if (a_files.size() != b_files.size()) throw TraceMismatch("--a and --b need the same number of reports");
  if (a_files.empty()) throw ValidationError("nothing to compare");
  std::string csv = "# ilsched-compare format_version=1\n";
  csv += "pair,injection_rate,frames,slowdown,aggregate_slowdown,avg_latency_a_us,avg_latency_b_us\n";
  out << "pair  rate        slowdown  aggregate\n";
  double sum = 0.0;
  double agg_sum = 0.0;
  for (std::size_t i = 0; i < a_files.size(); ++i) {
    const SimReport a = load_report_csv(textio::read_file(a_files[i]));
    const SimReport b = load_report_csv(textio::read_file(b_files[i]));
    const double s = slowdown(a, b);
    const double g = aggregate_slowdown(a, b);
    sum += s;
    agg_sum += g;
    csv += std::to_string(i) + "," + format_double(a.injection_rate) + "," + std::to_string(a.frames.size()) + "," +
           format_double(s) + "," + format_double(g) + "," + format_double(a.avg_latency_us()) + "," +
           format_double(b.avg_latency_us()) + "\n";
    out << std::setw(4) << i << "  " << std::left << std::setw(10) << fixed(a.injection_rate, 3) << std::right << "  "
        << fixed(s, 4) << "    " << fixed(g, 4) << "\n";
  }
  const double n = static_cast<double>(a_files.size());
  csv += "mean,,," + format_double(sum / n) + "," + format_double(agg_sum / n) + ",,\n";
  out << "mean              " << fixed(sum / n, 4) << "    " << fixed(agg_sum / n, 4) << "\n";
  write_checked(out_dir(c) / (name + ".csv"), csv, out);
  return 0;
}

// ---- loo ------------------------------------------------------------------------------

int cmd_loo(const Config& c, std::vector<std::string> apps, int max_iters, double target, std::ostream& out) {
  const Pipeline p = resolve_pipeline(c, c.platform);
  print_rates(p, out);
  if (apps.empty()) {
    for (const auto& g : p.apps) apps.push_back(g.name);
  }
  PipelineConfig pc;
  pc.objective = parse_objective(c.objective);
  pc.dagger.max_iters = max_iters;
  pc.dagger.target_pct = target;
  pc.dagger.params = default_params(pc.objective);
  pc.dagger.sim = c.sim();
  pc.dagger.mode = c.mode();
  std::string csv = "# ilsched-loo format_version=1 objective=" + std::string(objective_name(pc.objective)) + "\n";
  csv += "app,before,after,iterations,reached\n";
  out << "app            before   after    iterations\n";
  for (const auto& app : apps) {
    const LooResult r = leave_one_out(app, p, pc);
    csv += r.app + "," + format_double(r.before) + "," + format_double(r.after) + "," + std::to_string(r.iterations) +
           "," + (r.reached ? "1" : "0") + "\n";
    out << std::left << std::setw(14) << r.app << std::right << " " << fixed(r.before, 4) << "   " << fixed(r.after, 4)
        << "   " << r.iterations << "\n";
  }
  write_checked(out_dir(c) / "loo.csv", csv, out);
  return 0;
}

// ---- sweep ----------------------------------------------------------------------------

struct SweepArgs {
  std::vector<std::string> platforms{"G1"};
  std::vector<double> noise_levels{0.0};
  std::string model;
  std::string flat_model;
};

int cmd_sweep(const Config& c, const SweepArgs& s, std::ostream& out) {
  if (s.platforms.empty() || s.noise_levels.empty()) throw ValidationError("sweep lists must be non-empty");
  const Objective obj = parse_objective(c.objective);
  std::shared_ptr<HierarchicalPolicy> policy;
  std::shared_ptr<FlatPolicy> flat;
  if (!s.model.empty()) policy = std::make_shared<HierarchicalPolicy>(load_policy(textio::read_file(s.model)));
  if (!s.flat_model.empty()) flat = std::make_shared<FlatPolicy>(load_flat_policy(textio::read_file(s.flat_model)));

  std::vector<Pipeline> pipes;
  for (const auto& name : s.platforms) pipes.push_back(resolve_pipeline(c, name));

  struct Key {
    std::size_t platform, rate, noise;
    std::string scheduler;
  };
  std::vector<SimJob> jobs;
  std::vector<Key> keys;
  for (std::size_t pi = 0; pi < pipes.size(); ++pi) {
    const Pipeline& p = pipes[pi];
    print_rates(p, out);
    for (std::size_t ri = 0; ri < p.traces.size(); ++ri) {
      for (std::size_t ni = 0; ni < s.noise_levels.size(); ++ni) {
        SimOptions sim = c.sim();
        sim.noise_pct = s.noise_levels[ni];
        sim.record_tasks = false;
        jobs.push_back({&p.arch, &p.traces[ri], [obj] { return std::make_unique<EtfScheduler>(obj); }, sim, p.rates[ri]});
        keys.push_back({pi, ri, ni, "oracle"});
        if (policy) {
          jobs.push_back({&p.arch, &p.traces[ri], [policy, &p] { return std::make_unique<IlScheduler>(*policy, p.arch); },
                          sim, p.rates[ri]});
          keys.push_back({pi, ri, ni, "policy"});
        }
        if (flat) {
          jobs.push_back({&p.arch, &p.traces[ri], [flat, &p] { return std::make_unique<FlatScheduler>(*flat, p.arch); },
                          sim, p.rates[ri]});
          keys.push_back({pi, ri, ni, "flat"});
        }
      }
    }
  }
  const auto reports = run_jobs(pipes.front().apps, jobs, c.mode());

  // Per-job files first, then the serial aggregation.
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& k = keys[j];
    const std::string file = pipes[k.platform].arch.name + "_" + k.scheduler + "_r" + std::to_string(k.rate) + "_n" +
                             std::to_string(k.noise) + ".csv";
    textio::write_file(out_dir(c) / "sweep" / file, report_csv(reports[j]));
  }
  std::string csv = "# ilsched-sweep format_version=1 objective=" + std::string(objective_name(obj)) + "\n";
  csv += "platform,scheduler,rate_index,injection_rate,noise_pct,frames,avg_latency_us,avg_energy_uj,edp,ed2p,fallbacks,"
         "slowdown_vs_oracle,objective_ratio\n";
  out << "platform  scheduler  rate      noise  slowdown  objective_ratio\n";
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& k = keys[j];
    const SimReport& r = reports[j];
    std::size_t oracle = j;
    while (keys[oracle].scheduler != "oracle") --oracle;  // the oracle job of the same cell precedes it
    const double sd = slowdown(r, reports[oracle]);
    const double ratio = objective_metric(r, obj) / objective_metric(reports[oracle], obj);
    csv += pipes[k.platform].arch.name + "," + k.scheduler + "," + std::to_string(k.rate) + "," +
           format_double(r.injection_rate) + "," + format_double(r.noise_pct) + "," + std::to_string(r.frames.size()) +
           "," + format_double(r.avg_latency_us()) + "," + format_double(r.avg_energy_uj()) + "," +
           format_double(r.edp()) + "," + format_double(r.ed2p()) + "," + std::to_string(r.fallbacks) + "," +
           format_double(sd) + "," + format_double(ratio) + "\n";
    out << std::left << std::setw(10) << pipes[k.platform].arch.name << std::setw(11) << k.scheduler << std::setw(10)
        << fixed(r.injection_rate, 3) << std::setw(7) << fixed(r.noise_pct, 2) << std::right << fixed(sd, 4) << "    "
        << fixed(ratio, 4) << "\n";
  }
  write_checked(out_dir(c) / "sweep.csv", csv, out);
  return 0;
}

// ---- bench-latency -------------------------------------------------------------------

int cmd_bench_latency(const Config& c, const std::string& model_file, int iterations, std::vector<std::size_t> sizes,
                      std::ostream& out) {
  const std::string doc = textio::read_file(model_file);
  const HierarchicalPolicy policy = load_policy(doc);
  const Pipeline p = resolve_pipeline(c, c.platform);
  const auto states = capture_states(p.arch, p.apps, burst_trace(p.mix, p.apps), sizes);
  const auto lat = measure_decision_latency(policy, p.arch, states, iterations);
  const double kb = static_cast<double>(doc.size()) / 1024.0;

  std::string csv = "# ilsched-latency format_version=1 model_bytes=" + std::to_string(doc.size()) +
                    " iterations=" + std::to_string(iterations) + "\n";
  csv += "ready_size,etf_mean_ns,etf_median_ns,etf_p99_ns,policy_mean_ns,policy_median_ns,policy_p99_ns\n";
  out << "model " << model_file << ": " << fixed(kb, 1) << " KB, cluster depth " << policy.cluster_tree.depth() << "\n";
  out << "ready  etf_median_ns  policy_median_ns  policy/etf\n";
  for (const auto& d : lat) {
    csv += std::to_string(d.ready_size) + "," + format_double(d.etf.mean_ns) + "," + format_double(d.etf.median_ns) +
           "," + format_double(d.etf.p99_ns) + "," + format_double(d.policy.mean_ns) + "," +
           format_double(d.policy.median_ns) + "," + format_double(d.policy.p99_ns) + "\n";
    out << std::setw(5) << d.ready_size << std::setw(15) << fixed(d.etf.median_ns, 0) << std::setw(18)
        << fixed(d.policy.median_ns, 0) << std::setw(12) << fixed(d.policy.median_ns / d.etf.median_ns, 3) << "\n";
  }
  write_checked(out_dir(c) / "latency.csv", csv, out);
  return 0;
}

// ---- gen-profiles --------------------------------------------------------------------

int cmd_gen_profiles(const std::string& data_dir, std::ostream& out) {
  const fs::path root(data_dir);
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& name : builtin_platform_names()) {
    files.emplace_back("platforms/" + name + ".json", dump_platform(builtin_platform(name)));
  }
  for (const auto& app : builtin_suite()) files.emplace_back("apps/" + app.name + ".json", dump_dag(app));
  files.emplace_back("workloads/mix500.json", dump_workload(mixed_workload(1.0, 1)));
  std::string manifest = "# ilsched-manifest format_version=1\nfile,fnv1a\n";
  for (const auto& [rel, contents] : files) {
    write_checked(root / rel, contents, out);
    manifest += rel + "," + textio::hex64(textio::fnv1a(contents)) + "\n";
  }
  write_checked(root / "manifest.csv", manifest, out);
  return 0;
}

void add_config_options(CLI::App* cmd, Config& c, bool workload) {
  cmd->add_option("--out", c.out, "Output directory (default: $ILSCHED_OUT or ./ilsched_out)");
  cmd->add_flag("--serial", c.serial, "Run independent simulations one after another");
  if (!workload) return;
  cmd->add_option("--platform", c.platform, "G1..G5 or a platform JSON file")->capture_default_str();
  cmd->add_option("--workload", c.workload, "Workload JSON file (default: the 500-frame mix)");
  cmd->add_option("--dag", c.dags, "Application DAG JSON files replacing the built-in suite");
  cmd->add_option("--rates", c.rates, "Absolute injection rates, frames/ms (overrides --rate-fractions)");
  cmd->add_option("--rate-fractions", c.fractions, "Injection rates as fractions of the saturation rate")
      ->capture_default_str();
  cmd->add_option("--seed", c.seed, "Trace seed; rate i uses seed+i")->capture_default_str();
  cmd->add_option("--noise", c.noise, "Execution-time noise std as a fraction")->capture_default_str();
  cmd->add_option("--noise-seed", c.noise_seed, "Seed of the execution-time noise")->capture_default_str();
  cmd->add_option("--objective", c.objective, "performance, energy, edp or ed2p")->capture_default_str();
  cmd->add_option("--pred-slots", c.pred_slots, "Predecessor slots K in the feature vector")->capture_default_str();
  cmd->add_flag("--base-schema", c.base_schema, "Omit the per-PE start-offset features");
}

void add_train_options(CLI::App* cmd, TrainArgs& t) {
  cmd->add_option("--cluster-depth", t.cluster_depth, "Cluster tree depth (default 12, 16 for energy objectives)");
  cmd->add_option("--pe-depth", t.pe_depth, "PE tree depth (default as --cluster-depth)");
  cmd->add_option("--min-leaf", t.min_leaf, "Minimum rows per leaf")->capture_default_str();
  cmd->add_flag("--allow-starving", t.allow_starving, "Constant policy for clusters without training rows");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator, oracle and imitation-learning schedulers for streaming DAGs on heterogeneous platforms"};
  app.require_subcommand(1);
  Config c;
  if (const char* env = std::getenv("ILSCHED_OUT"); env && *env) c.out = env;
  if (c.out.empty()) c.out = "ilsched_out";

  std::string dataset_out;
  auto* gen = app.add_subcommand("gen-dataset", "Run the oracle over the rate sweep and write a dataset");
  add_config_options(gen, c, true);
  gen->add_option("--output", dataset_out, "Dataset file (default: <out>/dataset.csv)");

  TrainArgs train;
  auto* tr = app.add_subcommand("train", "Train a hierarchical policy and report held-out accuracy");
  add_config_options(tr, c, false);
  tr->add_option("--dataset", train.dataset, "Dataset CSV")->required();
  tr->add_option("--objective", c.objective, "Objective tag of the model")->capture_default_str();
  tr->add_option("--holdout", train.holdout, "Held-out fraction (0 reports training accuracy)")->capture_default_str();
  tr->add_option("--split-seed", train.split_seed, "Seed of the stratified split")->capture_default_str();
  tr->add_flag("--flat", train.flat, "Also train the flat baseline");
  add_train_options(tr, train);

  DaggerArgs dag;
  auto* dg = app.add_subcommand("dagger", "Refine a policy with hierarchical DAgger");
  add_config_options(dg, c, true);
  dg->add_option("--model", dag.model, "Initial model JSON")->required();
  dg->add_option("--dataset", dag.dataset, "Dataset the model was trained on")->required();
  dg->add_option("--max-iters", dag.max_iters, "Iteration cap")->capture_default_str();
  dg->add_option("--target", dag.target, "Stop at this gap to the oracle (fraction)")->capture_default_str();
  dg->add_flag("--allow-starving", dag.train.allow_starving, "Constant policy for clusters without training rows");

  SimulateArgs sim;
  auto* sm = app.add_subcommand("simulate", "Simulate the rate sweep under one scheduler and write reports");
  add_config_options(sm, c, true);
  sm->add_option("--scheduler", sim.scheduler, "oracle, policy, flat or exact")->capture_default_str();
  sm->add_option("--model", sim.model, "Model JSON for policy/flat");
  sm->add_option("--name", sim.name, "Report file stem");
  sm->add_flag("--tasks", sim.tasks, "Also write per-task CSVs");
  sm->add_flag("!--no-wallclock", sim.wallclock, "Omit wall-clock fields from JSON reports");
  sm->add_option("--time-limit", sim.time_limit, "Exact solver time limit per app, seconds")->capture_default_str();
  sm->add_option("--node-limit", sim.node_limit, "Exact solver node limit (0 = none)")->capture_default_str();

  std::vector<std::string> cmp_a;
  std::vector<std::string> cmp_b;
  std::string cmp_name = "compare";
  auto* cp = app.add_subcommand("compare", "Slowdown of reports A against reports B, pairwise");
  add_config_options(cp, c, false);
  cp->add_option("--a", cmp_a, "Report CSVs under test")->required();
  cp->add_option("--b", cmp_b, "Baseline report CSVs, same order")->required();
  cp->add_option("--name", cmp_name, "Output file stem")->capture_default_str();

  std::vector<std::string> loo_apps;
  int loo_iters = 10;
  double loo_target = 0.02;
  auto* lo = app.add_subcommand("loo", "Leave-one-application-out training and DAgger recovery");
  add_config_options(lo, c, true);
  lo->add_option("--app", loo_apps, "Applications to exclude (default: each application in turn)");
  lo->add_option("--max-iters", loo_iters, "DAgger iteration cap")->capture_default_str();
  lo->add_option("--target", loo_target, "DAgger target gap")->capture_default_str();

  SweepArgs sweep;
  auto* sw = app.add_subcommand("sweep", "Oracle and policies over platforms x rates x noise levels");
  add_config_options(sw, c, true);
  sw->add_option("--platforms", sweep.platforms, "Platforms (names or files)")->capture_default_str();
  sw->add_option("--noise-levels", sweep.noise_levels, "Noise std fractions")->capture_default_str();
  sw->add_option("--model", sweep.model, "Hierarchical model JSON");
  sw->add_option("--flat-model", sweep.flat_model, "Flat model JSON");

  std::string bench_model;
  int bench_iters = 200;
  std::vector<std::size_t> bench_sizes{1, 2, 4, 8, 16, 32, 64};
  auto* bl = app.add_subcommand("bench-latency", "Per-decision latency of the policy and of ETF by ready-set size");
  add_config_options(bl, c, true);
  bl->add_option("--model", bench_model, "Hierarchical model JSON")->required();
  bl->add_option("--iterations", bench_iters, "Samples per state")->capture_default_str();
  bl->add_option("--sizes", bench_sizes, "Ready-set sizes")->capture_default_str();

  std::string data_dir = ILSCHED_DATA_DIR;
  auto* gp = app.add_subcommand("gen-profiles", "Write the built-in platforms, applications and workload as files");
  gp->add_option("--data-dir", data_dir, "Destination directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*gen) return cmd_gen_dataset(c, dataset_out, out);
    if (*tr) return cmd_train(c, train, out);
    if (*dg) return cmd_dagger(c, dag, out);
    if (*sm) return cmd_simulate(c, sim, out);
    if (*cp) return cmd_compare(c, cmp_a, cmp_b, cmp_name, out);
    if (*lo) return cmd_loo(c, loo_apps, loo_iters, loo_target, out);
    if (*sw) return cmd_sweep(c, sweep, out);
    if (*bl) return cmd_bench_latency(c, bench_model, bench_iters, bench_sizes, out);
    if (*gp) return cmd_gen_profiles(data_dir, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace ilsched
