#include "ilsched/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <optional>
#include <cmath>

#include "ilsched/error.hpp"

namespace ilsched {

namespace {

std::vector<std::string> app_names(std::span<const ApplicationGraph> apps) {
  std::vector<std::string> names;
  for (const auto& a : apps) names.push_back(a.name);
  return names;
}

}  // namespace

FrameArrivalTrace burst_trace(const WorkloadSpec& mix, std::span<const ApplicationGraph> apps) {
  FrameArrivalTrace burst = generate_trace(mix, app_names(apps));
  for (auto& a : burst.arrivals) a.time_us = 0.0;
  return burst;
}

double saturation_rate(const ArchitectureGraph& arch, std::span<const ApplicationGraph> apps, const WorkloadSpec& mix) {
  const FrameArrivalTrace burst = burst_trace(mix, apps);
  EtfScheduler etf;
  SimOptions opts;
  opts.measure_decisions = false;
  SimReport r = run_simulation(arch, apps, burst, etf, opts);
  double makespan = 0.0;
  for (const auto& f : r.frames) makespan = std::max(makespan, f.completion_us);
  return static_cast<double>(r.frames.size()) / (makespan / 1000.0);
}

std::vector<FrameArrivalTrace> make_traces(const WorkloadSpec& base, std::span<const ApplicationGraph> apps,
                                           std::span<const double> rates) {
  const auto names = app_names(apps);
  std::vector<FrameArrivalTrace> out;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    WorkloadSpec s = base;
    s.injection_rate = rates[i];
    s.seed = base.seed + i;
    out.push_back(generate_trace(s, names));
  }
  return out;
}

OracleRun oracle_dataset(const ArchitectureGraph& arch, std::span<const ApplicationGraph> apps,
                         std::span<const FrameArrivalTrace> traces, Objective objective, const FeatureSchema& schema,
                         const SimOptions& sim, ExecMode mode) {
  OracleRun run;
  run.dataset.schema = schema;
  run.reports.resize(traces.size());
  std::vector<std::vector<DatasetRow>> rows(traces.size());
  const FeatureExtractor extractor(schema, arch);
  SimOptions opts = sim;
  opts.measure_decisions = false;
  const auto n = static_cast<std::int64_t>(traces.size());
#pragma omp parallel for schedule(dynamic) if (mode == ExecMode::parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto ti = static_cast<std::size_t>(i);
    EtfScheduler etf(objective);
    auto& out = rows[ti];
    etf.set_recorder([&](const SimState& state, std::size_t index, PeId pe) {
      const int c = extractor.schema_cluster(arch.pe(pe).cluster_id);
      if (c < 0) return;
      out.push_back({extractor.extract(state, index), c, arch.index_in_cluster(pe), RowRole::both,
                     state.ready()[index].app_id, "initial"});
    });
    run.reports[ti] = run_simulation(arch, apps, traces[ti], etf, opts);
  }
  for (auto& r : rows) {
    std::move(r.begin(), r.end(), std::back_inserter(run.dataset.rows));
  }
  return run;
}

std::vector<SimReport> run_jobs(std::span<const ApplicationGraph> apps, const std::vector<SimJob>& jobs, ExecMode mode) {
  std::vector<SimReport> out(jobs.size());
  const auto n = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic) if (mode == ExecMode::parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& job = jobs[static_cast<std::size_t>(i)];
    auto sched = job.make_scheduler();
    SimReport r = run_simulation(*job.arch, apps, *job.trace, *sched, job.options);
    r.injection_rate = job.injection_rate;
    out[static_cast<std::size_t>(i)] = std::move(r);
  }
  return out;
}

double mean_slowdown(const std::vector<SimReport>& a, const std::vector<SimReport>& b) {
  if (a.size() != b.size() || a.empty()) throw TraceMismatch("report lists differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += slowdown(a[i], b[i]);
  return sum / static_cast<double>(a.size());
}

double mean_abs_gap(const std::vector<SimReport>& a, const std::vector<SimReport>& b, Objective objective) {
  if (a.size() != b.size() || a.empty()) throw TraceMismatch("report lists differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += std::abs(objective_metric(a[i], objective) / objective_metric(b[i], objective) - 1.0);
  }
  return sum / static_cast<double>(a.size());
}

Pipeline build_pipeline(ArchitectureGraph arch, std::vector<ApplicationGraph> apps, WorkloadSpec mix,
                        const std::vector<double>& rate_fractions, const std::vector<double>& absolute_rates,
                        int pred_slots, bool pe_local) {
  Pipeline p;
  p.arch = std::move(arch);
  p.apps = std::move(apps);
  p.mix = std::move(mix);
  if (p.mix.total_frames() <= 0) throw EmptyDataset("workload has no frames");
  p.saturation = saturation_rate(p.arch, p.apps, p.mix);
  if (!absolute_rates.empty()) {
    p.rates = absolute_rates;
  } else {
    for (double f : rate_fractions) p.rates.push_back(f * p.saturation);
  }
  if (p.rates.empty()) throw ValidationError("no injection rates configured");
  for (double r : p.rates) {
    if (!(r > 0.0)) throw ValidationError("injection rates must be positive");
  }
  p.traces = make_traces(p.mix, p.apps, p.rates);
  SchemaOptions so;
  so.pe_local = pe_local;
  p.schema = feature_schema(p.arch, pred_slots, so);
  return p;
}

Pipeline make_pipeline(const PipelineConfig& config) {
  return build_pipeline(builtin_platform(config.platform), builtin_suite(), mixed_workload(1.0, config.seed),
                        config.rate_fractions, {}, config.pred_slots, config.pe_local);
}

std::vector<SimState> capture_states(const ArchitectureGraph& arch, std::span<const ApplicationGraph> apps,
                                     const FrameArrivalTrace& trace, std::span<const std::size_t> ready_sizes) {
  std::vector<std::optional<SimState>> found(ready_sizes.size());
  EtfScheduler etf;
  etf.set_recorder([&](const SimState& state, std::size_t, PeId) {
    for (std::size_t i = 0; i < ready_sizes.size(); ++i) {
      if (!found[i] && state.ready().size() == ready_sizes[i]) found[i].emplace(state);
    }
  });
  SimOptions opts;
  opts.measure_decisions = false;
  opts.record_tasks = false;
  run_simulation(arch, apps, trace, etf, opts);
  std::vector<SimState> out;
  for (auto& f : found) {
    if (f) out.push_back(std::move(*f));
  }
  return out;
}

std::vector<DecisionLatency> measure_decision_latency(const HierarchicalPolicy& policy, const ArchitectureGraph& arch,
                                                      const std::vector<SimState>& states, int iterations) {
  using clock = std::chrono::steady_clock;
  const FeatureExtractor extractor(policy.schema, arch);
  std::vector<DecisionLatency> out;
  volatile PeId sink = 0;
  for (const auto& s : states) {
    DecisionLatency d;
    d.ready_size = s.ready().size();
    std::vector<double> etf_ns;
    std::vector<double> il_ns;
    for (int i = 0; i < iterations; ++i) {
      auto t0 = clock::now();
      sink = etf_decide(s, Objective::performance).pe;
      auto t1 = clock::now();
      sink = policy_decide(policy, extractor, s, 0).pe;
      auto t2 = clock::now();
      etf_ns.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
      il_ns.push_back(std::chrono::duration<double, std::nano>(t2 - t1).count());
    }
    d.etf = latency_stats(std::move(etf_ns));
    d.policy = latency_stats(std::move(il_ns));
    out.push_back(d);
  }
  (void)sink;
  return out;
}

LooResult leave_one_out(const std::string& app, const Pipeline& p, const PipelineConfig& config) {
  const bool known = std::any_of(p.apps.begin(), p.apps.end(), [&](const ApplicationGraph& g) { return g.name == app; });
  if (!known) throw UnknownApp("'" + app + "' is not one of the pipeline's applications");

  std::vector<FrameArrivalTrace> reduced;
  for (const auto& t : p.traces) {
    FrameArrivalTrace r;
    for (const auto& a : t.arrivals) {
      if (a.app != app) r.arrivals.push_back(a);
    }
    reduced.push_back(std::move(r));
  }
  OracleRun train = oracle_dataset(p.arch, p.apps, reduced, config.objective, p.schema, config.dagger.sim, config.dagger.mode);
  PolicyParams params = config.dagger.params;
  params.allow_starving = true;
  params.mode = config.dagger.mode;
  HierarchicalPolicy policy = train_hierarchical(train.dataset, config.objective, params);

  OracleRun full = oracle_dataset(p.arch, p.apps, p.traces, config.objective, p.schema, config.dagger.sim, config.dagger.mode);
  std::vector<SimJob> jobs;
  for (std::size_t i = 0; i < p.traces.size(); ++i) {
    jobs.push_back({&p.arch, &p.traces[i], [&] { return std::make_unique<IlScheduler>(policy, p.arch); },
                    config.dagger.sim, p.rates[i]});
  }
  auto before = run_jobs(p.apps, jobs, config.dagger.mode);

  DaggerOptions dopts = config.dagger;
  dopts.params = params;
  DaggerResult d = dagger_run(policy, train.dataset, p.arch, p.apps, p.traces, dopts, &full.reports);
  const HierarchicalPolicy& tuned = d.policy;
  for (auto& j : jobs) j.make_scheduler = [&] { return std::make_unique<IlScheduler>(tuned, p.arch); };
  auto after = run_jobs(p.apps, jobs, config.dagger.mode);

  LooResult r;
  r.app = app;
  r.before = mean_slowdown(before, full.reports);
  r.after = mean_slowdown(after, full.reports);
  r.iterations = static_cast<int>(d.iterations.size());
  r.reached = d.reached;
  return r;
}

}  // namespace ilsched
