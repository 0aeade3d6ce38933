#include "ilsched/dagger.hpp"

#include <cmath>
#include <memory>

#include "ilsched/oracle.hpp"

namespace ilsched {

DaggerScheduler::DaggerScheduler(const HierarchicalPolicy& policy, const ArchitectureGraph& arch, std::string tag)
    : policy_(&policy), extractor_(policy.schema, arch), tag_(std::move(tag)) {}

PeId DaggerScheduler::decide(const SimState& state, const TaskInstance& task) {
  const std::size_t index = ready_index_of(state, task);
  const FeatureVector x = extractor_.extract(state, index);
  const int c = policy_->predict_cluster(x);
  const int j = policy_->predict_pe_index(c, x);

  const PeId expert = etf_best_for_task(state, index, policy_->objective).pe;
  const ArchitectureGraph& arch = extractor_.arch();
  const int c_star = extractor_.schema_cluster(arch.pe(expert).cluster_id);
  const int j_star = arch.index_in_cluster(expert);

  // A platform cluster the schema does not know cannot be labelled.
  if (c_star >= 0) {
    auto add = [&](RowRole role) { rows_.push_back({x, c_star, j_star, role, task.app_id, tag_}); };
    if (c == c_star) {
      if (j != j_star) {
        ++pe_mismatches_;
        add(RowRole::pe_only);
      }
    } else {
      ++cluster_mismatches_;
      add(RowRole::cluster_only);
      if (policy_->predict_pe_index(c_star, x) != j_star) {
        ++pe_mismatches_;
        add(RowRole::pe_only);
      }
    }
  }

  const PolicyDecision d = resolve_prediction(extractor_, state, index, c, j);
  if (d.fallback) ++fallbacks_;
  return d.pe;
}

namespace {

std::vector<SimReport> oracle_baselines(const ArchitectureGraph& arch, std::span<const ApplicationGraph> apps,
                                        std::span<const FrameArrivalTrace> traces, Objective objective,
                                        const SimOptions& sim, ExecMode mode) {
  std::vector<SimReport> out(traces.size());
  const auto n = static_cast<std::int64_t>(traces.size());
#pragma omp parallel for schedule(dynamic) if (mode == ExecMode::parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    EtfScheduler etf(objective);
    out[static_cast<std::size_t>(i)] = run_simulation(arch, apps, traces[static_cast<std::size_t>(i)], etf, sim);
  }
  return out;
}

}  // namespace

DaggerResult dagger_run(const HierarchicalPolicy& initial, const Dataset& initial_data, const ArchitectureGraph& arch,
                        std::span<const ApplicationGraph> apps, std::span<const FrameArrivalTrace> traces,
                        const DaggerOptions& options, const std::vector<SimReport>* oracle_reports) {
  const Objective objective = initial.objective;
  SimOptions sim = options.sim;
  sim.measure_decisions = false;
  sim.record_tasks = false;
  const std::vector<SimReport> computed =
      oracle_reports ? std::vector<SimReport>{} : oracle_baselines(arch, apps, traces, objective, sim, options.mode);
  const auto& baselines = oracle_reports ? *oracle_reports : computed;

  DaggerResult result;
  result.dataset = initial_data;
  HierarchicalPolicy policy = initial;
  bool have_best = false;
  std::size_t best_rows = 0;

  for (int it = 1; it <= options.max_iters; ++it) {
    const std::string tag = "dagger-" + std::to_string(it);
    std::vector<std::unique_ptr<DaggerScheduler>> scheds(traces.size());
    std::vector<SimReport> reports(traces.size());
    const auto n = static_cast<std::int64_t>(traces.size());
#pragma omp parallel for schedule(dynamic) if (options.mode == ExecMode::parallel)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto ti = static_cast<std::size_t>(i);
      scheds[ti] = std::make_unique<DaggerScheduler>(policy, arch, tag);
      reports[ti] = run_simulation(arch, apps, traces[ti], *scheds[ti], sim);
    }

    DaggerIteration rec;
    rec.iteration = it;
    rec.dataset_rows = result.dataset.rows.size();
    double gap_sum = 0.0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const double ratio = objective_metric(reports[i], objective) / objective_metric(baselines[i], objective);
      rec.ratios.push_back(ratio);
      gap_sum += std::abs(ratio - 1.0);
      rec.decisions += reports[i].decisions;
      rec.cluster_mismatches += scheds[i]->cluster_mismatches();
      rec.pe_mismatches += scheds[i]->pe_mismatches();
    }
    rec.gap = traces.empty() ? 0.0 : gap_sum / static_cast<double>(traces.size());

    std::size_t added = 0;
    for (const auto& s : scheds) {
      for (const auto& row : s->rows()) {
        if (row.role == RowRole::cluster_only) ++rec.cluster_rows;
        if (row.role == RowRole::pe_only) ++rec.pe_rows;
        ++added;
      }
    }

    if (!have_best || rec.gap < result.best_gap || (rec.gap == result.best_gap && rec.dataset_rows < best_rows)) {
      have_best = true;
      result.best_gap = rec.gap;
      result.best_iteration = it;
      result.policy = policy;
      best_rows = rec.dataset_rows;
    }
    result.iterations.push_back(rec);
    if (rec.gap <= options.target_pct) {
      result.reached = true;
      break;
    }
    if (added == 0) break;  // the learner already agrees everywhere it goes
    for (const auto& s : scheds) {
      result.dataset.rows.insert(result.dataset.rows.end(), s->rows().begin(), s->rows().end());
    }
    if (it < options.max_iters) {
      PolicyParams params = options.params;
      params.mode = options.mode;
      policy = train_hierarchical(result.dataset, objective, params);
    }
  }
  return result;
}

}  // namespace ilsched
