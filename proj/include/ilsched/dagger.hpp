#pragma once

#include <span>
#include <vector>

#include "ilsched/dataset.hpp"
#include "ilsched/policy.hpp"
#include "ilsched/simengine.hpp"

namespace ilsched {

struct DaggerOptions {
  int max_iters = 10;
  double target_pct = 0.02;  // stop once the gap is at or below this fraction
  PolicyParams params;
  SimOptions sim;
  ExecMode mode = ExecMode::parallel;  // traces of one pass run concurrently
};

struct DaggerIteration {
  int iteration = 0;
  std::size_t dataset_rows = 0;  // rows the acting policy was trained on
  std::size_t decisions = 0;
  std::size_t cluster_mismatches = 0;
  std::size_t pe_mismatches = 0;
  std::size_t cluster_rows = 0;  // rows aggregated this pass
  std::size_t pe_rows = 0;
  std::vector<double> ratios;    // objective metric, learner / oracle, per trace
  double gap = 0.0;              // mean of |ratio - 1|
};

struct DaggerResult {
  HierarchicalPolicy policy;  // best iteration's policy
  int best_iteration = 0;
  double best_gap = 0.0;
  bool reached = false;       // false: target unmet at max_iters
  std::vector<DaggerIteration> iterations;
  Dataset dataset;            // everything aggregated
};

// Hierarchical DAgger. Each pass simulates every trace with the learner
// acting while the oracle labels each visited state; a disagreement adds a
// cluster row and/or a PE row, then the policy is retrained from scratch on
// the union. The oracle objective is the policy's. `oracle_reports` (one per
// trace, same SimOptions) may be passed to skip recomputing the baselines.
DaggerResult dagger_run(const HierarchicalPolicy& initial, const Dataset& initial_data, const ArchitectureGraph& arch,
                        std::span<const ApplicationGraph> apps, std::span<const FrameArrivalTrace> traces,
                        const DaggerOptions& options, const std::vector<SimReport>* oracle_reports = nullptr);

// Scheduler used by one DAgger pass; exposed for tests.
class DaggerScheduler : public Scheduler {
 public:
  DaggerScheduler(const HierarchicalPolicy& policy, const ArchitectureGraph& arch, std::string tag);
  std::string name() const override { return "il-dagger"; }
  PeId decide(const SimState& state, const TaskInstance& task) override;
  std::size_t fallbacks() const override { return fallbacks_; }

  const std::vector<DatasetRow>& rows() const { return rows_; }
  std::size_t cluster_mismatches() const { return cluster_mismatches_; }
  std::size_t pe_mismatches() const { return pe_mismatches_; }

 private:
  const HierarchicalPolicy* policy_;
  FeatureExtractor extractor_;
  std::string tag_;
  std::vector<DatasetRow> rows_;
  std::size_t fallbacks_ = 0;
  std::size_t cluster_mismatches_ = 0;
  std::size_t pe_mismatches_ = 0;
};

}  // namespace ilsched
